#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "conley/csv.hpp"

namespace conley {

// Mean Earth radius (IUGG), km.
inline constexpr double kEarthRadiusKm = 6371.0088;

enum class Crs { ProjectedKm, LonLatDeg };

// (c1, c2) is (x, y) in km for ProjectedKm and (lon, lat) in degrees for LonLatDeg.
struct Point {
  double c1 = 0.0;
  double c2 = 0.0;
};

// Euclidean for ProjectedKm, haversine great-circle for LonLatDeg.
double distance(Point a, Point b, Crs crs);

namespace detail {
double raw_distance(Point a, Point b, Crs crs);
}

class PointSet {
 public:
  PointSet(std::vector<Point> coords, Crs crs);

  std::size_t size() const { return coords_.size(); }
  Crs crs() const { return crs_; }
  const Point& operator[](std::size_t i) const { return coords_[i]; }
  std::span<const Point> coords() const { return coords_; }

  double distance(std::size_t i, std::size_t j) const {
    return detail::raw_distance(coords_[i], coords_[j], crs_);
  }

 private:
  std::vector<Point> coords_;
  Crs crs_;
};

struct NeighborPair {
  std::uint32_t i;
  std::uint32_t j;
  double d;
};

// All pairs i < j with d_ij <= radius, sorted lexicographically by (i, j).
struct NeighborList {
  double radius = 0.0;
  std::size_t n = 0;
  std::vector<NeighborPair> pairs;
};

NeighborList neighbors_within(const PointSet& ps, double radius);

struct BoundingBox {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
};

// Cell-centre lattice over bbox: ceil(width / cell) * ceil(height / cell) points.
// lattice_points may return a single point; make_lattice requires two.
std::vector<Point> lattice_points(double cell_km, const BoundingBox& bbox);
PointSet make_lattice(double cell_km, const BoundingBox& bbox);

// Irregular sample with density rising linearly from west to east
// (4:1 across the box), a stand-in for unevenly spaced areal centroids.
PointSet make_irregular(std::size_t n, const BoundingBox& bbox, std::uint64_t seed);

struct ColumnSpec {
  std::string c1;
  std::string c2;
};

PointSet load_points(const Table& rows, const ColumnSpec& cols, Crs crs);

}  // namespace conley
