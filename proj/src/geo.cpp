#include "conley/geo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "conley/error.hpp"
#include "conley/rng.hpp"

namespace conley {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double haversine_km(Point a, Point b) {
  const double phi1 = a.c2 * kDegToRad;
  const double phi2 = b.c2 * kDegToRad;
  const double dphi = phi2 - phi1;
  const double dlambda = (b.c1 - a.c1) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

void check_point(Point p, Crs crs, std::size_t index) {
  if (!std::isfinite(p.c1) || !std::isfinite(p.c2)) {
    throw InvalidInput("point " + std::to_string(index) + " has a non-finite coordinate");
  }
  if (crs == Crs::LonLatDeg && (p.c1 < -180.0 || p.c1 > 180.0 || p.c2 < -90.0 || p.c2 > 90.0)) {
    throw InvalidInput("point " + std::to_string(index) + " is outside lon [-180,180] / lat [-90,90]");
  }
}

// Embedding in which the metric's balls are contained in axis-aligned cubes:
// the plane itself, or 3-D Cartesian coordinates on the sphere (chord length
// is monotone in great-circle distance).
std::array<double, 3> embed(Point p, Crs crs) {
  if (crs == Crs::ProjectedKm) return {p.c1, p.c2, 0.0};
  const double lon = p.c1 * kDegToRad;
  const double lat = p.c2 * kDegToRad;
  return {kEarthRadiusKm * std::cos(lat) * std::cos(lon),
          kEarthRadiusKm * std::cos(lat) * std::sin(lon), kEarthRadiusKm * std::sin(lat)};
}

struct CellHash {
  std::size_t operator()(const std::array<std::int64_t, 3>& c) const {
    std::uint64_t h = 1469598103934665603ull;
    for (auto v : c) {
      h ^= static_cast<std::uint64_t>(v) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

namespace detail {
double raw_distance(Point a, Point b, Crs crs) {
  if (crs == Crs::ProjectedKm) {
    const double dx = a.c1 - b.c1;
    const double dy = a.c2 - b.c2;
    return std::sqrt(dx * dx + dy * dy);
  }
  return haversine_km(a, b);
}
}  // namespace detail

double distance(Point a, Point b, Crs crs) {
  check_point(a, crs, 0);
  check_point(b, crs, 1);
  return detail::raw_distance(a, b, crs);
}

PointSet::PointSet(std::vector<Point> coords, Crs crs) : coords_(std::move(coords)), crs_(crs) {
  if (coords_.size() < 2) throw InvalidInput("a point set needs at least 2 points");
  for (std::size_t i = 0; i < coords_.size(); ++i) check_point(coords_[i], crs_, i);
}

NeighborList neighbors_within(const PointSet& ps, double radius) {
  if (!(radius >= 0.0) || std::isinf(radius)) {
    throw InvalidInput("neighbor radius must be finite and non-negative");
  }
  const std::size_t n = ps.size();
  NeighborList out;
  out.radius = radius;
  out.n = n;

  std::vector<std::array<double, 3>> pos(n);
  std::array<double, 3> lo{HUGE_VAL, HUGE_VAL, HUGE_VAL};
  std::array<double, 3> hi{-HUGE_VAL, -HUGE_VAL, -HUGE_VAL};
  for (std::size_t i = 0; i < n; ++i) {
    pos[i] = embed(ps[i], ps.crs());
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], pos[i][a]);
      hi[a] = std::max(hi[a], pos[i][a]);
    }
  }
  double reach = radius;
  if (ps.crs() == Crs::LonLatDeg) {
    reach = 2.0 * kEarthRadiusKm * std::sin(std::min(radius / (2.0 * kEarthRadiusKm), std::numbers::pi / 2));
  }
  const double extent = std::max({hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2], 1.0});
  const double cell = std::max(reach * (1.0 + 1e-9), extent * 1e-6);

  std::unordered_map<std::array<std::int64_t, 3>, std::vector<std::uint32_t>, CellHash> grid;
  std::vector<std::array<std::int64_t, 3>> key(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < 3; ++a) {
      key[i][a] = static_cast<std::int64_t>(std::floor((pos[i][a] - lo[a]) / cell));
    }
    grid[key[i]].push_back(static_cast<std::uint32_t>(i));
  }

  const int zspan = ps.crs() == Crs::ProjectedKm ? 0 : 1;
  std::vector<NeighborPair> row;
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -zspan; dz <= zspan; ++dz) {
          auto it = grid.find({key[i][0] + dx, key[i][1] + dy, key[i][2] + dz});
          if (it == grid.end()) continue;
          for (std::uint32_t j : it->second) {
            if (j <= i) continue;
            const double d = ps.distance(i, j);
            if (d <= radius) row.push_back({static_cast<std::uint32_t>(i), j, d});
          }
        }
      }
    }
    std::sort(row.begin(), row.end(), [](const NeighborPair& a, const NeighborPair& b) { return a.j < b.j; });
    out.pairs.insert(out.pairs.end(), row.begin(), row.end());
  }
  return out;
}

std::vector<Point> lattice_points(double cell_km, const BoundingBox& bbox) {
  if (!(cell_km > 0.0) || !std::isfinite(cell_km)) throw InvalidInput("lattice cell size must be positive");
  if (!(bbox.width() > 0.0) || !(bbox.height() > 0.0) || !std::isfinite(bbox.width()) ||
      !std::isfinite(bbox.height())) {
    throw InvalidInput("lattice bounding box is degenerate");
  }
  // Tolerate widths that are an exact multiple of the cell up to rounding.
  const auto cells = [cell_km](double extent) {
    return static_cast<std::size_t>(std::max(1.0, std::ceil(extent / cell_km * (1.0 - 1e-12))));
  };
  const std::size_t nx = cells(bbox.width());
  const std::size_t ny = cells(bbox.height());
  std::vector<Point> pts;
  pts.reserve(nx * ny);
  for (std::size_t b = 0; b < ny; ++b) {
    for (std::size_t a = 0; a < nx; ++a) {
      pts.push_back({bbox.xmin + (static_cast<double>(a) + 0.5) * cell_km,
                     bbox.ymin + (static_cast<double>(b) + 0.5) * cell_km});
    }
  }
  return pts;
}

PointSet make_lattice(double cell_km, const BoundingBox& bbox) {
  return PointSet(lattice_points(cell_km, bbox), Crs::ProjectedKm);
}

PointSet make_irregular(std::size_t n, const BoundingBox& bbox, std::uint64_t seed) {
  if (n < 2) throw InvalidInput("irregular sample needs at least 2 points");
  if (!(bbox.width() > 0.0) || !(bbox.height() > 0.0)) throw InvalidInput("bounding box is degenerate");
  StreamRng rng(seed, 0x1a2b3c4dULL);
  std::vector<Point> pts;
  pts.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    // Inverse CDF of the density 1 + 3t on [0, 1].
    const double t = (-1.0 + std::sqrt(1.0 + 15.0 * rng.uniform())) / 3.0;
    const double v = rng.uniform();
    pts.push_back({bbox.xmin + t * bbox.width(), bbox.ymin + v * bbox.height()});
  }
  return PointSet(std::move(pts), Crs::ProjectedKm);
}

PointSet load_points(const Table& rows, const ColumnSpec& cols, Crs crs) {
  if (rows.rows.empty()) throw InvalidInput("no data rows");
  const auto c1 = rows.numeric_column(cols.c1);
  const auto c2 = rows.numeric_column(cols.c2);
  std::vector<Point> pts(c1.size());
  for (std::size_t r = 0; r < c1.size(); ++r) {
    if (crs == Crs::LonLatDeg) {
      if (c1[r] < -180.0 || c1[r] > 180.0) {
        throw ParseError("longitude " + std::to_string(c1[r]) + " outside [-180, 180]", r + 1);
      }
      if (c2[r] < -90.0 || c2[r] > 90.0) {
        throw ParseError("latitude " + std::to_string(c2[r]) + " outside [-90, 90]", r + 1);
      }
    }
    pts[r] = {c1[r], c2[r]};
  }
  return PointSet(std::move(pts), crs);
}

}  // namespace conley
