#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "conley/geo.hpp"
#include "conley/regress.hpp"

namespace conley {

// Equal-width lag bins covering [0, cutoff]; width 2*delta = cutoff / n_bins.
struct BinSpec {
  double cutoff = 0.0;
  int n_bins = 150;

  double width() const { return cutoff / n_bins; }
  void validate() const;
};

struct Covariogram {
  std::vector<double> centers;
  std::vector<double> chat;  // NaN for empty bins
  std::vector<std::size_t> counts;
  double c0 = 0.0;  // mean squared residual
  double cutoff = 0.0;

  bool empty(std::size_t b) const { return counts[b] == 0; }
  std::size_t total_pairs() const;
};

// Mean of e_i * e_j over pairs i < j per lag bin. A pair at distance d lands
// in bin floor(d / width), with d == cutoff folded into the last bin.
Covariogram empirical_covariogram(std::span<const double> resid, const PointSet& ps, const BinSpec& bins);
// Same, reusing a neighbour list built with radius >= bins.cutoff.
Covariogram empirical_covariogram(std::span<const double> resid, const NeighborList& nl, const BinSpec& bins);

double max_pairwise_distance(const PointSet& ps);
// Diameter of the convex hull of the coordinates (projected plane; lon/lat
// hulls are taken in degree space and measured with the haversine metric).
double hull_diameter(const PointSet& ps);

inline constexpr int kDefaultBins = 150;
inline constexpr std::size_t kExactDiameterLimit = 5000;

// cutoff = 2/3 of the largest inter-point distance, 150 bins.
BinSpec default_bins(const PointSet& ps);

enum class CrossingStatus { Crossed, NoCrossingCapped, Immediate };

std::string_view status_name(CrossingStatus s);

struct BandwidthEstimate {
  double varsigma_hat = 0.0;
  int bin_index = -1;  // -1 when capped at the cutoff
  double eta = 0.0;
  CrossingStatus status = CrossingStatus::Crossed;
};

// First non-empty bin (ascending lag) whose covariance is <= eta; with the
// default eta = 0 this is the first sign crossing. Falls back to the cutoff.
BandwidthEstimate select_bandwidth(const Covariogram& cg, double eta = 0.0);

BandwidthEstimate select_bandwidth_for_fit(const RegressionFit& fit, const PointSet& ps,
                                           std::optional<BinSpec> bins = std::nullopt, double eta = 0.0);

// h, chat, count; empty bins are written with an empty chat cell.
void write_covariogram_csv(std::ostream& os, const Covariogram& cg);

}  // namespace conley
