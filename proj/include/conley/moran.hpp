#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "conley/geo.hpp"

namespace conley {

struct DistanceBand {
  double radius = 0.0;
};

struct KNearest {
  int k = 1;
};

using WeightsScheme = std::variant<DistanceBand, KNearest>;

// Sparse W in CSR layout; w_ii = 0 always.
struct WeightsMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::uint32_t> cols;
  std::vector<double> vals;
  WeightsScheme scheme;
  bool row_normalized = false;
  std::vector<std::size_t> isolates;  // rows with no neighbours

  double at(std::size_t i, std::size_t j) const;
  std::size_t nnz() const { return vals.size(); }
  double density() const { return static_cast<double>(nnz()) / (static_cast<double>(n) * static_cast<double>(n)); }
};

// Binary links (band: 0 < d <= radius; kNN: k nearest, ties at the k-th
// distance go to the lower index), optionally row-normalized.
WeightsMatrix build_weights(const PointSet& ps, const WeightsScheme& scheme, bool row_normalize);

std::vector<double> spatial_lag(const WeightsMatrix& w, std::span<const double> x);

struct MoranResult {
  double i = 0.0;
  double expected = 0.0;
  double variance = 0.0;  // normality assumption
  double z = 0.0;
  double p_value = 0.0;  // two-sided
};

MoranResult morans_i(std::span<const double> values, const WeightsMatrix& w);

}  // namespace conley
