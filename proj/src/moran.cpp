#include "conley/moran.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "conley/error.hpp"

namespace conley {

double WeightsMatrix::at(std::size_t i, std::size_t j) const {
  for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
    if (cols[k] == j) return vals[k];
  }
  return 0.0;
}

namespace {

std::vector<std::vector<std::uint32_t>> band_links(const PointSet& ps, double radius) {
  std::vector<std::vector<std::uint32_t>> links(ps.size());
  for (const auto& pr : neighbors_within(ps, radius).pairs) {
    if (pr.d <= 0.0) continue;
    links[pr.i].push_back(pr.j);
    links[pr.j].push_back(pr.i);
  }
  for (auto& row : links) std::sort(row.begin(), row.end());
  return links;
}

std::vector<std::vector<std::uint32_t>> knn_links(const PointSet& ps, int k) {
  const std::size_t n = ps.size();
  std::vector<std::vector<std::uint32_t>> links(n);
  std::vector<std::pair<double, std::uint32_t>> cand;
  for (std::size_t i = 0; i < n; ++i) {
    cand.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) cand.emplace_back(ps.distance(i, j), static_cast<std::uint32_t>(j));
    }
    // Pair ordering breaks distance ties by index.
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    for (int t = 0; t < k; ++t) links[i].push_back(cand[static_cast<std::size_t>(t)].second);
    std::sort(links[i].begin(), links[i].end());
  }
  return links;
}

}  // namespace

WeightsMatrix build_weights(const PointSet& ps, const WeightsScheme& scheme, bool row_normalize) {
  std::vector<std::vector<std::uint32_t>> links;
  if (const auto* band = std::get_if<DistanceBand>(&scheme)) {
    if (!(band->radius > 0.0)) throw InvalidInput("distance band radius must be positive");
    links = band_links(ps, band->radius);
  } else {
    const int k = std::get<KNearest>(scheme).k;
    if (k < 1 || static_cast<std::size_t>(k) >= ps.size()) throw InvalidInput("k must satisfy 1 <= k < n");
    links = knn_links(ps, k);
  }

  WeightsMatrix w;
  w.n = ps.size();
  w.scheme = scheme;
  w.row_normalized = row_normalize;
  w.row_ptr.assign(1, 0);
  for (std::size_t i = 0; i < w.n; ++i) {
    const auto& row = links[i];
    if (row.empty()) w.isolates.push_back(i);
    const double v = row_normalize && !row.empty() ? 1.0 / static_cast<double>(row.size()) : 1.0;
    for (auto j : row) {
      w.cols.push_back(j);
      w.vals.push_back(v);
    }
    w.row_ptr.push_back(w.cols.size());
  }
  return w;
}

std::vector<double> spatial_lag(const WeightsMatrix& w, std::span<const double> x) {
  if (x.size() != w.n) throw InvalidInput("vector length does not match weights matrix");
  std::vector<double> out(w.n, 0.0);
  for (std::size_t i = 0; i < w.n; ++i) {
    double s = 0.0;
    for (std::size_t k = w.row_ptr[i]; k < w.row_ptr[i + 1]; ++k) s += w.vals[k] * x[w.cols[k]];
    out[i] = s;
  }
  return out;
}

MoranResult morans_i(std::span<const double> values, const WeightsMatrix& w) {
  const std::size_t n = values.size();
  if (n != w.n) throw InvalidInput("vector length does not match weights matrix");
  if (n < 3) throw InvalidInput("Moran's I needs at least 3 observations");

  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  std::vector<double> z(n);
  double m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = values[i] - mean;
    m2 += z[i] * z[i];
  }
  if (!(m2 > 0.0)) throw UndefinedStatistic("Moran's I is undefined for constant values");

  // Column sums and the symmetric part for S1.
  std::vector<double> col_sum(n, 0.0);
  std::vector<double> row_sum(n, 0.0);
  double s0 = 0.0;
  double cross = 0.0;
  double s1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = w.row_ptr[i]; k < w.row_ptr[i + 1]; ++k) {
      const std::size_t j = w.cols[k];
      const double wij = w.vals[k];
      s0 += wij;
      row_sum[i] += wij;
      col_sum[j] += wij;
      cross += wij * z[i] * z[j];
      const double sym = wij + w.at(j, i);
      s1 += sym * sym;
    }
  }
  if (!(s0 > 0.0)) throw InvalidInput("weights matrix has no positive weights");
  // Entries where w_ij = 0 but w_ji > 0 were skipped above; add them.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = w.row_ptr[i]; k < w.row_ptr[i + 1]; ++k) {
      const std::size_t j = w.cols[k];
      if (w.at(j, i) == 0.0) s1 += w.vals[k] * w.vals[k];
    }
  }
  s1 *= 0.5;
  double s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = row_sum[i] + col_sum[i];
    s2 += t * t;
  }

  const double nd = static_cast<double>(n);
  MoranResult r;
  r.i = nd / s0 * cross / m2;
  r.expected = -1.0 / (nd - 1.0);
  r.variance = (nd * nd * s1 - nd * s2 + 3.0 * s0 * s0) / (s0 * s0 * (nd * nd - 1.0)) - r.expected * r.expected;
  r.z = (r.i - r.expected) / std::sqrt(r.variance);
  r.p_value = std::erfc(std::abs(r.z) / std::sqrt(2.0));
  return r;
}

}  // namespace conley
