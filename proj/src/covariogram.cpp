#include "conley/covariogram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "conley/error.hpp"

namespace conley {

void BinSpec::validate() const {
  if (n_bins < 2) throw InvalidInput("covariogram needs at least 2 bins");
  if (!(cutoff > 0.0) || !std::isfinite(cutoff)) throw InvalidInput("covariogram cutoff must be positive");
}

std::size_t Covariogram::total_pairs() const {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

Covariogram empirical_covariogram(std::span<const double> resid, const NeighborList& nl, const BinSpec& bins) {
  bins.validate();
  if (resid.size() != nl.n) throw InvalidInput("residuals and points differ in length");
  if (nl.radius < bins.cutoff) throw InvalidInput("neighbour list radius is smaller than the cutoff");

  const auto nb = static_cast<std::size_t>(bins.n_bins);
  const double width = bins.width();
  std::vector<double> sums(nb, 0.0);
  Covariogram cg;
  cg.cutoff = bins.cutoff;
  cg.counts.assign(nb, 0);
  for (const auto& pr : nl.pairs) {
    if (pr.d > bins.cutoff) continue;
    auto b = static_cast<std::size_t>(pr.d / width);
    if (b >= nb) b = nb - 1;
    sums[b] += resid[pr.i] * resid[pr.j];
    ++cg.counts[b];
  }

  cg.centers.resize(nb);
  cg.chat.resize(nb);
  bool any = false;
  for (std::size_t b = 0; b < nb; ++b) {
    cg.centers[b] = (static_cast<double>(b) + 0.5) * width;
    if (cg.counts[b] > 0) {
      cg.chat[b] = sums[b] / static_cast<double>(cg.counts[b]);
      any = true;
    } else {
      cg.chat[b] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  if (!any) throw InsufficientPairs("no point pairs fall within the covariogram cutoff");

  double ss = 0.0;
  for (double e : resid) ss += e * e;
  cg.c0 = ss / static_cast<double>(resid.size());
  return cg;
}

Covariogram empirical_covariogram(std::span<const double> resid, const PointSet& ps, const BinSpec& bins) {
  bins.validate();
  if (resid.size() != ps.size()) throw InvalidInput("residuals and points differ in length");
  return empirical_covariogram(resid, neighbors_within(ps, bins.cutoff), bins);
}

double max_pairwise_distance(const PointSet& ps) {
  double best = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (std::size_t j = i + 1; j < ps.size(); ++j) best = std::max(best, ps.distance(i, j));
  }
  return best;
}

double hull_diameter(const PointSet& ps) {
  std::vector<std::size_t> idx(ps.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return ps[a].c1 < ps[b].c1 || (ps[a].c1 == ps[b].c1 && ps[a].c2 < ps[b].c2);
  });
  const auto cross = [&](std::size_t o, std::size_t a, std::size_t b) {
    return (ps[a].c1 - ps[o].c1) * (ps[b].c2 - ps[o].c2) - (ps[a].c2 - ps[o].c2) * (ps[b].c1 - ps[o].c1);
  };
  // Andrew's monotone chain.
  std::vector<std::size_t> hull(2 * idx.size());
  std::size_t k = 0;
  for (std::size_t i : idx) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], i) <= 0.0) --k;
    hull[k++] = i;
  }
  for (std::size_t t = idx.size() - 1, lower = k + 1; t-- > 0;) {
    const std::size_t i = idx[t];
    while (k >= lower && cross(hull[k - 2], hull[k - 1], i) <= 0.0) --k;
    hull[k++] = i;
  }
  hull.resize(k > 1 ? k - 1 : k);

  double best = 0.0;
  for (std::size_t a = 0; a < hull.size(); ++a) {
    for (std::size_t b = a + 1; b < hull.size(); ++b) best = std::max(best, ps.distance(hull[a], hull[b]));
  }
  return best;
}

BinSpec default_bins(const PointSet& ps) {
  const double diameter = ps.size() <= kExactDiameterLimit ? max_pairwise_distance(ps) : hull_diameter(ps);
  if (!(diameter > 0.0)) throw InsufficientPairs("all points coincide; no lag distances");
  return BinSpec{2.0 / 3.0 * diameter, kDefaultBins};
}

std::string_view status_name(CrossingStatus s) {
  switch (s) {
    case CrossingStatus::Crossed: return "crossed";
    case CrossingStatus::NoCrossingCapped: return "no_crossing_capped";
    case CrossingStatus::Immediate: return "immediate";
  }
  return "?";
}

BandwidthEstimate select_bandwidth(const Covariogram& cg, double eta) {
  if (!(eta >= 0.0)) throw InvalidInput("covariance tolerance must be non-negative");
  BandwidthEstimate est;
  est.eta = eta;
  bool first = true;
  for (std::size_t b = 0; b < cg.chat.size(); ++b) {
    if (cg.empty(b)) continue;
    if (cg.chat[b] <= eta) {
      est.varsigma_hat = cg.centers[b];
      est.bin_index = static_cast<int>(b);
      est.status = first ? CrossingStatus::Immediate : CrossingStatus::Crossed;
      return est;
    }
    first = false;
  }
  if (first) throw InsufficientPairs("covariogram has no non-empty bins");
  est.varsigma_hat = cg.cutoff;
  est.bin_index = -1;
  est.status = CrossingStatus::NoCrossingCapped;
  return est;
}

BandwidthEstimate select_bandwidth_for_fit(const RegressionFit& fit, const PointSet& ps,
                                           std::optional<BinSpec> bins, double eta) {
  const BinSpec spec = bins ? *bins : default_bins(ps);
  const std::vector<double> resid(fit.resid.data(), fit.resid.data() + fit.resid.size());
  return select_bandwidth(empirical_covariogram(resid, ps, spec), eta);
}

void write_covariogram_csv(std::ostream& os, const Covariogram& cg) {
  const auto old = os.precision(17);
  os << "h,chat,count\n";
  for (std::size_t b = 0; b < cg.centers.size(); ++b) {
    os << cg.centers[b] << ',';
    if (!cg.empty(b)) os << cg.chat[b];
    os << ',' << cg.counts[b] << '\n';
  }
  os.precision(old);
}

}  // namespace conley
