#include "conley/shac.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "conley/error.hpp"
#include "meat.hpp"

namespace conley {

namespace {

constexpr std::size_t kBlockPairs = 4096;

}  // namespace

std::string shac_label(const ShacSpec& spec) {
  std::ostringstream os;
  os << "shac(" << kernel_name(spec.kernel) << "," << spec.bandwidth << ")";
  return os.str();
}

Eigen::MatrixXd shac_meat(const Eigen::MatrixXd& x, const Eigen::VectorXd& resid,
                          const NeighborList& nl, const ShacSpec& spec) {
  const auto n = x.rows();
  const auto p = x.cols();
  if (resid.size() != n || static_cast<std::size_t>(n) != nl.n) {
    throw InvalidInput("residuals, design and neighbour list differ in length");
  }
  if (!(spec.bandwidth >= 0.0) || !std::isfinite(spec.bandwidth)) {
    throw InvalidInput("bandwidth must be finite and non-negative");
  }
  if (spec.bandwidth > nl.radius) {
    throw InvalidInput("neighbour list radius is smaller than the bandwidth");
  }

  const Eigen::MatrixXd u = x.array().colwise() * resid.array();
  const auto upper = detail::upper_entries(p);
  const std::size_t m = upper.size();

  detail::CompensatedSums total(m);
  detail::add_diagonal_terms(u, upper, total);

  if (spec.bandwidth > 0.0) {
    detail::CompensatedSums block(m);
    std::size_t in_block = 0;
    for (const auto& pr : nl.pairs) {
      if (pr.d > spec.bandwidth) continue;
      const double w = kernel_weight(spec.kernel, pr.d / spec.bandwidth);
      if (w == 0.0) continue;
      for (std::size_t k = 0; k < m; ++k) {
        const auto [a, b] = upper[k];
        block.add(k, w * (u(pr.i, a) * u(pr.j, b) + u(pr.j, a) * u(pr.i, b)));
      }
      if (++in_block == kBlockPairs) {
        total.absorb(block);
        block.reset();
        in_block = 0;
      }
    }
    total.absorb(block);
  }

  Eigen::MatrixXd meat = detail::to_symmetric(total, upper, p);
  return meat;
}

Eigen::MatrixXd shac_meat(const RegressionFit& fit, const NeighborList& nl, const ShacSpec& spec) {
  return shac_meat(fit.x, fit.resid, nl, spec);
}

Eigen::MatrixXd shac_meat(const RegressionFit& fit, const PointSet& ps, const ShacSpec& spec) {
  if (ps.size() != fit.n()) throw InvalidInput("points and fit differ in length");
  return shac_meat(fit, neighbors_within(ps, spec.bandwidth), spec);
}

VarianceEstimate vcov_shac(const RegressionFit& fit, const NeighborList& nl, const ShacSpec& spec) {
  return sandwich(fit, shac_meat(fit, nl, spec), shac_label(spec));
}

VarianceEstimate vcov_shac(const RegressionFit& fit, const PointSet& ps, const ShacSpec& spec) {
  return sandwich(fit, shac_meat(fit, ps, spec), shac_label(spec));
}

std::vector<SeCurvePoint> se_curve(const RegressionFit& fit, const PointSet& ps, KernelKind kernel,
                                   std::span<const double> bandwidths) {
  if (bandwidths.empty()) throw InvalidInput("bandwidth grid is empty");
  if (!std::is_sorted(bandwidths.begin(), bandwidths.end())) {
    throw InvalidInput("bandwidth grid must be ascending");
  }
  if (ps.size() != fit.n()) throw InvalidInput("points and fit differ in length");
  const NeighborList nl = neighbors_within(ps, bandwidths.back());
  std::vector<SeCurvePoint> curve;
  curve.reserve(bandwidths.size());
  for (double bw : bandwidths) {
    const ShacSpec spec{kernel, bw};
    curve.push_back({bw, vcov_shac(fit, nl, spec)});
  }
  return curve;
}

}  // namespace conley
