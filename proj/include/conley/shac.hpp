#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "conley/geo.hpp"
#include "conley/kernels.hpp"
#include "conley/regress.hpp"

namespace conley {

struct ShacSpec {
  KernelKind kernel = KernelKind::Epanechnikov;
  double bandwidth = 0.0;  // km; 0 keeps only the i == j terms
};

std::string shac_label(const ShacSpec& spec);

// Omega = sum_i e_i^2 x_i x_i' + sum_{i<j, d_ij <= bw} K(d_ij / bw) e_i e_j (x_i x_j' + x_j x_i').
// Terms are added in ascending (i, j) order into per-block compensated sums
// that are then combined in block order, so the result does not depend on
// how the blocks are scheduled. `nl` must have been built with radius >= bw.
Eigen::MatrixXd shac_meat(const Eigen::MatrixXd& x, const Eigen::VectorXd& resid,
                          const NeighborList& nl, const ShacSpec& spec);
Eigen::MatrixXd shac_meat(const RegressionFit& fit, const NeighborList& nl, const ShacSpec& spec);
Eigen::MatrixXd shac_meat(const RegressionFit& fit, const PointSet& ps, const ShacSpec& spec);

VarianceEstimate vcov_shac(const RegressionFit& fit, const NeighborList& nl, const ShacSpec& spec);
VarianceEstimate vcov_shac(const RegressionFit& fit, const PointSet& ps, const ShacSpec& spec);

struct SeCurvePoint {
  double bandwidth;
  VarianceEstimate estimate;
};

// One neighbour enumeration at the largest bandwidth, reused for every point.
std::vector<SeCurvePoint> se_curve(const RegressionFit& fit, const PointSet& ps, KernelKind kernel,
                                   std::span<const double> bandwidths);

}  // namespace conley
