#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "conley/geo.hpp"

namespace conley {

struct Design {
  Eigen::MatrixXd x;  // n x p, column 0 is the intercept unless suppressed
  Eigen::VectorXd y;
  std::vector<std::string> names;

  std::size_t n() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(x.cols()); }
};

Design make_design(const std::vector<std::vector<double>>& regressors,
                   const std::vector<std::string>& regressor_names, const std::vector<double>& y,
                   bool intercept = true);

struct RegressionFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd resid;
  Eigen::MatrixXd xtx_inv;
  Eigen::MatrixXd x;  // kept for the meat of every sandwich
  std::vector<std::string> names;
  std::size_t df = 0;

  std::size_t n() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(x.cols()); }
};

// Least squares through a thin SVD of X. Singular values below
// 1e-10 * max flag rank deficiency; the error names the first column that
// is a linear combination of the ones before it.
RegressionFit fit_ols(const Design& d);

struct VarianceEstimate {
  Eigen::MatrixXd vcov;
  Eigen::VectorXd se;
  Eigen::VectorXd tstat;
  std::string label;
  // Coefficients whose variance came out negative; their se/tstat are NaN.
  std::vector<std::size_t> negative_variance;

  bool non_psd() const { return !negative_variance.empty(); }
};

// (X'X)^-1 meat (X'X)^-1 with se/tstat filled in.
VarianceEstimate sandwich(const RegressionFit& fit, const Eigen::MatrixXd& meat, std::string label);

Eigen::MatrixXd hc0_meat(const RegressionFit& fit);

enum class HcFlavor { Hc0, Hc1 };

VarianceEstimate vcov_hc(const RegressionFit& fit, HcFlavor flavor);

// Appends polynomial coordinate terms (degree 1: c1, c2; degree 2 adds c1^2,
// c2^2, c1*c2). Coordinates are centred and scaled to unit sd first.
Design add_coordinate_controls(const Design& d, const PointSet& ps, int degree);

}  // namespace conley
