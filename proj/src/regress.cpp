#include "conley/regress.hpp"

#include <cmath>
#include <limits>

#include "conley/error.hpp"
#include "meat.hpp"

namespace conley {

namespace {

constexpr double kRankTol = 1e-10;

std::size_t numerical_rank(const Eigen::MatrixXd& x) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  std::size_t r = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s(k) > kRankTol * s(0)) ++r;
  }
  return r;
}

}  // namespace

Design make_design(const std::vector<std::vector<double>>& regressors,
                   const std::vector<std::string>& regressor_names, const std::vector<double>& y,
                   bool intercept) {
  if (regressors.size() != regressor_names.size()) {
    throw InvalidInput("regressor names do not match regressor count");
  }
  const std::size_t n = y.size();
  const std::size_t p = regressors.size() + (intercept ? 1 : 0);
  if (p == 0) throw InvalidInput("design has no columns");
  Design d;
  d.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  d.y = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(n));
  Eigen::Index col = 0;
  if (intercept) {
    d.x.col(col++).setOnes();
    d.names.emplace_back("(Intercept)");
  }
  for (std::size_t k = 0; k < regressors.size(); ++k) {
    if (regressors[k].size() != n) {
      throw InvalidInput("regressor '" + regressor_names[k] + "' has wrong length");
    }
    d.x.col(col++) = Eigen::Map<const Eigen::VectorXd>(regressors[k].data(), static_cast<Eigen::Index>(n));
    d.names.push_back(regressor_names[k]);
  }
  if (!d.x.allFinite()) throw InvalidInput("design contains a non-finite regressor value");
  if (!d.y.allFinite()) throw InvalidInput("outcome contains a non-finite value");
  return d;
}

RegressionFit fit_ols(const Design& d) {
  const auto n = d.x.rows();
  const auto p = d.x.cols();
  if (d.y.size() != n) throw InvalidInput("outcome length does not match design rows");
  if (n <= p) throw InvalidInput("need more observations than regressors");
  if (!d.x.allFinite() || !d.y.allFinite()) throw InvalidInput("design contains non-finite values");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(d.x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const bool deficient = s(0) == 0.0 || s(p - 1) <= kRankTol * s(0);
  if (deficient) {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (numerical_rank(d.x.leftCols(j + 1)) < static_cast<std::size_t>(j + 1)) {
        const std::string name = static_cast<std::size_t>(j) < d.names.size()
                                     ? d.names[static_cast<std::size_t>(j)]
                                     : "column " + std::to_string(j);
        throw SingularDesign("design is rank deficient: '" + name +
                                 "' is collinear with earlier columns",
                             static_cast<std::size_t>(j));
      }
    }
    throw SingularDesign("design is rank deficient", static_cast<std::size_t>(p - 1));
  }

  RegressionFit fit;
  const Eigen::VectorXd inv_s = s.cwiseInverse();
  fit.beta = svd.matrixV() * (inv_s.asDiagonal() * (svd.matrixU().transpose() * d.y));
  fit.resid = d.y - d.x * fit.beta;
  const Eigen::MatrixXd vs = svd.matrixV() * inv_s.asDiagonal();
  fit.xtx_inv = vs * vs.transpose();
  fit.xtx_inv = 0.5 * (fit.xtx_inv + fit.xtx_inv.transpose()).eval();
  fit.x = d.x;
  fit.names = d.names;
  fit.df = static_cast<std::size_t>(n - p);
  return fit;
}

VarianceEstimate sandwich(const RegressionFit& fit, const Eigen::MatrixXd& meat, std::string label) {
  VarianceEstimate v;
  v.label = std::move(label);
  Eigen::MatrixXd vc = fit.xtx_inv * meat * fit.xtx_inv;
  v.vcov = 0.5 * (vc + vc.transpose());
  const auto p = v.vcov.rows();
  v.se.resize(p);
  v.tstat.resize(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    const double var = v.vcov(k, k);
    if (var < 0.0) {
      v.negative_variance.push_back(static_cast<std::size_t>(k));
      v.se(k) = std::numeric_limits<double>::quiet_NaN();
    } else {
      v.se(k) = std::sqrt(var);
    }
    v.tstat(k) = fit.beta(k) / v.se(k);
  }
  return v;
}

Eigen::MatrixXd hc0_meat(const RegressionFit& fit) {
  const Eigen::MatrixXd u = fit.x.array().colwise() * fit.resid.array();
  const auto upper = detail::upper_entries(u.cols());
  detail::CompensatedSums total(upper.size());
  detail::add_diagonal_terms(u, upper, total);
  return detail::to_symmetric(total, upper, u.cols());
}

VarianceEstimate vcov_hc(const RegressionFit& fit, HcFlavor flavor) {
  Eigen::MatrixXd meat = hc0_meat(fit);
  if (flavor == HcFlavor::Hc0) return sandwich(fit, meat, "hc0");
  const double scale = static_cast<double>(fit.n()) / static_cast<double>(fit.df);
  return sandwich(fit, meat * scale, "hc1");
}

Design add_coordinate_controls(const Design& d, const PointSet& ps, int degree) {
  if (degree != 1 && degree != 2) throw InvalidInput("coordinate control degree must be 1 or 2");
  const auto n = d.x.rows();
  if (static_cast<std::size_t>(n) != ps.size()) throw InvalidInput("points and design differ in length");

  const auto standardized = [&](auto coord) {
    Eigen::VectorXd c(n);
    for (Eigen::Index i = 0; i < n; ++i) c(i) = coord(ps[static_cast<std::size_t>(i)]);
    c.array() -= c.mean();
    const double sd = std::sqrt(c.squaredNorm() / static_cast<double>(n - 1));
    // A constant coordinate stays a zero column and fails the rank check later.
    if (sd > 0.0) c /= sd;
    return c;
  };
  const Eigen::VectorXd c1 = standardized([](const Point& pt) { return pt.c1; });
  const Eigen::VectorXd c2 = standardized([](const Point& pt) { return pt.c2; });

  std::vector<Eigen::VectorXd> extra = {c1, c2};
  std::vector<std::string> names = {"coord1", "coord2"};
  if (degree == 2) {
    extra.push_back(c1.cwiseProduct(c1));
    extra.push_back(c2.cwiseProduct(c2));
    extra.push_back(c1.cwiseProduct(c2));
    names.insert(names.end(), {"coord1^2", "coord2^2", "coord1*coord2"});
  }

  Design out;
  out.y = d.y;
  out.x.resize(n, d.x.cols() + static_cast<Eigen::Index>(extra.size()));
  out.x.leftCols(d.x.cols()) = d.x;
  for (std::size_t k = 0; k < extra.size(); ++k) out.x.col(d.x.cols() + static_cast<Eigen::Index>(k)) = extra[k];
  out.names = d.names;
  out.names.insert(out.names.end(), names.begin(), names.end());
  return out;
}

}  // namespace conley
