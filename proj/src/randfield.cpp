#include "conley/randfield.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "conley/error.hpp"
#include "conley/rng.hpp"

namespace conley {

namespace {

// Correlation of the structured component: 1 - gamma(h) / theta1 for h > 0.
double structured_correlation(const SemivariogramModel& m, double h) {
  if (h == 0.0) return 1.0;
  if (m.range == 0.0) return 0.0;
  const double r = h / m.range;
  switch (m.family) {
    case Family::Exponential:
      return std::exp(-r);
    case Family::Gaussian:
      return std::exp(-r * r);
    case Family::Spherical:
      return r >= 1.0 ? 0.0 : 1.0 - 1.5 * r + 0.5 * r * r * r;
    case Family::Matern: {
      // Closed forms for the half-integer orders used in practice.
      if (m.nu == 0.5) return std::exp(-r);
      if (m.nu == 1.5) return (1.0 + r) * std::exp(-r);
      if (m.nu == 2.5) return (1.0 + r + r * r / 3.0) * std::exp(-r);
      if (r > 700.0) return 0.0;
      const double norm = std::pow(2.0, m.nu - 1.0) * std::tgamma(m.nu);
      return std::pow(r, m.nu) * std::cyl_bessel_k(m.nu, r) / norm;
    }
  }
  return 0.0;
}

}  // namespace

std::string_view family_name(Family f) {
  switch (f) {
    case Family::Exponential: return "exponential";
    case Family::Gaussian: return "gaussian";
    case Family::Matern: return "matern";
    case Family::Spherical: return "spherical";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  for (auto f : {Family::Exponential, Family::Gaussian, Family::Matern, Family::Spherical}) {
    if (family_name(f) == name) return f;
  }
  throw InvalidInput("unknown semivariogram family '" + std::string(name) +
                     "' (exponential|gaussian|matern|spherical)");
}

void SemivariogramModel::validate() const {
  if (!(partial_sill > 0.0) || !std::isfinite(partial_sill)) throw InvalidInput("partial sill must be positive");
  if (!(range >= 0.0) || !std::isfinite(range)) throw InvalidInput("range must be non-negative");
  if (!(nugget >= 0.0) || !std::isfinite(nugget)) throw InvalidInput("nugget must be non-negative");
  if (family == Family::Matern && !(nu > 0.0)) throw InvalidInput("Matern smoothness must be positive");
}

double covariance(const SemivariogramModel& m, double h) {
  m.validate();
  if (!(h >= 0.0)) throw InvalidInput("lag distance must be non-negative");
  if (h == 0.0) return m.partial_sill + m.nugget;
  return m.partial_sill * structured_correlation(m, h);
}

double semivariance(const SemivariogramModel& m, double h) {
  return m.partial_sill + m.nugget - covariance(m, h);
}

double correlation(const SemivariogramModel& m, double h) {
  m.validate();
  if (!(h >= 0.0)) throw InvalidInput("lag distance must be non-negative");
  if (h == 0.0) return 1.0;
  return m.partial_sill / (m.partial_sill + m.nugget) * structured_correlation(m, h);
}

FieldSampler::FieldSampler(const PointSet& ps, const SemivariogramModel& model, SamplerOptions opts)
    : model_(model), opts_(opts), n_(ps.size()) {
  model_.validate();
  if (n_ > opts_.max_points) {
    throw InvalidInput("field simulation limited to " + std::to_string(opts_.max_points) + " points");
  }
  if (model_.range == 0.0) {
    white_noise_ = true;
    return;
  }
  const auto n = static_cast<Eigen::Index>(n_);
  const double sill = model_.partial_sill + model_.nugget;
  const double scale = model_.partial_sill / sill;
  Eigen::MatrixXd corr = Eigen::MatrixXd::Zero(n, n);  // only the lower triangle is filled
  for (Eigen::Index j = 0; j < n; ++j) {
    corr(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double d = ps.distance(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      corr(i, j) = scale * structured_correlation(model_, d);
    }
  }
  if (!corr.allFinite()) {
    throw NumericalError("correlation matrix has non-finite entries (" + std::string(family_name(model_.family)) +
                         ", range " + std::to_string(model_.range) + " km, nu " + std::to_string(model_.nu) + ")");
  }
  try {
    lower_ = detail::jittered_cholesky(corr, model_.partial_sill / sill, jitter_);
    jitter_ *= sill;
  } catch (const NotPositiveDefinite&) {
    throw NotPositiveDefinite("covariance matrix is not positive definite even with jitter 1e-6 * sill (" +
                              std::string(family_name(model_.family)) + ", range " +
                              std::to_string(model_.range) + " km)");
  }
}

namespace detail {

Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& lower_corr, double base, double& jitter) {
  for (double rel = 1e-10; rel <= 1e-6 * (1.0 + 1e-9); rel *= 10.0) {
    Eigen::MatrixXd a = lower_corr;
    a.diagonal().array() += rel * base;
    Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(a);
    if (llt.info() == Eigen::Success) {
      jitter = rel * base;
      return llt.matrixL();
    }
  }
  throw NotPositiveDefinite("matrix is not positive definite even with maximal jitter");
}

}  // namespace detail

FieldDraw FieldSampler::draw(std::uint64_t master_seed, std::uint64_t stream) const {
  StreamRng rng(master_seed, stream);
  Eigen::VectorXd g(static_cast<Eigen::Index>(n_));
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.normal();
  Eigen::VectorXd z = white_noise_ ? g : Eigen::VectorXd(lower_.triangularView<Eigen::Lower>() * g);

  FieldDraw fd;
  fd.model = model_;
  fd.seed = master_seed;
  fd.stream = stream;
  fd.standardized = opts_.standardize;
  if (opts_.standardize) {
    const double mean = z.mean();
    z.array() -= mean;
    const double sd = std::sqrt(z.squaredNorm() / static_cast<double>(z.size() - 1));
    z /= sd;
  } else {
    z *= std::sqrt(model_.partial_sill + model_.nugget);
  }
  fd.values.assign(z.data(), z.data() + z.size());
  return fd;
}

FieldDraw draw_field(const PointSet& ps, const SemivariogramModel& model, std::uint64_t master_seed,
                     std::uint64_t stream) {
  return FieldSampler(ps, model).draw(master_seed, stream);
}

BandwidthEstimate empirical_range_check(const FieldDraw& fd, const NeighborList& nl, const BinSpec& bins) {
  return select_bandwidth(empirical_covariogram(fd.values, nl, bins), 0.0);
}

BandwidthEstimate empirical_range_check(const FieldDraw& fd, const PointSet& ps) {
  return select_bandwidth(empirical_covariogram(fd.values, ps, default_bins(ps)), 0.0);
}

}  // namespace conley
