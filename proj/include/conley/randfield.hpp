#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "conley/covariogram.hpp"
#include "conley/geo.hpp"

namespace conley {

enum class Family { Exponential, Gaussian, Matern, Spherical };

std::string_view family_name(Family f);
Family parse_family(std::string_view name);

struct SemivariogramModel {
  Family family = Family::Matern;
  double partial_sill = 0.025;  // theta1
  double range = 0.0;           // theta2, km; 0 is a pure nugget / white-noise field
  double nugget = 0.0;
  double nu = 1.5;  // Matern smoothness

  void validate() const;
};

// gamma(h): the tabulated structured part plus the nugget jump for h > 0.
double semivariance(const SemivariogramModel& m, double h);
// C(h) = C(0) - gamma(h), C(0) = partial_sill + nugget.
double covariance(const SemivariogramModel& m, double h);
// C(h) / C(0), computed so that it does not depend on the sill scale.
double correlation(const SemivariogramModel& m, double h);

struct FieldDraw {
  std::vector<double> values;
  SemivariogramModel model;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  bool standardized = true;
};

struct SamplerOptions {
  std::size_t max_points = 12000;
  bool standardize = true;
};

// Holds the Cholesky factor of the correlation matrix at the sample points
// so that repeated draws cost one triangular mat-vec each. A diagonal jitter
// of 1e-10 (relative to the sill) is added and escalated tenfold up to 1e-6
// before giving up with NotPositiveDefinite.
class FieldSampler {
 public:
  FieldSampler(const PointSet& ps, const SemivariogramModel& model, SamplerOptions opts = {});

  FieldDraw draw(std::uint64_t master_seed, std::uint64_t stream) const;
  double jitter() const { return jitter_; }
  std::size_t size() const { return n_; }

 private:
  SemivariogramModel model_;
  SamplerOptions opts_;
  std::size_t n_;
  bool white_noise_ = false;
  double jitter_ = 0.0;
  Eigen::MatrixXd lower_;
};

namespace detail {
// Cholesky factor of a correlation matrix (lower triangle is read) after
// adding rel * base to the diagonal, rel = 1e-10, 1e-9, ..., 1e-6. `jitter`
// receives the amount added. Throws NotPositiveDefinite past 1e-6.
Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& lower_corr, double base, double& jitter);
}  // namespace detail

FieldDraw draw_field(const PointSet& ps, const SemivariogramModel& model, std::uint64_t master_seed,
                     std::uint64_t stream = 0);

// Covariogram-range estimate of the field itself (default bins, eta = 0).
BandwidthEstimate empirical_range_check(const FieldDraw& fd, const PointSet& ps);
BandwidthEstimate empirical_range_check(const FieldDraw& fd, const NeighborList& nl, const BinSpec& bins);

}  // namespace conley
