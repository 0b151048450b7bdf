#include <cmath>
#include <numeric>

#include "conley/error.hpp"
#include "conley/randfield.hpp"
#include "doctest.h"

using namespace conley;

namespace {

SemivariogramModel model(Family f, double range, double nu = 1.5) {
  SemivariogramModel m;
  m.family = f;
  m.range = range;
  m.nu = nu;
  return m;
}

double corr(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("covariance at the origin is the total sill") {
  for (auto f : {Family::Exponential, Family::Gaussian, Family::Matern, Family::Spherical}) {
    auto m = model(f, 100);
    m.nugget = 0.01;
    CHECK(covariance(m, 0.0) == doctest::Approx(0.035));
    CHECK(semivariance(m, 0.0) == 0.0);
    CHECK(covariance(m, 1e-9) <= 0.025 + 1e-12);  // nugget jump
    CHECK(correlation(m, 0.0) == 1.0);
  }
}

TEST_CASE("tabulated values") {
  auto sph = model(Family::Spherical, 100);
  CHECK(covariance(sph, 200) == 0.0);
  CHECK(covariance(sph, 100.0000001) == 0.0);
  CHECK(covariance(sph, 50) == doctest::Approx(0.025 * (1 - 0.75 + 0.0625)));
  auto ex = model(Family::Exponential, 100);
  ex.partial_sill = 1.0;
  CHECK(covariance(ex, 100) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(covariance(ex, 100) == doctest::Approx(0.367879).epsilon(1e-6));
  auto ga = model(Family::Gaussian, 100);
  ga.partial_sill = 1.0;
  CHECK(covariance(ga, 50) == doctest::Approx(std::exp(-0.25)));
}

TEST_CASE("Matern special cases") {
  for (double h = 0.5; h < 1000; h *= 1.7) {
    CHECK(std::abs(covariance(model(Family::Matern, 120, 0.5), h) - covariance(model(Family::Exponential, 120), h)) <
          1e-10);
    // closed forms agree with the Bessel-function evaluation at nearby nu
    for (double nu : {1.5, 2.5}) {
      const double closed = correlation(model(Family::Matern, 120, nu), h);
      const double bessel = correlation(model(Family::Matern, 120, nu + 1e-9), h);
      CHECK(std::abs(closed - bessel) < 1e-6);
    }
  }
  const double r = 150, h = 90;
  CHECK(correlation(model(Family::Matern, r, 1.5), h) == doctest::Approx((1 + h / r) * std::exp(-h / r)));
}

TEST_CASE("model validation") {
  auto m = model(Family::Matern, 100);
  m.partial_sill = 0;
  CHECK_THROWS_AS(m.validate(), InvalidInput);
  m = model(Family::Matern, -1);
  CHECK_THROWS_AS(m.validate(), InvalidInput);
  m = model(Family::Matern, 100, 0.0);
  CHECK_THROWS_AS(m.validate(), InvalidInput);
  CHECK_THROWS_AS(covariance(model(Family::Matern, 100), -1), InvalidInput);
  CHECK(parse_family("spherical") == Family::Spherical);
  CHECK_THROWS_AS(parse_family("cubic"), InvalidInput);
}

TEST_CASE("covariance is symmetric in the pair") {
  const PointSet ps = make_irregular(50, {0, 0, 500, 500}, 3);
  const auto m = model(Family::Matern, 80);
  for (std::size_t i = 0; i < 50; ++i)
    for (std::size_t j = 0; j < 50; ++j) CHECK(covariance(m, ps.distance(i, j)) == covariance(m, ps.distance(j, i)));
}

TEST_CASE("draws are standardized and reproducible") {
  const PointSet ps = make_lattice(70, {0, 0, 2800, 1750});
  const auto m = model(Family::Matern, 200);
  const auto a = draw_field(ps, m, 1908, 3);
  const auto b = draw_field(ps, m, 1908, 3);
  CHECK(a.values == b.values);
  CHECK(a.standardized);
  const double n = static_cast<double>(a.values.size());
  const double mean = std::accumulate(a.values.begin(), a.values.end(), 0.0) / n;
  double ss = 0;
  for (double v : a.values) ss += (v - mean) * (v - mean);
  CHECK(std::abs(mean) < 1e-10);
  CHECK(std::abs(std::sqrt(ss / (n - 1)) - 1) < 1e-10);
}

TEST_CASE("sill scale does not change standardized output") {
  const PointSet ps = make_lattice(70, {0, 0, 1400, 1050});
  auto m = model(Family::Matern, 150);
  const auto a = draw_field(ps, m, 5, 0);
  m.partial_sill = 1.0;
  const auto b = draw_field(ps, m, 5, 0);
  CHECK(a.values == b.values);
}

TEST_CASE("independent streams and white noise") {
  const PointSet ps = make_lattice(70, {0, 0, 2800, 1750});
  const double bound = 3 / std::sqrt(static_cast<double>(ps.size()));
  const auto m = model(Family::Matern, 0);
  const auto a = draw_field(ps, m, 11, 0);
  const auto b = draw_field(ps, m, 11, 1);
  CHECK(std::abs(corr(a.values, b.values)) < bound);
  // lag-1 autocorrelation along lattice rows (40 columns)
  std::vector<double> left, right;
  for (std::size_t i = 0; i < ps.size(); ++i)
    if (i % 40 != 39) {
      left.push_back(a.values[i]);
      right.push_back(a.values[i + 1]);
    }
  CHECK(std::abs(corr(left, right)) < bound);

  const auto sm = model(Family::Matern, 300);
  const auto c = draw_field(ps, sm, 11, 0);
  const auto d = draw_field(ps, sm, 11, 1);
  CHECK(std::abs(corr(c.values, d.values)) < 0.3);  // smooth fields have fewer effective degrees of freedom
}

TEST_CASE("raw draws keep the model scale") {
  const PointSet ps = make_lattice(70, {0, 0, 2800, 1750});
  const FieldSampler s(ps, model(Family::Matern, 0), SamplerOptions{12000, false});
  const auto fd = s.draw(1, 0);
  CHECK_FALSE(fd.standardized);
  double ss = 0;
  for (double v : fd.values) ss += v * v;
  CHECK(std::sqrt(ss / 1000) == doctest::Approx(std::sqrt(0.025)).epsilon(0.1));
}

TEST_CASE("empirical covariogram tracks the model sign") {
  const PointSet ps = make_lattice(50, {0, 0, 2500, 2500});
  const auto m = model(Family::Spherical, 400);
  const auto fd = draw_field(ps, m, 21, 0);
  const auto cg = empirical_covariogram(fd.values, ps, BinSpec{400, 8});
  int agree = 0, total = 0;
  for (std::size_t b = 0; b < cg.chat.size(); ++b) {
    if (cg.empty(b)) continue;
    ++total;
    agree += (cg.chat[b] > 0) == (covariance(m, cg.centers[b]) > 0);
  }
  CHECK(agree >= 0.8 * total);
}

TEST_CASE("range check rises with the range parameter") {
  const PointSet ps = make_lattice(70, {0, 0, 2800, 1750});
  double prev = 0;
  for (double r : {0.0, 100.0, 300.0}) {
    double s = 0;
    const FieldSampler sampler(ps, model(Family::Matern, r));
    for (int k = 0; k < 10; ++k) s += empirical_range_check(sampler.draw(9, static_cast<std::uint64_t>(k)), ps).varsigma_hat;
    CHECK(s / 10 > prev);
    prev = s / 10;
  }
  const auto white = empirical_range_check(draw_field(ps, model(Family::Matern, 0), 1, 0), ps);
  CHECK(white.varsigma_hat < 200);
}

TEST_CASE("sampler limits and factorization failure") {
  const PointSet ps = make_lattice(10, {0, 0, 100, 100});
  CHECK_THROWS_AS(FieldSampler(ps, model(Family::Matern, 50), SamplerOptions{50, true}), InvalidInput);
  // valid models stay factorizable thanks to the jitter; an indefinite matrix does not
  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1, 0, 2, 1;
  double jitter = -1;
  CHECK_THROWS_AS(detail::jittered_cholesky(indefinite, 1.0, jitter), NotPositiveDefinite);
  Eigen::MatrixXd singular = Eigen::MatrixXd::Ones(3, 3);
  const Eigen::MatrixXd l = detail::jittered_cholesky(singular, 1.0, jitter);
  CHECK(jitter > 0.0);
  CHECK(jitter <= 1e-6);
  CHECK((l * l.transpose() - singular).cwiseAbs().maxCoeff() <= 1.01 * jitter);
  // a smoothness beyond what doubles can represent is reported, not simulated
  CHECK_THROWS_AS(FieldSampler(ps, model(Family::Matern, 50, 400.0)), NumericalError);
  const FieldSampler ok(ps, model(Family::Exponential, 30));
  CHECK(ok.jitter() >= 0.0);
  CHECK(ok.jitter() <= 1e-6 * 0.025);
  CHECK(ok.size() == 100);
}
