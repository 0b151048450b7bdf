#include <cmath>
#include <sstream>

#include "conley/error.hpp"
#include "conley/mc.hpp"
#include "conley/regress.hpp"
#include "conley/shac.hpp"
#include "doctest.h"

using namespace conley;

namespace {

McCampaign small_campaign() {
  McCampaign c = desk_campaign();
  c.sample.cols = 12;
  c.sample.rows = 10;
  c.range_levels = {0, 150};
  c.iters = 20;
  return c;
}

std::string ledger_text(const McResult& r) {
  std::ostringstream os;
  write_ledger_csv(os, r);
  return os.str();
}

}  // namespace

TEST_CASE("estimator labels and parsing") {
  CHECK(parse_estimator("hc1").label() == "hc1");
  CHECK(parse_estimator("hc0").label() == "hc0");
  CHECK(parse_estimator("auto:parzen").label() == "auto_parzen");
  const auto f = parse_estimator("fixed:epanechnikov:2500");
  CHECK(f.kind == EstimatorKind::ShacFixed);
  CHECK(f.bandwidth == 2500);
  CHECK(f.label() == "fixed_epanechnikov_2500");
  CHECK_THROWS_AS(parse_estimator("auto"), InvalidInput);
  CHECK_THROWS_AS(parse_estimator("fixed:bartlett:-5"), InvalidInput);
  CHECK_THROWS_AS(parse_estimator("hc3"), InvalidInput);
}

TEST_CASE("desk defaults") {
  const auto c = desk_campaign();
  CHECK(c.sample.build().size() == 1000);
  REQUIRE(c.range_levels.size() == 16);
  CHECK(c.range_levels.front() == 0);
  CHECK(c.range_levels.back() == 750);
  CHECK(c.iters == 500);
  CHECK(c.master_seed == 1908);
  CHECK(c.model.family == Family::Matern);
  CHECK(c.model.partial_sill == 0.025);
  CHECK(c.estimators.front().label() == "hc1");
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("campaign file parsing") {
  std::istringstream in(
      "# comment\n"
      "sample = irregular\n"
      "n_points = 300\n"
      "range_levels = 0, 100, 200\n"
      "iters = 7   # trailing comment\n"
      "estimators = hc1, auto:bartlett, fixed:uniform:100\n"
      "family = exponential\n"
      "master_seed = 99\n");
  const auto c = parse_campaign(in);
  CHECK(c.sample.kind == SampleKind::Irregular);
  CHECK(c.sample.n_points == 300);
  CHECK(c.range_levels == std::vector<double>{0, 100, 200});
  CHECK(c.iters == 7);
  CHECK(c.estimators.size() == 3);
  CHECK(c.model.family == Family::Exponential);
  CHECK(c.master_seed == 99);

  std::istringstream unknown("colour = blue\n");
  CHECK_THROWS_AS(parse_campaign(unknown), InvalidInput);
  std::istringstream bad("iters = many\n");
  CHECK_THROWS_AS(parse_campaign(bad), InvalidInput);
  std::istringstream neg("range_levels = 0, -50\n");
  CHECK_THROWS_AS(parse_campaign(neg).validate(), InvalidInput);
}

TEST_CASE("shipped desk config equals the built-in defaults") {
  const auto file = load_campaign_file(std::string(CONLEY_SOURCE_DIR) + "/configs/desk.cfg");
  const auto desk = desk_campaign();
  CHECK(file.range_levels == desk.range_levels);
  CHECK(file.iters == desk.iters);
  CHECK(file.master_seed == desk.master_seed);
  CHECK(file.sample.build().coords().size() == 1000);
  REQUIRE(file.estimators.size() == desk.estimators.size());
  for (std::size_t k = 0; k < desk.estimators.size(); ++k) CHECK(file.estimators[k].label() == desk.estimators[k].label());
  const auto irr = load_campaign_file(std::string(CONLEY_SOURCE_DIR) + "/configs/irregular.cfg");
  CHECK(irr.sample.kind == SampleKind::Irregular);
  CHECK(irr.sample.build().size() == 1000);
}

TEST_CASE("stream ids are distinct across levels and iterations") {
  CHECK(outcome_stream(0, 0) != regressor_stream(0, 0));
  CHECK(outcome_stream(1, 0) != outcome_stream(0, 0));
  CHECK(outcome_stream(0, 1) != regressor_stream(0, 0));
  CHECK(regressor_stream(3, 7) == outcome_stream(3, 7) + 1);
}

TEST_CASE("an iteration agrees with doing the steps by hand") {
  const auto c = small_campaign();
  const CampaignContext ctx(c);
  auto model = c.model;
  model.range = 150;
  const FieldSampler sampler(ctx.ps, model);
  const auto rec = run_iteration(ctx, sampler, 1, 4);
  REQUIRE_FALSE(rec.failed);

  const auto y = sampler.draw(c.master_seed, outcome_stream(1, 4));
  const auto x = sampler.draw(c.master_seed, regressor_stream(1, 4));
  const auto fit = fit_ols(make_design({x.values}, {"x"}, y.values));
  CHECK(rec.tstat[0] == vcov_hc(fit, HcFlavor::Hc1).tstat(1));
  const auto est = select_bandwidth_for_fit(fit, ctx.ps);
  CHECK(rec.varsigma_hat == est.varsigma_hat);
  CHECK(rec.tstat[3] == vcov_shac(fit, ctx.ps, {KernelKind::Epanechnikov, est.varsigma_hat}).tstat(1));
  CHECK(rec.tstat.back() == vcov_shac(fit, ctx.ps, {KernelKind::Epanechnikov, 2500}).tstat(1));
  CHECK(rec.realized_range == empirical_range_check(y, ctx.ps).varsigma_hat);
}

TEST_CASE("results do not depend on the thread count") {
  const auto c = small_campaign();
  const auto a = run_campaign(c, 1);
  const auto b = run_campaign(c, 4);
  CHECK(ledger_text(a) == ledger_text(b));
  REQUIRE(a.levels.size() == 2);
  CHECK(a.levels[0].completed == 20);
  CHECK(a.ledger.size() == 40);
  CHECK(a.ledger[21].level == 1);
  CHECK(a.ledger[21].iter == 1);
}

TEST_CASE("level summaries") {
  auto c = small_campaign();
  c.estimators = {parse_estimator("hc1")};
  std::vector<IterationRecord> recs(4);
  const double t[] = {2.5, -0.3, NAN, -2.0};
  for (int k = 0; k < 4; ++k) {
    recs[k].tstat = {t[k]};
    recs[k].realized_range = 100.0 * k;
    recs[k].varsigma_hat = 10.0;
  }
  recs[1].failed = true;
  const auto s = summarize_level(c, recs, 50);
  CHECK(s.completed == 3);
  CHECK(s.failed == 1);
  CHECK(s.rejection_rate[0] == doctest::Approx(2.0 / 3.0));
  CHECK(s.non_psd[0] == 1);
  CHECK(s.mean_realized_range == doctest::Approx(500.0 / 3.0));
  CHECK(s.range_param == 50);
}

TEST_CASE("a level whose field cannot be simulated aborts the campaign") {
  auto c = small_campaign();
  c.model.nu = 400;  // correlation not representable in double precision
  c.range_levels = {0, 100};
  c.iters = 3;
  CHECK_THROWS_AS(run_campaign(c, 1), CampaignError);
}

TEST_CASE("csv writers") {
  auto c = small_campaign();
  c.range_levels = {0};
  c.iters = 2;
  c.estimators = {parse_estimator("hc1"), parse_estimator("auto:bartlett")};
  const auto r = run_campaign(c, 1);
  std::ostringstream led, sum;
  write_ledger_csv(led, r);
  write_summary_csv(sum, r);
  CHECK(led.str().rfind("level,range_param,iter,status,realized_range,varsigma_hat,t_hc1,t_auto_bartlett\n", 0) == 0);
  CHECK(sum.str().rfind("level,range_param,completed,failed,mean_realized_range,mean_varsigma_hat,rate_hc1,"
                        "rate_auto_bartlett,nonpsd_hc1,nonpsd_auto_bartlett\n",
                        0) == 0);
  int lines = 0;
  for (char ch : led.str()) lines += ch == '\n';
  CHECK(lines == 3);
}

TEST_CASE("inverse-U export") {
  const auto c = small_campaign();
  const auto ps = c.sample.build();
  const auto grid = default_inverse_u_grid(ps, 10);
  REQUIRE(grid.size() == 10);
  CHECK(grid.front() == 0.0);
  auto model = c.model;
  model.range = 100;
  const auto curve = export_inverse_u(ps, model, 1908, 2, grid, KernelKind::Epanechnikov);
  REQUIRE(curve.se.size() == 10);
  CHECK(curve.se[0] == doctest::Approx(curve.hc0_se).epsilon(1e-14));
  CHECK(curve.hc1_se > curve.hc0_se);
  CHECK_THROWS_AS(default_inverse_u_grid(ps, 1), InvalidInput);
  std::ostringstream os;
  write_inverse_u_csv(os, curve);
  CHECK(os.str().rfind("bandwidth,se_shac,se_hc1,se_hc0\n", 0) == 0);
}

TEST_CASE("fixed uniform bandwidth 0 reproduces the HC0 t-statistic") {
  auto c = small_campaign();
  c.estimators = {parse_estimator("hc0"), parse_estimator("fixed:uniform:0")};
  c.iters = 10;
  const auto r = run_campaign(c, 1);
  for (const auto& rec : r.ledger) CHECK(rec.tstat[0] == rec.tstat[1]);
}

TEST_CASE("HC1 hazard rises with the range and auto SHAC never does materially worse") {
  McCampaign c = desk_campaign();
  c.iters = 150;
  // Well-separated levels: beyond ~300 km the HC1 rate plateaus and sampling
  // noise dominates the ordering.
  c.range_levels = {0, 50, 150, 300, 750};
  c.estimators = {parse_estimator("hc1"), parse_estimator("auto:epanechnikov")};
  const auto r = run_campaign(c, 1);
  std::vector<double> hc1;
  for (const auto& s : r.levels) {
    hc1.push_back(s.rejection_rate[0]);
    CHECK(s.rejection_rate[1] <= s.rejection_rate[0] + 0.02);
  }
  // Spearman correlation of HC1 rates with the level index (average ranks for ties)
  const std::size_t n = hc1.size();
  std::vector<double> rank(n);
  for (std::size_t a = 0; a < n; ++a) {
    double below = 0, equal = 0;
    for (std::size_t b = 0; b < n; ++b) {
      below += hc1[b] < hc1[a];
      equal += hc1[b] == hc1[a];
    }
    rank[a] = below + (equal - 1) / 2;
  }
  const double mean = (static_cast<double>(n) - 1) / 2;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    sxy += (rank[k] - mean) * (static_cast<double>(k) - mean);
    sxx += (static_cast<double>(k) - mean) * (static_cast<double>(k) - mean);
    syy += (rank[k] - mean) * (rank[k] - mean);
  }
  CHECK(sxy / std::sqrt(sxx * syy) >= 0.9);
}
