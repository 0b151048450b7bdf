#include "conley/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

#include "conley/error.hpp"
#include "conley/regress.hpp"
#include "conley/shac.hpp"

namespace conley {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw InvalidInput("campaign key '" + key + "': '" + text + "' is not a number");
  }
  return v;
}

long long to_int(const std::string& key, const std::string& text) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw InvalidInput("campaign key '" + key + "': '" + text + "' is not an integer");
  }
  return v;
}

std::string format_km(double km) {
  std::ostringstream os;
  os << km;
  return os.str();
}

double slope_t(const VarianceEstimate& v) { return v.tstat(v.tstat.size() - 1); }

}  // namespace

PointSet SampleSpec::build() const {
  switch (kind) {
    case SampleKind::Lattice:
      if (cols < 1 || rows < 1) throw InvalidInput("lattice needs positive cols and rows");
      return make_lattice(cell_km, BoundingBox{0.0, 0.0, cols * cell_km, rows * cell_km});
    case SampleKind::Irregular:
      return make_irregular(n_points, BoundingBox{0.0, 0.0, width_km, height_km}, sample_seed);
    case SampleKind::PointsFile:
      return load_points(read_csv_file(path), ColumnSpec{x_column, y_column}, crs);
  }
  throw InvalidInput("unknown sample kind");
}

std::string EstimatorSpec::label() const {
  switch (kind) {
    case EstimatorKind::Hc0: return "hc0";
    case EstimatorKind::Hc1: return "hc1";
    case EstimatorKind::ShacAuto: return "auto_" + std::string(kernel_name(kernel));
    case EstimatorKind::ShacFixed: return "fixed_" + std::string(kernel_name(kernel)) + "_" + format_km(bandwidth);
  }
  return "?";
}

EstimatorSpec parse_estimator(std::string_view text) {
  const auto parts = split(text, ':');
  EstimatorSpec e;
  if (parts.size() == 1 && parts[0] == "hc0") {
    e.kind = EstimatorKind::Hc0;
  } else if (parts.size() == 1 && parts[0] == "hc1") {
    e.kind = EstimatorKind::Hc1;
  } else if (parts.size() == 2 && parts[0] == "auto") {
    e.kind = EstimatorKind::ShacAuto;
    e.kernel = parse_kernel(parts[1]);
  } else if (parts.size() == 3 && parts[0] == "fixed") {
    e.kind = EstimatorKind::ShacFixed;
    e.kernel = parse_kernel(parts[1]);
    e.bandwidth = to_double("estimators", parts[2]);
    if (!(e.bandwidth >= 0.0)) throw InvalidInput("fixed bandwidth must be non-negative");
  } else {
    throw InvalidInput("bad estimator '" + std::string(text) +
                       "' (hc0 | hc1 | auto:<kernel> | fixed:<kernel>:<km>)");
  }
  return e;
}

void McCampaign::validate() const {
  if (iters < 1) throw InvalidInput("iters must be at least 1");
  if (range_levels.empty()) throw InvalidInput("range_levels must not be empty");
  if (estimators.empty()) throw InvalidInput("at least one estimator is required");
  for (double r : range_levels) {
    if (!(r >= 0.0)) throw InvalidInput("range levels must be non-negative");
  }
  if (!(eta >= 0.0)) throw InvalidInput("eta must be non-negative");
  if (n_bins < 2) throw InvalidInput("n_bins must be at least 2");
  if (!(max_failure_rate >= 0.0 && max_failure_rate < 1.0)) throw InvalidInput("max_failure_rate must be in [0, 1)");
  model.validate();
}

McCampaign desk_campaign() {
  McCampaign c;
  for (int k = 0; k < 16; ++k) c.range_levels.push_back(50.0 * k);
  c.estimators.push_back({EstimatorKind::Hc1, KernelKind::Epanechnikov, 0.0});
  for (auto k : kAllKernels) c.estimators.push_back({EstimatorKind::ShacAuto, k, 0.0});
  c.estimators.push_back({EstimatorKind::ShacFixed, KernelKind::Epanechnikov, 25.0});
  c.estimators.push_back({EstimatorKind::ShacFixed, KernelKind::Epanechnikov, 2500.0});
  return c;
}

McCampaign parse_campaign(std::istream& in) {
  McCampaign c = desk_campaign();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw InvalidInput("campaign line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string val = trim(std::string_view(body).substr(eq + 1));
    if (key == "sample") {
      if (val == "lattice") c.sample.kind = SampleKind::Lattice;
      else if (val == "irregular") c.sample.kind = SampleKind::Irregular;
      else if (val == "points") c.sample.kind = SampleKind::PointsFile;
      else throw InvalidInput("sample must be lattice | irregular | points");
    } else if (key == "cell_km") {
      c.sample.cell_km = to_double(key, val);
    } else if (key == "cols") {
      c.sample.cols = static_cast<int>(to_int(key, val));
    } else if (key == "rows") {
      c.sample.rows = static_cast<int>(to_int(key, val));
    } else if (key == "n_points") {
      c.sample.n_points = static_cast<std::size_t>(to_int(key, val));
    } else if (key == "width_km") {
      c.sample.width_km = to_double(key, val);
    } else if (key == "height_km") {
      c.sample.height_km = to_double(key, val);
    } else if (key == "sample_seed") {
      c.sample.sample_seed = static_cast<std::uint64_t>(to_int(key, val));
    } else if (key == "points_file") {
      c.sample.path = val;
    } else if (key == "x_column") {
      c.sample.x_column = val;
    } else if (key == "y_column") {
      c.sample.y_column = val;
    } else if (key == "crs") {
      if (val == "km") c.sample.crs = Crs::ProjectedKm;
      else if (val == "lonlat") c.sample.crs = Crs::LonLatDeg;
      else throw InvalidInput("crs must be km | lonlat");
    } else if (key == "family") {
      c.model.family = parse_family(val);
    } else if (key == "partial_sill") {
      c.model.partial_sill = to_double(key, val);
    } else if (key == "nugget") {
      c.model.nugget = to_double(key, val);
    } else if (key == "nu") {
      c.model.nu = to_double(key, val);
    } else if (key == "range_levels") {
      c.range_levels.clear();
      for (const auto& v : split(val, ',')) c.range_levels.push_back(to_double(key, v));
    } else if (key == "iters") {
      c.iters = static_cast<int>(to_int(key, val));
    } else if (key == "estimators") {
      c.estimators.clear();
      for (const auto& v : split(val, ',')) c.estimators.push_back(parse_estimator(v));
    } else if (key == "master_seed") {
      c.master_seed = static_cast<std::uint64_t>(to_int(key, val));
    } else if (key == "eta") {
      c.eta = to_double(key, val);
    } else if (key == "n_bins") {
      c.n_bins = static_cast<int>(to_int(key, val));
    } else if (key == "max_failure_rate") {
      c.max_failure_rate = to_double(key, val);
    } else {
      throw InvalidInput("campaign line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

McCampaign load_campaign_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open campaign file '" + path + "'");
  return parse_campaign(in);
}

CampaignContext::CampaignContext(const McCampaign& c) : CampaignContext(c, c.sample.build()) {}

CampaignContext::CampaignContext(const McCampaign& c, PointSet points)
    : campaign(c), ps(std::move(points)) {
  campaign.validate();
  bins = default_bins(ps);
  bins.n_bins = campaign.n_bins;
  double radius = bins.cutoff;
  for (const auto& e : campaign.estimators) {
    if (e.kind == EstimatorKind::ShacFixed) radius = std::max(radius, e.bandwidth);
  }
  nl = neighbors_within(ps, radius);
}

std::uint64_t outcome_stream(int level, int iter) {
  return (static_cast<std::uint64_t>(level) << 32) | (2ULL * static_cast<std::uint64_t>(iter));
}

std::uint64_t regressor_stream(int level, int iter) { return outcome_stream(level, iter) + 1; }

IterationRecord run_iteration(const CampaignContext& ctx, const FieldSampler& sampler, int level, int iter) {
  const McCampaign& c = ctx.campaign;
  IterationRecord rec;
  rec.level = level;
  rec.iter = iter;
  const std::size_t m = c.estimators.size();
  rec.tstat.assign(m, std::numeric_limits<double>::quiet_NaN());
  rec.bandwidth.assign(m, std::numeric_limits<double>::quiet_NaN());
  try {
    const FieldDraw y = sampler.draw(c.master_seed, outcome_stream(level, iter));
    const FieldDraw x = sampler.draw(c.master_seed, regressor_stream(level, iter));
    rec.realized_range = empirical_range_check(y, ctx.nl, ctx.bins).varsigma_hat;

    const RegressionFit fit = fit_ols(make_design({x.values}, {"x"}, y.values));
    const std::vector<double> resid(fit.resid.data(), fit.resid.data() + fit.resid.size());
    rec.varsigma_hat = select_bandwidth(empirical_covariogram(resid, ctx.nl, ctx.bins), c.eta).varsigma_hat;

    for (std::size_t k = 0; k < m; ++k) {
      const auto& e = c.estimators[k];
      switch (e.kind) {
        case EstimatorKind::Hc0:
          rec.tstat[k] = slope_t(vcov_hc(fit, HcFlavor::Hc0));
          break;
        case EstimatorKind::Hc1:
          rec.tstat[k] = slope_t(vcov_hc(fit, HcFlavor::Hc1));
          break;
        case EstimatorKind::ShacAuto:
          rec.bandwidth[k] = rec.varsigma_hat;
          rec.tstat[k] = slope_t(vcov_shac(fit, ctx.nl, ShacSpec{e.kernel, rec.varsigma_hat}));
          break;
        case EstimatorKind::ShacFixed:
          rec.bandwidth[k] = e.bandwidth;
          rec.tstat[k] = slope_t(vcov_shac(fit, ctx.nl, ShacSpec{e.kernel, e.bandwidth}));
          break;
      }
    }
  } catch (const Error& err) {
    rec.failed = true;
    rec.failure = err.what();
  }
  return rec;
}

LevelSummary summarize_level(const McCampaign& c, std::span<const IterationRecord> records, double range_param) {
  const std::size_t m = c.estimators.size();
  LevelSummary s;
  s.range_param = range_param;
  s.rejection_rate.assign(m, 0.0);
  s.non_psd.assign(m, 0);
  std::vector<long> rejections(m, 0);
  double range_sum = 0.0;
  double bw_sum = 0.0;
  for (const auto& r : records) {
    if (r.failed) {
      ++s.failed;
      continue;
    }
    ++s.completed;
    range_sum += r.realized_range;
    bw_sum += r.varsigma_hat;
    for (std::size_t k = 0; k < m; ++k) {
      if (std::isnan(r.tstat[k])) ++s.non_psd[k];
      if (std::abs(r.tstat[k]) > kCriticalValue) ++rejections[k];
    }
  }
  if (s.completed > 0) {
    s.mean_realized_range = range_sum / s.completed;
    s.mean_varsigma_hat = bw_sum / s.completed;
    for (std::size_t k = 0; k < m; ++k) s.rejection_rate[k] = static_cast<double>(rejections[k]) / s.completed;
  }
  return s;
}

McResult run_campaign(const McCampaign& c, int threads, const LevelCallback& on_level) {
  return run_campaign(CampaignContext(c), threads, on_level);
}

McResult run_campaign(const CampaignContext& ctx, int threads, const LevelCallback& on_level) {
  const McCampaign& c = ctx.campaign;
  threads = std::max(1, threads);
  McResult result;
  result.campaign = c;
  const int iters = c.iters;
  result.ledger.resize(c.range_levels.size() * static_cast<std::size_t>(iters));

  for (std::size_t lv = 0; lv < c.range_levels.size(); ++lv) {
    const int level = static_cast<int>(lv);
    IterationRecord* slots = result.ledger.data() + lv * static_cast<std::size_t>(iters);
    SemivariogramModel model = c.model;
    model.range = c.range_levels[lv];

    std::optional<FieldSampler> sampler;
    std::string sampler_error;
    try {
      sampler.emplace(ctx.ps, model);
    } catch (const Error& err) {
      sampler_error = err.what();
    }

    if (sampler) {
      std::atomic<int> next{0};
      const auto work = [&] {
        for (int k = next.fetch_add(1); k < iters; k = next.fetch_add(1)) {
          slots[k] = run_iteration(ctx, *sampler, level, k);
        }
      };
      std::vector<std::thread> pool;
      for (int t = 1; t < threads; ++t) pool.emplace_back(work);
      work();
      for (auto& th : pool) th.join();
    } else {
      for (int k = 0; k < iters; ++k) {
        slots[k] = IterationRecord{};
        slots[k].level = level;
        slots[k].iter = k;
        slots[k].failed = true;
        slots[k].failure = sampler_error;
        slots[k].tstat.assign(c.estimators.size(), std::numeric_limits<double>::quiet_NaN());
        slots[k].bandwidth.assign(c.estimators.size(), std::numeric_limits<double>::quiet_NaN());
      }
    }

    LevelSummary summary = summarize_level(c, {slots, static_cast<std::size_t>(iters)}, c.range_levels[lv]);
    result.levels.push_back(summary);
    if (on_level) on_level(level, summary);
    if (static_cast<double>(summary.failed) > c.max_failure_rate * iters) {
      std::string why;
      for (int k = 0; k < iters; ++k) {
        if (slots[k].failed) {
          why = slots[k].failure;
          break;
        }
      }
      throw CampaignError("level " + std::to_string(level) + " (range " + format_km(c.range_levels[lv]) +
                          " km): " + std::to_string(summary.failed) + " of " + std::to_string(iters) +
                          " iterations failed: " + why);
    }
  }
  return result;
}

void write_ledger_csv(std::ostream& os, const McResult& r) {
  const auto& c = r.campaign;
  os << std::setprecision(17);
  os << "level,range_param,iter,status,realized_range,varsigma_hat";
  for (const auto& e : c.estimators) os << ",t_" << e.label();
  os << '\n';
  for (const auto& rec : r.ledger) {
    os << rec.level << ',' << c.range_levels[static_cast<std::size_t>(rec.level)] << ',' << rec.iter << ','
       << (rec.failed ? "failed" : "ok");
    if (rec.failed) {
      os << ",,";
      for (std::size_t k = 0; k < c.estimators.size(); ++k) os << ',';
    } else {
      os << ',' << rec.realized_range << ',' << rec.varsigma_hat;
      for (double t : rec.tstat) os << ',' << t;
    }
    os << '\n';
  }
}

void write_summary_csv(std::ostream& os, const McResult& r) {
  const auto& c = r.campaign;
  os << std::setprecision(17);
  os << "level,range_param,completed,failed,mean_realized_range,mean_varsigma_hat";
  for (const auto& e : c.estimators) os << ",rate_" << e.label();
  for (const auto& e : c.estimators) os << ",nonpsd_" << e.label();
  os << '\n';
  for (std::size_t lv = 0; lv < r.levels.size(); ++lv) {
    const auto& s = r.levels[lv];
    os << lv << ',' << s.range_param << ',' << s.completed << ',' << s.failed << ',' << s.mean_realized_range << ','
       << s.mean_varsigma_hat;
    for (double rate : s.rejection_rate) os << ',' << rate;
    for (int np : s.non_psd) os << ',' << np;
    os << '\n';
  }
}

std::vector<double> default_inverse_u_grid(const PointSet& ps, int points) {
  if (points < 2) throw InvalidInput("bandwidth grid needs at least 2 points");
  const double diameter =
      ps.size() <= kExactDiameterLimit ? max_pairwise_distance(ps) : hull_diameter(ps);
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) grid[static_cast<std::size_t>(k)] = 0.5 * diameter * k / (points - 1);
  return grid;
}

InverseUCurve export_inverse_u(const PointSet& ps, const FieldSampler& sampler, std::uint64_t seed,
                               std::uint64_t draw, std::span<const double> grid, KernelKind kernel) {
  const FieldDraw y = sampler.draw(seed, 2 * draw);
  const FieldDraw x = sampler.draw(seed, 2 * draw + 1);
  const RegressionFit fit = fit_ols(make_design({x.values}, {"x"}, y.values));
  InverseUCurve curve;
  for (const auto& pt : se_curve(fit, ps, kernel, grid)) {
    curve.bandwidth.push_back(pt.bandwidth);
    curve.se.push_back(pt.estimate.se(pt.estimate.se.size() - 1));
  }
  const auto hc0 = vcov_hc(fit, HcFlavor::Hc0);
  const auto hc1 = vcov_hc(fit, HcFlavor::Hc1);
  curve.hc0_se = hc0.se(hc0.se.size() - 1);
  curve.hc1_se = hc1.se(hc1.se.size() - 1);
  curve.selected = select_bandwidth_for_fit(fit, ps);
  return curve;
}

InverseUCurve export_inverse_u(const PointSet& ps, const SemivariogramModel& model, std::uint64_t seed,
                               std::uint64_t draw, std::span<const double> grid, KernelKind kernel) {
  return export_inverse_u(ps, FieldSampler(ps, model), seed, draw, grid, kernel);
}

void write_inverse_u_csv(std::ostream& os, const InverseUCurve& curve) {
  const auto old = os.precision(17);
  os << "bandwidth,se_shac,se_hc1,se_hc0\n";
  for (std::size_t k = 0; k < curve.bandwidth.size(); ++k) {
    os << curve.bandwidth[k] << ',' << curve.se[k] << ',' << curve.hc1_se << ',' << curve.hc0_se << '\n';
  }
  os.precision(old);
}

}  // namespace conley
