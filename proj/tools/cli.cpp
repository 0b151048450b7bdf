#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "conley/covariogram.hpp"
#include "conley/csv.hpp"
#include "conley/error.hpp"
#include "conley/geo.hpp"
#include "conley/mc.hpp"
#include "conley/moran.hpp"
#include "conley/randfield.hpp"
#include "conley/regress.hpp"
#include "conley/shac.hpp"

namespace conley::cli {

namespace {

// Where the observation coordinates come from.
struct CoordOptions {
  std::string x;
  std::string y;
  std::string lon;
  std::string lat;

  void add_to(CLI::App* app) {
    auto* ox = app->add_option("--x", x, "Projected x coordinate column (km)");
    auto* oy = app->add_option("--y", y, "Projected y coordinate column (km)");
    auto* olon = app->add_option("--lon", lon, "Longitude column (degrees)");
    auto* olat = app->add_option("--lat", lat, "Latitude column (degrees)");
    ox->needs(oy);
    oy->needs(ox);
    olon->needs(olat);
    olat->needs(olon);
    ox->excludes(olon);
    olon->excludes(ox);
  }

  bool given() const { return !x.empty() || !lon.empty(); }

  PointSet load(const Table& t) const {
    if (!x.empty()) return load_points(t, ColumnSpec{x, y}, Crs::ProjectedKm);
    if (!lon.empty()) return load_points(t, ColumnSpec{lon, lat}, Crs::LonLatDeg);
    throw InvalidInput("coordinates required: give --x/--y or --lon/--lat");
  }
};

// Outcome and regressors of a linear model read from the same table.
struct ModelOptions {
  std::string outcome;
  std::vector<std::string> regressors;
  bool no_intercept = false;
  int coord_controls = 0;

  void add_to(CLI::App* app) {
    app->add_option("--outcome", outcome, "Outcome column");
    app->add_option("--regressors", regressors, "Regressor columns (comma separated)")->delimiter(',');
    app->add_flag("--no-intercept", no_intercept, "Do not add an intercept column");
    app->add_option("--coord-controls", coord_controls,
                    "Add polynomial coordinate controls of this degree (0, 1 or 2)")
        ->check(CLI::Range(0, 2));
  }

  Design design(const Table& t, const PointSet& ps) const {
    if (outcome.empty()) throw InvalidInput("--outcome is required");
    std::vector<std::vector<double>> cols;
    for (const auto& r : regressors) cols.push_back(t.numeric_column(r));
    Design d = make_design(cols, regressors, t.numeric_column(outcome), !no_intercept);
    if (coord_controls > 0) d = add_coordinate_controls(d, ps, coord_controls);
    return d;
  }
};

struct BinOptions {
  int bins = kDefaultBins;
  double cutoff = 0.0;
  double eta = 0.0;

  void add_to(CLI::App* app) {
    app->add_option("--bins", bins, "Number of covariogram lag bins")->capture_default_str();
    app->add_option("--cutoff", cutoff, "Covariogram cutoff in km (default: 2/3 of the max distance)");
    app->add_option("--eta", eta, "Covariance tolerance for the range selector")->capture_default_str();
  }

  BinSpec spec(const PointSet& ps) const {
    BinSpec b = default_bins(ps);
    b.n_bins = bins;
    if (cutoff > 0.0) b.cutoff = cutoff;
    b.validate();
    return b;
  }
};

// Sample generation for the simulation subcommands.
struct SampleOptions {
  std::string input;
  CoordOptions coords;
  double cell = 70.0;
  int cols = 40;
  int rows = 25;
  std::size_t irregular = 0;
  double width = 2800.0;
  double height = 1750.0;
  std::uint64_t sample_seed = 1908;

  void add_to(CLI::App* app) {
    app->add_option("--input", input, "CSV of observation locations (otherwise a generated sample)");
    coords.add_to(app);
    app->add_option("--cell", cell, "Lattice cell size in km")->capture_default_str();
    app->add_option("--cols", cols, "Lattice columns")->capture_default_str();
    app->add_option("--rows", rows, "Lattice rows")->capture_default_str();
    app->add_option("--irregular", irregular, "Generate this many irregular points instead of a lattice");
    app->add_option("--width", width, "Irregular sample box width in km")->capture_default_str();
    app->add_option("--height", height, "Irregular sample box height in km")->capture_default_str();
    app->add_option("--sample-seed", sample_seed, "Seed of the irregular sample")->capture_default_str();
  }

  PointSet build() const {
    if (!input.empty()) return coords.load(read_csv_file(input));
    SampleSpec s;
    if (irregular > 0) {
      s.kind = SampleKind::Irregular;
      s.n_points = irregular;
      s.width_km = width;
      s.height_km = height;
      s.sample_seed = sample_seed;
    } else {
      s.kind = SampleKind::Lattice;
      s.cell_km = cell;
      s.cols = cols;
      s.rows = rows;
    }
    return s.build();
  }
};

struct FieldModelOptions {
  std::string family = "matern";
  double range = 200.0;
  double sill = 0.025;
  double nugget = 0.0;
  double nu = 1.5;

  void add_to(CLI::App* app) {
    app->add_option("--family", family, "exponential | gaussian | matern | spherical")->capture_default_str();
    app->add_option("--range", range, "Range parameter theta2 in km (0 = white noise)")->capture_default_str();
    app->add_option("--sill", sill, "Partial sill theta1")->capture_default_str();
    app->add_option("--nugget", nugget, "Nugget variance")->capture_default_str();
    app->add_option("--nu", nu, "Matern smoothness")->capture_default_str();
  }

  SemivariogramModel model() const {
    SemivariogramModel m;
    m.family = parse_family(family);
    m.range = range;
    m.partial_sill = sill;
    m.nugget = nugget;
    m.nu = nu;
    m.validate();
    return m;
  }
};

std::vector<double> residual_vector(const RegressionFit& fit) {
  return {fit.resid.data(), fit.resid.data() + fit.resid.size()};
}

// Writes to the file if a path is given, else to the fallback stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw InvalidInput("cannot write '" + path + "'");
    }
    os_ = file_ ? file_.get() : &fallback;
  }
  std::ostream& stream() { return *os_; }
  bool to_file() const { return file_ != nullptr; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

// ---------------------------------------------------------------------------

struct FitCommand {
  std::string input;
  CoordOptions coords;
  ModelOptions model;
  BinOptions bins;
  std::string kernel = "epanechnikov";
  std::string bandwidth = "auto";

  void add_to(CLI::App& root) {
    auto* app = root.add_subcommand("fit", "OLS with HC and spatial HAC standard errors");
    app->add_option("--input", input, "Input CSV with header row")->required();
    coords.add_to(app);
    model.add_to(app);
    bins.add_to(app);
    app->add_option("--kernel", kernel, "bartlett | uniform | epanechnikov | parzen | biweight | gaussian")
        ->capture_default_str();
    app->add_option("--bandwidth", bandwidth, "'auto' (covariogram range) or a fixed bandwidth in km")
        ->capture_default_str();
  }

  int run(std::ostream& out) const {
    const Table t = read_csv_file(input);
    const PointSet ps = coords.load(t);
    const RegressionFit fit = fit_ols(model.design(t, ps));
    const KernelKind k = parse_kernel(kernel);

    double bw = 0.0;
    std::string bw_note;
    if (bandwidth == "auto") {
      const auto est = select_bandwidth(empirical_covariogram(residual_vector(fit), ps, bins.spec(ps)), bins.eta);
      bw = est.varsigma_hat;
      bw_note = "auto, " + std::string(status_name(est.status));
    } else {
      std::size_t used = 0;
      try {
        bw = std::stod(bandwidth, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != bandwidth.size() || !(bw >= 0.0)) {
        throw InvalidInput("--bandwidth must be 'auto' or a non-negative number of km");
      }
      bw_note = "fixed";
    }

    const auto hc0 = vcov_hc(fit, HcFlavor::Hc0);
    const auto hc1 = vcov_hc(fit, HcFlavor::Hc1);
    const auto shac = vcov_shac(fit, ps, ShacSpec{k, bw});

    out << std::setprecision(6);
    out << "observations: " << fit.n() << "  regressors: " << fit.p() << '\n';
    out << "SHAC kernel: " << kernel_name(k) << "  bandwidth: " << bw << " km (" << bw_note << ")\n";
    const double y_scale = (fit.x * fit.beta + fit.resid).cwiseAbs().maxCoeff();
    if (fit.resid.cwiseAbs().maxCoeff() <= 1e-12 * y_scale) {
      out << "warning: degenerate fit, residuals are zero to rounding; standard errors are meaningless\n";
    }
    if (shac.non_psd()) {
      out << "warning: SHAC variance is negative for " << shac.negative_variance.size()
          << " coefficient(s); their SE is reported as nan\n";
    }
    const int w = 14;
    out << std::left << std::setw(16) << "term" << std::right << std::setw(w) << "estimate" << std::setw(w)
        << "se_hc0" << std::setw(w) << "se_hc1" << std::setw(w) << "t_hc1" << std::setw(w) << "se_shac"
        << std::setw(w) << "t_shac" << '\n';
    for (std::size_t j = 0; j < fit.p(); ++j) {
      const auto e = static_cast<Eigen::Index>(j);
      out << std::left << std::setw(16) << fit.names[j] << std::right << std::setw(w) << fit.beta(e)
          << std::setw(w) << hc0.se(e) << std::setw(w) << hc1.se(e) << std::setw(w) << hc1.tstat(e)
          << std::setw(w) << shac.se(e) << std::setw(w) << shac.tstat(e) << '\n';
    }
    return kOk;
  }
};

struct CovariogramCommand {
  std::string input;
  CoordOptions coords;
  ModelOptions model;
  BinOptions bins;
  std::string resid;
  std::string output;

  void add_to(CLI::App& root) {
    auto* app = root.add_subcommand("covariogram", "Empirical covariogram of residuals and its range");
    app->add_option("--input", input, "Input CSV with header row")->required();
    coords.add_to(app);
    model.add_to(app);
    bins.add_to(app);
    app->add_option("--resid", resid, "Column of precomputed residuals (instead of --outcome)");
    app->add_option("--output", output, "Covariogram CSV path (default: stdout)");
  }

  int run(std::ostream& out, std::ostream& err) const {
    const Table t = read_csv_file(input);
    const PointSet ps = coords.load(t);
    std::vector<double> e;
    if (!resid.empty()) {
      e = t.numeric_column(resid);
    } else {
      e = residual_vector(fit_ols(model.design(t, ps)));
    }
    const Covariogram cg = empirical_covariogram(e, ps, bins.spec(ps));
    const BandwidthEstimate est = select_bandwidth(cg, bins.eta);

    Sink sink(output, out);
    write_covariogram_csv(sink.stream(), cg);
    std::ostream& summary = sink.to_file() ? out : err;
    summary << std::setprecision(6) << "varsigma_hat=" << est.varsigma_hat << " status=" << status_name(est.status)
            << " bin=" << est.bin_index << " eta=" << est.eta << '\n';
    return kOk;
  }
};

struct SimulateCommand {
  SampleOptions sample;
  FieldModelOptions field;
  std::uint64_t seed = 1908;
  std::uint64_t stream = 0;
  int count = 1;
  bool raw = false;
  std::string output;

  void add_to(CLI::App& root) {
    auto* app = root.add_subcommand("simulate-field", "Gaussian random field at a point sample");
    sample.add_to(app);
    field.add_to(app);
    app->add_option("--seed", seed, "Master seed")->capture_default_str();
    app->add_option("--stream", stream, "First stream id")->capture_default_str();
    app->add_option("--count", count, "Number of independent fields (consecutive streams)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_flag("--raw", raw, "Keep the model variance instead of standardizing each draw");
    app->add_option("--output", output, "CSV path (default: stdout)");
  }

  int run(std::ostream& out) const {
    const PointSet ps = sample.build();
    SamplerOptions opts;
    opts.standardize = !raw;
    const FieldSampler sampler(ps, field.model(), opts);
    std::vector<FieldDraw> draws;
    for (int k = 0; k < count; ++k) draws.push_back(sampler.draw(seed, stream + static_cast<std::uint64_t>(k)));

    Sink sink(output, out);
    auto& os = sink.stream();
    os << std::setprecision(17);
    const bool lonlat = ps.crs() == Crs::LonLatDeg;
    os << (lonlat ? "lon,lat" : "x,y");
    if (count == 1) {
      os << ",value";
    } else {
      for (int k = 1; k <= count; ++k) os << ",value" << k;
    }
    os << '\n';
    for (std::size_t i = 0; i < ps.size(); ++i) {
      os << ps[i].c1 << ',' << ps[i].c2;
      for (const auto& d : draws) os << ',' << d.values[i];
      os << '\n';
    }
    return kOk;
  }
};

struct MoranCommand {
  std::string input;
  CoordOptions coords;
  ModelOptions model;
  std::string column;
  double band = 0.0;
  int knn = 0;
  bool binary = false;

  void add_to(CLI::App& root) {
    auto* app = root.add_subcommand("moran", "Moran's I of a column or of regression residuals");
    app->add_option("--input", input, "Input CSV with header row")->required();
    coords.add_to(app);
    model.add_to(app);
    app->add_option("--column", column, "Variable to test (instead of residuals from --outcome)");
    auto* ob = app->add_option("--band", band, "Distance band weights with this radius in km");
    auto* ok = app->add_option("--knn", knn, "k-nearest-neighbour weights");
    ob->excludes(ok);
    ok->excludes(ob);
    app->add_flag("--binary", binary, "Keep binary weights instead of row-normalizing");
  }

  int run(std::ostream& out) const {
    const Table t = read_csv_file(input);
    const PointSet ps = coords.load(t);
    std::vector<double> v;
    if (!column.empty()) {
      v = t.numeric_column(column);
    } else {
      v = residual_vector(fit_ols(model.design(t, ps)));
    }
    WeightsScheme scheme = DistanceBand{200.0};
    if (knn > 0) scheme = KNearest{knn};
    else if (band > 0.0) scheme = DistanceBand{band};
    const WeightsMatrix w = build_weights(ps, scheme, !binary);
    const MoranResult r = morans_i(v, w);
    out << std::setprecision(6);
    out << "I = " << r.i << "\nE[I] = " << r.expected << "\nVar[I] = " << r.variance << "\nz = " << r.z
        << "\np = " << r.p_value << '\n';
    if (!w.isolates.empty()) out << "isolates: " << w.isolates.size() << '\n';
    return kOk;
  }
};

struct McCommand {
  std::string config;
  int threads = 1;
  int iters = 0;
  std::string ledger;
  std::string summary;
  bool quiet = false;

  void add_to(CLI::App& root) {
    auto* app = root.add_subcommand("mc", "Monte Carlo rejection-rate campaign");
    app->add_option("--config", config, "Campaign file (key = value); omit for the desk defaults");
    app->add_option("--threads", threads, "Worker threads (results do not depend on it)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--iters", iters, "Override the iterations per level");
    app->add_option("--ledger", ledger, "Per-iteration CSV path");
    app->add_option("--summary", summary, "Per-level CSV path (default: stdout)");
    app->add_flag("--quiet", quiet, "No per-level progress on stderr");
  }

  int run(std::ostream& out, std::ostream& err) const {
    McCampaign c = config.empty() ? desk_campaign() : load_campaign_file(config);
    if (iters > 0) c.iters = iters;
    c.validate();
    const auto progress = [&](int level, const LevelSummary& s) {
      if (quiet) return;
      err << "level " << level << " range " << s.range_param << " km: ";
      for (std::size_t k = 0; k < s.rejection_rate.size(); ++k) {
        err << (k ? ", " : "") << c.estimators[k].label() << ' ' << std::setprecision(3)
            << 100.0 * s.rejection_rate[k] << '%';
      }
      err << '\n';
    };
    const McResult r = run_campaign(c, threads, progress);
    if (!ledger.empty()) {
      Sink sink(ledger, out);
      write_ledger_csv(sink.stream(), r);
    }
    Sink sink(summary, out);
    write_summary_csv(sink.stream(), r);
    return kOk;
  }
};

struct InverseUCommand {
  SampleOptions sample;
  FieldModelOptions field;
  std::uint64_t seed = 1908;
  std::uint64_t draw = 0;
  std::string kernel = "epanechnikov";
  int points = 30;
  double max_bandwidth = 0.0;
  std::string output;

  void add_to(CLI::App& root) {
    auto* app = root.add_subcommand("inverse-u", "SHAC standard error as a function of the bandwidth");
    sample.add_to(app);
    field.add_to(app);
    app->add_option("--seed", seed, "Master seed")->capture_default_str();
    app->add_option("--draw", draw, "Draw index (uses streams 2*draw and 2*draw+1)")->capture_default_str();
    app->add_option("--kernel", kernel, "SHAC kernel")->capture_default_str();
    app->add_option("--grid-points", points, "Number of bandwidths")->capture_default_str();
    app->add_option("--max-bandwidth", max_bandwidth, "Largest bandwidth in km (default: half the diameter)");
    app->add_option("--output", output, "CSV path (default: stdout)");
  }

  int run(std::ostream& out, std::ostream& err) const {
    const PointSet ps = sample.build();
    std::vector<double> grid = default_inverse_u_grid(ps, points);
    if (max_bandwidth > 0.0) {
      for (int k = 0; k < points; ++k) grid[static_cast<std::size_t>(k)] = max_bandwidth * k / (points - 1);
    }
    const InverseUCurve curve = export_inverse_u(ps, field.model(), seed, draw, grid, parse_kernel(kernel));
    Sink sink(output, out);
    write_inverse_u_csv(sink.stream(), curve);
    std::ostream& summary = sink.to_file() ? out : err;
    summary << std::setprecision(6) << "varsigma_hat=" << curve.selected.varsigma_hat
            << " status=" << status_name(curve.selected.status) << " hc1_se=" << curve.hc1_se << '\n';
    return kOk;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conley spatial HAC standard errors with a covariogram-range bandwidth", "conley"};
  app.require_subcommand(1);
  FitCommand fit;
  CovariogramCommand cov;
  SimulateCommand sim;
  MoranCommand moran;
  McCommand mc;
  InverseUCommand inv;
  fit.add_to(app);
  cov.add_to(app);
  sim.add_to(app);
  moran.add_to(app);
  mc.add_to(app);
  inv.add_to(app);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    // Subcommand --help is raised as CallForHelp from within the subcommand.
    err << e.what() << '\n';
    return kInputError;
  }

  try {
    if (app.got_subcommand("fit")) return fit.run(out);
    if (app.got_subcommand("covariogram")) return cov.run(out, err);
    if (app.got_subcommand("simulate-field")) return sim.run(out);
    if (app.got_subcommand("moran")) return moran.run(out);
    if (app.got_subcommand("mc")) return mc.run(out, err);
    if (app.got_subcommand("inverse-u")) return inv.run(out, err);
  } catch (const CampaignError& e) {
    err << "campaign failed: " << e.what() << '\n';
    return kCampaignFailure;
  } catch (const InvalidInput& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return kInputError;
}

}  // namespace conley::cli
