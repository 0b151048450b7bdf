#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "conley/covariogram.hpp"
#include "conley/geo.hpp"
#include "conley/kernels.hpp"
#include "conley/randfield.hpp"

namespace conley {

// |t| above this rejects H0: beta = 0 at the nominal 5% level.
inline constexpr double kCriticalValue = 1.96;

enum class SampleKind { Lattice, Irregular, PointsFile };

struct SampleSpec {
  SampleKind kind = SampleKind::Lattice;
  // lattice: cols x rows cells of cell_km
  double cell_km = 70.0;
  int cols = 40;
  int rows = 25;
  // irregular: n_points in a width_km x height_km box
  std::size_t n_points = 1000;
  double width_km = 2800.0;
  double height_km = 1750.0;
  std::uint64_t sample_seed = 1908;
  // points file
  std::string path;
  std::string x_column = "x";
  std::string y_column = "y";
  Crs crs = Crs::ProjectedKm;

  PointSet build() const;
};

enum class EstimatorKind { Hc0, Hc1, ShacAuto, ShacFixed };

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::Hc1;
  KernelKind kernel = KernelKind::Epanechnikov;
  double bandwidth = 0.0;  // ShacFixed only

  // hc0 | hc1 | auto_<kernel> | fixed_<kernel>_<km>
  std::string label() const;
};

// Accepts "hc0", "hc1", "auto:<kernel>", "fixed:<kernel>:<km>".
EstimatorSpec parse_estimator(std::string_view text);

struct McCampaign {
  SampleSpec sample;
  SemivariogramModel model;  // range is overridden by each level
  std::vector<double> range_levels;
  int iters = 500;
  std::vector<EstimatorSpec> estimators;
  std::uint64_t master_seed = 1908;
  double eta = 0.0;
  int n_bins = kDefaultBins;
  double max_failure_rate = 0.01;

  void validate() const;
};

// 40 x 25 lattice of 70 km cells, Matern(1.5) levels 0..750 km in 50 km
// steps, 500 iterations, HC1 plus covariogram-range SHAC with every kernel
// and the 25 km / 2500 km fixed Epanechnikov bandwidths.
McCampaign desk_campaign();

// key = value lines, '#' starts a comment. Keys not given keep the
// desk_campaign() defaults. See README for the schema.
McCampaign parse_campaign(std::istream& in);
McCampaign load_campaign_file(const std::string& path);

struct IterationRecord {
  int level = 0;
  int iter = 0;
  bool failed = false;
  std::string failure;
  double realized_range = 0.0;  // covariogram range of the outcome field
  double varsigma_hat = 0.0;    // covariogram range of the residuals
  std::vector<double> tstat;    // slope t-statistic per estimator
  std::vector<double> bandwidth;
};

struct LevelSummary {
  double range_param = 0.0;
  int completed = 0;
  int failed = 0;
  double mean_realized_range = 0.0;
  double mean_varsigma_hat = 0.0;
  std::vector<double> rejection_rate;
  std::vector<int> non_psd;
};

struct McResult {
  McCampaign campaign;
  std::vector<IterationRecord> ledger;  // level-major, iteration-minor
  std::vector<LevelSummary> levels;
};

// Shared per-campaign state: the sample, its neighbour list and lag bins.
struct CampaignContext {
  explicit CampaignContext(const McCampaign& c);
  CampaignContext(const McCampaign& c, PointSet points);

  McCampaign campaign;
  PointSet ps;
  BinSpec bins;
  NeighborList nl;
};

// Streams 2k (outcome) and 2k + 1 (regressor) of the level's stream block.
std::uint64_t outcome_stream(int level, int iter);
std::uint64_t regressor_stream(int level, int iter);

IterationRecord run_iteration(const CampaignContext& ctx, const FieldSampler& sampler, int level, int iter);

using LevelCallback = std::function<void(int level, const LevelSummary&)>;

McResult run_campaign(const McCampaign& c, int threads = 1, const LevelCallback& on_level = {});
McResult run_campaign(const CampaignContext& ctx, int threads = 1, const LevelCallback& on_level = {});

LevelSummary summarize_level(const McCampaign& c, std::span<const IterationRecord> records, double range_param);

void write_ledger_csv(std::ostream& os, const McResult& r);
void write_summary_csv(std::ostream& os, const McResult& r);

struct InverseUCurve {
  std::vector<double> bandwidth;
  std::vector<double> se;  // slope SE per bandwidth
  double hc0_se = 0.0;
  double hc1_se = 0.0;
  BandwidthEstimate selected;
};

// 0 .. half the domain diameter in `points` equal steps.
std::vector<double> default_inverse_u_grid(const PointSet& ps, int points = 30);

// One outcome/regressor draw pair (streams 2*draw, 2*draw + 1), slope SE
// over the bandwidth grid plus the HC reference levels.
InverseUCurve export_inverse_u(const PointSet& ps, const SemivariogramModel& model, std::uint64_t seed,
                               std::uint64_t draw, std::span<const double> grid, KernelKind kernel);
InverseUCurve export_inverse_u(const PointSet& ps, const FieldSampler& sampler, std::uint64_t seed,
                               std::uint64_t draw, std::span<const double> grid, KernelKind kernel);

void write_inverse_u_csv(std::ostream& os, const InverseUCurve& curve);

}  // namespace conley
