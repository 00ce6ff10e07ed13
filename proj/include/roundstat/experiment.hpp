#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "roundstat/analytic.hpp"
#include "roundstat/bounds.hpp"
#include "roundstat/csv.hpp"
#include "roundstat/delta_model.hpp"
#include "roundstat/rng.hpp"

namespace roundstat {

enum class Kernel { dot, matvec, matmul, trisolve, lu };
const char* kernel_name(Kernel k) noexcept;
Kernel parse_kernel(std::string_view name);

inline constexpr long kMinTrials = 100;

struct ExperimentConfig {
  std::string experiment = "simulate";
  Kernel kernel = Kernel::dot;
  std::string format = "fp32";
  // Input laws for dot/matvec/matmul; trisolve and lu draw Wishart inputs.
  std::string dist_x = "uniform:0,1";
  std::string dist_y = "uniform:0,1";
  std::vector<long> n_grid = {10, 100, 1000, 10000};
  std::vector<long> m_grid;  // empty: kernel default
  std::vector<long> p_grid;  // empty: kernel default
  long trials = 10000;
  std::uint64_t seed = kDefaultSeed;
  std::string out;
  bool with_bounds = false;  // dot only
  BoundParams bounds;
  unsigned threads = 0;  // 0: hardware concurrency; never changes results

  // {experiment, kernel, format, dist_x, dist_y, n_grid, m_grid, p, trials, seed}
  std::string to_json() const;
  // Keys present in `json` override this config.
  void apply_json(const std::string& json);
  void validate() const;
  std::vector<long> effective_m_grid() const;
  std::vector<long> effective_p_grid() const;
};

struct GridPointReport {
  long n = 0;
  long m = 0;
  long p = 0;
  std::string element;
  long trials = 0;
  std::uint64_t seed = 0;
  double mse = 0.0;
  std::optional<double> variance;  // set for direct error samples
  std::optional<double> mean;
  double std_err = 0.0;            // of the mse estimate
  double analytic = 0.0;
  std::string method;
  std::optional<BoundReport> bounds;
};

struct MseReport {
  ExperimentConfig config;
  std::vector<GridPointReport> rows;
  CsvTable to_csv() const;
};

MseReport mc_mse(const ExperimentConfig& config);

// Mean, variance, mse and the mse standard error of a column of errors.
struct SampleStats {
  double mean;
  double variance;
  double mse;
  double mse_std_err;
};
SampleStats delta_stats(const Eigen::Ref<const Eigen::VectorXd>& deltas);

// Analytic predictions for every grid point of `config`; nothing is sampled.
std::vector<MomentPrediction> predict(const ExperimentConfig& config, Method method);

// Inner-product comparators per n. With `simulate`, mse_sim comes from mc_mse.
CsvTable bounds_table(const ExperimentConfig& config, bool simulate);

// Preset formats as a JSON array.
std::string formats_json();

// ---- dependent-input probe -------------------------------------------------

struct ProbeConfig {
  long n_total = 1'000'000;
  int checkpoints_per_decade = 10;  // log-spaced checkpoint density
  std::string format = "fp32";
  long trials = 400;                // full-length trials
  long early_trials = 10000;        // extra trials truncated at early_end
  long early_begin = 10;
  long early_end = 1000;
  double late_fraction = 0.3;       // late window: [late_fraction n_total, n_total]
  int bins = 50;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 0;
  std::string to_json() const;
};

struct ProbeCheckpoint {
  long i = 0;
  long trials_dep = 0;
  double mse_dep = 0.0;
  double var_dep = 0.0;
  double analytic_dep = 0.0;       // summand moments E(z^2)=3, E(z_j z_k)=1
  double analytic_marginal = 0.0;  // marginal moments of x and y only
  long trials_ctrl = 0;
  double mse_ctrl = 0.0;
  double var_ctrl = 0.0;
  double analytic_ctrl = 0.0;
};

struct WindowRatios {
  double dependent;
  double control;
};

struct ProbeResult {
  ProbeConfig config;
  std::vector<ProbeCheckpoint> series;
  DeltaHistogram early_hist;  // additions in the early window
  DeltaHistogram late_hist;   // additions in the late window
  WindowRatios early{0, 0};   // sum empirical / sum analytic over the window
  WindowRatios late{0, 0};
  double control_min_ratio = 0.0;  // per-checkpoint extremes of the control
  double control_max_ratio = 0.0;
  long overflowed_trials = 0;

  CsvTable series_csv() const;
  CsvTable histogram_csv() const;  // window,bin_left,bin_right,empirical_density,analytic_density
};

ProbeResult model_validity_probe(const ProbeConfig& config);

// ---- ZF / least-squares pipeline -------------------------------------------

struct PipelineConfig {
  long m = 200;
  int n = 8;
  std::string format = "fp32";
  long trials = 10000;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 0;
  std::string to_json() const;
};

struct StageReport {
  std::string stage;
  std::string element;
  long trials = 0;
  double mse = 0.0;
  std::optional<double> variance;
  std::optional<double> mean;
  double std_err = 0.0;
  std::optional<double> analytic;
  std::string method;
};

struct PipelineReport {
  PipelineConfig config;
  std::vector<StageReport> stages;
  CsvTable to_csv() const;
};

PipelineReport zf_ls_pipeline(const PipelineConfig& config);

// ---- figure datasets -------------------------------------------------------

struct FigureOverrides {
  std::optional<long> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<long>> n_grid;
  std::optional<std::vector<long>> m_grid;
  std::optional<std::vector<long>> p_grid;
  std::optional<long> n_total;  // figure 6
  BoundParams bounds;
  unsigned threads = 0;
};

inline constexpr int kFigureIds[] = {1, 2, 3, 6, 8, 9, 10};

CsvTable reproduce_figure(int fig_id, const FigureOverrides& overrides = {});

}  // namespace roundstat
