// roundstat: predictions, bounds and Monte Carlo datasets for rounding errors
// of random linear-algebra kernels. Output is machine-readable only.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "roundstat/errors.hpp"
#include "roundstat/experiment.hpp"

namespace {

using namespace roundstat;

struct Common {
  std::string kernel = "dot";
  std::string config_path;
  std::string out;
  std::string method = "exact";
  bool simulate = false;
};

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + out + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write to '" + out + "' failed");
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void add_experiment_flags(CLI::App* app, ExperimentConfig& cfg, Common& c, bool with_trials) {
  app->add_option("--kernel", c.kernel, "dot | matvec | matmul | trisolve | lu")->capture_default_str();
  app->add_option("--format", cfg.format, "bfloat16 | fp16 | fp32 | fp64-carrier")->capture_default_str();
  app->add_option("--dist-x", cfg.dist_x, "law of x (or A): family:params, e.g. uniform:0,1, gaussian:1,1")
      ->capture_default_str();
  app->add_option("--dist-y", cfg.dist_y, "law of y (or B, b)")->capture_default_str();
  app->add_option("--n", cfg.n_grid, "inner dimension; integer or comma grid")
      ->delimiter(',')
      ->capture_default_str();
  app->add_option("--m", cfg.m_grid,
                  "rows (matvec/matmul) or Wishart degrees of freedom (trisolve/lu); integer or comma grid "
                  "[default: 10 for matvec/matmul, 1050 for trisolve/lu]")
      ->delimiter(',');
  app->add_option("--p", cfg.p_grid, "matmul columns; integer or comma grid [default: 10]")->delimiter(',');
  if (with_trials) {
    app->add_option("--trials", cfg.trials, "Monte Carlo trials per grid point (>= 100)")->capture_default_str();
    app->add_option("--seed", cfg.seed, "master seed")->capture_default_str();
    app->add_option("--threads", cfg.threads, "worker threads, 0 = all cores; results do not depend on it")
        ->capture_default_str();
  }
  app->add_option("--config", c.config_path, "JSON config file; its keys override flags");
  app->add_option("--out", c.out, "output path; stdout when empty");
}

void add_bound_flags(CLI::App* app, BoundParams& b) {
  app->add_option("--lambda", b.lambda, "PB1/PB2 deviation parameter (dimensionless)")->capture_default_str();
  app->add_option("--zeta", b.zeta, "PB3 failure probability")->capture_default_str();
  app->add_option("--eta", b.eta, "corollary failure probability")->capture_default_str();
}

void finish_config(ExperimentConfig& cfg, const Common& c) {
  cfg.kernel = parse_kernel(c.kernel);
  if (!c.config_path.empty()) cfg.apply_json(read_file(c.config_path));
  cfg.validate();
}

int run(int argc, char** argv) {
  CLI::App app{"Rounding-error statistics for random matrix computations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "roundstat 1.0");

  ExperimentConfig cfg;
  Common common;

  auto* predict_cmd = app.add_subcommand("predict", "analytic mean and variance of the rounding error (JSON)");
  add_experiment_flags(predict_cmd, cfg, common, false);
  predict_cmd->add_option("--method", common.method, "exact | fast | asymptotic")->capture_default_str();

  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo MSE against the analytic prediction (CSV)");
  add_experiment_flags(sim_cmd, cfg, common, true);
  sim_cmd->add_flag("--with-bounds", cfg.with_bounds, "add bound columns (dot only)");
  add_bound_flags(sim_cmd, cfg.bounds);

  auto* bounds_cmd = app.add_subcommand("compare-bounds", "analytic variance against worst-case bounds (CSV)");
  add_experiment_flags(bounds_cmd, cfg, common, true);
  add_bound_flags(bounds_cmd, cfg.bounds);
  bounds_cmd->add_flag("--simulate", common.simulate, "also estimate the MSE by Monte Carlo");

  FigureOverrides fov;
  int fig_id = 0;
  long fig_trials = 0, fig_n_total = 0;
  std::uint64_t fig_seed = kDefaultSeed;
  std::vector<long> fig_n, fig_m, fig_p;
  std::string fig_out;
  auto* fig_cmd = app.add_subcommand("figures", "figure dataset at desk scale (CSV)");
  fig_cmd->add_option("--id", fig_id, "figure: 1, 2, 3, 6, 8, 9 or 10")->required();
  fig_cmd->add_option("--trials", fig_trials, "trials per point [default: 10000; 400 full-length for figure 6]");
  fig_cmd->add_option("--seed", fig_seed, "master seed")->capture_default_str();
  fig_cmd->add_option("--n", fig_n, "override the n grid")->delimiter(',');
  fig_cmd->add_option("--m", fig_m, "override the m grid")->delimiter(',');
  fig_cmd->add_option("--p", fig_p, "override the p grid (figure 8)")->delimiter(',');
  fig_cmd->add_option("--n-total", fig_n_total, "probe length for figure 6 [default: 1000000]");
  fig_cmd->add_option("--threads", fov.threads, "worker threads, 0 = all cores")->capture_default_str();
  add_bound_flags(fig_cmd, fov.bounds);
  fig_cmd->add_option("--out", fig_out, "output path; stdout when empty");

  ProbeConfig probe;
  std::string probe_out, hist_out;
  auto* probe_cmd = app.add_subcommand("validate-model", "dependent-input probe of the error model (CSV + JSON)");
  probe_cmd->add_option("--n-total", probe.n_total, "accumulation length")->capture_default_str();
  probe_cmd->add_option("--checkpoints-per-decade", probe.checkpoints_per_decade,
                        "log-spaced checkpoints per factor of 10 in i")
      ->capture_default_str();
  probe_cmd->add_option("--format", probe.format, "bfloat16 | fp16 | fp32 | fp64-carrier")->capture_default_str();
  probe_cmd->add_option("--trials", probe.trials, "full-length trials")->capture_default_str();
  probe_cmd->add_option("--early-trials", probe.early_trials, "extra trials stopped at the early window end")
      ->capture_default_str();
  probe_cmd->add_option("--early-begin", probe.early_begin, "first index of the early window")
      ->capture_default_str();
  probe_cmd->add_option("--early-end", probe.early_end, "last index of the early window")->capture_default_str();
  probe_cmd->add_option("--late-fraction", probe.late_fraction, "late window starts at this fraction of n-total")
      ->capture_default_str();
  probe_cmd->add_option("--bins", probe.bins, "histogram bins over [-u, u]")->capture_default_str();
  probe_cmd->add_option("--seed", probe.seed, "master seed")->capture_default_str();
  probe_cmd->add_option("--threads", probe.threads, "worker threads, 0 = all cores")->capture_default_str();
  probe_cmd->add_option("--out", probe_out, "variance series CSV; stdout when empty");
  probe_cmd->add_option("--hist-out", hist_out, "delta histogram CSV");

  PipelineConfig pipe;
  std::string pipe_out;
  auto* pipe_cmd = app.add_subcommand("pipeline", "least-squares normal-equation pipeline, per stage (CSV)");
  pipe_cmd->add_option("--m", pipe.m, "rows of H")->capture_default_str();
  pipe_cmd->add_option("--n", pipe.n, "columns of H")->capture_default_str();
  pipe_cmd->add_option("--format", pipe.format, "bfloat16 | fp16 | fp32 | fp64-carrier")->capture_default_str();
  pipe_cmd->add_option("--trials", pipe.trials, "Monte Carlo trials (>= 100)")->capture_default_str();
  pipe_cmd->add_option("--seed", pipe.seed, "master seed")->capture_default_str();
  pipe_cmd->add_option("--threads", pipe.threads, "worker threads, 0 = all cores")->capture_default_str();
  pipe_cmd->add_option("--out", pipe_out, "output path; stdout when empty");

  auto* formats_cmd = app.add_subcommand("formats", "preset format parameters (JSON)");

  CLI11_PARSE(app, argc, argv);

  if (*predict_cmd) {
    finish_config(cfg, common);
    const auto ps = predict(cfg, parse_method(common.method));
    emit((ps.size() == 1 ? to_json(ps.front()) : to_json(ps)) + "\n", common.out);
  } else if (*sim_cmd) {
    finish_config(cfg, common);
    emit(mc_mse(cfg).to_csv().str(), common.out);
  } else if (*bounds_cmd) {
    finish_config(cfg, common);
    emit(bounds_table(cfg, common.simulate).str(), common.out);
  } else if (*fig_cmd) {
    if (fig_trials) fov.trials = fig_trials;
    fov.seed = fig_seed;
    if (!fig_n.empty()) fov.n_grid = fig_n;
    if (!fig_m.empty()) fov.m_grid = fig_m;
    if (!fig_p.empty()) fov.p_grid = fig_p;
    if (fig_n_total) fov.n_total = fig_n_total;
    emit(reproduce_figure(fig_id, fov).str(), fig_out);
  } else if (*probe_cmd) {
    const ProbeResult r = model_validity_probe(probe);
    if (!hist_out.empty()) emit(r.histogram_csv().str(), hist_out);
    if (probe_out.empty()) {
      emit(r.series_csv().str(), "");
    } else {
      emit(r.series_csv().str(), probe_out);
      nlohmann::ordered_json j;
      j["config"] = nlohmann::ordered_json::parse(probe.to_json());
      j["early_ratio_dependent"] = r.early.dependent;
      j["late_ratio_dependent"] = r.late.dependent;
      j["early_ratio_control"] = r.early.control;
      j["late_ratio_control"] = r.late.control;
      j["control_ratio_min"] = r.control_min_ratio;
      j["control_ratio_max"] = r.control_max_ratio;
      j["overflowed_trials"] = r.overflowed_trials;
      std::cout << j.dump() << "\n";
    }
  } else if (*pipe_cmd) {
    emit(zf_ls_pipeline(pipe).to_csv().str(), pipe_out);
  } else if (*formats_cmd) {
    emit(formats_json() + "\n", "");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const roundstat::PreconditionError& e) {
    std::cerr << "roundstat: precondition violated: " << e.what() << "\n";
    return 2;
  } catch (const roundstat::UnavailableError& e) {
    std::cerr << "roundstat: unavailable: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "roundstat: error: " << e.what() << "\n";
    return 1;
  }
}
