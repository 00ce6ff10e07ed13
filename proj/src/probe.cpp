#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <mutex>

#include "roundstat/analytic.hpp"
#include "roundstat/errors.hpp"
#include "roundstat/experiment.hpp"
#include "roundstat/kernels.hpp"
#include "trial_runner.hpp"

namespace roundstat {

std::string ProbeConfig::to_json() const {
  nlohmann::ordered_json j;
  j["experiment"] = "validate-model";
  j["format"] = format;
  j["n_total"] = n_total;
  j["checkpoints_per_decade"] = checkpoints_per_decade;
  j["trials"] = trials;
  j["early_trials"] = early_trials;
  j["early_window"] = {early_begin, early_end};
  j["late_fraction"] = late_fraction;
  j["bins"] = bins;
  j["seed"] = seed;
  return j.dump();
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr long kLateSamples = 1'000'000;  // late-window deltas kept over all trials

std::vector<long> checkpoints(long n_total, int per_decade) {
  std::vector<long> out;
  const double decades = std::log10(static_cast<double>(n_total));
  const int steps = static_cast<int>(std::ceil(decades * per_decade));
  for (int k = 0; k <= steps; ++k) {
    const long i = std::min(n_total, std::lround(std::pow(10.0, static_cast<double>(k) / per_decade)));
    if (out.empty() || i > out.back()) out.push_back(i);
  }
  if (out.back() != n_total) out.push_back(n_total);
  return out;
}

// Running sum compared against a compensated carrier sum of the exact products.
struct ProbeLayout {
  std::vector<long> cps;
  long early_begin, early_end;
  long late_begin, late_stride;
  Eigen::Index early_slots, late_slots;
  Eigen::Index width() const { return static_cast<Eigen::Index>(cps.size()) + early_slots + late_slots; }
};

void run_probe_trial(Rng& rng, long n, bool dependent, const ProbeLayout& lay, const RoundedArithmetic& ar,
                     Eigen::Ref<Eigen::VectorXd> row, long& overflowed) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double h = ar.round(normal(rng));
  row.setConstant(kNaN);
  double s = 0.0, ref = 0.0, comp = 0.0;
  std::size_t c = 0;
  const auto ncp = static_cast<Eigen::Index>(lay.cps.size());
  try {
    for (long i = 1; i <= n; ++i) {
      const double x = ar.round(normal(rng));
      const double y = dependent ? ar.round(x * h) : ar.round(normal(rng));
      const double p = x * y;  // exact: both factors carry at most 32 bits
      const double fp = ar.mul(x, y);
      if (i == 1) {
        s = fp;
      } else {
        const double r = s + fp;
        s = ar.add(s, fp);
        if (r != 0.0) {
          const double d = s / r - 1.0;
          if (i >= lay.early_begin && i <= lay.early_end)
            row[ncp + (i - lay.early_begin)] = d;
          else if (lay.late_slots && i >= lay.late_begin && (i - lay.late_begin) % lay.late_stride == 0) {
            const long slot = (i - lay.late_begin) / lay.late_stride;
            if (slot < lay.late_slots) row[ncp + lay.early_slots + slot] = d;
          }
        }
      }
      // Neumaier
      const double t = ref + p;
      comp += std::abs(ref) >= std::abs(p) ? (ref - t) + p : (p - t) + ref;
      ref = t;
      if (c < lay.cps.size() && lay.cps[c] == i) row[static_cast<Eigen::Index>(c++)] = s - (ref + comp);
    }
  } catch (const OverflowError&) {
    ++overflowed;  // later checkpoints stay NaN
  }
}

struct ColumnStats {
  long count = 0;
  double mse = 0.0, var = 0.0;
};

ColumnStats finite_stats(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  ColumnStats st;
  double sum = 0.0, sq = 0.0;
  for (const auto* col : {&a, &b})
    for (Eigen::Index t = 0; t < col->size(); ++t) {
      const double v = (*col)[t];
      if (std::isnan(v)) continue;
      ++st.count;
      sum += v;
      sq += v * v;
    }
  if (st.count < 2) return {st.count, kNaN, kNaN};
  const double N = static_cast<double>(st.count);
  st.mse = sq / N;
  st.var = (sq - sum * sum / N) / (N - 1.0);
  return st;
}

std::vector<double> finite_block(const Eigen::MatrixXd& m, Eigen::Index col0, Eigen::Index cols) {
  std::vector<double> out;
  for (Eigen::Index j = col0; j < col0 + cols; ++j)
    for (Eigen::Index t = 0; t < m.rows(); ++t)
      if (!std::isnan(m(t, j))) out.push_back(m(t, j));
  return out;
}

}  // namespace

ProbeResult model_validity_probe(const ProbeConfig& cfg) {
  if (cfg.n_total < 2) throw PreconditionError("probe: n_total must be at least 2");
  if (cfg.checkpoints_per_decade < 1) throw PreconditionError("probe: checkpoints_per_decade must be positive");
  if (cfg.trials < kMinTrials) throw PreconditionError("trials must be at least 100");
  if (cfg.early_trials < 0) throw PreconditionError("probe: early_trials must be non-negative");
  if (cfg.early_begin < 2 || cfg.early_end < cfg.early_begin || cfg.early_end > cfg.n_total)
    throw PreconditionError("probe: early window must satisfy 2 <= begin <= end <= n_total");
  if (!(cfg.late_fraction > 0.0 && cfg.late_fraction < 1.0))
    throw PreconditionError("probe: late_fraction must lie in (0, 1)");
  if (cfg.bins < 1) throw PreconditionError("probe: bins must be positive");
  const FloatFormat fmt = make_format(cfg.format);
  const RoundedArithmetic ar(fmt);

  ProbeLayout full;
  full.cps = checkpoints(cfg.n_total, cfg.checkpoints_per_decade);
  full.early_begin = cfg.early_begin;
  full.early_end = cfg.early_end;
  full.early_slots = cfg.early_end - cfg.early_begin + 1;
  full.late_begin = std::max(cfg.early_end + 1, std::lround(cfg.late_fraction * static_cast<double>(cfg.n_total)));
  const long late_len = cfg.n_total - full.late_begin + 1;
  const long per_trial = std::max(1L, std::min(late_len, kLateSamples / cfg.trials));
  full.late_stride = std::max(1L, late_len / per_trial);
  full.late_slots = per_trial;

  ProbeLayout early = full;
  early.cps.erase(std::upper_bound(early.cps.begin(), early.cps.end(), cfg.early_end), early.cps.end());
  early.late_slots = 0;

  std::vector<long> overflow(4, 0);
  std::mutex overflow_mu;
  auto run = [&](const ProbeLayout& lay, long n, long trials, bool dependent, std::uint64_t grid) {
    if (trials == 0) return Eigen::MatrixXd(0, lay.width());
    return detail::run_trials(trials, lay.width(), cfg.threads, [&](long t, Eigen::Ref<Eigen::VectorXd> row) {
      Rng rng = make_stream(cfg.seed, grid, static_cast<std::uint64_t>(t));
      long of = 0;
      run_probe_trial(rng, n, dependent, lay, ar, row, of);
      if (of) {
        std::lock_guard lock(overflow_mu);
        overflow[grid] += of;
      }
    });
  };
  const Eigen::MatrixXd dep = run(full, cfg.n_total, cfg.trials, true, 0);
  const Eigen::MatrixXd dep_early = run(early, cfg.early_end, cfg.early_trials, true, 1);
  const Eigen::MatrixXd ctrl = run(full, cfg.n_total, cfg.trials, false, 2);
  const Eigen::MatrixXd ctrl_early = run(early, cfg.early_end, cfg.early_trials, false, 3);

  ProbeResult res;
  res.config = cfg;
  res.overflowed_trials = overflow[0] + overflow[1] + overflow[2] + overflow[3];
  const double s2 = delta_model(fmt).sigma2;
  const Eigen::VectorXd none(0);
  double e_emp = 0, e_an = 0, e_cemp = 0, l_emp = 0, l_an = 0, l_cemp = 0;
  double cmin = std::numeric_limits<double>::infinity(), cmax = -cmin;
  for (std::size_t c = 0; c < full.cps.size(); ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    const bool has_early = c < early.cps.size() && cfg.early_trials > 0;
    ProbeCheckpoint cp;
    cp.i = full.cps[c];
    const ColumnStats d = finite_stats(dep.col(col), has_early ? Eigen::VectorXd(dep_early.col(col)) : none);
    const ColumnStats k = finite_stats(ctrl.col(col), has_early ? Eigen::VectorXd(ctrl_early.col(col)) : none);
    cp.trials_dep = d.count;
    cp.mse_dep = d.mse;
    cp.var_dep = d.var;
    // x_i^2 h summands: E(z^2) = 3, E(z_j z_k) = 1
    cp.analytic_dep = hbar_fast(3.0, 1.0, cp.i, s2);
    cp.analytic_marginal = hbar_fast(1.0, 0.0, cp.i, s2);
    cp.trials_ctrl = k.count;
    cp.mse_ctrl = k.mse;
    cp.var_ctrl = k.var;
    cp.analytic_ctrl = cp.analytic_marginal;
    if (cp.i >= cfg.early_begin && cp.i <= cfg.early_end) {
      e_emp += cp.var_dep;
      e_an += cp.analytic_dep;
      e_cemp += cp.var_ctrl;
    }
    if (cp.i >= full.late_begin) {
      l_emp += cp.var_dep;
      l_an += cp.analytic_dep;
      l_cemp += cp.var_ctrl;
    }
    if (cp.i >= cfg.early_begin && std::isfinite(cp.var_ctrl)) {
      const double r = cp.var_ctrl / cp.analytic_ctrl;
      cmin = std::min(cmin, r);
      cmax = std::max(cmax, r);
    }
    res.series.push_back(cp);
  }
  // control analytic differs from dependent only by the moments
  double e_can = 0, l_can = 0;
  for (const auto& cp : res.series) {
    if (cp.i >= cfg.early_begin && cp.i <= cfg.early_end) e_can += cp.analytic_ctrl;
    if (cp.i >= full.late_begin) l_can += cp.analytic_ctrl;
  }
  res.early = {e_emp / e_an, e_cemp / e_can};
  res.late = {l_emp / l_an, l_cemp / l_can};
  res.control_min_ratio = cmin;
  res.control_max_ratio = cmax;

  const auto ncp = static_cast<Eigen::Index>(full.cps.size());
  const Eigen::Index early_ncp = static_cast<Eigen::Index>(early.cps.size());
  std::vector<double> ed = finite_block(dep, ncp, full.early_slots);
  if (cfg.early_trials > 0) {
    const auto more = finite_block(dep_early, early_ncp, early.early_slots);
    ed.insert(ed.end(), more.begin(), more.end());
  }
  const std::vector<double> ld = finite_block(dep, ncp + full.early_slots, full.late_slots);
  res.early_hist = delta_histogram(ed, fmt.u, cfg.bins);
  res.late_hist = delta_histogram(ld, fmt.u, cfg.bins);
  return res;
}

CsvTable ProbeResult::series_csv() const {
  CsvTable t;
  t.comment = "config: " + config.to_json();
  t.header = {"i",       "trials_dep", "mse_dep",  "var_dep",  "analytic_dep",  "analytic_marginal", "ratio_dep",
              "trials_ctrl", "mse_ctrl", "var_ctrl", "analytic_ctrl", "ratio_ctrl"};
  for (const auto& c : series)
    t.rows.push_back({std::to_string(c.i), std::to_string(c.trials_dep), format_double(c.mse_dep),
                      format_double(c.var_dep), format_double(c.analytic_dep), format_double(c.analytic_marginal),
                      format_double(c.var_dep / c.analytic_dep), std::to_string(c.trials_ctrl),
                      format_double(c.mse_ctrl), format_double(c.var_ctrl), format_double(c.analytic_ctrl),
                      format_double(c.var_ctrl / c.analytic_ctrl)});
  return t;
}

CsvTable ProbeResult::histogram_csv() const {
  CsvTable t;
  t.comment = "config: " + config.to_json();
  t.header = {"window", "bin_left", "bin_right", "empirical_density", "analytic_density", "count"};
  for (const auto& [name, h] : {std::pair<const char*, const DeltaHistogram*>{"early", &early_hist},
                                {"late", &late_hist}})
    for (std::size_t b = 0; b + 1 < h->edges.size(); ++b)
      t.rows.push_back({name, format_double(h->edges[b]), format_double(h->edges[b + 1]),
                        format_double(h->empirical_density[b]), format_double(h->analytic_density[b]),
                        std::to_string(h->count)});
  return t;
}

}  // namespace roundstat
