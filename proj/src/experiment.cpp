#include "roundstat/experiment.hpp"

#include <cmath>
#include <functional>
#include <json.hpp>
#include <map>

#include "roundstat/analytic.hpp"
#include "roundstat/distributions.hpp"
#include "roundstat/errors.hpp"
#include "roundstat/kernels.hpp"
#include "roundstat/wishart.hpp"
#include "trial_runner.hpp"

namespace roundstat {

using json = nlohmann::ordered_json;

const char* kernel_name(Kernel k) noexcept {
  switch (k) {
    case Kernel::dot: return "dot";
    case Kernel::matvec: return "matvec";
    case Kernel::matmul: return "matmul";
    case Kernel::trisolve: return "trisolve";
    case Kernel::lu: return "lu";
  }
  return "?";
}

Kernel parse_kernel(std::string_view name) {
  for (Kernel k : {Kernel::dot, Kernel::matvec, Kernel::matmul, Kernel::trisolve, Kernel::lu})
    if (name == kernel_name(k)) return k;
  throw PreconditionError("unknown kernel '" + std::string(name) + "'");
}

namespace {

std::vector<long> grid_from_json(const json& v) {
  if (v.is_array()) return v.get<std::vector<long>>();
  return {v.get<long>()};
}

std::string wishart_label(long m) { return "wishart:" + std::to_string(m); }

}  // namespace

std::string ExperimentConfig::to_json() const {
  json j;
  j["experiment"] = experiment;
  j["kernel"] = kernel_name(kernel);
  j["format"] = format;
  j["dist_x"] = dist_x;
  j["dist_y"] = dist_y;
  j["n_grid"] = n_grid;
  j["m_grid"] = effective_m_grid();
  j["p"] = effective_p_grid();
  j["trials"] = trials;
  j["seed"] = seed;
  if (with_bounds) {
    j["lambda"] = bounds.lambda;
    j["zeta"] = bounds.zeta;
    j["eta"] = bounds.eta;
  }
  return j.dump();
}

void ExperimentConfig::apply_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw PreconditionError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw PreconditionError("config: top level must be an object");
  try {
    if (j.contains("experiment")) experiment = j["experiment"].get<std::string>();
    if (j.contains("kernel")) kernel = parse_kernel(j["kernel"].get<std::string>());
    if (j.contains("format")) format = j["format"].get<std::string>();
    if (j.contains("dist_x")) dist_x = j["dist_x"].get<std::string>();
    if (j.contains("dist_y")) dist_y = j["dist_y"].get<std::string>();
    if (j.contains("n_grid")) n_grid = grid_from_json(j["n_grid"]);
    if (j.contains("m_grid")) m_grid = grid_from_json(j["m_grid"]);
    if (j.contains("p")) p_grid = grid_from_json(j["p"]);
    if (j.contains("trials")) trials = j["trials"].get<long>();
    if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
    if (j.contains("lambda")) bounds.lambda = j["lambda"].get<double>();
    if (j.contains("zeta")) bounds.zeta = j["zeta"].get<double>();
    if (j.contains("eta")) bounds.eta = j["eta"].get<double>();
  } catch (const json::exception& e) {
    throw PreconditionError(std::string("config: ") + e.what());
  }
}

std::vector<long> ExperimentConfig::effective_m_grid() const {
  if (!m_grid.empty()) return m_grid;
  switch (kernel) {
    case Kernel::dot: return {0};
    case Kernel::matvec:
    case Kernel::matmul: return {10};
    case Kernel::trisolve:
    case Kernel::lu: return {1050};
  }
  return {0};
}

std::vector<long> ExperimentConfig::effective_p_grid() const {
  if (!p_grid.empty()) return p_grid;
  return {kernel == Kernel::matmul ? 10L : 0L};
}

void ExperimentConfig::validate() const {
  if (trials < kMinTrials) throw PreconditionError("trials must be at least 100");
  make_format(format);
  if (kernel == Kernel::dot || kernel == Kernel::matvec || kernel == Kernel::matmul) {
    ScalarDistribution::parse(dist_x);
    ScalarDistribution::parse(dist_y);
  }
  if (n_grid.empty()) throw PreconditionError("n grid is empty");
  for (long n : n_grid)
    if (n < 1) throw PreconditionError("n must be at least 1");
  for (long m : effective_m_grid()) {
    if (kernel == Kernel::dot) break;
    if (m < 1) throw PreconditionError("m must be at least 1");
    for (long n : n_grid) {
      if (kernel == Kernel::trisolve && m <= n + 1)
        throw PreconditionError("m must exceed n+1 for trisolve (n=" + std::to_string(n) +
                                ", m=" + std::to_string(m) + ")");
      if (kernel == Kernel::lu && m <= n + 3)
        throw PreconditionError("m must exceed n+3 for LU (n=" + std::to_string(n) +
                                ", m=" + std::to_string(m) + ")");
    }
  }
  if (kernel == Kernel::matmul)
    for (long p : effective_p_grid())
      if (p < 1) throw PreconditionError("p must be at least 1");
  if (with_bounds) bounds.validate();
}

SampleStats delta_stats(const Eigen::Ref<const Eigen::VectorXd>& d) {
  const double T = static_cast<double>(d.size());
  if (d.size() < 2) throw PreconditionError("delta_stats: need at least two samples");
  const double mean = d.mean();
  const double var = (d.array() - mean).square().sum() / (T - 1.0);
  const Eigen::ArrayXd sq = d.array().square();
  const double mse = sq.mean();
  const double sq_var = (sq - mse).square().sum() / (T - 1.0);
  return {mean, var, mse, std::sqrt(sq_var / T)};
}

namespace {

enum class Kind { delta, product };

struct Observable {
  std::string element;
  Kind kind;
  double analytic;
};

struct GridPoint {
  long n, m, p;
};

// Fills one trial's observables.
using TrialFn = std::function<void(Rng&, Eigen::Ref<Eigen::VectorXd>)>;

struct Plan {
  std::vector<Observable> observables;
  TrialFn trial;
  std::string method;
};

double mean_offdiag_row_products(const Eigen::MatrixXd& D) {
  const Eigen::Index m = D.rows();
  if (m < 2) return 0.0;
  const Eigen::MatrixXd G = D * D.transpose();
  const double off = G.sum() - G.trace();
  return off / static_cast<double>(m * (m - 1));
}

Plan make_plan(const ExperimentConfig& cfg, const GridPoint& gp, const FloatFormat& fmt) {
  Plan plan;
  const RoundedArithmetic ar(fmt);
  const long n = gp.n, m = gp.m, p = gp.p;

  if (cfg.kernel == Kernel::dot || cfg.kernel == Kernel::matvec || cfg.kernel == Kernel::matmul) {
    const auto dx = ScalarDistribution::parse(cfg.dist_x);
    const auto dy = ScalarDistribution::parse(cfg.dist_y);
    const Method method = n <= kMaxRationalN ? Method::exact_rational : Method::asymptotic;
    plan.method = method_name(method);
    const double hbar = inner_variance(dx, dy, n, fmt, method).variance;

    if (cfg.kernel == Kernel::dot) {
      plan.observables = {{"s", Kind::delta, hbar}};
      plan.trial = [=](Rng& rng, Eigen::Ref<Eigen::VectorXd> out) {
        const Eigen::VectorXd x = round_to_format(sample_dist(dx, n, rng), fmt);
        const Eigen::VectorXd y = round_to_format(sample_dist(dy, n, rng), fmt);
        out[0] = rounded_dot(x, y, ar).delta;
      };
    } else if (cfg.kernel == Kernel::matvec) {
      plan.observables = {{"y_1", Kind::delta, hbar},
                          {"diag_mean", Kind::product, hbar},
                          {"offdiag_mean", Kind::product, 0.0}};
      plan.trial = [=](Rng& rng, Eigen::Ref<Eigen::VectorXd> out) {
        const Eigen::MatrixXd A = round_to_format(sample_dist(dx, m, n, rng), fmt);
        const Eigen::VectorXd b = round_to_format(sample_dist(dy, n, rng), fmt);
        const Eigen::VectorXd d = rounded_matvec(A, b, ar).delta;
        out[0] = d[0];
        out[1] = d.squaredNorm() / static_cast<double>(m);
        out[2] = mean_offdiag_row_products(d);
      };
    } else {
      const int r = m >= 2 ? 1 : 0;  // second row when it exists
      const std::string rname = "R_" + std::to_string(r + 1) + "_" + std::to_string(r + 1);
      plan.observables = {{rname, Kind::product, static_cast<double>(p) * hbar},
                          {"R_offdiag_mean", Kind::product, 0.0},
                          {"c_mean_sq", Kind::product, hbar}};
      plan.trial = [=](Rng& rng, Eigen::Ref<Eigen::VectorXd> out) {
        const Eigen::MatrixXd A = round_to_format(sample_dist(dx, m, n, rng), fmt);
        const Eigen::MatrixXd B = round_to_format(sample_dist(dy, n, p, rng), fmt);
        const Eigen::MatrixXd D = rounded_matmul(A, B, ar).delta;
        out[0] = D.row(r).squaredNorm();
        out[1] = mean_offdiag_row_products(D);
        out[2] = D.squaredNorm() / static_cast<double>(m * p);
      };
    }
    return plan;
  }

  const int nn = static_cast<int>(n);
  plan.method = method_name(Method::exact_rational);
  if (cfg.kernel == Kernel::trisolve) {
    const auto st = trisolve_variances(nn, m, fmt, Method::exact_rational);
    for (int i = 0; i < nn; ++i) plan.observables.push_back({"x_" + std::to_string(i + 1), Kind::delta, st.var_dx[i]});
    plan.trial = [=](Rng& rng, Eigen::Ref<Eigen::VectorXd> out) {
      const Eigen::MatrixXd T = round_to_format(sample_wishart_chol(nn, m, rng), fmt);
      std::normal_distribution<double> normal(0.0, 1.0);
      Eigen::VectorXd b(nn);
      for (int i = 0; i < nn; ++i) b[i] = round_to_format(normal(rng), fmt);
      out = rounded_forward_subst(T, b, ar).delta;
    };
    return plan;
  }

  const Method lm = lu_method_for(nn, Method::exact_rational);
  plan.method = method_name(lm);
  const auto st = lu_variances(nn, m, fmt, lm);
  std::vector<std::pair<int, int>> u_idx, l_idx;
  for (int k = 0; k < nn; ++k)
    for (int j = k; j < nn; ++j) {
      u_idx.emplace_back(k, j);
      plan.observables.push_back({"u_" + std::to_string(k + 1) + "_" + std::to_string(j + 1), Kind::delta,
                                  j == k ? st.var_du_diag[k] : st.var_du_offdiag[k]});
    }
  for (int k = 0; k < nn; ++k)
    for (int i = k + 1; i < nn; ++i) {
      l_idx.emplace_back(i, k);
      plan.observables.push_back(
          {"l_" + std::to_string(i + 1) + "_" + std::to_string(k + 1), Kind::delta, st.var_dl[k]});
    }
  plan.trial = [=](Rng& rng, Eigen::Ref<Eigen::VectorXd> out) {
    const Eigen::MatrixXd A = round_to_format(sample_wishart(nn, m, rng), fmt);
    const LuResult r = rounded_lu_doolittle(A, ar);
    Eigen::Index c = 0;
    for (auto [k, j] : u_idx) out[c++] = r.U.delta(k, j);
    for (auto [i, k] : l_idx) out[c++] = r.L.delta(i, k);
  };
  return plan;
}

std::string grid_context(const ExperimentConfig& cfg, const GridPoint& gp) {
  return std::string(kernel_name(cfg.kernel)) + " at n=" + std::to_string(gp.n) +
         (gp.m ? ", m=" + std::to_string(gp.m) : std::string()) +
         (gp.p ? ", p=" + std::to_string(gp.p) : std::string()) + ": ";
}

}  // namespace

MseReport mc_mse(const ExperimentConfig& cfg) {
  cfg.validate();
  const FloatFormat fmt = make_format(cfg.format);
  MseReport report{cfg, {}};

  std::vector<GridPoint> grid;
  for (long n : cfg.n_grid)
    for (long m : cfg.effective_m_grid())
      for (long p : cfg.effective_p_grid()) grid.push_back({n, m, p});

  for (std::size_t g = 0; g < grid.size(); ++g) {
    const GridPoint& gp = grid[g];
    Eigen::MatrixXd samples;
    Plan plan;
    try {
      plan = make_plan(cfg, gp, fmt);
      const auto width = static_cast<Eigen::Index>(plan.observables.size());
      samples = detail::run_trials(cfg.trials, width, cfg.threads, [&](long t, Eigen::Ref<Eigen::VectorXd> row) {
        Rng rng = make_stream(cfg.seed, g, static_cast<std::uint64_t>(t));
        plan.trial(rng, row);
      });
    } catch (const OverflowError& e) {
      throw OverflowError(grid_context(cfg, gp) + e.what());
    } catch (const SingularError& e) {
      throw SingularError(grid_context(cfg, gp) + e.what());
    } catch (const PreconditionError& e) {
      throw PreconditionError(grid_context(cfg, gp) + e.what());
    }

    std::optional<BoundReport> bounds;
    if (cfg.with_bounds && cfg.kernel == Kernel::dot)
      bounds = bound_report(gp.n, fmt, ScalarDistribution::parse(cfg.dist_x),
                            ScalarDistribution::parse(cfg.dist_y), cfg.bounds);

    for (std::size_t c = 0; c < plan.observables.size(); ++c) {
      const Observable& ob = plan.observables[c];
      GridPointReport row;
      row.n = gp.n;
      row.m = gp.m;
      row.p = gp.p;
      row.element = ob.element;
      row.trials = cfg.trials;
      row.seed = cfg.seed;
      row.analytic = ob.analytic;
      row.method = plan.method;
      const auto col = samples.col(static_cast<Eigen::Index>(c));
      if (ob.kind == Kind::delta) {
        const SampleStats s = delta_stats(col);
        row.mse = s.mse;
        row.variance = s.variance;
        row.mean = s.mean;
        row.std_err = s.mse_std_err;
      } else {
        const double T = static_cast<double>(col.size());
        row.mse = col.mean();
        row.std_err = std::sqrt((col.array() - row.mse).square().sum() / (T - 1.0) / T);
      }
      if (bounds) {
        row.bounds = bounds;
        row.bounds->mse_sim = row.mse;
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

CsvTable MseReport::to_csv() const {
  CsvTable t;
  t.comment = "config: " + config.to_json();
  t.header = {"kernel", "format", "dist_x", "dist_y", "n", "m", "p", "element", "trials", "seed",
              "mse_sim", "var_sim", "mean_sim", "std_err", "analytic", "method"};
  const bool with_bounds = config.with_bounds && config.kernel == Kernel::dot;
  if (with_bounds)
    for (const char* h : {"db1", "pb1", "pb2", "db2", "pb3", "corollary"}) t.header.push_back(h);

  for (const auto& r : rows) {
    std::string dx = config.dist_x, dy = config.dist_y;
    if (config.kernel == Kernel::trisolve) {
      dx = wishart_label(r.m) + "/bartlett";
      dy = "gaussian:0,1";
    } else if (config.kernel == Kernel::lu) {
      dx = wishart_label(r.m);
      dy = "";
    }
    std::vector<std::string> cells = {kernel_name(config.kernel), config.format, dx, dy,
                                      std::to_string(r.n), std::to_string(r.m), std::to_string(r.p),
                                      r.element, std::to_string(r.trials), std::to_string(r.seed),
                                      format_double(r.mse), format_double(r.variance),
                                      format_double(r.mean), format_double(r.std_err),
                                      format_double(r.analytic), r.method};
    if (with_bounds && r.bounds) {
      const BoundReport& b = *r.bounds;
      for (auto v : {std::optional<double>(b.db1), std::optional<double>(b.pb1), b.pb2,
                     std::optional<double>(b.db2), std::optional<double>(b.pb3),
                     std::optional<double>(b.corollary)})
        cells.push_back(format_double(v));
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

std::vector<MomentPrediction> predict(const ExperimentConfig& cfg, Method method) {
  cfg.validate();
  const FloatFormat fmt = make_format(cfg.format);
  std::vector<MomentPrediction> out;
  auto base = [&](long n, long m, long p) {
    MomentPrediction mp;
    mp.kernel = kernel_name(cfg.kernel);
    mp.n = n;
    mp.m = m;
    mp.p = p;
    mp.format = fmt.name;
    mp.method = method;
    return mp;
  };
  for (long n : cfg.n_grid)
    for (long m : cfg.effective_m_grid())
      for (long p : cfg.effective_p_grid()) {
        if (cfg.kernel == Kernel::dot || cfg.kernel == Kernel::matvec || cfg.kernel == Kernel::matmul) {
          const auto dx = ScalarDistribution::parse(cfg.dist_x);
          const auto dy = ScalarDistribution::parse(cfg.dist_y);
          const double hbar = inner_variance(dx, dy, n, fmt, method).variance;
          MomentPrediction mp = base(n, m, p);
          mp.dist_x = dx.spec();
          mp.dist_y = dy.spec();
          if (cfg.kernel == Kernel::dot) {
            mp.variance = hbar;
            out.push_back(mp);
            continue;
          }
          mp.element = "R_diag";
          mp.variance = cfg.kernel == Kernel::matmul ? static_cast<double>(p) * hbar : hbar;
          out.push_back(mp);
          mp.element = "R_offdiag";
          mp.variance = 0.0;
          out.push_back(mp);
          continue;
        }
        const int nn = static_cast<int>(n);
        if (cfg.kernel == Kernel::trisolve) {
          const auto st = trisolve_variances(nn, m, fmt, method);
          for (int i = 0; i < nn; ++i) {
            MomentPrediction mp = base(n, m, 0);
            mp.dist_x = wishart_label(m) + "/bartlett";
            mp.dist_y = "gaussian:0,1";
            mp.element = "x_" + std::to_string(i + 1);
            mp.variance = st.var_dx[i];
            out.push_back(mp);
          }
          continue;
        }
        const Method lm = lu_method_for(nn, method);
        const auto st = lu_variances(nn, m, fmt, lm);
        auto push = [&](std::string el, double v) {
          MomentPrediction mp = base(n, m, 0);
          mp.method = lm;
          mp.dist_x = wishart_label(m);
          mp.element = std::move(el);
          mp.variance = v;
          out.push_back(mp);
        };
        // u_kj is j-independent and l_ik is i-independent, so one entry per k
        for (int k = 0; k < nn; ++k) {
          const std::string K = std::to_string(k + 1);
          push("u_" + K + "_" + K, st.var_du_diag[k]);
          if (k + 1 < nn) {
            push("u_" + K + "_j", st.var_du_offdiag[k]);
            push("l_i_" + K, st.var_dl[k]);
          }
        }
      }
  return out;
}

CsvTable bounds_table(const ExperimentConfig& cfg, bool simulate) {
  if (cfg.kernel != Kernel::dot) throw PreconditionError("bounds are defined for the inner product only");
  ExperimentConfig c = cfg;
  c.with_bounds = true;
  c.validate();
  CsvTable t;
  t.comment = "config: " + c.to_json();
  t.header = {"n", "u", "mse_sim", "std_err", "hbar", "db1", "pb1", "pb2", "db2", "pb3", "corollary"};
  auto push = [&](const BoundReport& b, std::optional<double> se) {
    t.rows.push_back({std::to_string(b.n), format_double(b.u), format_double(b.mse_sim), format_double(se),
                      format_double(b.hbar), format_double(b.db1), format_double(b.pb1), format_double(b.pb2),
                      format_double(b.db2), format_double(b.pb3), format_double(b.corollary)});
  };
  if (simulate) {
    for (const auto& r : mc_mse(c).rows) push(*r.bounds, r.std_err);
    return t;
  }
  const FloatFormat fmt = make_format(c.format);
  const auto dx = ScalarDistribution::parse(c.dist_x), dy = ScalarDistribution::parse(c.dist_y);
  for (long n : c.n_grid) push(bound_report(n, fmt, dx, dy, c.bounds), std::nullopt);
  return t;
}

std::string formats_json() {
  json arr = json::array();
  for (const char* name : {"bfloat16", "fp16", "fp32", "fp64"}) {
    const FloatFormat f = make_format(name);
    json j;
    j["name"] = f.name;
    j["t"] = f.t;
    j["e_min"] = f.e_min;
    j["e_max"] = f.e_max;
    j["u"] = f.u;
    j["x_min"] = f.x_min;
    j["x_max"] = f.x_max;
    arr.push_back(j);
  }
  return arr.dump();
}

}  // namespace roundstat
