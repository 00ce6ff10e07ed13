#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "roundstat/analytic.hpp"
#include "roundstat/errors.hpp"
#include "roundstat/experiment.hpp"
#include "roundstat/kernels.hpp"
#include "trial_runner.hpp"

namespace roundstat {

std::string PipelineConfig::to_json() const {
  nlohmann::ordered_json j;
  j["experiment"] = "pipeline";
  j["format"] = format;
  j["m"] = m;
  j["n"] = n;
  j["trials"] = trials;
  j["seed"] = seed;
  return j.dump();
}

namespace {

struct StageColumn {
  std::string stage;
  std::string element;
  std::optional<double> analytic;
  std::string method;
};

}  // namespace

// H is m x n; A = H^T H, c = H^T z, A = LU, Ly = c, Ux = y. Each stage's
// reference takes that stage's rounded inputs, so deltas are per stage.
PipelineReport zf_ls_pipeline(const PipelineConfig& cfg) {
  if (cfg.n < 3) throw PreconditionError("pipeline: n must be at least 3");
  if (cfg.m <= cfg.n + 3) throw PreconditionError("m must exceed n+3 for LU");
  if (cfg.trials < kMinTrials) throw PreconditionError("trials must be at least 100");
  const FloatFormat fmt = make_format(cfg.format);
  const RoundedArithmetic ar(fmt);
  const int n = cfg.n;
  const long m = cfg.m;

  std::vector<StageColumn> cols;
  const std::string exact = method_name(Method::exact_rational);
  const Rational s2 = sigma2_exact(fmt);
  const ProductMoments gauss{Rational(1), Rational(0)};
  // diagonal summands h_ki^2: E(z^2) = 3, E(z_j z_k) = 1
  const ProductMoments squares{Rational(3), Rational(1)};
  cols.push_back({"gram", "a_1_2", hbar_exact(gauss, m, s2).to_double(), exact});
  cols.push_back({"gram", "a_1_1", hbar_exact(squares, m, s2).to_double(), exact});
  cols.push_back({"rhs", "c_1", hbar_exact(gauss, m, s2).to_double(), exact});
  // only steps 1 and 3 are reported, and they do not depend on n
  const auto lu = lu_variances(std::min(n, 3), m, fmt, Method::exact_rational);
  const std::string nn = std::to_string(n);
  cols.push_back({"lu", "u_1_1", lu.var_du_diag[0], exact});
  cols.push_back({"lu", "u_3_3", lu.var_du_diag[2], exact});
  cols.push_back({"lu", "u_3_" + nn, lu.var_du_offdiag[2], exact});
  cols.push_back({"lu", "l_" + nn + "_3", lu.var_dl[2], exact});
  cols.push_back({"forward", "y_3", std::nullopt, "simulation"});
  cols.push_back({"forward", "y_" + nn, std::nullopt, "simulation"});
  cols.push_back({"back", "x_1", std::nullopt, "simulation"});
  cols.push_back({"back", "x_" + nn, std::nullopt, "simulation"});
  cols.push_back({"end_to_end", "x_1", std::nullopt, "simulation"});
  cols.push_back({"end_to_end", "x_" + nn, std::nullopt, "simulation"});

  const auto width = static_cast<Eigen::Index>(cols.size());
  const Eigen::MatrixXd samples =
      detail::run_trials(cfg.trials, width, cfg.threads, [&](long t, Eigen::Ref<Eigen::VectorXd> row) {
        Rng rng = make_stream(cfg.seed, 0, static_cast<std::uint64_t>(t));
        const auto N01 = ScalarDistribution::gaussian(Rational(0), Rational(1));
        const Eigen::MatrixXd H = round_to_format(sample_dist(N01, m, n, rng), fmt);
        const Eigen::VectorXd z = round_to_format(sample_dist(N01, m, rng), fmt);
        const Eigen::MatrixXd Ht = H.transpose();

        const MatrixResult A = rounded_matmul(Ht, H, ar);
        const VectorResult c = rounded_matvec(Ht, z, ar);
        const LuResult f = rounded_lu_doolittle(A.value, ar);
        const VectorResult y = rounded_forward_subst(f.L.value, c.value, ar);
        const VectorResult x = rounded_back_subst(f.U.value, y.value, ar);

        // carrier-precision run of the whole chain from the same H, z
        const Eigen::MatrixXd Ae = exact::matmul(Ht, H);
        const auto [Le, Ue] = exact::lu_doolittle(Ae);
        const Eigen::VectorXd xe = exact::back_subst(Ue, exact::forward_subst(Le, exact::matvec(Ht, z)));

        row << A.delta(0, 1), A.delta(0, 0), c.delta[0], f.U.delta(0, 0), f.U.delta(2, 2), f.U.delta(2, n - 1),
            f.L.delta(n - 1, 2), y.delta[2], y.delta[n - 1], x.delta[0], x.delta[n - 1], x.value[0] - xe[0],
            x.value[n - 1] - xe[n - 1];
      });

  PipelineReport rep{cfg, {}};
  for (Eigen::Index c = 0; c < width; ++c) {
    const auto& col = cols[static_cast<std::size_t>(c)];
    const SampleStats s = delta_stats(samples.col(c));
    rep.stages.push_back({col.stage, col.element, cfg.trials, s.mse, s.variance, s.mean, s.mse_std_err,
                          col.analytic, col.method});
  }
  return rep;
}

CsvTable PipelineReport::to_csv() const {
  CsvTable t;
  t.comment = "config: " + config.to_json();
  t.header = {"stage", "element", "trials", "seed", "mse_sim", "var_sim", "mean_sim", "std_err", "analytic", "method"};
  for (const auto& s : stages)
    t.rows.push_back({s.stage, s.element, std::to_string(s.trials), std::to_string(config.seed),
                      format_double(s.mse), format_double(s.variance), format_double(s.mean),
                      format_double(s.std_err), format_double(s.analytic), s.method});
  return t;
}

}  // namespace roundstat
