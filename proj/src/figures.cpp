#include <algorithm>
#include <json.hpp>

#include "roundstat/errors.hpp"
#include "roundstat/experiment.hpp"

namespace roundstat {

namespace {

const std::vector<std::string> kFigureHeader = {"figure", "panel",    "x_name", "x",     "element", "simulated",
                                                "analytical", "ratio", "std_err", "trials", "seed"};

std::string fig_comment(int id, const FigureOverrides& ov, long trials, std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["experiment"] = "figures";
  j["figure"] = id;
  j["trials"] = trials;
  j["seed"] = seed;
  if (ov.n_grid) j["n_grid"] = *ov.n_grid;
  if (ov.m_grid) j["m_grid"] = *ov.m_grid;
  if (ov.p_grid) j["p"] = *ov.p_grid;
  if (ov.n_total) j["n_total"] = *ov.n_total;
  if (id == 2) {
    j["lambda"] = ov.bounds.lambda;
    j["zeta"] = ov.bounds.zeta;
    j["eta"] = ov.bounds.eta;
  }
  return "config: " + j.dump();
}

struct FigureBuilder {
  int id;
  const FigureOverrides& ov;
  long trials;
  std::uint64_t seed;
  CsvTable table;

  ExperimentConfig base(Kernel k) const {
    ExperimentConfig c;
    c.experiment = "figures";
    c.kernel = k;
    c.trials = trials;
    c.seed = seed;
    c.threads = ov.threads;
    return c;
  }

  // One row per report row whose element is listed; x read from the named axis.
  void add(const std::string& panel, const std::string& x_name, const MseReport& rep,
           const std::vector<std::string>& elements) {
    for (const auto& r : rep.rows) {
      if (std::find(elements.begin(), elements.end(), r.element) == elements.end()) continue;
      const long x = x_name == "n" ? r.n : x_name == "m" ? r.m : r.p;
      table.rows.push_back({std::to_string(id), panel, x_name, std::to_string(x), r.element,
                            format_double(r.mse), format_double(r.analytic), format_double(r.mse / r.analytic),
                            format_double(r.std_err), std::to_string(r.trials), std::to_string(r.seed)});
    }
  }
};

const char* const kFig1Dists[] = {"uniform:0,1", "uniform:-1,1", "gaussian:0,1", "gaussian:1,1"};

void fig_inner(FigureBuilder& fb, const std::vector<std::string>& formats, const std::vector<std::string>& dists,
               std::vector<long> n_default) {
  for (const auto& f : formats)
    for (const auto& d : dists) {
      ExperimentConfig c = fb.base(Kernel::dot);
      c.format = f;
      c.dist_x = c.dist_y = d;
      c.n_grid = fb.ov.n_grid.value_or(n_default);
      fb.add(formats.size() > 1 ? f + "/" + d : d, "n", mc_mse(c), {"s"});
    }
}

CsvTable fig2(const FigureOverrides& ov, long trials, std::uint64_t seed) {
  CsvTable t;
  t.header = {"figure", "panel", "n", "u", "mse_sim", "std_err", "hbar", "db1", "pb1",
              "pb2",    "db2",   "pb3", "corollary", "trials", "seed"};
  for (const char* d : {"uniform:0,1", "uniform:-1,1"}) {
    ExperimentConfig c;
    c.experiment = "figures";
    c.dist_x = c.dist_y = d;
    c.n_grid = ov.n_grid.value_or(std::vector<long>{10, 100, 1000, 10000});
    c.trials = trials;
    c.seed = seed;
    c.with_bounds = true;
    c.bounds = ov.bounds;
    c.threads = ov.threads;
    for (const auto& r : mc_mse(c).rows) {
      const BoundReport& b = *r.bounds;
      t.rows.push_back({"2", d, std::to_string(r.n), format_double(b.u), format_double(r.mse),
                        format_double(r.std_err), format_double(b.hbar), format_double(b.db1),
                        format_double(b.pb1), format_double(b.pb2), format_double(b.db2), format_double(b.pb3),
                        format_double(b.corollary), std::to_string(r.trials), std::to_string(r.seed)});
    }
  }
  return t;
}

void fig6(FigureBuilder& fb) {
  ProbeConfig pc;
  pc.seed = fb.seed;
  pc.threads = fb.ov.threads;
  if (fb.ov.trials) pc.trials = *fb.ov.trials;
  if (fb.ov.n_total) pc.n_total = *fb.ov.n_total;
  pc.early_end = std::min(pc.early_end, pc.n_total);
  const ProbeResult r = model_validity_probe(pc);
  auto& rows = fb.table.rows;
  const std::string id = std::to_string(fb.id);
  for (const auto& c : r.series) {
    rows.push_back({id, "variance_dependent", "i", std::to_string(c.i), "s", format_double(c.var_dep),
                    format_double(c.analytic_dep), format_double(c.var_dep / c.analytic_dep), "",
                    std::to_string(c.trials_dep), std::to_string(pc.seed)});
    rows.push_back({id, "variance_control", "i", std::to_string(c.i), "s", format_double(c.var_ctrl),
                    format_double(c.analytic_ctrl), format_double(c.var_ctrl / c.analytic_ctrl), "",
                    std::to_string(c.trials_ctrl), std::to_string(pc.seed)});
  }
  for (const auto& [panel, h] : {std::pair<const char*, const DeltaHistogram*>{"delta_early", &r.early_hist},
                                 {"delta_late", &r.late_hist}})
    for (std::size_t b = 0; b + 1 < h->edges.size(); ++b) {
      const double mid = 0.5 * (h->edges[b] + h->edges[b + 1]);
      rows.push_back({id, panel, "delta", format_double(mid), "delta", format_double(h->empirical_density[b]),
                      format_double(h->analytic_density[b]),
                      format_double(h->empirical_density[b] / h->analytic_density[b]), "",
                      std::to_string(h->count), std::to_string(pc.seed)});
    }
}

void fig8(FigureBuilder& fb) {
  const auto& ov = fb.ov;
  const std::vector<std::string> el = {"R_2_2"};
  ExperimentConfig c = fb.base(Kernel::matmul);
  c.n_grid = ov.n_grid.value_or(std::vector<long>{10, 100, 1000});
  c.m_grid = {10};
  c.p_grid = {10};
  fb.add("vs_n", "n", mc_mse(c), el);
  c.n_grid = {10};
  c.p_grid = ov.p_grid.value_or(std::vector<long>{1, 10, 100});
  fb.add("vs_p", "p", mc_mse(c), el);
  c.p_grid = {10};
  c.m_grid = ov.m_grid.value_or(std::vector<long>{10, 20, 50, 100});
  fb.add("vs_m", "m", mc_mse(c), el);
}

const std::vector<long> kWishartM = {10, 50, 100, 200, 500, 1050};

void fig9(FigureBuilder& fb) {
  ExperimentConfig c = fb.base(Kernel::trisolve);
  c.n_grid = {5};
  c.m_grid = fb.ov.m_grid.value_or(kWishartM);
  fb.add("vs_m", "m", mc_mse(c), {"x_3"});
  c.n_grid = fb.ov.n_grid.value_or(std::vector<long>{5, 10, 20, 50, 100});
  c.m_grid = {1050};
  fb.add("vs_n", "n", mc_mse(c), {"x_3"});
}

void fig10(FigureBuilder& fb) {
  const std::vector<std::string> el = {"u_3_3", "u_3_5", "l_4_3"};
  ExperimentConfig c = fb.base(Kernel::lu);
  c.n_grid = {5};
  c.m_grid = fb.ov.m_grid.value_or(kWishartM);
  fb.add("vs_m", "m", mc_mse(c), el);
  c.n_grid = fb.ov.n_grid.value_or(std::vector<long>{5, 10, 20, 40});
  c.m_grid = {1050};
  fb.add("vs_n", "n", mc_mse(c), el);
}

}  // namespace

CsvTable reproduce_figure(int fig_id, const FigureOverrides& ov) {
  if (std::find(std::begin(kFigureIds), std::end(kFigureIds), fig_id) == std::end(kFigureIds))
    throw PreconditionError("unknown figure id " + std::to_string(fig_id) + " (known: 1, 2, 3, 6, 8, 9, 10)");
  const std::uint64_t seed = ov.seed.value_or(kDefaultSeed);
  const long trials = ov.trials.value_or(fig_id == 6 ? ProbeConfig{}.trials : 10000L);
  if (fig_id == 2) {
    CsvTable t = fig2(ov, trials, seed);
    t.comment = fig_comment(fig_id, ov, trials, seed);
    return t;
  }
  FigureBuilder fb{fig_id, ov, trials, seed, {}};
  fb.table.header = kFigureHeader;
  switch (fig_id) {
    case 1:
      fig_inner(fb, {"fp32"}, {std::begin(kFig1Dists), std::end(kFig1Dists)}, {10, 100, 1000, 10000});
      break;
    case 3: fig_inner(fb, {"fp16", "bfloat16"}, {"gaussian:0,1"}, {10, 100, 1000}); break;
    case 6: fig6(fb); break;
    case 8: fig8(fb); break;
    case 9: fig9(fb); break;
    case 10: fig10(fb); break;
  }
  fb.table.comment = fig_comment(fig_id, ov, trials, seed);
  return fb.table;
}

}  // namespace roundstat
