// Command-line front end: every subcommand reads a task JSON, writes its
// artifacts into a run directory, and records them in manifest.json with
// content hashes so reruns are diffable. Exit codes: 0 success, 2 validation
// error, 3 capability limit.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cpwa/bounds.hpp"
#include "cpwa/runtime.hpp"
#include "cpwa/task.hpp"

using namespace cpwa;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Collects artifacts as they are written and emits manifest.json last.
struct RunDir {
  fs::path dir;
  json manifest;

  explicit RunDir(const std::string& path, const std::string& command)
      : dir(path) {
    fs::create_directories(dir);
    manifest["command"] = command;
    manifest["artifacts"] = json::array();
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path p = dir / name;
    std::ofstream out(p);
    if (!out) throw ConfigError("cannot write '" + p.string() + "'");
    out << content;
    out.close();
    char hex[32];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(content)));
    manifest["artifacts"].push_back({{"path", name}, {"fnv1a64", hex}});
  }

  void finish() {
    const fs::path p = dir / "manifest.json";
    std::ofstream out(p);
    out << manifest.dump(2) << "\n";
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string mdp_to_json(const SymbolicMdp& mdp) {
  json j;
  j["n_states"] = mdp.n_states;
  j["n_partitions"] = mdp.n_partitions;
  j["state_grid_hash"] = mdp.state_grid_hash;
  j["controller_grid_hash"] = mdp.controller_grid_hash;
  j["row_present"] = json::array();
  j["rows"] = json::array();
  for (std::size_t r = 0; r < mdp.rows.size(); ++r) {
    j["row_present"].push_back(static_cast<int>(mdp.row_present[r]));
    json row = json::array();
    for (const auto& [succ, p] : mdp.rows[r]) row.push_back({succ, p});
    j["rows"].push_back(std::move(row));
  }
  return j.dump();
}

// Demo CSV: header optional, then k, x..., u... per line.
DemoSet load_demos(const std::string& path, int n, int m) {
  DemoSet demos;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open demo file '" + path + "'");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("k,", 0) == 0) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<double> vals;
    while (std::getline(ss, field, ',')) vals.push_back(std::stod(field));
    if (static_cast<int>(vals.size()) != 1 + n + m)
      throw ConfigError("demo row has " + std::to_string(vals.size()) +
                        " fields, expected " + std::to_string(1 + n + m));
    Vec x(n), u(m);
    for (int d = 0; d < n; ++d) x[d] = vals[1 + d];
    for (int d = 0; d < m; ++d) u[d] = vals[1 + n + d];
    demos.samples.push_back({std::move(x), std::move(u)});
  }
  if (demos.samples.empty()) throw ConfigError("demo file is empty");
  return demos;
}

std::string trajectory_csv(const Trajectory& traj, int n, int m) {
  const char* status = "horizon-exhausted";
  switch (traj.status) {
    case Trajectory::Status::Accepted: status = "accepted"; break;
    case Trajectory::Status::Trap: status = "trap"; break;
    case Trajectory::Status::LeftDomain: status = "left-domain"; break;
    case Trajectory::Status::HorizonExhausted: break;
  }
  std::ostringstream out;
  out << "k";
  for (int d = 0; d < n; ++d) out << ",x" << d;
  for (int d = 0; d < m; ++d) out << ",u" << d;
  out << ",q,s,status\n";
  for (const auto& st : traj.steps) {
    out << st.k;
    for (int d = 0; d < n; ++d) out << "," << format_double(st.x[d]);
    for (int d = 0; d < m; ++d)
      out << "," << (st.u.size() > 0 ? format_double(st.u[d]) : "");
    out << "," << st.q << "," << st.s << "," << status << "\n";
  }
  return out.str();
}

// Everything the planning subcommands share: grids, kernel, DFA, labels.
struct Planning {
  TaskConfig cfg;
  StateGrid sg;
  ControllerGrid cg;
  StochasticKernel kernel;
  FormulaPtr spec;
  Dfa dfa;
  std::vector<Letter> labels;

  explicit Planning(const std::string& task_path)
      : cfg(load_task_file(task_path)) {
    cfg.validate();
    sg = cfg.make_state_grid();
    cg = cfg.make_controller_grid();
    kernel = cfg.make_kernel();
    spec = cfg.parse_spec();
    dfa = to_dfa(spec, cfg.horizon, cfg.workspace.atom_names());
    labels = label_all_cells(sg, cfg.workspace);
  }

  int n() const { return sg.dim(); }
  int m() const { return cg.dim() / (sg.dim() + 1); }

  CostFunctional cost() const {
    CostFunctional c;
    c.cost = [](const Vec&, const Vec& u) { return u.squaredNorm(); };
    return c;
  }

  NnLibrary load_library(const std::string& path) const {
    NnLibrary lib = NnLibrary::from_json(read_file(path));
    if (lib.state_grid_hash != sg.hash() ||
        lib.controller_grid_hash != cg.hash())
      throw ConfigError("library '" + path +
                        "' was trained on different grids than this task");
    return lib;
  }
};

struct PlanOutputs {
  SymbolicMdp mdp;
  DpResult dp;
  ProductMdp product;
};

PlanOutputs run_plan(const Planning& pl, const SymbolicMdp* premade = nullptr) {
  PlanOutputs out;
  out.mdp = premade ? *premade : build_mdp(pl.sg, pl.cg, pl.kernel);
  out.product = build_product(out.mdp, pl.dfa, pl.labels);
  out.dp = dp_solve(out.product, pl.cfg.horizon);
  return out;
}

// Value heatmap table at k = 0: one row per abstract cell, evaluated at the
// product state a run actually starts in.
std::string values_csv(const Planning& pl, const PlanOutputs& po) {
  std::ostringstream out;
  out << "q";
  for (int d = 0; d < pl.n(); ++d) out << ",center" << d;
  out << ",value\n";
  for (long q = 0; q < pl.sg.cell_count(); ++q) {
    const Vec c = pl.sg.center(q);
    out << q;
    for (int d = 0; d < pl.n(); ++d) out << "," << format_double(c[d]);
    out << "," << format_double(po.dp.values[0][po.product.initial(q)]) << "\n";
  }
  return out.str();
}

// Selected-partition map: the DP argmax per time step and product state.
std::string actions_csv(const Planning& pl, const PlanOutputs& po) {
  std::ostringstream out;
  out << "k,q,s,P\n";
  for (std::size_t k = 0; k < po.dp.actions.size(); ++k) {
    for (long q = 0; q < pl.sg.cell_count(); ++q) {
      for (int s = 0; s < pl.dfa.num_states(); ++s) {
        const int P = po.dp.actions[k][po.product.index(q, s)];
        if (P >= 0)
          out << k << "," << q << "," << s << "," << P << "\n";
      }
    }
  }
  return out.str();
}

json initial_values(const Planning& pl, const PlanOutputs& po) {
  json arr = json::array();
  for (const Vec& x0 : pl.cfg.initial_points) {
    const long q0 = pl.sg.locate(x0);
    arr.push_back({{"cell", q0},
                   {"value", po.dp.values[0][po.product.initial(q0)]}});
  }
  return arr;
}

ComposedPlanner make_planner(const Planning& pl, const NnLibrary& lib,
                             const PlanOutputs& po) {
  ComposedPlanner planner;
  planner.library = &lib;
  planner.state_grid = &pl.sg;
  planner.dfa = &pl.dfa;
  planner.workspace = &pl.cfg.workspace;
  planner.actions = po.dp.actions;
  planner.horizon = pl.cfg.horizon;
  return planner;
}

int cmd_compile_spec(const std::string& task, const std::string& out_dir) {
  Planning pl(task);
  RunDir run(out_dir, "compile-spec");
  run.write("dfa.json", pl.dfa.to_json());
  json summary = {{"spec", pl.cfg.spec_text},
                  {"horizon", pl.cfg.horizon},
                  {"dfa_states", pl.dfa.num_states()},
                  {"atoms", pl.dfa.atoms}};
  run.write("summary.json", summary.dump(2));
  run.finish();
  std::printf("compiled '%s' to a DFA with %d states\n",
              pl.cfg.spec_text.c_str(), pl.dfa.num_states());
  return 0;
}

int cmd_build_mdp(const std::string& task, const std::string& out_dir) {
  Planning pl(task);
  const SymbolicMdp mdp = build_mdp(pl.sg, pl.cg, pl.kernel);
  RunDir run(out_dir, "build-mdp");
  run.write("mdp.json", mdp_to_json(mdp));
  run.finish();
  std::printf("abstraction: %ld states x %d partitions\n", mdp.n_states,
              mdp.n_partitions);
  return 0;
}

int cmd_build_mdp_demos(const std::string& task, const std::string& out_dir,
                        const std::string& demo_path, int keep) {
  Planning pl(task);
  const DemoSet demos = load_demos(demo_path, pl.n(), pl.m());
  const SymbolicMdp mdp =
      build_mdp_from_demos(pl.sg, pl.cg, pl.kernel, demos, keep, pl.cfg.train);
  long present = 0;
  for (char c : mdp.row_present) present += c;
  RunDir run(out_dir, "build-mdp-demos");
  run.write("mdp.json", mdp_to_json(mdp));
  run.finish();
  std::printf("demo-guided abstraction: %ld of %ld rows kept (I = %d)\n",
              present, static_cast<long>(mdp.rows.size()), keep);
  return 0;
}

int cmd_plan(const std::string& task, const std::string& out_dir) {
  Planning pl(task);
  const PlanOutputs po = run_plan(pl);
  RunDir run(out_dir, "plan");
  run.write("dfa.json", pl.dfa.to_json());
  run.write("values.csv", values_csv(pl, po));
  run.write("actions.csv", actions_csv(pl, po));
  json summary = {{"initial_values", initial_values(pl, po)},
                  {"dfa_states", pl.dfa.num_states()},
                  {"n_states", po.mdp.n_states},
                  {"n_partitions", po.mdp.n_partitions}};
  run.write("summary.json", summary.dump(2));
  run.finish();
  for (const auto& iv : summary["initial_values"])
    std::printf("initial cell %ld: value %.6f\n", iv["cell"].get<long>(),
                iv["value"].get<double>());
  return 0;
}

int cmd_train_library(const std::string& task, const std::string& out_dir) {
  Planning pl(task);
  const NnLibrary lib =
      train_library(pl.sg, pl.cg, pl.kernel.nominal, pl.cost(), pl.cfg.train);
  RunDir run(out_dir, "train-library");
  run.write("library.json", lib.to_json());
  run.finish();
  std::printf("trained %zu nets (full library)\n", lib.entries.size());
  return 0;
}

int cmd_train_transfer(const std::string& task, const std::string& out_dir) {
  Planning pl(task);
  PlanTask pt;
  pt.state_grid = &pl.sg;
  pt.controller_grid = &pl.cg;
  pt.kernel = &pl.kernel;
  pt.dfa = &pl.dfa;
  pt.workspace = &pl.cfg.workspace;
  pt.horizon = pl.cfg.horizon;
  const NnLibrary lib =
      train_transfer({pt}, pl.kernel.nominal, pl.cost(), pl.cfg.train);
  RunDir run(out_dir, "train-transfer");
  run.write("library.json", lib.to_json());
  run.finish();
  std::printf("trained %zu nets (plan-referenced only)\n", lib.entries.size());
  return 0;
}

int cmd_simulate(const std::string& task, const std::string& out_dir,
                 const std::string& library_path, long trials) {
  Planning pl(task);
  const PlanOutputs po = run_plan(pl);
  RunDir run(out_dir, "simulate");
  run.write("values.csv", values_csv(pl, po));
  json summary = {{"initial_values", initial_values(pl, po)},
                  {"trials", trials}};

  if (trials > 0) {
    if (library_path.empty())
      throw ConfigError("simulate: --library is required when trials > 0");
    const NnLibrary lib = pl.load_library(library_path);
    const ComposedPlanner planner = make_planner(pl, lib, po);
    const StepFunction step = make_step(pl.kernel);
    json mc_all = json::array();
    for (std::size_t i = 0; i < pl.cfg.initial_points.size(); ++i) {
      const Vec& x0 = pl.cfg.initial_points[i];
      const McResult mc = mc_satisfaction(planner, step, x0, trials,
                                          derive_seed(pl.cfg.train.seed, i));
      mc_all.push_back({{"cell", pl.sg.locate(x0)},
                        {"accepted", mc.accepted},
                        {"trials", mc.trials},
                        {"estimate", mc.estimate},
                        {"ci_lo", mc.ci_lo},
                        {"ci_hi", mc.ci_hi}});
      std::mt19937_64 rng(derive_seed(pl.cfg.train.seed, i));
      const Trajectory traj = run_closed_loop(planner, step, x0, rng);
      run.write("trajectory_" + std::to_string(i) + ".csv",
                trajectory_csv(traj, pl.n(), pl.m()));
    }
    summary["mc"] = mc_all;
  }
  run.write("summary.json", summary.dump(2));
  run.finish();
  for (const auto& iv : summary["initial_values"])
    std::printf("initial cell %ld: value %.6f\n", iv["cell"].get<long>(),
                iv["value"].get<double>());
  if (summary.contains("mc"))
    for (const auto& mc : summary["mc"])
      std::printf("cell %ld: accepted %ld/%ld, 95%% CI [%.4f, %.4f]\n",
                  mc["cell"].get<long>(), mc["accepted"].get<long>(),
                  mc["trials"].get<long>(), mc["ci_lo"].get<double>(),
                  mc["ci_hi"].get<double>());
  return 0;
}

int cmd_adapt(const std::string& task, const std::string& out_dir,
              const std::string& demo_path, int keep, double p, int max_rounds,
              bool train_nets) {
  Planning pl(task);
  if (pl.cfg.initial_points.empty())
    throw ConfigError("adapt: the task needs at least one initial point");
  const DemoSet demos = load_demos(demo_path, pl.n(), pl.m());
  const AdaptResult res = adapt_partition(
      pl.cfg.state_domain, pl.cfg.eta_q, pl.cfg.controller_domain, pl.cfg.eta_P,
      pl.kernel, pl.dfa, pl.cfg.workspace, pl.cfg.initial_points,
      pl.cfg.horizon, demos, keep, p, pl.kernel.nominal, pl.cost(),
      pl.cfg.train, max_rounds, train_nets);
  RunDir run(out_dir, "adapt");
  json summary = {
      {"achieved", res.achieved},
      {"achieved_value", res.achieved_value},
      {"refinements", res.refinements},
      {"final_I", res.final_I},
      {"final_eta_q", std::vector<double>(res.state_grid.cell_widths().data(),
                                          res.state_grid.cell_widths().data() +
                                              res.state_grid.dim())},
      {"final_cells", res.state_grid.cell_count()},
      {"final_partitions", res.controller_grid.cell_count()}};
  run.write("summary.json", summary.dump(2));
  if (train_nets) run.write("library.json", res.library.to_json());
  run.finish();
  std::printf("%s after %d refinement(s): value %.6f (threshold %.6f)\n",
              res.achieved ? "achieved" : "not achieved", res.refinements,
              res.achieved_value, p);
  return 0;
}

int cmd_bounds(const std::string& task, const std::string& out_dir,
               const std::string& library_path, double v0, double mean_lip_x,
               double mean_lip_u) {
  Planning pl(task);
  const PlanOutputs po = v0 < 0.0 ? run_plan(pl) : PlanOutputs{};
  double value = v0;
  if (value < 0.0) {
    if (pl.cfg.initial_points.empty())
      throw ConfigError("bounds: pass --v0 or give the task initial points");
    value = 1.0;
    for (const Vec& x0 : pl.cfg.initial_points)
      value = std::min(value,
                       po.dp.values[0][po.product.initial(pl.sg.locate(x0))]);
  }

  BoundParams bp;
  const long N = pl.sg.cell_count();
  const Vec sigma = Vec::Constant(pl.n(), std::sqrt(pl.cfg.variance_floor));
  const auto [lam, bu] = gaussian_kernel_lipschitz(sigma, mean_lip_x, mean_lip_u);
  bp.Lambda = Vec::Constant(N, lam);
  bp.B = Vec::Constant(N, bu);
  if (!library_path.empty()) {
    const NnLibrary lib = pl.load_library(library_path);
    double worst = 0.0;
    for (const auto& [key, entry] : lib.entries)
      worst = std::max(worst, lipschitz_on(entry.net, pl.sg.cell_box(key.q)));
    bp.L = Vec::Constant(N, worst);
  } else {
    bp.L = Vec::Constant(N, 0.0);
  }
  bp.Lx = pl.cfg.state_domain.hi.cwiseAbs()
              .cwiseMax(pl.cfg.state_domain.lo.cwiseAbs())
              .norm();
  double Lp = 0.0;
  for (int d = 0; d < pl.cfg.controller_domain.dim(); ++d) {
    if ((d + 1) % (pl.n() + 1) == 0) continue;  // bias coordinates
    Lp = std::max({Lp, std::abs(pl.cfg.controller_domain.lo[d]),
                   std::abs(pl.cfg.controller_domain.hi[d])});
  }
  bp.Lp = Lp;
  bp.eta_q = pl.cfg.eta_q.maxCoeff();
  bp.eta_P = pl.cfg.eta_P.maxCoeff();
  bp.H = pl.cfg.horizon;
  bp.Z = pl.dfa.num_states();
  bp.m = pl.m();
  bp.n = pl.n();

  const DeltaResult dnn = delta_nn(bp);
  const DeltaResult dstar = delta_star(bp);
  const auto envelope = satisfaction_envelope(value, bp);

  RunDir run(out_dir, "bounds");
  json summary = {{"v0", value},
                  {"delta_nn", dnn.value},
                  {"delta_star", dstar.value},
                  {"envelope_lo", envelope.first},
                  {"envelope_hi", envelope.second},
                  {"H", bp.H},
                  {"Z", bp.Z}};
  run.write("bounds.json", summary.dump(2));
  run.finish();
  std::printf("delta_nn %.6g, delta_star %.6g, envelope [%.6f, %.6f]\n",
              dnn.value, dstar.value, envelope.first, envelope.second);
  return 0;
}

int cmd_audit(const std::string& task, const std::string& out_dir,
              const std::string& library_path) {
  Planning pl(task);
  const NnLibrary lib = pl.load_library(library_path);
  json report = json::array();
  long violations = 0;
  for (const auto& [key, entry] : lib.entries) {
    const MembershipReport rep = check_membership(
        entry.net, pl.sg.cell_box(key.q), partition_box(pl.cg, key.P));
    if (!rep.inside) {
      ++violations;
      report.push_back({{"q", key.q},
                        {"P", key.P},
                        {"violating_regions", rep.violating_regions}});
    }
  }
  RunDir run(out_dir, "audit");
  json summary = {{"entries", lib.entries.size()},
                  {"violations", violations},
                  {"details", report}};
  run.write("audit.json", summary.dump(2));
  run.finish();
  std::printf("audited %zu nets: %ld violation(s)\n", lib.entries.size(),
              violations);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Formally constrained neural controller planning"};
  app.require_subcommand(1);

  std::string task, out_dir = "run", library_path, demo_path;
  long trials = 0;
  int keep = 1, max_rounds = 4;
  double p = 0.9, v0 = -1.0, mean_lip_x = 1.0, mean_lip_u = 1.0;
  bool no_train = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--task", task, "task configuration JSON")->required();
    sub->add_option("--out", out_dir, "run directory for artifacts");
  };

  add_common(app.add_subcommand("compile-spec", "compile the spec into a DFA"));
  add_common(app.add_subcommand("build-mdp", "build the full abstraction"));
  auto* demos_cmd =
      app.add_subcommand("build-mdp-demos", "demo-guided abstraction");
  add_common(demos_cmd);
  demos_cmd->add_option("--demos", demo_path, "demo CSV (k, x..., u...)")
      ->required();
  demos_cmd->add_option("--keep", keep, "partitions kept per cell (I)");
  add_common(app.add_subcommand("plan", "abstraction + DP value/action tables"));
  add_common(app.add_subcommand("train-library", "train every (cell, partition) net"));
  add_common(
      app.add_subcommand("train-transfer", "train only plan-referenced nets"));
  auto* sim = app.add_subcommand("simulate", "closed-loop Monte Carlo");
  add_common(sim);
  sim->add_option("--library", library_path, "trained library JSON");
  sim->add_option("--trials", trials, "Monte Carlo rollouts per initial point");
  auto* adapt = app.add_subcommand("adapt", "refine grids until the value target");
  add_common(adapt);
  adapt->add_option("--demos", demo_path, "demo CSV")->required();
  adapt->add_option("--keep", keep, "initial partitions kept per cell (I)");
  adapt->add_option("--p", p, "satisfaction threshold");
  adapt->add_option("--max-rounds", max_rounds, "refinement cap");
  adapt->add_flag("--no-train", no_train, "skip training the final library");
  auto* bounds = app.add_subcommand("bounds", "satisfaction error bounds");
  add_common(bounds);
  bounds->add_option("--library", library_path, "library for net Lipschitz constants");
  bounds->add_option("--v0", v0, "abstract value (computed by DP when omitted)");
  bounds->add_option("--mean-lip-x", mean_lip_x, "kernel mean Lipschitz in x");
  bounds->add_option("--mean-lip-u", mean_lip_u, "kernel mean Lipschitz in u");
  auto* audit = app.add_subcommand("audit", "membership sweep over a library");
  add_common(audit);
  audit->add_option("--library", library_path, "library JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "compile-spec") return cmd_compile_spec(task, out_dir);
    if (cmd == "build-mdp") return cmd_build_mdp(task, out_dir);
    if (cmd == "build-mdp-demos")
      return cmd_build_mdp_demos(task, out_dir, demo_path, keep);
    if (cmd == "plan") return cmd_plan(task, out_dir);
    if (cmd == "train-library") return cmd_train_library(task, out_dir);
    if (cmd == "train-transfer") return cmd_train_transfer(task, out_dir);
    if (cmd == "simulate") return cmd_simulate(task, out_dir, library_path, trials);
    if (cmd == "adapt")
      return cmd_adapt(task, out_dir, demo_path, keep, p, max_rounds, !no_train);
    if (cmd == "bounds")
      return cmd_bounds(task, out_dir, library_path, v0, mean_lip_x, mean_lip_u);
    if (cmd == "audit") return cmd_audit(task, out_dir, library_path);
    std::fprintf(stderr, "unknown subcommand\n");
    return 2;
  } catch (const CapabilityError& e) {
    std::fprintf(stderr, "capability limit: %s\n", e.what());
    return 3;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
