#include "cpwa/task.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace cpwa {

namespace {

Vec vec_from(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
  return out;
}

std::vector<double> vec_to(const Vec& v) {
  return {v.data(), v.data() + v.size()};
}

Box box_from(const nlohmann::json& j) {
  return Box(vec_from(j.at("lo")), vec_from(j.at("hi")));
}

}  // namespace

NominalDynamics TaskConfig::make_dynamics() const {
  if (dynamics == "dubins") return make_dubins(dubins);
  if (dynamics == "integrator-chain") {
    Mat B = integrator_B;
    if (B.size() == 0)
      B = default_integrator_coupling(state_domain.dim(),
                                      controller_domain.dim() /
                                          (state_domain.dim() + 1));
    return make_integrator_chain(B);
  }
  throw ConfigError("task: unknown dynamics preset '" + dynamics + "'");
}

StochasticKernel TaskConfig::make_kernel() const {
  StochasticKernel k;
  k.nominal = make_dynamics();
  k.variance_floor = variance_floor;
  return k;
}

StateGrid TaskConfig::make_state_grid() const {
  return StateGrid(state_domain, eta_q);
}

ControllerGrid TaskConfig::make_controller_grid() const {
  return ControllerGrid(controller_domain, eta_P);
}

FormulaPtr TaskConfig::parse_spec() const { return parse_formula(spec_text); }

void TaskConfig::validate() const {
  make_state_grid();
  make_controller_grid();
  const int n = state_domain.dim();
  if (controller_domain.dim() % (n + 1) != 0)
    throw ConfigError("task: controller domain dimension is not m*(n+1)");
  if (horizon < 1) throw ConfigError("task: horizon must be >= 1");
  const FormulaPtr spec = parse_spec();
  if (max_time_index(spec) > horizon)
    throw ConfigError("task: horizon smaller than the spec's max time index");
  const auto names = workspace.atom_names();
  const std::set<std::string> name_set(names.begin(), names.end());
  for (const auto& atom : collect_atoms(spec))
    if (!name_set.count(atom))
      throw ConfigError("task: spec atom '" + atom + "' has no workspace region");
  for (const auto& r : workspace.regions)
    if (r.box.dim() > n)
      throw ConfigError("task: region '" + r.name + "' exceeds state dimension");
  const StateGrid grid = make_state_grid();
  for (const auto& x0 : initial_points) {
    if (x0.size() != n) throw ConfigError("task: initial point dimension mismatch");
    if (grid.locate(x0) == grid.sink_index())
      throw ConfigError("task: initial point outside the state domain");
  }
  if (variance_floor <= 0.0)
    throw ConfigError("task: variance floor must be positive");
}

TaskConfig TaskConfig::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  TaskConfig cfg;
  cfg.dynamics = j.value("dynamics", std::string("dubins"));
  if (j.contains("dubins")) {
    cfg.dubins.v = j["dubins"].value("v", 0.3);
    cfg.dubins.dt = j["dubins"].value("dt", 1.0);
  }
  if (j.contains("integrator_B")) {
    const auto rows = j["integrator_B"];
    const int nr = static_cast<int>(rows.size());
    const int nc = nr > 0 ? static_cast<int>(rows[0].size()) : 0;
    cfg.integrator_B.resize(nr, nc);
    for (int r = 0; r < nr; ++r)
      for (int c = 0; c < nc; ++c) cfg.integrator_B(r, c) = rows[r][c].get<double>();
  }
  cfg.variance_floor = j.value("variance_floor", 1e-6);
  cfg.state_domain = box_from(j.at("state_domain"));
  cfg.eta_q = vec_from(j.at("eta_q"));
  cfg.controller_domain = box_from(j.at("controller_domain"));
  cfg.eta_P = vec_from(j.at("eta_P"));
  cfg.spec_text = j.at("spec").get<std::string>();
  cfg.workspace = Workspace::from_json(j.at("workspace").dump());
  if (j.contains("initial_points"))
    for (const auto& jp : j["initial_points"]) cfg.initial_points.push_back(vec_from(jp));
  cfg.horizon = j.at("horizon").get<int>();
  if (j.contains("train")) {
    const auto& t = j["train"];
    cfg.train.max_iter = t.value("max_iter", cfg.train.max_iter);
    cfg.train.episodes = t.value("episodes", cfg.train.episodes);
    cfg.train.transfer_episodes =
        t.value("transfer_episodes", cfg.train.transfer_episodes);
    cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
    cfg.train.noise_scale = t.value("noise_scale", cfg.train.noise_scale);
    cfg.train.w1 = t.value("w1", cfg.train.w1);
    cfg.train.w2 = t.value("w2", cfg.train.w2);
    cfg.train.hidden_layers = t.value("hidden_layers", cfg.train.hidden_layers);
    cfg.train.hidden_neurons = t.value("hidden_neurons", cfg.train.hidden_neurons);
    cfg.train.init_range = t.value("init_range", cfg.train.init_range);
  }
  cfg.train.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

std::string TaskConfig::to_json() const {
  nlohmann::json j;
  j["dynamics"] = dynamics;
  j["dubins"] = {{"v", dubins.v}, {"dt", dubins.dt}};
  j["variance_floor"] = variance_floor;
  j["state_domain"] = {{"lo", vec_to(state_domain.lo)}, {"hi", vec_to(state_domain.hi)}};
  j["eta_q"] = vec_to(eta_q);
  j["controller_domain"] = {{"lo", vec_to(controller_domain.lo)},
                            {"hi", vec_to(controller_domain.hi)}};
  j["eta_P"] = vec_to(eta_P);
  j["spec"] = spec_text;
  j["workspace"] = nlohmann::json::parse(workspace.to_json());
  j["initial_points"] = nlohmann::json::array();
  for (const auto& x0 : initial_points) j["initial_points"].push_back(vec_to(x0));
  j["horizon"] = horizon;
  j["seed"] = train.seed;
  j["train"] = {{"max_iter", train.max_iter},
                {"episodes", train.episodes},
                {"transfer_episodes", train.transfer_episodes},
                {"learning_rate", train.learning_rate},
                {"noise_scale", train.noise_scale},
                {"w1", train.w1},
                {"w2", train.w2},
                {"hidden_layers", train.hidden_layers},
                {"hidden_neurons", train.hidden_neurons},
                {"init_range", train.init_range}};
  return j.dump(2);
}

TaskConfig load_task_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("task: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return TaskConfig::from_json(ss.str());
}

}  // namespace cpwa
