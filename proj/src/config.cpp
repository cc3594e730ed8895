#include "rtil/config.hpp"

#include <fstream>
#include <set>

namespace rtil {

namespace {

Vector to_vector(const nlohmann::json& j) {
  Vector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
  return v;
}

nlohmann::json from_vector(const Vector& v) {
  nlohmann::json j = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key()))
      throw InvalidParameterError("config: unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig RunConfig::defaults() {
  RunConfig c;
  c.q_diag.resize(kNx);
  c.q_diag << 2.0, 2.0, 6.0, 0.3, 0.3, 1.0, 0.05, 0.05;
  c.r_diag.resize(kNu);
  c.r_diag << 0.4, 15.0, 15.0;
  return c;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c = defaults();
  check_keys(j, {"model", "cost", "disturbance", "tube", "trajectory", "init_noise", "il",
                 "eval", "output_dir", "master_seed", "workers"},
             "top level");

  if (j.contains("model")) {
    const auto& m = j.at("model");
    check_keys(m, {"mass", "gravity", "tilt_tau", "drag_coeff", "tilt_limit", "tilt_cmd_limit", "thrust_min",
                   "thrust_max", "flight_lower", "flight_upper", "velocity_limit", "dt",
                   "horizon"},
               "model");
    maybe(m, "mass", c.params.mass);
    maybe(m, "gravity", c.params.gravity);
    maybe(m, "tilt_tau", c.params.tilt_tau);
    maybe(m, "drag_coeff", c.params.drag_coeff);
    maybe(m, "tilt_limit", c.params.tilt_limit);
    maybe(m, "tilt_cmd_limit", c.params.tilt_cmd_limit);
    maybe(m, "thrust_min", c.params.thrust_min);
    maybe(m, "thrust_max", c.params.thrust_max);
    if (m.contains("flight_lower")) c.params.flight_lower = to_vector(m.at("flight_lower"));
    if (m.contains("flight_upper")) c.params.flight_upper = to_vector(m.at("flight_upper"));
    maybe(m, "velocity_limit", c.params.velocity_limit);
    maybe(m, "dt", c.dt);
    maybe(m, "horizon", c.horizon);
  }
  if (j.contains("cost")) {
    const auto& m = j.at("cost");
    check_keys(m, {"q_diag", "r_diag"}, "cost");
    if (m.contains("q_diag")) c.q_diag = to_vector(m.at("q_diag"));
    if (m.contains("r_diag")) c.r_diag = to_vector(m.at("r_diag"));
  }
  if (j.contains("disturbance")) {
    const auto& m = j.at("disturbance");
    check_keys(m, {"w_fraction", "task", "adv_range", "drag_eval"}, "disturbance");
    maybe(m, "w_fraction", c.w_fraction);
    maybe(m, "task", c.task);
    if (m.contains("adv_range")) {
      c.adv_lo = m.at("adv_range").at(0).get<double>();
      c.adv_hi = m.at("adv_range").at(1).get<double>();
    }
    maybe(m, "drag_eval", c.drag_eval);
  }
  if (j.contains("tube")) {
    const auto& m = j.at("tube");
    check_keys(m, {"rollouts", "horizon", "seed"}, "tube");
    maybe(m, "rollouts", c.tube_rollouts);
    maybe(m, "horizon", c.tube_horizon);
    maybe(m, "seed", c.tube_seed);
  }
  if (j.contains("trajectory")) {
    const auto& m = j.at("trajectory");
    check_keys(m, {"kind", "radius", "speed", "duration", "center", "radius_range",
                   "speed_range", "center_jitter"},
               "trajectory");
    maybe(m, "kind", c.traj_kind);
    maybe(m, "radius", c.radius);
    maybe(m, "speed", c.speed);
    maybe(m, "duration", c.duration);
    if (m.contains("center")) c.center = to_vector(m.at("center"));
    if (m.contains("radius_range")) {
      c.radius_lo = m.at("radius_range").at(0).get<double>();
      c.radius_hi = m.at("radius_range").at(1).get<double>();
    }
    if (m.contains("speed_range")) {
      c.speed_lo = m.at("speed_range").at(0).get<double>();
      c.speed_hi = m.at("speed_range").at(1).get<double>();
    }
    maybe(m, "center_jitter", c.center_jitter);
  }
  if (j.contains("init_noise")) {
    const auto& m = j.at("init_noise");
    check_keys(m, {"pos", "vel", "tilt"}, "init_noise");
    maybe(m, "pos", c.init_pos_noise);
    maybe(m, "vel", c.init_vel_noise);
    maybe(m, "tilt", c.init_tilt_noise);
  }
  if (j.contains("il")) {
    const auto& m = j.at("il");
    check_keys(m, {"method", "augmentation", "n_demos", "epochs", "lr", "batch",
                   "beta_schedule", "hidden", "dump_dataset"},
               "il");
    maybe(m, "method", c.method);
    maybe(m, "augmentation", c.augmentation);
    maybe(m, "n_demos", c.n_demos);
    maybe(m, "epochs", c.epochs);
    maybe(m, "lr", c.lr);
    maybe(m, "batch", c.batch);
    maybe(m, "beta_schedule", c.beta_schedule);
    maybe(m, "hidden", c.hidden);
    maybe(m, "dump_dataset", c.dump_dataset);
  }
  if (j.contains("eval")) {
    const auto& m = j.at("eval");
    check_keys(m, {"seeds", "episodes", "demo_max", "gap_episodes", "methods", "domains"},
               "eval");
    maybe(m, "seeds", c.n_seeds);
    maybe(m, "episodes", c.eval_episodes);
    maybe(m, "demo_max", c.demo_max);
    maybe(m, "gap_episodes", c.gap_episodes);
    maybe(m, "methods", c.methods);
    maybe(m, "domains", c.domains);
  }
  maybe(j, "output_dir", c.output_dir);
  maybe(j, "master_seed", c.master_seed);
  maybe(j, "workers", c.workers);
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& config_path,
                          const std::vector<std::string>& overrides) {
  nlohmann::json j = nlohmann::json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw IoError("cannot open config file " + config_path);
    try {
      in >> j;
    } catch (const nlohmann::json::exception& ex) {
      throw IoError("cannot parse config file " + config_path + ": " + ex.what());
    }
  }
  for (const std::string& ov : overrides) {
    auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw InvalidParameterError("override must be key.path=value: " + ov);
    std::string path = ov.substr(0, eq);
    std::string value = ov.substr(eq + 1);
    std::string pointer = "/";
    for (char ch : path) pointer += (ch == '.') ? '/' : ch;
    nlohmann::json parsed = nlohmann::json::parse(value, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded()) parsed = value;  // plain string
    j[nlohmann::json::json_pointer(pointer)] = parsed;
  }
  return from_json(j);
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["model"] = {{"mass", params.mass},
                {"gravity", params.gravity},
                {"tilt_tau", params.tilt_tau},
                {"drag_coeff", params.drag_coeff},
                {"tilt_limit", params.tilt_limit},
                {"tilt_cmd_limit", params.tilt_cmd_limit},
                {"thrust_min", params.thrust_min},
                {"thrust_max", params.thrust_max},
                {"flight_lower", from_vector(params.flight_lower)},
                {"flight_upper", from_vector(params.flight_upper)},
                {"velocity_limit", params.velocity_limit},
                {"dt", dt},
                {"horizon", horizon}};
  j["cost"] = {{"q_diag", from_vector(q_diag)}, {"r_diag", from_vector(r_diag)}};
  j["disturbance"] = {{"w_fraction", w_fraction},
                      {"task", task},
                      {"adv_range", {adv_lo, adv_hi}},
                      {"drag_eval", drag_eval}};
  j["tube"] = {{"rollouts", tube_rollouts}, {"horizon", tube_horizon}, {"seed", tube_seed}};
  j["trajectory"] = {{"kind", traj_kind},
                     {"radius", radius},
                     {"speed", speed},
                     {"duration", duration},
                     {"center", from_vector(center)},
                     {"radius_range", {radius_lo, radius_hi}},
                     {"speed_range", {speed_lo, speed_hi}},
                     {"center_jitter", center_jitter}};
  j["init_noise"] = {{"pos", init_pos_noise}, {"vel", init_vel_noise}, {"tilt", init_tilt_noise}};
  j["il"] = {{"method", method},
             {"augmentation", augmentation},
             {"n_demos", n_demos},
             {"epochs", epochs},
             {"lr", lr},
             {"batch", batch},
             {"beta_schedule", beta_schedule},
             {"hidden", hidden},
             {"dump_dataset", dump_dataset}};
  j["eval"] = {{"seeds", n_seeds},
               {"episodes", eval_episodes},
               {"demo_max", demo_max},
               {"gap_episodes", gap_episodes},
               {"methods", methods},
               {"domains", domains}};
  j["output_dir"] = output_dir;
  j["master_seed"] = master_seed;
  j["workers"] = workers;
  return j;
}

std::string fnv1a_hex(const std::string& data) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string RunConfig::hash() const { return fnv1a_hex(to_json().dump()); }

void RunConfig::validate() const {
  params.validate();
  if (!(dt > 0.0)) throw InvalidParameterError("config: dt must be positive");
  if (horizon < 1) throw InvalidParameterError("config: horizon must be >= 1");
  if (q_diag.size() != kNx || r_diag.size() != kNu)
    throw InvalidParameterError("config: cost diagonals must have sizes 8 and 3");
  if (w_fraction < 0.0 || w_fraction > 0.3)
    throw InvalidParameterError("config: w_fraction must be in [0, 0.3]");
  il_method_from_string(method);
  augmentation_from_string(augmentation);
  if (task != "T1" && task != "T2") throw InvalidParameterError("config: task must be T1 or T2");
  if (traj_kind != "mixed") reference_kind_from_string(traj_kind);
  for (const auto& d : domains) domain_from_string(d);
  for (const auto& m : methods) {
    auto plus = m.find('+');
    if (plus == std::string::npos)
      throw InvalidParameterError("config: method spec must be imitation+augmentation: " + m);
    il_method_from_string(m.substr(0, plus));
    augmentation_from_string(m.substr(plus + 1));
  }
}

uint64_t RunConfig::effective_tube_seed() const {
  if (tube_seed != 0) return tube_seed;
  return Rng(master_seed).child(77).base_seed();
}

int RunConfig::effective_workers() const {
  return workers > 0 ? workers : default_workers();
}

TrajectorySampler RunConfig::sampler() const {
  TrajectorySampler s;
  s.mixed = traj_kind == "mixed";
  if (!s.mixed) s.kind = reference_kind_from_string(traj_kind);
  s.params.radius = radius;
  s.params.speed = speed;
  s.params.center = center;
  s.duration = duration;
  s.dt = dt;
  s.velocity_limit = params.velocity_limit;
  s.radius_range = {radius_lo, radius_hi};
  s.speed_range = {speed_lo, speed_hi};
  s.center_jitter = center_jitter;
  return s;
}

IlConfig RunConfig::il_config(uint64_t seed) const {
  IlConfig il;
  il.method = il_method_from_string(method);
  il.augmentation = augmentation_from_string(augmentation);
  il.beta_schedule = beta_schedule;
  il.hidden = hidden;
  il.epochs = epochs;
  il.lr = lr;
  il.batch = batch;
  il.seed = seed;
  return il;
}

ExpertSetup RunConfig::build_setup() const {
  validate();
  TubeOptions topts;
  topts.rollouts = tube_rollouts;
  topts.horizon = tube_horizon;
  topts.seed = effective_tube_seed();
  topts.workers = effective_workers();
  QpSettings qp;
  qp.tol_primal = 1e-7;
  qp.tol_dual = 1e-7;
  return build_expert_setup(params, q_diag, r_diag, dt, horizon, w_fraction, topts, qp);
}

RolloutSpec RunConfig::rollout_spec(Domain domain, const ExpertSetup& setup) const {
  RolloutSpec spec;
  spec.params = params;
  spec.X = setup.X;
  spec.Q = setup.weights.Q;
  spec.R = setup.weights.R;
  spec.N = horizon;
  spec.init_pos_noise = init_pos_noise;
  spec.init_vel_noise = init_vel_noise;
  spec.init_tilt_noise = init_tilt_noise;
  spec.dist.magnitude_fraction = w_fraction;
  spec.dist.adv_lo = adv_lo;
  spec.dist.adv_hi = adv_hi;
  spec.dist.drag_eval = drag_eval;
  switch (domain) {
    case Domain::source:
      spec.dist.mode = DisturbanceSpec::Mode::none;
      break;
    case Domain::target_t1:
      spec.dist.mode = DisturbanceSpec::Mode::adversarial_constant;
      break;
    case Domain::target_t2:
      spec.dist.mode = DisturbanceSpec::Mode::drag_mismatch;
      break;
  }
  return spec;
}

Domain RunConfig::target_domain() const {
  return task == "T1" ? Domain::target_t1 : Domain::target_t2;
}

}  // namespace rtil
