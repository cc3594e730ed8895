#include "rtil/il.hpp"

#include <fstream>

namespace rtil {

IlMethod il_method_from_string(const std::string& s) {
  if (s == "bc") return IlMethod::bc;
  if (s == "dagger") return IlMethod::dagger;
  throw InvalidParameterError("unknown method: " + s);
}

Augmentation augmentation_from_string(const std::string& s) {
  if (s == "none") return Augmentation::none;
  if (s == "dr") return Augmentation::dr;
  if (s == "sa_sparse") return Augmentation::sa_sparse;
  if (s == "sa_dense") return Augmentation::sa_dense;
  throw InvalidParameterError("unknown augmentation: " + s);
}

const char* to_string(IlMethod m) { return m == IlMethod::bc ? "bc" : "dagger"; }

const char* to_string(Augmentation a) {
  switch (a) {
    case Augmentation::none: return "none";
    case Augmentation::dr: return "dr";
    case Augmentation::sa_sparse: return "sa_sparse";
    case Augmentation::sa_dense: return "sa_dense";
  }
  return "unknown";
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::demo: return "demo";
    case Provenance::tube_sparse: return "tube_sparse";
    case Provenance::tube_dense: return "tube_dense";
  }
  return "unknown";
}

Vector make_features(const Vector& state, const ReferenceWindow& window) {
  const int N = window.horizon();
  Vector f(state.size() + 6 * N);
  f.head(state.size()) = state;
  for (int k = 0; k < N; ++k) f.segment(state.size() + 6 * k, 6) = window.pv.col(k);
  return f;
}

Controller policy_controller(const MlpPolicy& policy) {
  return [&policy](const Vector& x, const ReferenceWindow& window) -> Eigen::Vector3d {
    return policy.forward(make_features(x, window));
  };
}

void Dataset::append(DatasetEntry entry) {
  if (!entry.label.allFinite() || !entry.features.allFinite())
    throw NumericError("Dataset: non-finite entry");
  if (!entries.empty() && entry.features.size() != entries.front().features.size())
    throw DimensionError("Dataset: feature dimension mismatch");
  entries.push_back(std::move(entry));
}

long Dataset::count(Provenance p) const {
  long c = 0;
  for (const auto& e : entries)
    if (e.prov == p) ++c;
  return c;
}

Matrix Dataset::features_matrix() const {
  Matrix X(feature_dim(), entries.size());
  for (size_t i = 0; i < entries.size(); ++i) X.col(i) = entries[i].features;
  return X;
}

Matrix Dataset::labels_matrix() const {
  Matrix Y(entries.empty() ? 0 : entries.front().label.size(), entries.size());
  for (size_t i = 0; i < entries.size(); ++i) Y.col(i) = entries[i].label;
  return Y;
}

void Dataset::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  const int fd = feature_dim();
  const int ld = entries.empty() ? 0 : static_cast<int>(entries.front().label.size());
  out << "provenance,demo_index,source_step";
  for (int i = 0; i < fd; ++i) out << ",f" << i;
  for (int i = 0; i < ld; ++i) out << ",u" << i;
  out << "\n";
  out.precision(17);
  for (const auto& e : entries) {
    out << to_string(e.prov) << "," << e.demo_index << "," << e.source_step;
    for (int i = 0; i < fd; ++i) out << "," << e.features[i];
    for (int i = 0; i < ld; ++i) out << "," << e.label[i];
    out << "\n";
  }
}

double IlConfig::beta_for_demo(int demo_index) const {
  if (method == IlMethod::bc) return 1.0;
  if (!beta_schedule.empty()) {
    int i = std::min<int>(demo_index - 1, static_cast<int>(beta_schedule.size()) - 1);
    double b = beta_schedule[i];
    if (b < 0.0 || b > 1.0) throw InvalidParameterError("IlConfig: beta must be in [0,1]");
    return b;
  }
  return demo_index == 1 ? 1.0 : 0.0;
}

CollectResult collect_demonstration(TrackingMpc& expert, const MlpPolicy* policy, double beta,
                                    const RolloutSpec& env, const ReferenceTrajectory& ref,
                                    const TubeApprox& tube, const BoxSet& U, Augmentation aug,
                                    uint64_t seed, int demo_index) {
  if (beta < 0.0 || beta > 1.0)
    throw InvalidParameterError("collect_demonstration: beta must be in [0,1]");
  if (beta < 1.0 && policy == nullptr)
    throw InvalidParameterError("collect_demonstration: policy required when beta < 1");
  env.params.validate();
  env.dist.validate();

  const int T = ref.steps();
  Rng rng(seed);
  Rng init_rng = rng.child(0);
  Rng dist_rng = rng.child(1 + env.dist.direction_seed);
  Rng coin_rng = rng.child(2);

  CollectResult res;
  Episode& ep = res.episode;
  ep.dt = ref.dt;
  ep.states.setZero(kNx, T + 1);
  ep.actions.setZero(kNu, T);
  ep.refs.setZero(6, T);
  ep.forces.setZero(3, T);
  ep.step_costs.setZero(T);

  Vector x(kNx);
  for (int i = 0; i < 3; ++i)
    x[i] = ref.pv(i, 0) + init_rng.uniform(-env.init_pos_noise, env.init_pos_noise);
  for (int i = 0; i < 3; ++i)
    x[3 + i] = ref.pv(3 + i, 0) + init_rng.uniform(-env.init_vel_noise, env.init_vel_noise);
  for (int i = 0; i < 2; ++i)
    x[6 + i] = init_rng.uniform(-env.init_tilt_noise, env.init_tilt_noise);
  ep.states.col(0) = x;
  if (!env.X.contains(x, 1e-9)) ep.violated = true;

  const double force_half = env.dist.magnitude_fraction * env.params.mass * env.params.gravity;
  expert.reset_warm();

  for (int t = 0; t < T; ++t) {
    ReferenceWindow window = ref.window(t, env.N);
    Vector features = make_features(x, window);

    RtmpcSolution sol;
    try {
      sol = expert.step(x, window);
    } catch (const ExpertInfeasibleError&) {
      // keep what was collected so far; the demonstration itself failed
      ep.expert_infeasible = true;
      ep.violated = true;
      break;
    }

    DatasetEntry demo_entry;
    demo_entry.features = features;
    demo_entry.label = sol.u_exec;
    demo_entry.prov = Provenance::demo;
    demo_entry.demo_index = demo_index;
    demo_entry.source_step = t;
    res.entries.push_back(std::move(demo_entry));

    if (aug == Augmentation::sa_sparse || aug == Augmentation::sa_dense) {
      auto samples = (aug == Augmentation::sa_sparse)
                         ? sparse_samples(sol.x_check0, tube.z_box)
                         : dense_samples(sol.x_check0, tube.z_box);
      auto pairs = label_actions(samples, sol.u_check0, expert.gain(), sol.x_check0, t);
      for (auto& pair : pairs) {
        if (!U.contains(pair.action_plus, 1e-12)) ++res.label_violations;
        DatasetEntry e;
        e.features = make_features(pair.state_plus, window);
        e.label = std::move(pair.action_plus);
        e.prov = aug == Augmentation::sa_sparse ? Provenance::tube_sparse : Provenance::tube_dense;
        e.demo_index = demo_index;
        e.source_step = t;
        res.entries.push_back(std::move(e));
      }
    }

    Eigen::Vector3d u;
    bool use_expert = coin_rng.uniform01() < beta;
    if (use_expert) {
      u = sol.u_exec;
    } else {
      u = policy->forward(features);
    }

    Eigen::Vector3d w = Eigen::Vector3d::Zero();
    if (env.dist.mode == DisturbanceSpec::Mode::uniform_random)
      for (int i = 0; i < 3; ++i) w[i] = dist_rng.uniform(-force_half, force_half);

    ep.actions.col(t) = u;
    ep.refs.col(t) = window.pv.col(0);
    ep.forces.col(t) = w;

    Vector e(kNx);
    e.segment<6>(0) = x.segment<6>(0) - window.pv.col(0);
    e.segment<2>(6) = x.segment<2>(6);
    ep.step_costs[t] = e.dot(env.Q * e) + u.dot(env.R * u);

    x = quad_step(x, u, w, env.params, ref.dt);
    ep.states.col(t + 1) = x;
    ep.steps = t + 1;
    if (!env.X.contains(x, 1e-9)) ep.violated = true;
    if (x.segment<3>(0).cwiseAbs().maxCoeff() > 1e3 ||
        x.segment<3>(3).cwiseAbs().maxCoeff() > 1e3) {
      ep.violated = true;
      break;
    }
  }
  return res;
}

ReferenceTrajectory TrajectorySampler::sample(Rng rng) const {
  ReferenceKind k = kind;
  RefParams p = params;
  if (mixed) {
    int pick = rng.uniform_int(3);
    k = pick == 0 ? ReferenceKind::lemniscate : pick == 1 ? ReferenceKind::circle : ReferenceKind::step;
    p.radius = rng.uniform(radius_range.first, radius_range.second);
    p.speed = rng.uniform(speed_range.first, speed_range.second);
    p.center[0] = params.center[0] + rng.uniform(-center_jitter, center_jitter);
    p.center[1] = params.center[1] + rng.uniform(-center_jitter, center_jitter);
  }
  return make_reference(k, p, duration, dt, velocity_limit);
}

IlRunResult run_il(const ExpertSetup& setup, const IlConfig& config,
                   const RolloutSpec& collect_env, const TrajectorySampler& sampler,
                   int n_demos) {
  if (n_demos < 1) throw InvalidParameterError("run_il: need at least one demonstration");

  RolloutSpec env = collect_env;
  if (config.augmentation == Augmentation::dr) {
    env.dist.mode = DisturbanceSpec::Mode::uniform_random;
  }

  TrackingMpc expert = make_expert(setup);
  Rng master(config.seed);

  IlRunResult result;
  std::vector<int> layers;
  layers.push_back(kNx + 6 * collect_env.N);
  for (int h : config.hidden) layers.push_back(h);
  layers.push_back(kNu);

  for (int demo = 1; demo <= n_demos; ++demo) {
    double beta = config.beta_for_demo(demo);
    const MlpPolicy* policy = result.policies.empty() ? nullptr : &result.policies.back();
    if (beta < 1.0 && policy == nullptr)
      throw InvalidParameterError("run_il: beta < 1 before any policy exists");

    ReferenceTrajectory ref = sampler.sample(master.child(4ull * demo));
    CollectResult collected =
        collect_demonstration(expert, policy, beta, env, ref, setup.tube, setup.U,
                              config.augmentation, master.child(4ull * demo + 1).base_seed(), demo);
    result.label_violations += collected.label_violations;
    result.demo_failed.push_back(collected.episode.expert_infeasible);
    for (auto& e : collected.entries) result.dataset.append(std::move(e));
    if (!collected.entries.empty()) result.dataset.demo_count += 1;
    result.entries_after_demo.push_back(result.dataset.size());

    if (result.dataset.entries.empty())
      throw ExpertInfeasibleError("run_il: no data collected (expert infeasible at start)");

    if (demo == 1) {
      // freeze input and label statistics on the first collected demonstration
      Matrix X = result.dataset.features_matrix();
      result.norm_mean = X.rowwise().mean();
      Matrix centered = X.colwise() - result.norm_mean;
      Vector var = centered.cwiseProduct(centered).rowwise().mean();
      result.norm_std = var.cwiseSqrt().cwiseMax(1e-6);
      Matrix Y = result.dataset.labels_matrix();
      result.out_mean = Y.rowwise().mean();
      Matrix ycen = Y.colwise() - result.out_mean;
      Vector yvar = ycen.cwiseProduct(ycen).rowwise().mean();
      result.out_std = yvar.cwiseSqrt().cwiseMax(1e-6);
    }

    MlpPolicy policy_new = MlpPolicy::create(layers, master.child(4ull * demo + 2).base_seed());
    policy_new.set_normalization(result.norm_mean, result.norm_std);
    policy_new.set_output_normalization(result.out_mean, result.out_std);
    TrainOptions opts;
    opts.epochs = config.epochs;
    opts.lr = config.lr;
    opts.batch = config.batch;
    opts.seed = master.child(4ull * demo + 3).base_seed();
    result.loss_traces.push_back(
        policy_new.train(result.dataset.features_matrix(), result.dataset.labels_matrix(), opts));
    result.policies.push_back(std::move(policy_new));
  }
  return result;
}

}  // namespace rtil
