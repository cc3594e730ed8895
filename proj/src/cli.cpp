#include "rtil/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace fs = std::filesystem;

namespace rtil {

namespace {

nlohmann::json json_matrix(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json json_vector(const Vector& v) {
  nlohmann::json j = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

nlohmann::json json_box(const BoxSet& b) {
  return {{"lower", json_vector(b.lower())}, {"upper", json_vector(b.upper())}};
}

void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

// Echo the resolved config and prepare the standard layout.
fs::path prepare_output(const RunConfig& config) {
  fs::path root = resolve_output_dir(config.output_dir);
  fs::create_directories(root);
  fs::create_directories(root / "artifacts");
  fs::create_directories(root / "checkpoints");
  fs::create_directories(root / "results");
  fs::create_directories(root / "episodes");
  write_json(config.to_json(), (root / "config.json").string());
  return root;
}

std::string seed_list_string(const RunConfig& config) {
  std::string s;
  for (int i = 0; i < config.n_seeds; ++i) {
    if (!s.empty()) s += ";";
    s += std::to_string(i);
  }
  return s;
}

}  // namespace

std::string resolve_output_dir(const std::string& output_dir) {
  fs::path p(output_dir);
  if (p.is_absolute()) return p.string();
  if (const char* root = std::getenv("RTIL_OUT_ROOT")) return (fs::path(root) / p).string();
  return p.string();
}

int cmd_tube(const RunConfig& config, std::ostream& log) {
  fs::path root = prepare_output(config);
  ExpertSetup setup = config.build_setup();

  BoxSet X_bar = tighten_state_box(setup.X, setup.tube.z_box, state_axis_names());
  BoxSet U_bar = tighten_input_box(setup.U, setup.lqr.K, setup.tube.z_box, input_axis_names());

  nlohmann::json j;
  j["config_hash"] = config.hash();
  j["version"] = kVersion;
  j["model"] = {{"A", json_matrix(setup.model.A)},
                {"B", json_matrix(setup.model.B)},
                {"nx", setup.model.nx},
                {"nu", setup.model.nu},
                {"dt", setup.model.dt}};
  j["lqr"] = {{"P", json_matrix(setup.lqr.P)},
              {"K", json_matrix(setup.lqr.K)},
              {"spectral_radius", setup.lqr.spectral_radius}};
  j["tube"] = {{"z_box", json_box(setup.tube.z_box)},
               {"samples_used", setup.tube.samples_used},
               {"horizon_used", setup.tube.horizon_used},
               {"seed", setup.tube.seed},
               {"converged", setup.tube.converged}};
  j["sets"] = {{"X", json_box(setup.X)},
               {"U", json_box(setup.U)},
               {"W", json_box(setup.W)},
               {"X_tightened", json_box(X_bar)},
               {"U_tightened", json_box(U_bar)}};
  write_json(j, (root / "artifacts" / "tube.json").string());

  log << "tube half-widths per axis:\n";
  for (int i = 0; i < setup.tube.z_box.dim(); ++i)
    log << "  " << std::setw(6) << state_axis_names()[i] << "  [" << setup.tube.z_box.lower()[i]
        << ", " << setup.tube.z_box.upper()[i] << "]\n";
  log << "closed-loop spectral radius: " << setup.lqr.spectral_radius << "\n";
  log << "artifact: " << (root / "artifacts" / "tube.json").string() << "\n";
  return 0;
}

int cmd_train(const RunConfig& config, std::ostream& log) {
  if (config.epochs < 1) throw InvalidParameterError("train: epochs must be >= 1");
  fs::path root = prepare_output(config);
  ExpertSetup setup = config.build_setup();

  RolloutSpec source = config.rollout_spec(Domain::source, setup);
  IlConfig il = config.il_config(Rng(config.master_seed).child(11).base_seed());
  IlRunResult run = run_il(setup, il, source, config.sampler(), config.n_demos);

  nlohmann::json metrics;
  metrics["version"] = kVersion;
  metrics["config_hash"] = config.hash();
  metrics["entries_after_demo"] = run.entries_after_demo;
  metrics["label_violations"] = run.label_violations;
  metrics["demo_failed"] = run.demo_failed;
  nlohmann::json provenance;
  provenance["demo"] = run.dataset.count(Provenance::demo);
  provenance["tube_sparse"] = run.dataset.count(Provenance::tube_sparse);
  provenance["tube_dense"] = run.dataset.count(Provenance::tube_dense);
  metrics["dataset"] = {{"size", run.dataset.size()},
                        {"demo_count", run.dataset.demo_count},
                        {"provenance", provenance}};
  metrics["loss_traces"] = run.loss_traces;

  for (size_t d = 0; d < run.policies.size(); ++d) {
    char name[64];
    std::snprintf(name, sizeof(name), "policy_demo_%02zu.bin", d + 1);
    run.policies[d].save((root / "checkpoints" / name).string());
  }
  run.policies.back().save((root / "checkpoints" / "policy_final.bin").string());
  if (config.dump_dataset) run.dataset.write_csv((root / "results" / "dataset.csv").string());
  write_json(metrics, (root / "results" / "train_metrics.json").string());

  log << "demonstrations: " << config.n_demos << ", dataset size: " << run.dataset.size() << "\n";
  log << "final training loss: "
      << (run.loss_traces.empty() ? 0.0 : run.loss_traces.back().back()) << "\n";
  log << "checkpoints in " << (root / "checkpoints").string() << "\n";
  return 0;
}

int cmd_eval(const RunConfig& config, const std::string& checkpoint_path, bool expert_only,
             std::ostream& log) {
  if (!expert_only && checkpoint_path.empty())
    throw InvalidParameterError("eval: a checkpoint is required unless --expert is given");
  fs::path root = prepare_output(config);
  ExpertSetup setup = config.build_setup();
  TrajectorySampler sampler = config.sampler();

  MlpPolicy policy;
  if (!expert_only) policy = MlpPolicy::load(checkpoint_path);

  std::vector<Domain> domains;
  if (config.domains.empty()) {
    domains = {Domain::source, config.target_domain()};
  } else {
    for (const auto& d : config.domains) domains.push_back(domain_from_string(d));
  }

  nlohmann::json metrics;
  metrics["version"] = kVersion;
  metrics["config_hash"] = config.hash();
  metrics["mode"] = expert_only ? "expert" : "policy";
  Rng master(config.master_seed);

  for (Domain domain : domains) {
    RolloutSpec env = config.rollout_spec(domain, setup);
    uint64_t seed = master.child(200 + static_cast<uint64_t>(domain)).base_seed();
    std::vector<EvalEpisode> eps;
    if (expert_only) {
      TrackingMpc expert = make_expert(setup);
      eps = evaluate_controller(expert, env, sampler, config.eval_episodes, seed,
                                config.effective_workers());
    } else {
      eps = evaluate_policy(policy, env, sampler, config.eval_episodes, seed,
                            config.effective_workers());
    }
    nlohmann::json dj;
    dj["episodes"] = eps.size();
    dj["success_rate"] = success_rate(eps);
    dj["mean_stage_cost"] = mean_stage_cost(eps, setup.weights);
    if (!expert_only && config.gap_episodes > 0) {
      auto gap_eps = evaluate_policy(policy, env, sampler, config.gap_episodes,
                                     master.child(300 + static_cast<uint64_t>(domain)).base_seed(),
                                     config.effective_workers());
      try {
        TrackingMpc expert = make_expert(setup);
        Vector offset = Vector::Zero(kNu);
        offset[0] = config.params.hover_thrust();
        GapResult gap = expert_gap(policy, expert, gap_eps, config.effective_workers(), offset);
        dj["expert_gap_percent"] = gap.percent;
        dj["gap_steps_skipped"] = gap.steps_skipped;
      } catch (const std::exception& ex) {
        dj["expert_gap_percent"] = nullptr;
        dj["gap_error"] = ex.what();
      }
    }
    metrics[to_string(domain)] = dj;
    for (size_t e = 0; e < eps.size(); ++e) {
      char name[64];
      std::snprintf(name, sizeof(name), "ep_%s_%03zu.csv", to_string(domain), e);
      write_episode_csv(eps[e].ep, (root / "episodes" / name).string());
    }
    log << to_string(domain) << ": success " << success_rate(eps) << ", mean stage cost "
        << mean_stage_cost(eps, setup.weights) << "\n";
  }
  write_json(metrics, (root / "results" / "eval_metrics.json").string());
  return 0;
}

int cmd_compare(const RunConfig& config, std::ostream& log) {
  if (config.demo_max < 1) throw InvalidParameterError("compare: demo_max must be >= 1");
  fs::path root = prepare_output(config);
  ExpertSetup setup = config.build_setup();

  ComparisonConfig cc;
  if (config.methods.empty()) {
    for (IlMethod m : {IlMethod::bc, IlMethod::dagger})
      for (Augmentation a : {Augmentation::none, Augmentation::dr, Augmentation::sa_sparse,
                             Augmentation::sa_dense})
        cc.methods.push_back({m, a});
  } else {
    for (const auto& spec : config.methods) {
      auto plus = spec.find('+');
      cc.methods.push_back({il_method_from_string(spec.substr(0, plus)),
                            augmentation_from_string(spec.substr(plus + 1))});
    }
  }
  cc.n_demos_max = config.demo_max;
  cc.n_seeds = config.n_seeds;
  cc.eval_episodes = config.eval_episodes;
  cc.gap_episodes = config.gap_episodes;
  cc.il_template = config.il_config(0);
  cc.master_seed = config.master_seed;
  cc.workers = config.effective_workers();

  RolloutSpec source = config.rollout_spec(Domain::source, setup);
  RolloutSpec target = config.rollout_spec(config.target_domain(), setup);

  auto results = run_comparison(setup, config.sampler(), source, target, config.target_domain(), cc);

  std::string hash = config.hash();
  std::string seeds = seed_list_string(config);
  write_comparison_csv(results, (root / "results" / "comparison.csv").string(), hash, seeds);
  write_comparison_json(results, (root / "results" / "comparison.json").string(), hash, seeds);

  for (const auto& r : results) {
    log << r.method_id << " @ " << to_string(r.domain) << ": ";
    if (r.demos_to_full_success)
      log << "full success at demo " << *r.demos_to_full_success;
    else
      log << "no full success within " << config.demo_max << " demos";
    if (r.expert_gap_percent >= 0.0) log << ", expert gap " << r.expert_gap_percent << "%";
    if (r.status != "ok") log << " [" << r.status << "]";
    log << "\n";
  }
  log << "results in " << (root / "results").string() << "\n";
  return 0;
}

}  // namespace rtil
