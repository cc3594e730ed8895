#include "rtil/evalbench.hpp"

#include <fstream>

#include <json.hpp>

namespace rtil {

const char* to_string(Domain d) {
  switch (d) {
    case Domain::source: return "source";
    case Domain::target_t1: return "target_T1";
    case Domain::target_t2: return "target_T2";
  }
  return "unknown";
}

Domain domain_from_string(const std::string& s) {
  if (s == "source") return Domain::source;
  if (s == "target_T1" || s == "T1" || s == "t1") return Domain::target_t1;
  if (s == "target_T2" || s == "T2" || s == "t2") return Domain::target_t2;
  throw InvalidParameterError("unknown domain: " + s);
}

double stage_cost(const Episode& ep, const CostWeights& weights) {
  double total = 0.0;
  for (int t = 0; t < ep.steps; ++t) {
    Vector e(kNx);
    e.segment<6>(0) = ep.states.col(t).segment<6>(0) - ep.refs.col(t);
    e.segment<2>(6) = ep.states.col(t).segment<2>(6);
    Vector u = ep.actions.col(t);
    total += e.dot(weights.Q * e) + u.dot(weights.R * u);
  }
  return total;
}

std::vector<EvalEpisode> evaluate_policy(const MlpPolicy& policy, const RolloutSpec& env,
                                         const TrajectorySampler& sampler, int episodes,
                                         uint64_t seed_base, int workers) {
  std::vector<EvalEpisode> out(episodes);
  Rng master(seed_base);
  parallel_for(episodes, workers, [&](int e) {
    Rng ep_rng = master.child(static_cast<uint64_t>(e));
    EvalEpisode ev;
    ev.ref = sampler.sample(ep_rng.child(0));
    ev.seed = ep_rng.child(1).base_seed();
    Controller ctrl = policy_controller(policy);
    ev.ep = rollout(ctrl, ev.ref, env, ev.seed);
    out[e] = std::move(ev);
  });
  return out;
}

std::vector<EvalEpisode> evaluate_controller(const TrackingMpc& proto, const RolloutSpec& env,
                                             const TrajectorySampler& sampler, int episodes,
                                             uint64_t seed_base, int workers) {
  std::vector<EvalEpisode> out(episodes);
  Rng master(seed_base);
  parallel_for(episodes, workers, [&](int e) {
    Rng ep_rng = master.child(static_cast<uint64_t>(e));
    EvalEpisode ev;
    ev.ref = sampler.sample(ep_rng.child(0));
    ev.seed = ep_rng.child(1).base_seed();
    TrackingMpc ctrl = proto;  // private warm-start state per episode
    ctrl.reset_warm();
    Controller fn = expert_controller(ctrl);
    ev.ep = rollout(fn, ev.ref, env, ev.seed);
    out[e] = std::move(ev);
  });
  return out;
}

double success_rate(const std::vector<EvalEpisode>& episodes) {
  if (episodes.empty()) return 0.0;
  long ok = 0;
  for (const auto& e : episodes) ok += e.ep.success() ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(episodes.size());
}

double mean_stage_cost(const std::vector<EvalEpisode>& episodes, const CostWeights& weights) {
  if (episodes.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& e : episodes) sum += stage_cost(e.ep, weights);
  return sum / static_cast<double>(episodes.size());
}

namespace {

// Expert actions along a stored episode, re-solved at the visited states.
// Stops at the first state the expert cannot serve and returns the prefix.
Matrix expert_actions_on(const TrackingMpc& proto, const EvalEpisode& ev, int N) {
  TrackingMpc expert = proto;
  expert.reset_warm();
  Matrix ua(kNu, ev.ep.steps);
  int solved = 0;
  for (int t = 0; t < ev.ep.steps; ++t) {
    ReferenceWindow window = ev.ref.window(t, N);
    try {
      ua.col(t) = expert.step(ev.ep.states.col(t), window).u_exec;
    } catch (const ExpertInfeasibleError&) {
      break;
    }
    ++solved;
  }
  return ua.leftCols(solved);
}

}  // namespace

double relative_action_error(const Vector& u_policy, const Vector& u_expert,
                             const Vector& action_offset) {
  Vector ue = u_expert + action_offset;
  double denom = ue.norm();
  if (denom < 1e-9) return -1.0;
  return (u_policy + action_offset - ue).norm() / denom;
}

GapResult expert_gap(const MlpPolicy& policy, const TrackingMpc& expert,
                     const std::vector<EvalEpisode>& episodes, int workers,
                     const Vector& action_offset) {
  if (episodes.empty()) throw InvalidParameterError("expert_gap: no episodes");
  Vector offset = action_offset.size() == 0 ? Vector(Vector::Zero(kNu)) : action_offset;
  if (offset.size() != kNu) throw DimensionError("expert_gap: offset size mismatch");
  const int n = static_cast<int>(episodes.size());
  std::vector<double> sums(n, 0.0);
  std::vector<long> used(n, 0), skipped(n, 0);
  parallel_for(n, workers, [&](int i) {
    const EvalEpisode& ev = episodes[i];
    Matrix ue = expert_actions_on(expert, ev, expert.horizon());
    for (int t = 0; t < ue.cols(); ++t) {
      Vector upi = policy.forward(make_features(ev.ep.states.col(t), ev.ref.window(t, expert.horizon())));
      double rel = relative_action_error(upi, ue.col(t), offset);
      if (rel < 0.0) {
        ++skipped[i];
        continue;
      }
      sums[i] += rel;
      ++used[i];
    }
  });
  GapResult g;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    total += sums[i];
    g.steps_used += used[i];
    g.steps_skipped += skipped[i];
  }
  if (g.steps_used == 0) throw NumericError("expert_gap: no usable steps");
  g.percent = 100.0 * total / static_cast<double>(g.steps_used);
  return g;
}

namespace {

// Mean per-trajectory MSE between policy and expert actions.
double imitation_loss(const MlpPolicy& policy, const TrackingMpc& expert,
                      const std::vector<EvalEpisode>& episodes, int workers) {
  const int n = static_cast<int>(episodes.size());
  std::vector<double> per_ep(n, 0.0);
  parallel_for(n, workers, [&](int i) {
    const EvalEpisode& ev = episodes[i];
    if (ev.ep.steps == 0) return;
    Matrix ue = expert_actions_on(expert, ev, expert.horizon());
    if (ue.cols() == 0) return;
    double sum = 0.0;
    for (int t = 0; t < ue.cols(); ++t) {
      Vector upi = policy.forward(make_features(ev.ep.states.col(t), ev.ref.window(t, expert.horizon())));
      sum += (upi - ue.col(t)).squaredNorm();
    }
    per_ep[i] = sum / static_cast<double>(ue.cols());
  });
  double total = 0.0;
  for (double v : per_ep) total += v;
  return total / static_cast<double>(n);
}

}  // namespace

ShiftResult covariate_shift_gap(const MlpPolicy& policy, const TrackingMpc& expert,
                                const std::vector<EvalEpisode>& source_episodes,
                                const std::vector<EvalEpisode>& target_episodes, int workers) {
  if (source_episodes.empty() || target_episodes.empty())
    throw InvalidParameterError("covariate_shift_gap: episode sets must be nonempty");
  ShiftResult r;
  r.j_source = imitation_loss(policy, expert, source_episodes, workers);
  r.j_target = imitation_loss(policy, expert, target_episodes, workers);
  r.gap = r.j_target - r.j_source;
  return r;
}

// ---------------------------------------------------------------------------
// Comparison sweep.
// ---------------------------------------------------------------------------

namespace {

struct CellResult {
  std::map<int, std::vector<bool>> success_by_demo;   // per episode
  std::map<int, std::vector<double>> cost_by_demo;
  double gap_percent = -1.0;
  std::optional<int> efficiency;
  bool failed = false;
  std::string error;
};

}  // namespace

std::vector<ExperimentResult> run_comparison(const ExpertSetup& setup,
                                             const TrajectorySampler& sampler,
                                             const RolloutSpec& source_env,
                                             const RolloutSpec& target_env, Domain target_domain,
                                             const ComparisonConfig& config) {
  if (config.methods.empty()) throw InvalidParameterError("run_comparison: no methods");
  if (config.n_demos_max < 1) throw InvalidParameterError("run_comparison: n_demos_max must be >= 1");
  if (config.n_seeds < 1) throw InvalidParameterError("run_comparison: n_seeds must be >= 1");

  const std::vector<Domain> domains = {Domain::source, target_domain};
  const int n_methods = static_cast<int>(config.methods.size());
  const int n_cells = n_methods * config.n_seeds;

  // cell = (method, seed, domain)
  std::vector<std::vector<CellResult>> cells(n_cells, std::vector<CellResult>(domains.size()));
  Rng master(config.master_seed);

  parallel_for(n_cells, config.workers, [&](int cell) {
    const int mi = cell / config.n_seeds;
    const MethodSpec& method = config.methods[mi];
    Rng cell_rng = master.child(static_cast<uint64_t>(cell));
    try {
      IlConfig il = config.il_template;
      il.method = method.method;
      il.augmentation = method.augmentation;
      il.seed = cell_rng.child(0).base_seed();

      IlRunResult run = run_il(setup, il, source_env, sampler, config.n_demos_max);

      for (size_t di = 0; di < domains.size(); ++di) {
        const RolloutSpec& env = domains[di] == Domain::source ? source_env : target_env;
        CellResult& out = cells[cell][di];
        for (int d = 1; d <= config.n_demos_max; ++d) {
          auto eps = evaluate_policy(run.policies[d - 1], env, sampler, config.eval_episodes,
                                     cell_rng.child(100 + d).base_seed());
          auto& succ = out.success_by_demo[d];
          auto& cost = out.cost_by_demo[d];
          bool all = true;
          for (const auto& e : eps) {
            succ.push_back(e.ep.success());
            cost.push_back(stage_cost(e.ep, setup.weights));
            all = all && e.ep.success();
          }
          if (all && !out.efficiency) out.efficiency = d;
        }
        try {
          auto gap_eps = evaluate_policy(run.policies.back(), env, sampler, config.gap_episodes,
                                         cell_rng.child(900).base_seed());
          TrackingMpc expert = make_expert(setup);
          Vector offset = Vector::Zero(kNu);
          offset[0] = setup.params.hover_thrust();
          out.gap_percent = expert_gap(run.policies.back(), expert, gap_eps, 1, offset).percent;
        } catch (const std::exception&) {
          out.gap_percent = -1.0;  // policy too far gone for a meaningful gap
        }
      }
    } catch (const std::exception& ex) {
      for (auto& c : cells[cell]) {
        c.failed = true;
        c.error = ex.what();
      }
    }
  });

  std::vector<ExperimentResult> results;
  for (int mi = 0; mi < n_methods; ++mi) {
    for (size_t di = 0; di < domains.size(); ++di) {
      ExperimentResult r;
      r.method_id = config.methods[mi].id();
      r.domain = domains[di];
      std::string errors;
      std::vector<double> gaps;
      for (int si = 0; si < config.n_seeds; ++si) {
        const CellResult& c = cells[mi * config.n_seeds + si][di];
        r.seeds.push_back(master.child(static_cast<uint64_t>(mi * config.n_seeds + si)).base_seed());
        if (c.failed) {
          errors += (errors.empty() ? "" : "; ") + c.error;
          r.per_seed_efficiency.push_back(std::nullopt);
          continue;
        }
        r.per_seed_efficiency.push_back(c.efficiency);
        if (c.gap_percent >= 0.0) gaps.push_back(c.gap_percent);
      }
      for (int d = 1; d <= config.n_demos_max; ++d) {
        long ok = 0, total = 0;
        double cost_sum = 0.0;
        long cost_n = 0;
        for (int si = 0; si < config.n_seeds; ++si) {
          const CellResult& c = cells[mi * config.n_seeds + si][di];
          auto its = c.success_by_demo.find(d);
          if (its == c.success_by_demo.end()) continue;
          for (bool b : its->second) {
            ok += b ? 1 : 0;
            ++total;
          }
          for (double v : c.cost_by_demo.at(d)) {
            cost_sum += v;
            ++cost_n;
          }
        }
        if (total > 0) {
          r.success_by_demo[d] = static_cast<double>(ok) / static_cast<double>(total);
          r.cost_by_demo[d] = cost_sum / static_cast<double>(cost_n);
          if (!r.demos_to_full_success && ok == total) r.demos_to_full_success = d;
        }
      }
      if (!gaps.empty()) {
        double s = 0.0;
        for (double g : gaps) s += g;
        r.expert_gap_percent = s / static_cast<double>(gaps.size());
      }
      if (!errors.empty()) r.status = "partial: " + errors;
      results.push_back(std::move(r));
    }
  }
  return results;
}

void write_comparison_csv(const std::vector<ExperimentResult>& results, const std::string& path,
                          const std::string& config_hash, const std::string& seed_list) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "version,config_hash,seeds,method,domain,demo_count,success_rate,mean_stage_cost,"
         "expert_gap_percent,demos_to_full_success,status\n";
  out.precision(12);
  for (const auto& r : results) {
    for (const auto& [demo, rate] : r.success_by_demo) {
      out << kVersion << "," << config_hash << "," << seed_list << "," << r.method_id << ","
          << to_string(r.domain) << "," << demo << "," << rate << "," << r.cost_by_demo.at(demo)
          << ",";
      if (demo == r.success_by_demo.rbegin()->first && r.expert_gap_percent >= 0.0)
        out << r.expert_gap_percent;
      out << ",";
      if (r.demos_to_full_success) out << *r.demos_to_full_success;
      out << "," << r.status << "\n";
    }
  }
}

void write_comparison_json(const std::vector<ExperimentResult>& results, const std::string& path,
                           const std::string& config_hash, const std::string& seed_list) {
  nlohmann::json root;
  root["version"] = kVersion;
  root["config_hash"] = config_hash;
  root["seeds"] = seed_list;
  auto& rows = root["results"];
  for (const auto& r : results) {
    nlohmann::json row;
    row["method"] = r.method_id;
    row["domain"] = to_string(r.domain);
    for (const auto& [demo, rate] : r.success_by_demo) {
      row["success_by_demo"][std::to_string(demo)] = rate;
      row["cost_by_demo"][std::to_string(demo)] = r.cost_by_demo.at(demo);
    }
    if (r.expert_gap_percent >= 0.0) row["expert_gap_percent"] = r.expert_gap_percent;
    if (r.demos_to_full_success) row["demonstration_efficiency"] = *r.demos_to_full_success;
    else row["demonstration_efficiency"] = nullptr;
    nlohmann::json eff = nlohmann::json::array();
    for (const auto& e : r.per_seed_efficiency) {
      if (e) eff.push_back(*e);
      else eff.push_back(nullptr);
    }
    row["per_seed_efficiency"] = eff;
    row["status"] = r.status;
    rows.push_back(row);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << root.dump(2) << "\n";
}

}  // namespace rtil
