#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rtil/il.hpp"

namespace rtil {

enum class Domain { source, target_t1, target_t2 };

const char* to_string(Domain d);
Domain domain_from_string(const std::string& s);

// Exact tracking cost sum_t e'Qe + u'Ru with e taken against the reference
// point tracked at each step.
double stage_cost(const Episode& ep, const CostWeights& weights);

struct EvalEpisode {
  Episode ep;
  ReferenceTrajectory ref;
  uint64_t seed = 0;
};

// Rolls the policy out in the given domain; episode e uses trajectory and
// rollout seeds derived from (seed_base, e) only, so results are independent
// of scheduling.
std::vector<EvalEpisode> evaluate_policy(const MlpPolicy& policy, const RolloutSpec& env,
                                         const TrajectorySampler& sampler, int episodes,
                                         uint64_t seed_base, int workers = 1);

std::vector<EvalEpisode> evaluate_controller(const TrackingMpc& proto, const RolloutSpec& env,
                                             const TrajectorySampler& sampler, int episodes,
                                             uint64_t seed_base, int workers = 1);

double success_rate(const std::vector<EvalEpisode>& episodes);
double mean_stage_cost(const std::vector<EvalEpisode>& episodes, const CostWeights& weights);

// Mean relative action error (percent) between the policy and the expert on
// the policy-induced states, measured on the executed actions (hover-relative
// outputs shifted by action_offset, i.e. hover thrust). Steps where the
// expert action norm is below 1e-9 are skipped and counted.
struct GapResult {
  double percent = 0.0;
  long steps_used = 0;
  long steps_skipped = 0;
};

// Per-step relative error |u_pi - u_exp| / |u_exp| after shifting both by
// action_offset; negative when the denominator falls below 1e-9 (skip).
double relative_action_error(const Vector& u_policy, const Vector& u_expert,
                             const Vector& action_offset);

GapResult expert_gap(const MlpPolicy& policy, const TrackingMpc& expert,
                     const std::vector<EvalEpisode>& episodes, int workers = 1,
                     const Vector& action_offset = Vector());

// Difference of the mean imitation losses on target- and source-domain
// trajectories; j_target = gap + j_source holds by construction.
struct ShiftResult {
  double gap = 0.0;
  double j_source = 0.0;
  double j_target = 0.0;
};

ShiftResult covariate_shift_gap(const MlpPolicy& policy, const TrackingMpc& expert,
                                const std::vector<EvalEpisode>& source_episodes,
                                const std::vector<EvalEpisode>& target_episodes,
                                int workers = 1);

// ---------------------------------------------------------------------------
// Method comparison sweep.
// ---------------------------------------------------------------------------
struct MethodSpec {
  IlMethod method = IlMethod::bc;
  Augmentation augmentation = Augmentation::none;

  std::string id() const {
    return std::string(to_string(method)) + "+" + to_string(augmentation);
  }
};

struct ExperimentResult {
  std::string method_id;
  Domain domain = Domain::source;
  std::map<int, double> success_by_demo;  // aggregated over seeds
  std::map<int, double> cost_by_demo;
  double expert_gap_percent = -1.0;  // at the final demo count; <0 if unset
  std::optional<int> demos_to_full_success;
  std::vector<std::optional<int>> per_seed_efficiency;
  std::vector<uint64_t> seeds;
  std::string status = "ok";  // per-cell failures are recorded, not fatal
};

struct ComparisonConfig {
  std::vector<MethodSpec> methods;
  int n_demos_max = 10;
  int n_seeds = 5;
  int eval_episodes = 10;
  int gap_episodes = 4;
  IlConfig il_template;  // epochs / lr / batch / hidden
  uint64_t master_seed = 1234;
  int workers = 1;
};

std::vector<ExperimentResult> run_comparison(const ExpertSetup& setup,
                                             const TrajectorySampler& sampler,
                                             const RolloutSpec& source_env,
                                             const RolloutSpec& target_env, Domain target_domain,
                                             const ComparisonConfig& config);

// Long-format CSV (one row per method x demo count x domain) plus a JSON
// summary mirroring the comparison table.
void write_comparison_csv(const std::vector<ExperimentResult>& results, const std::string& path,
                          const std::string& config_hash, const std::string& seed_list);
void write_comparison_json(const std::vector<ExperimentResult>& results, const std::string& path,
                           const std::string& config_hash, const std::string& seed_list);

}  // namespace rtil
