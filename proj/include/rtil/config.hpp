#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "rtil/evalbench.hpp"

namespace rtil {

// Fully resolved run configuration. Defaults reproduce the benchmark's
// reference setup; a config file and then --set overrides are merged on top,
// and the resolved result is echoed into the output directory.
struct RunConfig {
  // model
  QuadParams params;
  double dt = 0.1;
  int horizon = 30;  // reference window length N

  // cost
  Vector q_diag;
  Vector r_diag;

  // disturbance / tasks
  double w_fraction = 0.3;
  std::string task = "T1";
  double adv_lo = 0.25, adv_hi = 0.30;
  double drag_eval = 0.3;

  // tube estimation
  long tube_rollouts = 10000;
  int tube_horizon = 300;
  uint64_t tube_seed = 0;  // 0: derive from master_seed

  // trajectory
  std::string traj_kind = "lemniscate";  // lemniscate | circle | step | mixed
  double radius = 1.5;
  double speed = 1.5;
  double duration = 7.0;
  Eigen::Vector3d center{0.0, 0.0, 2.0};
  double radius_lo = 0.8, radius_hi = 2.0;
  double speed_lo = 0.5, speed_hi = 2.0;
  double center_jitter = 0.5;

  // initial-state randomization
  double init_pos_noise = 0.15;
  double init_vel_noise = 0.10;
  double init_tilt_noise = 0.02;

  // imitation learning
  std::string method = "bc";
  std::string augmentation = "sa_sparse";
  int n_demos = 1;
  int epochs = 50;
  double lr = 1e-3;
  int batch = 64;
  std::vector<double> beta_schedule;
  std::vector<int> hidden = {32, 32};
  bool dump_dataset = false;

  // evaluation
  int n_seeds = 5;
  int eval_episodes = 10;
  int demo_max = 10;
  int gap_episodes = 4;
  std::vector<std::string> methods;  // compare sweep; empty = all eight
  std::vector<std::string> domains;  // eval command; empty = source + task target

  // run
  std::string output_dir = "out";
  uint64_t master_seed = 1234;
  int workers = 0;  // 0 = hardware concurrency

  static RunConfig defaults();
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& config_path,
                        const std::vector<std::string>& overrides);
  nlohmann::json to_json() const;
  std::string hash() const;  // of the canonical JSON dump
  void validate() const;

  uint64_t effective_tube_seed() const;
  int effective_workers() const;
  TrajectorySampler sampler() const;
  IlConfig il_config(uint64_t seed) const;
  ExpertSetup build_setup() const;
  RolloutSpec rollout_spec(Domain domain, const ExpertSetup& setup) const;
  Domain target_domain() const;
};

std::string fnv1a_hex(const std::string& data);

}  // namespace rtil
