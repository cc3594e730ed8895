#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rtil/augment.hpp"
#include "rtil/mlp.hpp"
#include "rtil/rtmpc.hpp"

namespace rtil {

enum class IlMethod { bc, dagger };
enum class Augmentation { none, dr, sa_sparse, sa_dense };
enum class Provenance { demo, tube_sparse, tube_dense };

IlMethod il_method_from_string(const std::string& s);
Augmentation augmentation_from_string(const std::string& s);
const char* to_string(IlMethod m);
const char* to_string(Augmentation a);
const char* to_string(Provenance p);

// Policy input: current state followed by the first N points of the
// reference window (positions and velocities), matching the network input
// dimension 8 + 6N.
Vector make_features(const Vector& state, const ReferenceWindow& window);

Controller policy_controller(const MlpPolicy& policy);

// ---------------------------------------------------------------------------
// Aggregated training data.
// ---------------------------------------------------------------------------
struct DatasetEntry {
  Vector features;
  Vector label;  // hover-relative expert action
  Provenance prov = Provenance::demo;
  int demo_index = 0;
  int source_step = 0;
};

struct Dataset {
  std::vector<DatasetEntry> entries;
  int demo_count = 0;

  int feature_dim() const { return entries.empty() ? 0 : static_cast<int>(entries.front().features.size()); }
  size_t size() const { return entries.size(); }
  void append(DatasetEntry entry);
  long count(Provenance p) const;
  Matrix features_matrix() const;
  Matrix labels_matrix() const;
  void write_csv(const std::string& path) const;
};

struct IlConfig {
  IlMethod method = IlMethod::bc;
  Augmentation augmentation = Augmentation::none;
  std::vector<double> beta_schedule;  // empty: 1 for the first demo, 0 after
  std::vector<int> hidden = {32, 32};
  int epochs = 50;
  double lr = 1e-3;
  int batch = 64;
  uint64_t seed = 0;

  double beta_for_demo(int demo_index) const;  // 1-based
};

// ---------------------------------------------------------------------------
// One demonstration: the executed action is the expert's with probability
// beta, else the policy's; the recorded label is always the expert's action
// at the visited state. Tube samples are appended per step when requested.
// ---------------------------------------------------------------------------
struct CollectResult {
  Episode episode;
  std::vector<DatasetEntry> entries;
  long label_violations = 0;  // augmented labels outside the input box
};

CollectResult collect_demonstration(TrackingMpc& expert, const MlpPolicy* policy, double beta,
                                    const RolloutSpec& env, const ReferenceTrajectory& ref,
                                    const TubeApprox& tube, const BoxSet& U, Augmentation aug,
                                    uint64_t seed, int demo_index);

// ---------------------------------------------------------------------------
// Reference-trajectory source for demonstrations and evaluations. With
// mixed = false every call returns the same trajectory; with mixed = true the
// kind and parameters are drawn per call from the configured ranges.
// ---------------------------------------------------------------------------
struct TrajectorySampler {
  bool mixed = false;
  ReferenceKind kind = ReferenceKind::lemniscate;
  RefParams params;
  double duration = 7.0;
  double dt = 0.1;
  double velocity_limit = 4.0;
  std::pair<double, double> radius_range{0.8, 2.0};
  std::pair<double, double> speed_range{0.5, 2.0};
  double center_jitter = 0.5;  // m, horizontal

  ReferenceTrajectory sample(Rng rng) const;
};

struct IlRunResult {
  std::vector<MlpPolicy> policies;  // after each demonstration
  Dataset dataset;
  std::vector<size_t> entries_after_demo;
  std::vector<std::vector<double>> loss_traces;
  std::vector<bool> demo_failed;
  Vector norm_mean, norm_std;  // frozen from the first demonstration
  Vector out_mean, out_std;
  long label_violations = 0;
};

// Iterate collect -> aggregate -> retrain-from-scratch. collect_env should be
// the source domain; DR switches its disturbance mode to uniform_random
// during collection.
IlRunResult run_il(const ExpertSetup& setup, const IlConfig& config,
                   const RolloutSpec& collect_env, const TrajectorySampler& sampler,
                   int n_demos);

}  // namespace rtil
