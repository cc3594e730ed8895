#pragma once

#include <string>
#include <vector>

#include "rtil/linmodel.hpp"

namespace rtil {

struct MlpGradients {
  std::vector<Matrix> gW;
  std::vector<Vector> gb;
  double loss = 0.0;
};

// Adam accumulators; shapes mirror the policy parameters.
struct AdamState {
  std::vector<Matrix> mW, vW;
  std::vector<Vector> mb, vb;
  long step = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainOptions {
  int epochs = 50;
  double lr = 1e-3;
  int batch = 64;
  uint64_t seed = 0;
};

// Fully connected network with rectified-linear hidden layers and an identity
// output layer. Inputs are standardized with per-feature statistics stored in
// the policy (identity by default); forward() applies them, so callers always
// pass raw features.
class MlpPolicy {
 public:
  MlpPolicy() = default;

  // Uniform +-sqrt(6 / (fan_in + fan_out)) initialization, deterministic in
  // the seed.
  static MlpPolicy create(const std::vector<int>& layer_sizes, uint64_t seed);

  void set_normalization(const Vector& mean, const Vector& std);
  void set_output_normalization(const Vector& mean, const Vector& std);

  int input_dim() const { return layer_sizes_.empty() ? 0 : layer_sizes_.front(); }
  int output_dim() const { return layer_sizes_.empty() ? 0 : layer_sizes_.back(); }
  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  const Vector& norm_mean() const { return mean_; }
  const Vector& norm_std() const { return std_; }
  const Vector& out_mean() const { return out_mean_; }
  const Vector& out_std() const { return out_std_; }
  uint64_t init_seed() const { return init_seed_; }
  std::vector<Matrix>& weights() { return W_; }
  std::vector<Vector>& biases() { return b_; }
  const std::vector<Matrix>& weights() const { return W_; }
  const std::vector<Vector>& biases() const { return b_; }
  long parameter_count() const;

  // Single raw input -> action. Throws on dimension mismatch or non-finite
  // input.
  Vector forward(const Vector& input) const;

  // Batched net on already-normalized inputs (columns are samples); outputs
  // stay in normalized units.
  Matrix forward_normalized(const Matrix& X) const;

  Vector normalize(const Vector& input) const;
  Matrix normalize_batch(const Matrix& X) const;

  // Mean squared action error over the batch: (1/B) sum_b |net(x_b) - y_b|^2.
  double batch_loss(const Matrix& Xn, const Matrix& Y) const;

  // Exact gradients of batch_loss by backpropagation.
  MlpGradients gradient(const Matrix& Xn, const Matrix& Y) const;

  // Adam on the batch MSE with a full shuffle each epoch. Features are raw;
  // normalization is applied once up front. Returns the per-epoch mean loss.
  std::vector<double> train(const Matrix& features, const Matrix& labels,
                            const TrainOptions& opts);

  void save(const std::string& path) const;
  static MlpPolicy load(const std::string& path);

 private:
  std::vector<int> layer_sizes_;
  std::vector<Matrix> W_;  // W_[l] is layer_sizes_[l+1] x layer_sizes_[l]
  std::vector<Vector> b_;
  Vector mean_, std_;
  Vector out_mean_, out_std_;
  uint64_t init_seed_ = 0;
};

AdamState make_adam_state(const MlpPolicy& policy, double lr);
void adam_update(MlpPolicy& policy, AdamState& state, const MlpGradients& grads);

}  // namespace rtil
