#include "rtil/mlp.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace rtil {

MlpPolicy MlpPolicy::create(const std::vector<int>& layer_sizes, uint64_t seed) {
  if (layer_sizes.size() < 2)
    throw InvalidParameterError("MlpPolicy: need at least input and output layers");
  for (int s : layer_sizes)
    if (s < 1) throw InvalidParameterError("MlpPolicy: layer sizes must be >= 1");

  MlpPolicy p;
  p.layer_sizes_ = layer_sizes;
  p.init_seed_ = seed;
  Rng rng(seed);
  for (size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Matrix W(fan_out, fan_in);
    for (int i = 0; i < fan_out; ++i)
      for (int j = 0; j < fan_in; ++j) W(i, j) = rng.uniform(-limit, limit);
    p.W_.push_back(std::move(W));
    p.b_.push_back(Vector::Zero(fan_out));
  }
  p.mean_ = Vector::Zero(layer_sizes.front());
  p.std_ = Vector::Ones(layer_sizes.front());
  p.out_mean_ = Vector::Zero(layer_sizes.back());
  p.out_std_ = Vector::Ones(layer_sizes.back());
  return p;
}

void MlpPolicy::set_normalization(const Vector& mean, const Vector& std) {
  if (mean.size() != input_dim() || std.size() != input_dim())
    throw DimensionError("set_normalization: size mismatch");
  for (int i = 0; i < std.size(); ++i)
    if (!(std[i] > 0.0)) throw InvalidParameterError("set_normalization: std must be positive");
  mean_ = mean;
  std_ = std;
}

void MlpPolicy::set_output_normalization(const Vector& mean, const Vector& std) {
  if (mean.size() != output_dim() || std.size() != output_dim())
    throw DimensionError("set_output_normalization: size mismatch");
  for (int i = 0; i < std.size(); ++i)
    if (!(std[i] > 0.0))
      throw InvalidParameterError("set_output_normalization: std must be positive");
  out_mean_ = mean;
  out_std_ = std;
}

long MlpPolicy::parameter_count() const {
  long count = 0;
  for (size_t l = 0; l < W_.size(); ++l) count += W_[l].size() + b_[l].size();
  return count;
}

Vector MlpPolicy::normalize(const Vector& input) const {
  return (input - mean_).cwiseQuotient(std_);
}

Matrix MlpPolicy::normalize_batch(const Matrix& X) const {
  return (X.colwise() - mean_).array().colwise() / std_.array();
}

Vector MlpPolicy::forward(const Vector& input) const {
  if (input.size() != input_dim()) throw DimensionError("MlpPolicy::forward: input size mismatch");
  if (!input.allFinite()) throw NumericError("MlpPolicy::forward: non-finite input");
  Vector a = normalize(input);
  for (size_t l = 0; l < W_.size(); ++l) {
    a = W_[l] * a + b_[l];
    if (l + 1 < W_.size()) a = a.cwiseMax(0.0);
  }
  return a.cwiseProduct(out_std_) + out_mean_;
}

Matrix MlpPolicy::forward_normalized(const Matrix& X) const {
  Matrix a = X;
  for (size_t l = 0; l < W_.size(); ++l) {
    Matrix z = (W_[l] * a).colwise() + b_[l];
    a = (l + 1 < W_.size()) ? z.cwiseMax(0.0) : z;
  }
  return a;
}

double MlpPolicy::batch_loss(const Matrix& Xn, const Matrix& Y) const {
  Matrix err = forward_normalized(Xn) - Y;
  return err.squaredNorm() / static_cast<double>(Xn.cols());
}

MlpGradients MlpPolicy::gradient(const Matrix& Xn, const Matrix& Y) const {
  if (Xn.cols() == 0) throw InvalidParameterError("MlpPolicy::gradient: empty batch");
  if (Xn.rows() != input_dim() || Y.rows() != output_dim() || Y.cols() != Xn.cols())
    throw DimensionError("MlpPolicy::gradient: shape mismatch");

  const size_t L = W_.size();
  std::vector<Matrix> act(L + 1);
  act[0] = Xn;
  for (size_t l = 0; l < L; ++l) {
    Matrix z = (W_[l] * act[l]).colwise() + b_[l];
    act[l + 1] = (l + 1 < L) ? z.cwiseMax(0.0) : z;
  }

  const double inv_b = 1.0 / static_cast<double>(Xn.cols());
  MlpGradients g;
  g.gW.resize(L);
  g.gb.resize(L);
  Matrix delta = 2.0 * inv_b * (act[L] - Y);
  g.loss = (act[L] - Y).squaredNorm() * inv_b;
  for (size_t l = L; l-- > 0;) {
    g.gW[l].noalias() = delta * act[l].transpose();
    g.gb[l] = delta.rowwise().sum();
    if (l > 0) {
      Matrix back = W_[l].transpose() * delta;
      // rectifier gate: positive activations pass the gradient
      delta = (act[l].array() > 0.0).select(back, Matrix::Zero(back.rows(), back.cols()));
    }
  }
  return g;
}

AdamState make_adam_state(const MlpPolicy& policy, double lr) {
  AdamState s;
  s.lr = lr;
  for (size_t l = 0; l < policy.weights().size(); ++l) {
    s.mW.push_back(Matrix::Zero(policy.weights()[l].rows(), policy.weights()[l].cols()));
    s.vW.push_back(Matrix::Zero(policy.weights()[l].rows(), policy.weights()[l].cols()));
    s.mb.push_back(Vector::Zero(policy.biases()[l].size()));
    s.vb.push_back(Vector::Zero(policy.biases()[l].size()));
  }
  return s;
}

void adam_update(MlpPolicy& policy, AdamState& s, const MlpGradients& g) {
  ++s.step;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (size_t l = 0; l < policy.weights().size(); ++l) {
    s.mW[l] = s.beta1 * s.mW[l] + (1.0 - s.beta1) * g.gW[l];
    s.vW[l] = s.beta2 * s.vW[l] + (1.0 - s.beta2) * g.gW[l].cwiseProduct(g.gW[l]);
    policy.weights()[l].array() -=
        s.lr * (s.mW[l].array() / bc1) / ((s.vW[l].array() / bc2).sqrt() + s.eps);
    s.mb[l] = s.beta1 * s.mb[l] + (1.0 - s.beta1) * g.gb[l];
    s.vb[l] = s.beta2 * s.vb[l] + (1.0 - s.beta2) * g.gb[l].cwiseProduct(g.gb[l]);
    policy.biases()[l].array() -=
        s.lr * (s.mb[l].array() / bc1) / ((s.vb[l].array() / bc2).sqrt() + s.eps);
  }
}

std::vector<double> MlpPolicy::train(const Matrix& features, const Matrix& labels,
                                     const TrainOptions& opts) {
  if (features.cols() == 0) throw InvalidParameterError("MlpPolicy::train: empty dataset");
  if (opts.epochs < 1) throw InvalidParameterError("MlpPolicy::train: epochs must be >= 1");
  if (opts.batch < 1) throw InvalidParameterError("MlpPolicy::train: batch must be >= 1");
  if (features.rows() != input_dim() || labels.rows() != output_dim() ||
      labels.cols() != features.cols())
    throw DimensionError("MlpPolicy::train: shape mismatch");

  const int n = static_cast<int>(features.cols());
  Matrix Xn = normalize_batch(features);
  Matrix Yn = ((labels.colwise() - out_mean_).array().colwise() / out_std_.array()).matrix();

  AdamState adam = make_adam_state(*this, opts.lr);
  Rng rng(opts.seed);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;

  Matrix bx(input_dim(), std::min(opts.batch, n));
  Matrix by(output_dim(), std::min(opts.batch, n));

  std::vector<double> trace;
  trace.reserve(opts.epochs);
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    // Fisher-Yates, fully determined by the seed
    for (int i = n - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_int(i + 1)]);

    double loss_sum = 0.0;
    for (int begin = 0; begin < n; begin += opts.batch) {
      const int size = std::min(opts.batch, n - begin);
      bx.resize(input_dim(), size);
      by.resize(output_dim(), size);
      for (int k = 0; k < size; ++k) {
        bx.col(k) = Xn.col(order[begin + k]);
        by.col(k) = Yn.col(order[begin + k]);
      }
      MlpGradients g = gradient(bx, by);
      loss_sum += g.loss * size;
      adam_update(*this, adam, g);
    }
    trace.push_back(loss_sum / n);
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Flat binary checkpoint: magic, layer sizes, init seed, normalization
// statistics, then row-major weights and biases per layer.
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[9] = "RTILMLP1";

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void get(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("checkpoint truncated");
}

}  // namespace

void MlpPolicy::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(kMagic, 8);
  put<uint32_t>(out, static_cast<uint32_t>(layer_sizes_.size()));
  for (int s : layer_sizes_) put<uint32_t>(out, static_cast<uint32_t>(s));
  put<uint64_t>(out, init_seed_);
  for (int i = 0; i < mean_.size(); ++i) put<double>(out, mean_[i]);
  for (int i = 0; i < std_.size(); ++i) put<double>(out, std_[i]);
  for (int i = 0; i < out_mean_.size(); ++i) put<double>(out, out_mean_[i]);
  for (int i = 0; i < out_std_.size(); ++i) put<double>(out, out_std_[i]);
  for (size_t l = 0; l < W_.size(); ++l) {
    for (int i = 0; i < W_[l].rows(); ++i)
      for (int j = 0; j < W_[l].cols(); ++j) put<double>(out, W_[l](i, j));
    for (int i = 0; i < b_[l].size(); ++i) put<double>(out, b_[l][i]);
  }
  if (!out) throw IoError("failed writing " + path);
}

MlpPolicy MlpPolicy::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw IoError("checkpoint schema error: bad magic in " + path);
  uint32_t n_layers = 0;
  get(in, n_layers);
  if (n_layers < 2 || n_layers > 64) throw IoError("checkpoint schema error: layer count");
  std::vector<int> sizes(n_layers);
  for (auto& s : sizes) {
    uint32_t v = 0;
    get(in, v);
    if (v < 1 || v > 1000000) throw IoError("checkpoint schema error: layer size");
    s = static_cast<int>(v);
  }
  MlpPolicy p;
  p.layer_sizes_ = sizes;
  get(in, p.init_seed_);
  p.mean_.resize(sizes.front());
  p.std_.resize(sizes.front());
  for (int i = 0; i < p.mean_.size(); ++i) get(in, p.mean_[i]);
  for (int i = 0; i < p.std_.size(); ++i) get(in, p.std_[i]);
  p.out_mean_.resize(sizes.back());
  p.out_std_.resize(sizes.back());
  for (int i = 0; i < p.out_mean_.size(); ++i) get(in, p.out_mean_[i]);
  for (int i = 0; i < p.out_std_.size(); ++i) get(in, p.out_std_[i]);
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    Matrix W(sizes[l + 1], sizes[l]);
    for (int i = 0; i < W.rows(); ++i)
      for (int j = 0; j < W.cols(); ++j) get(in, W(i, j));
    Vector b(sizes[l + 1]);
    for (int i = 0; i < b.size(); ++i) get(in, b[i]);
    p.W_.push_back(std::move(W));
    p.b_.push_back(std::move(b));
  }
  char extra;
  if (in.read(&extra, 1)) throw IoError("checkpoint schema error: trailing bytes in " + path);
  return p;
}

}  // namespace rtil
