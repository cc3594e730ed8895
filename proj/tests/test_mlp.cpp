#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "rtil/mlp.hpp"

using namespace rtil;

namespace {

// every weight/bias perturbed by central differences of the batch loss
double max_gradient_error(MlpPolicy& p, const Matrix& X, const Matrix& Y, double h) {
  MlpGradients g = p.gradient(X, Y);
  double worst = 0.0;
  for (size_t l = 0; l < p.weights().size(); ++l) {
    for (int i = 0; i < p.weights()[l].rows(); ++i)
      for (int j = 0; j < p.weights()[l].cols(); ++j) {
        double saved = p.weights()[l](i, j);
        p.weights()[l](i, j) = saved + h;
        double up = p.batch_loss(X, Y);
        p.weights()[l](i, j) = saved - h;
        double dn = p.batch_loss(X, Y);
        p.weights()[l](i, j) = saved;
        double fd = (up - dn) / (2.0 * h);
        double err = std::abs(fd - g.gW[l](i, j)) / std::max(std::abs(fd), 1e-6);
        worst = std::max(worst, err);
      }
    for (int i = 0; i < p.biases()[l].size(); ++i) {
      double saved = p.biases()[l][i];
      p.biases()[l][i] = saved + h;
      double up = p.batch_loss(X, Y);
      p.biases()[l][i] = saved - h;
      double dn = p.batch_loss(X, Y);
      p.biases()[l][i] = saved;
      double fd = (up - dn) / (2.0 * h);
      double err = std::abs(fd - g.gb[l][i]) / std::max(std::abs(fd), 1e-6);
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("all-zero parameters give the zero action") {
  MlpPolicy p = MlpPolicy::create({4, 3, 2}, 1);
  for (auto& W : p.weights()) W.setZero();
  for (auto& b : p.biases()) b.setZero();
  Vector out = p.forward(Vector::Ones(4));
  CHECK(out.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("hand-computed forward pass on a 2-2-2-1 net") {
  MlpPolicy p = MlpPolicy::create({2, 2, 2, 1}, 1);
  p.weights()[0] << 1.0, -1.0, 0.5, 2.0;
  p.biases()[0] << 0.1, -0.2;
  p.weights()[1] << 2.0, 1.0, -1.0, 0.5;
  p.biases()[1] << 0.0, 0.3;
  p.weights()[2] << 1.5, -2.0;
  p.biases()[2] << 0.25;

  // input (1, 2): layer 1 pre = (1-2+0.1, 0.5+4-0.2) = (-0.9, 4.3) -> relu (0, 4.3)
  // layer 2 pre = (0*2+4.3*1, 0*-1+4.3*0.5+0.3) = (4.3, 2.45) -> relu same
  // output = 1.5*4.3 - 2*2.45 + 0.25 = 6.45 - 4.9 + 0.25 = 1.8
  Vector out = p.forward((Vector(2) << 1.0, 2.0).finished());
  CHECK(out[0] == doctest::Approx(1.8).epsilon(1e-12));
}

TEST_CASE("forward rejects bad input") {
  MlpPolicy p = MlpPolicy::create({3, 2, 1}, 1);
  CHECK_THROWS_AS(p.forward(Vector::Ones(2)), DimensionError);
  Vector bad = Vector::Ones(3);
  bad[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(p.forward(bad), NumericError);
}

TEST_CASE("backpropagation matches central finite differences") {
  MlpPolicy p = MlpPolicy::create({7, 5, 4, 2}, 12345);
  Rng rng(99);
  Matrix X(7, 9), Y(2, 9);
  for (int i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform(-1.0, 1.0);
  for (int i = 0; i < Y.size(); ++i) Y.data()[i] = rng.uniform(-1.0, 1.0);
  CHECK(max_gradient_error(p, X, Y, 1e-5) < 1e-5);
}

TEST_CASE("zero residual gives zero gradient") {
  MlpPolicy p = MlpPolicy::create({3, 4, 2}, 7);
  Rng rng(8);
  Matrix X(3, 5);
  for (int i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform(-1.0, 1.0);
  Matrix Y = p.forward_normalized(X);
  MlpGradients g = p.gradient(X, Y);
  CHECK(g.loss == 0.0);
  for (const auto& gw : g.gW) CHECK(gw.cwiseAbs().maxCoeff() == 0.0);
  for (const auto& gb : g.gb) CHECK(gb.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single active rectifier unit follows the chain rule") {
  MlpPolicy p = MlpPolicy::create({1, 1, 1}, 3);
  p.weights()[0] << 2.0;
  p.biases()[0] << 1.0;  // pre-activation 2x + 1 > 0 at x = 1
  p.weights()[1] << 3.0;
  p.biases()[1] << 0.0;
  Matrix X = Matrix::Constant(1, 1, 1.0);
  Matrix Y = Matrix::Constant(1, 1, 0.0);
  // out = 3(2x+1) = 9; dL/dout = 2*out = 18
  MlpGradients g = p.gradient(X, Y);
  CHECK(g.gb[1][0] == doctest::Approx(18.0));
  CHECK(g.gW[1](0, 0) == doctest::Approx(18.0 * 3.0));  // times hidden activation
  CHECK(g.gb[0][0] == doctest::Approx(18.0 * 3.0));     // downstream weight
  CHECK(g.gW[0](0, 0) == doctest::Approx(18.0 * 3.0 * 1.0));
}

TEST_CASE("a single sample is memorized") {
  MlpPolicy p = MlpPolicy::create({4, 8, 2}, 21);
  Matrix X(4, 1);
  X << 0.3, -0.6, 0.9, 0.1;
  Matrix Y(2, 1);
  Y << 0.5, -0.25;
  TrainOptions opts;
  opts.epochs = 2000;
  opts.lr = 1e-3;
  opts.batch = 1;
  opts.seed = 4;
  auto trace = p.train(X, Y, opts);
  CHECK(trace.size() == 2000);
  CHECK(trace.back() < 1e-6);
}

TEST_CASE("zero learning rate leaves the parameters untouched") {
  MlpPolicy p = MlpPolicy::create({3, 4, 2}, 5);
  MlpPolicy before = p;
  Rng rng(6);
  Matrix X(3, 12), Y(2, 12);
  for (int i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform(-1.0, 1.0);
  for (int i = 0; i < Y.size(); ++i) Y.data()[i] = rng.uniform(-1.0, 1.0);
  TrainOptions opts;
  opts.epochs = 10;
  opts.lr = 0.0;
  opts.batch = 4;
  auto trace = p.train(X, Y, opts);
  for (size_t l = 0; l < p.weights().size(); ++l) {
    CHECK((p.weights()[l] - before.weights()[l]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((p.biases()[l] - before.biases()[l]).cwiseAbs().maxCoeff() == 0.0);
  }
  for (double v : trace) CHECK(v == doctest::Approx(trace.front()).epsilon(1e-15));
}

TEST_CASE("duplicating the dataset does not change full-batch training") {
  Rng rng(31);
  Matrix X(3, 10), Y(2, 10);
  for (int i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform(-1.0, 1.0);
  for (int i = 0; i < Y.size(); ++i) Y.data()[i] = rng.uniform(-1.0, 1.0);
  Matrix X2(3, 20), Y2(2, 20);
  X2 << X, X;
  Y2 << Y, Y;
  TrainOptions opts;
  opts.epochs = 100;
  opts.lr = 1e-3;
  opts.batch = 64;  // full batch in both cases
  opts.seed = 9;
  MlpPolicy p1 = MlpPolicy::create({3, 5, 2}, 11);
  MlpPolicy p2 = MlpPolicy::create({3, 5, 2}, 11);
  p1.train(X, Y, opts);
  p2.train(X2, Y2, opts);
  for (size_t l = 0; l < p1.weights().size(); ++l)
    CHECK((p1.weights()[l] - p2.weights()[l]).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("training is bitwise deterministic in the seed") {
  Rng rng(32);
  Matrix X(4, 30), Y(2, 30);
  for (int i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform(-1.0, 1.0);
  for (int i = 0; i < Y.size(); ++i) Y.data()[i] = rng.uniform(-1.0, 1.0);
  TrainOptions opts;
  opts.epochs = 20;
  opts.lr = 1e-3;
  opts.batch = 8;
  opts.seed = 77;
  MlpPolicy p1 = MlpPolicy::create({4, 6, 2}, 13);
  MlpPolicy p2 = MlpPolicy::create({4, 6, 2}, 13);
  auto t1 = p1.train(X, Y, opts);
  auto t2 = p2.train(X, Y, opts);
  REQUIRE(t1.size() == t2.size());
  for (size_t i = 0; i < t1.size(); ++i) CHECK(t1[i] == t2[i]);
  for (size_t l = 0; l < p1.weights().size(); ++l)
    CHECK((p1.weights()[l] - p2.weights()[l]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("normalization is applied inside forward and is invertible") {
  MlpPolicy p = MlpPolicy::create({2, 3, 1}, 15);
  Vector mean(2), std(2);
  mean << 1.0, -2.0;
  std << 2.0, 0.5;
  p.set_normalization(mean, std);
  Vector x(2);
  x << 3.0, -1.0;
  Vector xn = p.normalize(x);
  CHECK(xn[0] == doctest::Approx(1.0));
  CHECK(xn[1] == doctest::Approx(2.0));
  CHECK((p.forward(x) - p.forward_normalized(Matrix(xn)).col(0)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(((xn.cwiseProduct(std) + mean) - x).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(p.set_normalization(mean, Vector::Zero(2)), InvalidParameterError);
}

TEST_CASE("checkpoint round trip and schema errors") {
  MlpPolicy p = MlpPolicy::create({5, 4, 3}, 19);
  Vector mean = Vector::Constant(5, 0.5), std = Vector::Constant(5, 2.0);
  p.set_normalization(mean, std);
  Vector om = Vector::Constant(3, -0.1), os = Vector::Constant(3, 1.5);
  p.set_output_normalization(om, os);
  std::string path = "mlp_roundtrip.bin";
  p.save(path);
  MlpPolicy q = MlpPolicy::load(path);
  CHECK(q.layer_sizes() == p.layer_sizes());
  CHECK(q.init_seed() == p.init_seed());
  Rng rng(3);
  Vector x(5);
  for (int i = 0; i < 5; ++i) x[i] = rng.uniform(-1.0, 1.0);
  CHECK((p.forward(x) - q.forward(x)).cwiseAbs().maxCoeff() == 0.0);

  std::ofstream bad("mlp_corrupt.bin", std::ios::binary);
  bad << "garbage";
  bad.close();
  CHECK_THROWS_AS(MlpPolicy::load("mlp_corrupt.bin"), IoError);
  CHECK_THROWS_AS(MlpPolicy::load("no_such_file.bin"), IoError);
  std::remove(path.c_str());
  std::remove("mlp_corrupt.bin");
}

TEST_CASE("training input validation") {
  MlpPolicy p = MlpPolicy::create({2, 3, 1}, 1);
  TrainOptions opts;
  CHECK_THROWS_AS(p.train(Matrix(2, 0), Matrix(1, 0), opts), InvalidParameterError);
  opts.epochs = 0;
  CHECK_THROWS_AS(p.train(Matrix::Ones(2, 3), Matrix::Ones(1, 3), opts),
                  InvalidParameterError);
}
