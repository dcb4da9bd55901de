// Copyright 2026 The CEM-GD Planner Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "cemgd/linear_system.hpp"
#include "cemgd/mlp.hpp"
#include "cemgd/mlp_io.hpp"
#include "support/oracles.hpp"

namespace cemgd {
namespace {

namespace fs = std::filesystem;

fs::path temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "cemgd_test_mlp";
  fs::create_directories(dir);
  return dir / name;
}

void expect_same_parameters(const MlpModel& a, const MlpModel& b) {
  ASSERT_EQ(a.layers().size(), b.layers().size());
  for (std::size_t l = 0; l < a.layers().size(); ++l) {
    EXPECT_TRUE(a.layers()[l].weight == b.layers()[l].weight) << "layer " << l;
    EXPECT_TRUE(a.layers()[l].bias == b.layers()[l].bias) << "layer " << l;
  }
  EXPECT_TRUE(a.normalization().input_mean == b.normalization().input_mean);
  EXPECT_TRUE(a.normalization().input_std == b.normalization().input_std);
  EXPECT_TRUE(a.normalization().output_mean == b.normalization().output_mean);
  EXPECT_TRUE(a.normalization().output_std == b.normalization().output_std);
  EXPECT_EQ(a.activation(), b.activation());
}

TEST(Mlp, ZeroWeightsGiveIdentityDynamics) {
  const MlpModel model(3, 2, {4, 4});
  const Vector s{{0.5, -1.0, 2.0}};
  const Vector a{{0.3, -0.7}};
  Vector next(3);
  model.step(s, a, next);
  EXPECT_TRUE(next == s);

  const Vector g{{1.0, 2.0, -3.0}};
  Vector gs(3), ga(2);
  model.backward(s, a, g, gs, ga);
  EXPECT_TRUE(gs == g);
  EXPECT_TRUE(ga == Vector::Zero(2));
}

TEST(Mlp, SiluAtZeroIsZero) {
  EXPECT_EQ(silu(0.0), 0.0);
  EXPECT_DOUBLE_EQ(silu_derivative(0.0), 0.5);
}

TEST(Mlp, SmallNetworkMatchesHandComputation) {
  // 1-d state, 1-d action, one hidden layer of width 2.
  MlpModel model(1, 1, {2});
  auto& layers = model.layers();
  layers[0].weight << 0.5, -1.0, 2.0, 0.25;
  layers[0].bias << 0.1, -0.2;
  layers[1].weight << 1.5, -0.5;
  layers[1].bias << 0.05;
  Normalization norm = Normalization::identity(2, 1);
  norm.input_mean << 1.0, 0.0;
  norm.input_std << 2.0, 0.5;
  norm.output_mean << 0.3;
  norm.output_std << 4.0;
  model.set_normalization(norm);

  const double s = 2.0, a = 0.2;
  const double x0 = (s - 1.0) / 2.0, x1 = a / 0.5;
  const double h0 = oracle::silu_scalar(0.5 * x0 - 1.0 * x1 + 0.1);
  const double h1 = oracle::silu_scalar(2.0 * x0 + 0.25 * x1 - 0.2);
  const double y = 1.5 * h0 - 0.5 * h1 + 0.05;
  const double expected = s + y * 4.0 + 0.3;

  Vector next(1);
  model.step(Vector{{s}}, Vector{{a}}, next);
  EXPECT_NEAR(next[0], expected, 1e-14);
}

TEST(Mlp, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  MlpModel model = MlpModel::random(3, 2, {16, 16}, rng);
  Normalization norm = Normalization::identity(5, 3);
  norm.input_std << 2.0, 0.5, 1.5, 1.0, 3.0;
  norm.output_std << 0.1, 2.0, 1.0;
  model.set_normalization(norm);

  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int probe = 0; probe < 20; ++probe) {
    Vector s(3), a(2), g(3);
    for (auto* v : {&s, &a, &g}) {
      for (Eigen::Index i = 0; i < v->size(); ++i) (*v)[i] = u(rng);
    }
    Vector gs(3), ga(2);
    model.backward(s, a, g, gs, ga);

    // d(g . f(s, a)) by central differences.
    auto objective = [&](const Vector& sv, const Vector& av) {
      Vector out(3);
      model.step(sv, av, out);
      return g.dot(out);
    };
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < 3; ++i) {
      Vector up = s, down = s;
      up[i] += h;
      down[i] -= h;
      const double fd = (objective(up, a) - objective(down, a)) / (2 * h);
      EXPECT_NEAR(gs[i], fd, 1e-4 * std::max(1.0, std::abs(fd)));
    }
    for (Eigen::Index i = 0; i < 2; ++i) {
      Vector up = a, down = a;
      up[i] += h;
      down[i] -= h;
      const double fd = (objective(s, up) - objective(s, down)) / (2 * h);
      EXPECT_NEAR(ga[i], fd, 1e-4 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Mlp, IdentityActivationCollapsesToMatrixProduct) {
  std::mt19937_64 rng(11);
  const MlpModel model =
      MlpModel::random(2, 1, {5, 4}, rng, Activation::kIdentity);
  const auto& L = model.layers();
  const Eigen::MatrixXd w = L[2].weight * L[1].weight * L[0].weight;
  const Vector b = L[2].weight * (L[1].weight * L[0].bias + L[1].bias) + L[2].bias;
  const Vector s{{0.4, -0.9}};
  const Vector a{{0.6}};
  Vector x(3);
  x << s, a;
  Vector next(2);
  model.step(s, a, next);
  EXPECT_LT((next - (s + w * x + b)).cwiseAbs().maxCoeff(), 1e-12);
}

std::vector<Transition> linear_dataset(int n, std::uint64_t seed) {
  Eigen::MatrixXd a(2, 2), b(2, 1);
  a << 0.9, 0.2, -0.1, 0.95;
  b << 0.0, 0.5;
  const LinearSystem sys(a, b);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Transition> data;
  for (int i = 0; i < n; ++i) {
    Vector s{{u(rng), u(rng)}};
    Vector act{{u(rng)}};
    Vector next(2);
    sys.step(s, act, next);
    data.push_back({s, act, next});
  }
  return data;
}

TEST(MlpFit, LearnsALinearSystem) {
  const auto train = linear_dataset(2000, 1);
  const auto held_out = linear_dataset(500, 2);
  FitOptions opt;
  opt.hidden = {32};
  opt.epochs = 150;
  opt.batch_size = 32;
  opt.learning_rate = 0.05;
  FitReport rep;
  const MlpModel model = fit_mlp(train, opt, &rep);
  EXPECT_LT(rep.final_mse, rep.initial_mse);

  // Held-out error on normalized deltas.
  const Normalization& norm = model.normalization();
  double se = 0.0;
  for (const Transition& tr : held_out) {
    Vector pred(2);
    model.step(tr.state, tr.action, pred);
    const Vector err = ((pred - tr.next_state).array() /
                        norm.output_std.array()).matrix();
    se += err.squaredNorm();
  }
  EXPECT_LT(se / (2.0 * held_out.size()), 1e-3);
}

TEST(MlpFit, ZeroEpochsReturnsTheInitialization) {
  const auto data = linear_dataset(100, 4);
  FitOptions opt;
  opt.hidden = {8};
  opt.epochs = 0;
  opt.seed = 21;
  FitReport rep;
  const MlpModel fitted = fit_mlp(data, opt, &rep);
  std::mt19937_64 rng(21);
  const MlpModel fresh = MlpModel::random(2, 1, {8}, rng);
  ASSERT_EQ(fitted.layers().size(), fresh.layers().size());
  for (std::size_t l = 0; l < fresh.layers().size(); ++l) {
    EXPECT_TRUE(fitted.layers()[l].weight == fresh.layers()[l].weight);
    EXPECT_TRUE(fitted.layers()[l].bias == fresh.layers()[l].bias);
  }
  EXPECT_TRUE(rep.epoch_mse.empty());
  EXPECT_EQ(rep.final_mse, rep.initial_mse);
}

TEST(MlpFit, EpochLossNeverExceedsInitialLoss) {
  const auto data = linear_dataset(500, 5);
  FitOptions opt;
  opt.hidden = {16, 16};
  opt.epochs = 10;
  opt.learning_rate = 0.01;
  FitReport rep;
  fit_mlp(data, opt, &rep);
  ASSERT_EQ(rep.epoch_mse.size(), 10u);
  for (double mse : rep.epoch_mse) EXPECT_LE(mse, rep.initial_mse);
}

TEST(MlpFit, ConstantInputDimensionWarnsAndStaysFinite) {
  auto data = linear_dataset(200, 6);
  for (Transition& tr : data) tr.action[0] = 0.25;
  FitOptions opt;
  opt.hidden = {8};
  opt.epochs = 3;
  FitReport rep;
  const MlpModel model = fit_mlp(data, opt, &rep);
  ASSERT_FALSE(rep.warnings.empty());
  EXPECT_NE(rep.warnings.front().find("zero variance"), std::string::npos);
  EXPECT_TRUE(model.all_finite());
}

TEST(MlpFit, RejectsEmptyData) {
  EXPECT_THROW(fit_mlp({}, FitOptions{}), InvalidArgument);
}

TEST(MlpIo, BinaryRoundTripIsBitExact) {
  std::mt19937_64 rng(8);
  MlpModel model = MlpModel::random(4, 1, {7, 3}, rng);
  Normalization norm = Normalization::identity(5, 4);
  norm.input_mean << 0.1, 1.0 / 3.0, -2.5, 1e-300, 7.0;
  norm.output_std << 0.3, 1.7, 2.0 / 3.0, 5.0;
  model.set_normalization(norm);

  const fs::path path = temp_path("model.bin");
  save_mlp(model, path.string());
  const MlpModel loaded = load_mlp(path.string());
  expect_same_parameters(model, loaded);
  EXPECT_EQ(mlp_to_bytes(model), mlp_to_bytes(loaded));
}

TEST(MlpIo, JsonRoundTripPreservesParameters) {
  std::mt19937_64 rng(9);
  const MlpModel model = MlpModel::random(2, 2, {6}, rng, Activation::kIdentity);
  const fs::path path = temp_path("model.json");
  save_mlp(model, path.string());
  const MlpModel loaded = load_mlp(path.string());
  expect_same_parameters(model, loaded);
}

TEST(MlpIo, MissingFileIsNamedInTheError) {
  const std::string path = temp_path("does_not_exist.bin").string();
  try {
    load_mlp(path);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(path), std::string::npos) << e.what();
  }
}

TEST(MlpIo, RejectsCorruptOrTruncatedFiles) {
  std::mt19937_64 rng(10);
  const MlpModel model = MlpModel::random(2, 1, {4}, rng);
  std::vector<char> bytes = mlp_to_bytes(model);

  std::vector<char> bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(mlp_from_bytes(bad_magic), Error);

  std::vector<char> truncated(bytes.begin(), bytes.end() - 5);
  EXPECT_THROW(mlp_from_bytes(truncated), Error);

  std::vector<char> trailing = bytes;
  trailing.push_back('\0');
  EXPECT_THROW(mlp_from_bytes(trailing), Error);
}

}  // namespace
}  // namespace cemgd
