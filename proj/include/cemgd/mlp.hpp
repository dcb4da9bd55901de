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

#ifndef CEMGD_MLP_HPP_
#define CEMGD_MLP_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cemgd/core.hpp"

namespace cemgd {

enum class Activation : std::uint32_t { kSilu = 0, kIdentity = 1 };

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double silu(double x) { return x * sigmoid(x); }
inline double silu_derivative(double x) {
  const double sg = sigmoid(x);
  return sg * (1.0 + x * (1.0 - sg));
}

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Vector bias;
};

// Affine maps applied around the network: the network sees
// (x - input_mean) / input_std and predicts (delta - output_mean) / output_std.
struct Normalization {
  Vector input_mean;
  Vector input_std;
  Vector output_mean;
  Vector output_std;

  static Normalization identity(int in, int out) {
    return {Vector::Zero(in), Vector::Ones(in), Vector::Zero(out),
            Vector::Ones(out)};
  }
};

// Residual MLP dynamics: s' = s + denorm(net(norm([s; a]))), where net is a
// stack of dense layers with an activation after every hidden layer.
class MlpModel {
 public:
  MlpModel() = default;

  // All weights and biases zero, identity normalization.
  MlpModel(int state_dim, int action_dim, std::vector<int> hidden = {200, 200, 200},
           Activation activation = Activation::kSilu)
      : state_dim_(state_dim),
        action_dim_(action_dim),
        activation_(activation),
        norm_(Normalization::identity(state_dim + action_dim, state_dim)) {
    if (state_dim < 1 || action_dim < 1) {
      throw InvalidArgument("mlp: dimensions must be positive");
    }
    std::vector<int> sizes;
    sizes.push_back(state_dim + action_dim);
    for (int h : hidden) {
      if (h < 1) throw InvalidArgument("mlp: hidden width must be positive");
      sizes.push_back(h);
    }
    sizes.push_back(state_dim);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      layers_.push_back({Eigen::MatrixXd::Zero(sizes[l + 1], sizes[l]),
                         Vector::Zero(sizes[l + 1])});
    }
  }

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization.
  template <class Rng>
  static MlpModel random(int state_dim, int action_dim, std::vector<int> hidden,
                         Rng& rng, Activation activation = Activation::kSilu) {
    MlpModel model(state_dim, action_dim, std::move(hidden), activation);
    for (DenseLayer& layer : model.layers_) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
        for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
          layer.weight(i, j) = dist(rng);
        }
      }
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
        layer.bias[i] = dist(rng);
      }
    }
    return model;
  }

  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  Activation activation() const { return activation_; }
  void set_activation(Activation a) { activation_ = a; }

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  const Normalization& normalization() const { return norm_; }
  void set_normalization(Normalization n) { norm_ = std::move(n); }

  std::vector<int> hidden_sizes() const {
    std::vector<int> out;
    for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
      out.push_back(static_cast<int>(layers_[l].weight.rows()));
    }
    return out;
  }

  bool all_finite() const {
    for (const DenseLayer& layer : layers_) {
      if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
    }
    return norm_.input_mean.allFinite() && norm_.input_std.allFinite() &&
           norm_.output_mean.allFinite() && norm_.output_std.allFinite();
  }

  // Raw network on an already-normalized input.
  Vector network(ConstVectorRef x) const {
    Vector h = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Vector z = layers_[l].weight * h + layers_[l].bias;
      if (l + 1 < layers_.size()) activate(z);
      h = std::move(z);
    }
    return h;
  }

  void step(ConstVectorRef s, ConstVectorRef a, VectorRef s_next) const {
    const Vector y = network(normalized_input(s, a));
    s_next = s + (y.array() * norm_.output_std.array() +
                  norm_.output_mean.array()).matrix();
  }

  void backward(ConstVectorRef s, ConstVectorRef a, ConstVectorRef g,
                VectorRef grad_s, VectorRef grad_a) const {
    // Forward pass, keeping pre-activations.
    std::vector<Vector> inputs(layers_.size());
    std::vector<Vector> pre(layers_.size());
    Vector h = normalized_input(s, a);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      inputs[l] = h;
      pre[l] = layers_[l].weight * h + layers_[l].bias;
      h = pre[l];
      if (l + 1 < layers_.size()) activate(h);
    }
    Vector delta = (g.array() * norm_.output_std.array()).matrix();
    for (std::size_t l = layers_.size(); l-- > 0;) {
      if (l + 1 < layers_.size()) apply_activation_derivative(pre[l], delta);
      delta = layers_[l].weight.transpose() * delta;
    }
    const Vector gx = (delta.array() / norm_.input_std.array()).matrix();
    grad_s = g + gx.head(state_dim_);
    grad_a = gx.tail(action_dim_);
  }

  Vector normalized_input(ConstVectorRef s, ConstVectorRef a) const {
    Vector x(state_dim_ + action_dim_);
    x << s, a;
    return ((x - norm_.input_mean).array() / norm_.input_std.array()).matrix();
  }

  void activate(Eigen::Ref<Eigen::MatrixXd> z) const {
    if (activation_ == Activation::kIdentity) return;
    z = z.unaryExpr([](double v) { return silu(v); });
  }

  // delta <- delta * act'(pre), entrywise.
  void apply_activation_derivative(const Eigen::Ref<const Eigen::MatrixXd>& pre,
                                   Eigen::Ref<Eigen::MatrixXd> delta) const {
    if (activation_ == Activation::kIdentity) return;
    delta = (delta.array() *
             pre.unaryExpr([](double v) { return silu_derivative(v); }).array())
                .matrix();
  }

 private:
  int state_dim_ = 0;
  int action_dim_ = 0;
  Activation activation_ = Activation::kSilu;
  std::vector<DenseLayer> layers_;
  Normalization norm_;
};

struct Transition {
  Vector state;
  Vector action;
  Vector next_state;
};

struct FitOptions {
  std::vector<int> hidden = {200, 200, 200};
  int epochs = 50;
  int batch_size = 64;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  Activation activation = Activation::kSilu;
};

struct FitReport {
  double initial_mse = 0.0;       // on normalized targets, before training
  std::vector<double> epoch_mse;  // full-dataset MSE after each epoch
  double final_mse = 0.0;
  std::vector<std::string> warnings;
};

namespace detail {

inline void mean_std(const Eigen::MatrixXd& cols, Vector& mean, Vector& stddev,
                     const char* what, std::vector<std::string>& warnings) {
  const double n = static_cast<double>(cols.cols());
  mean = cols.rowwise().sum() / n;
  stddev.resize(cols.rows());
  for (Eigen::Index i = 0; i < cols.rows(); ++i) {
    const double var = (cols.row(i).array() - mean[i]).square().sum() / n;
    double sd = std::sqrt(var);
    if (!(sd > 1e-8)) {
      warnings.push_back(std::string("zero variance in ") + what +
                         " dimension " + std::to_string(i) +
                         "; std floored at 1e-8");
      sd = 1e-8;
    }
    stddev[i] = sd;
  }
}

// Forward over a batch of columns; returns per-layer inputs and
// pre-activations for the backward pass.
inline Eigen::MatrixXd batch_forward(const MlpModel& model,
                                     const Eigen::MatrixXd& x,
                                     std::vector<Eigen::MatrixXd>* inputs,
                                     std::vector<Eigen::MatrixXd>* pre) {
  const auto& layers = model.layers();
  Eigen::MatrixXd h = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (inputs) (*inputs)[l] = h;
    Eigen::MatrixXd z = layers[l].weight * h;
    z.colwise() += layers[l].bias;
    if (pre) (*pre)[l] = z;
    if (l + 1 < layers.size()) model.activate(z);
    h = std::move(z);
  }
  return h;
}

inline double dataset_mse(const MlpModel& model, const Eigen::MatrixXd& x,
                          const Eigen::MatrixXd& y) {
  const Eigen::MatrixXd pred = batch_forward(model, x, nullptr, nullptr);
  return (pred - y).array().square().mean();
}

}  // namespace detail

// Fits a residual MLP to predict normalized state deltas with plain
// mini-batch gradient descent on mean-squared error.
inline MlpModel fit_mlp(const std::vector<Transition>& data,
                        const FitOptions& options, FitReport* report = nullptr) {
  if (data.empty()) throw InvalidArgument("fit_mlp: empty dataset");
  const int sd = static_cast<int>(data.front().state.size());
  const int ad = static_cast<int>(data.front().action.size());
  const int n = static_cast<int>(data.size());
  if (options.batch_size < 1 || options.epochs < 0 ||
      !(options.learning_rate > 0.0)) {
    throw InvalidArgument("fit_mlp: invalid options");
  }

  FitReport local;
  FitReport& rep = report ? *report : local;
  rep = FitReport{};

  Eigen::MatrixXd inputs(sd + ad, n);
  Eigen::MatrixXd deltas(sd, n);
  for (int i = 0; i < n; ++i) {
    const Transition& tr = data[i];
    if (tr.state.size() != sd || tr.action.size() != ad ||
        tr.next_state.size() != sd) {
      throw InvalidArgument("fit_mlp: inconsistent transition dimensions at " +
                            std::to_string(i));
    }
    inputs.col(i) << tr.state, tr.action;
    deltas.col(i) = tr.next_state - tr.state;
  }

  Normalization norm;
  detail::mean_std(inputs, norm.input_mean, norm.input_std, "input", rep.warnings);
  detail::mean_std(deltas, norm.output_mean, norm.output_std, "target",
                   rep.warnings);
  const Eigen::MatrixXd x =
      (inputs.colwise() - norm.input_mean).array().colwise() /
      norm.input_std.array();
  const Eigen::MatrixXd y =
      (deltas.colwise() - norm.output_mean).array().colwise() /
      norm.output_std.array();

  std::mt19937_64 rng(options.seed);
  MlpModel model =
      MlpModel::random(sd, ad, options.hidden, rng, options.activation);
  model.set_normalization(norm);

  rep.initial_mse = detail::dataset_mse(model, x, y);
  rep.final_mse = rep.initial_mse;

  auto& layers = model.layers();
  const std::size_t num_layers = layers.size();
  std::vector<Eigen::MatrixXd> layer_in(num_layers);
  std::vector<Eigen::MatrixXd> pre(num_layers);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int start = 0; start < n; start += options.batch_size) {
      const int count = std::min(options.batch_size, n - start);
      Eigen::MatrixXd xb(x.rows(), count);
      Eigen::MatrixXd yb(y.rows(), count);
      for (int c = 0; c < count; ++c) {
        xb.col(c) = x.col(order[start + c]);
        yb.col(c) = y.col(order[start + c]);
      }
      const Eigen::MatrixXd pred = detail::batch_forward(model, xb, &layer_in, &pre);
      Eigen::MatrixXd delta =
          2.0 * (pred - yb) / static_cast<double>(count * y.rows());
      for (std::size_t l = num_layers; l-- > 0;) {
        if (l + 1 < num_layers) model.apply_activation_derivative(pre[l], delta);
        const Eigen::MatrixXd grad_w = delta * layer_in[l].transpose();
        const Vector grad_b = delta.rowwise().sum();
        if (l > 0) delta = layers[l].weight.transpose() * delta;
        layers[l].weight -= options.learning_rate * grad_w;
        layers[l].bias -= options.learning_rate * grad_b;
      }
    }
    const double mse = detail::dataset_mse(model, x, y);
    rep.epoch_mse.push_back(mse);
    rep.final_mse = mse;
  }
  if (!model.all_finite()) {
    throw Error("fit_mlp: training diverged (non-finite parameters)");
  }
  return model;
}

// Uniform random actions within `bounds`, `rollouts` episodes of
// `episode_length` steps from `start`.
template <DifferentiableModel Env, class Rng>
std::vector<Transition> collect_random_transitions(const Env& env,
                                                   ConstVectorRef start,
                                                   const ActionBounds& bounds,
                                                   int rollouts,
                                                   int episode_length,
                                                   Rng& rng) {
  std::vector<Transition> out;
  out.reserve(static_cast<std::size_t>(rollouts) * episode_length);
  for (int r = 0; r < rollouts; ++r) {
    Vector s = start;
    for (int t = 0; t < episode_length; ++t) {
      Vector a(bounds.dim());
      for (int j = 0; j < bounds.dim(); ++j) {
        std::uniform_real_distribution<double> dist(bounds.low[j], bounds.high[j]);
        a[j] = dist(rng);
      }
      Vector next(s.size());
      env.step(s, a, next);
      out.push_back({s, a, next});
      s = next;
    }
  }
  return out;
}

}  // namespace cemgd

#endif  // CEMGD_MLP_HPP_
