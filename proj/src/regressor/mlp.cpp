// Copyright 2026 The iqastack Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <limits>

#include "iqa/error.hpp"
#include "iqa/kernels.hpp"
#include "iqa/regressor.hpp"
#include "iqa/rng.hpp"

namespace iqa {

namespace {

constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kHeadStream = 0x7e4d;
// Pre-trained hidden units have large activations; a full-scale head would
// start deep in the sigmoid's flat tails.
constexpr double kTransferHeadScale = 0.01;

void fill_uniform(Matrix& w, double limit, Rng& rng) {
  for (double& v : w.data()) v = uniform_between(rng, -limit, limit);
}

void init_head(Matrix& w, Rng& rng) {
  fill_uniform(w, std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols())), rng);
}

double sigmoid(double z) {
  const double s = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  // Keep outputs strictly inside (0, 1) even when exp saturates.
  return std::clamp(s, std::numeric_limits<double>::denorm_min(), std::nextafter(1.0, 0.0));
}

void check_input(const ModelParams& params, const Matrix& batch) {
  params.validate();
  if (batch.cols() != params.input_width()) {
    throw ConfigError("feature width " + std::to_string(batch.cols()) + " does not match input layer " +
                      std::to_string(params.input_width()));
  }
  if (batch.rows() == 0) throw ConfigError("empty batch");
}

// Pre-activations z[l] and activations a[l] (a[0] is the input) for every
// layer; the head activation is left to the caller.
struct Trace {
  std::vector<Matrix> z;
  std::vector<Matrix> a;
};

Trace run_layers(const ModelParams& params, const Matrix& batch) {
  Trace t;
  const std::size_t layers = params.weights.size();
  t.a.push_back(batch);
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix z = kernels::matmul_nt(t.a.back(), params.weights[l]);
    const auto& b = params.biases[l];
    for (std::size_t r = 0; r < z.rows(); ++r) {
      auto row = z.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) row[c] += b[c];
    }
    if (l + 1 < layers) {
      Matrix a = z;
      for (double& v : a.data()) v = std::max(0.0, v);
      t.a.push_back(std::move(a));
    }
    t.z.push_back(std::move(z));
  }
  return t;
}

Matrix softmax_rows(const Matrix& z) {
  Matrix p(z.rows(), z.cols());
  for (std::size_t r = 0; r < z.rows(); ++r) {
    const auto in = z.row(r);
    auto out = p.row(r);
    const double m = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      out[c] = std::exp(in[c] - m);
      total += out[c];
    }
    for (double& v : out) v /= total;
  }
  return p;
}

void backprop(const ModelParams& params, const Trace& t, Matrix dz, Gradients& grad) {
  const std::size_t layers = params.weights.size();
  grad.weights.assign(layers, Matrix());
  grad.biases.assign(layers, {});
  for (std::size_t l = layers; l-- > 0;) {
    grad.weights[l] = kernels::matmul_tn(dz, t.a[l]);
    auto& gb = grad.biases[l];
    gb.assign(dz.cols(), 0.0);
    for (std::size_t r = 0; r < dz.rows(); ++r) {
      const auto row = dz.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) gb[c] += row[c];
    }
    if (l == 0) break;
    Matrix da = kernels::matmul_nn(dz, params.weights[l]);
    const Matrix& zprev = t.z[l - 1];
    for (std::size_t i = 0; i < da.size(); ++i) {
      if (!(zprev.data()[i] > 0.0)) da.data()[i] = 0.0;
    }
    dz = std::move(da);
  }
}

}  // namespace

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

void ModelParams::validate() const {
  if (layer_sizes.size() < 2) throw ConfigError("model needs at least an input and an output layer");
  for (int s : layer_sizes) {
    if (s < 1) throw ConfigError("layer sizes must be positive");
  }
  const int expected = head == Head::kClassify ? kClassifyOutputs : 1;
  if (layer_sizes.back() != expected) throw ConfigError("head width does not match head kind");
  if (weights.size() != layer_sizes.size() - 1 || biases.size() != weights.size()) {
    throw ConfigError("parameter count does not match layer sizes");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const auto in = static_cast<std::size_t>(layer_sizes[l]);
    const auto out = static_cast<std::size_t>(layer_sizes[l + 1]);
    if (weights[l].rows() != out || weights[l].cols() != in || biases[l].size() != out) {
      throw ConfigError("layer " + std::to_string(l) + " shape does not chain");
    }
  }
}

ModelParams init_params(const std::vector<int>& layer_sizes, Head head, std::uint64_t seed) {
  if (layer_sizes.empty()) throw ConfigError("init_params: empty layer list");
  ModelParams p;
  p.head = head;
  p.layer_sizes = layer_sizes;
  p.layer_sizes.push_back(head == Head::kClassify ? kClassifyOutputs : 1);
  for (int s : p.layer_sizes) {
    if (s < 1) throw ConfigError("init_params: layer sizes must be positive");
  }
  Rng rng(combine_seed(seed, kInitStream));
  const std::size_t layers = p.layer_sizes.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto in = static_cast<std::size_t>(p.layer_sizes[l]);
    const auto out = static_cast<std::size_t>(p.layer_sizes[l + 1]);
    Matrix w(out, in);
    if (l + 1 < layers) {
      fill_uniform(w, std::sqrt(6.0 / static_cast<double>(in)), rng);
    } else {
      init_head(w, rng);
    }
    p.weights.push_back(std::move(w));
    p.biases.emplace_back(out, 0.0);
  }
  return p;
}

ModelParams transfer_to_regress(const ModelParams& classifier, std::uint64_t seed) {
  classifier.validate();
  ModelParams p = classifier;
  p.head = Head::kRegress;
  p.layer_sizes.back() = 1;
  Rng rng(combine_seed(seed, kHeadStream));
  Matrix w(1, p.weights.back().cols());
  init_head(w, rng);
  for (double& v : w.data()) v *= kTransferHeadScale;
  p.weights.back() = std::move(w);
  p.biases.back().assign(1, 0.0);
  return p;
}

Matrix forward(const ModelParams& params, const Matrix& batch) {
  check_input(params, batch);
  Trace t = run_layers(params, batch);
  Matrix& z = t.z.back();
  if (params.head == Head::kClassify) return softmax_rows(z);
  for (double& v : z.data()) v = sigmoid(v);
  return std::move(z);
}

ScoreVector predict(const ModelParams& params, const Matrix& batch) {
  if (params.head != Head::kRegress) throw ConfigError("predict needs a regression head");
  const Matrix out = forward(params, batch);
  return ScoreVector(out.data().begin(), out.data().end());
}

double classify_loss(const ModelParams& params, const Matrix& batch, std::span<const int> classes,
                     Gradients* grad) {
  check_input(params, batch);
  if (params.head != Head::kClassify) throw ConfigError("classify_loss needs a classification head");
  if (classes.size() != batch.rows()) throw ConfigError("class count does not match batch rows");
  const Trace t = run_layers(params, batch);
  const Matrix& z = t.z.back();
  const double n = static_cast<double>(batch.rows());
  Matrix p = softmax_rows(z);
  double loss = 0.0;
  for (std::size_t r = 0; r < z.rows(); ++r) {
    const int c = classes[r];
    if (c < 0 || c >= kClassifyOutputs) throw ConfigError("class index out of range");
    const auto row = z.row(r);
    const double m = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double v : row) total += std::exp(v - m);
    loss += (m + std::log(total)) - row[static_cast<std::size_t>(c)];
  }
  loss /= n;
  if (!std::isfinite(loss)) throw NumericError("classification loss is not finite");
  if (grad != nullptr) {
    for (std::size_t r = 0; r < p.rows(); ++r) p(r, static_cast<std::size_t>(classes[r])) -= 1.0;
    for (double& v : p.data()) v /= n;
    backprop(params, t, std::move(p), *grad);
  }
  return loss;
}

double regress_loss(const ModelParams& params, const Matrix& batch, std::span<const double> targets,
                    const LossConfig& loss, Gradients* grad) {
  check_input(params, batch);
  if (params.head != Head::kRegress) throw ConfigError("regress_loss needs a regression head");
  if (targets.size() != batch.rows()) throw ConfigError("label count does not match batch rows");
  if (batch.rows() < 2) throw ConfigError("regression batches need at least 2 samples");
  const Trace t = run_layers(params, batch);
  const Matrix& z = t.z.back();
  ScoreVector out(z.rows());
  for (std::size_t r = 0; r < z.rows(); ++r) out[r] = sigmoid(z(r, 0));
  const LossValueAndGrad lv = qa_loss(targets, out, loss);
  if (grad != nullptr) {
    Matrix dz(z.rows(), 1);
    for (std::size_t r = 0; r < z.rows(); ++r) dz(r, 0) = lv.grad[r] * out[r] * (1.0 - out[r]);
    backprop(params, t, std::move(dz), *grad);
  }
  return lv.value;
}

}  // namespace iqa
