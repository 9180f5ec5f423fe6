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

#include "iqa/autodiff.hpp"

#include <cmath>

#include "iqa/error.hpp"

namespace iqa::ad {

double Var::value() const { return tape_->value(*this); }

Var Tape::variable(double value) {
  nodes_.push_back({value, edges_.size(), 0});
  return Var(this, nodes_.size() - 1);
}

Var Tape::unary(double value, const Var& a, double da) {
  edges_.push_back({a.index(), da});
  nodes_.push_back({value, edges_.size() - 1, 1});
  return Var(this, nodes_.size() - 1);
}

Var Tape::binary(double value, const Var& a, double da, const Var& b, double db) {
  edges_.push_back({a.index(), da});
  edges_.push_back({b.index(), db});
  nodes_.push_back({value, edges_.size() - 2, 2});
  return Var(this, nodes_.size() - 1);
}

Var Tape::nary(double value, std::span<const Var> parents, std::span<const double> partials) {
  const std::size_t first = edges_.size();
  for (std::size_t i = 0; i < parents.size(); ++i) edges_.push_back({parents[i].index(), partials[i]});
  nodes_.push_back({value, first, parents.size()});
  return Var(this, nodes_.size() - 1);
}

std::vector<double> Tape::backward(const Var& output) const {
  if (output.tape() != this) throw ConfigError("backward: output belongs to another tape");
  std::vector<double> adjoint(nodes_.size(), 0.0);
  adjoint[output.index()] = 1.0;
  for (std::size_t i = output.index() + 1; i-- > 0;) {
    const double a = adjoint[i];
    if (a == 0.0) continue;
    const Node& n = nodes_[i];
    for (std::size_t e = n.first_edge; e < n.first_edge + n.edge_count; ++e) {
      adjoint[edges_[e].parent] += a * edges_[e].partial;
    }
  }
  return adjoint;
}

namespace {

Tape& tape_of(const Var& a, const Var& b) {
  if (a.tape() == nullptr || a.tape() != b.tape()) throw ConfigError("autodiff: operands on different tapes");
  return *a.tape();
}

}  // namespace

Var operator+(const Var& a, const Var& b) { return tape_of(a, b).binary(a.value() + b.value(), a, 1.0, b, 1.0); }
Var operator-(const Var& a, const Var& b) { return tape_of(a, b).binary(a.value() - b.value(), a, 1.0, b, -1.0); }
Var operator*(const Var& a, const Var& b) {
  return tape_of(a, b).binary(a.value() * b.value(), a, b.value(), b, a.value());
}
Var operator/(const Var& a, const Var& b) {
  const double bv = b.value();
  return tape_of(a, b).binary(a.value() / bv, a, 1.0 / bv, b, -a.value() / (bv * bv));
}
Var operator+(const Var& a, double b) { return a.tape()->unary(a.value() + b, a, 1.0); }
Var operator-(const Var& a, double b) { return a.tape()->unary(a.value() - b, a, 1.0); }
Var operator-(double a, const Var& b) { return b.tape()->unary(a - b.value(), b, -1.0); }
Var operator*(const Var& a, double b) { return a.tape()->unary(a.value() * b, a, b); }
Var operator*(double a, const Var& b) { return b * a; }
Var operator/(const Var& a, double b) { return a.tape()->unary(a.value() / b, a, 1.0 / b); }

Var exp(const Var& a) {
  const double v = std::exp(a.value());
  return a.tape()->unary(v, a, v);
}

Var sqrt(const Var& a) {
  const double v = std::sqrt(a.value());
  return a.tape()->unary(v, a, v > 0.0 ? 0.5 / v : 0.0);
}

Var sum(std::span<const Var> xs) {
  if (xs.empty()) throw ConfigError("autodiff sum of empty range");
  double total = 0.0;
  for (const Var& x : xs) total += x.value();
  const std::vector<double> ones(xs.size(), 1.0);
  return xs.front().tape()->nary(total, xs, ones);
}

Var mean(std::span<const Var> xs) { return sum(xs) / static_cast<double>(xs.size()); }

}  // namespace iqa::ad
