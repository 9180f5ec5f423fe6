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

#pragma once

// Minimal scalar reverse-mode differentiation.
//
// A Tape records every node in creation order; each node stores its value and
// up to two (parent, local partial) edges. backward() walks the tape once in
// reverse, so the cost of a full gradient is linear in the number of
// recorded operations. Only the operators the quality-aware loss needs are
// provided: + - * / exp sqrt, sum and mean.

#include <cstddef>
#include <span>
#include <vector>

namespace iqa::ad {

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  double value() const;
  std::size_t index() const { return index_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

class Tape {
 public:
  Var variable(double value);
  Var constant(double value) { return variable(value); }

  double value(const Var& v) const { return nodes_[v.index()].value; }

  /// Adjoints d(output)/d(node) for every node on the tape.
  std::vector<double> backward(const Var& output) const;

  std::size_t size() const { return nodes_.size(); }

  // Node constructors used by the operator overloads.
  Var unary(double value, const Var& a, double da);
  Var binary(double value, const Var& a, double da, const Var& b, double db);
  /// n-ary node with per-parent partials (used by sum).
  Var nary(double value, std::span<const Var> parents, std::span<const double> partials);

 private:
  struct Edge {
    std::size_t parent;
    double partial;
  };
  struct Node {
    double value;
    std::size_t first_edge;
    std::size_t edge_count;
  };

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
};

Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator/(const Var& a, const Var& b);
Var operator+(const Var& a, double b);
Var operator-(const Var& a, double b);
Var operator-(double a, const Var& b);
Var operator*(const Var& a, double b);
Var operator*(double a, const Var& b);
Var operator/(const Var& a, double b);
Var exp(const Var& a);
Var sqrt(const Var& a);
Var sum(std::span<const Var> xs);
Var mean(std::span<const Var> xs);

}  // namespace iqa::ad
