// Copyright 2026 The dpvi Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef DPVI_AUTODIFF_HPP
#define DPVI_AUTODIFF_HPP

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace dpvi::ad {

class tape;

// Handle to a node on a tape. Nodes hold small dense vectors; scalars are
// length-1 vectors.
struct var {
  tape* t = nullptr;
  std::int32_t id = -1;
};

// Append-only reverse-mode tape. The graph is built once; afterwards leaf
// values may be overwritten and forward()/backward() re-run any number of
// times without allocating, which is what makes per-example gradients cheap.
class tape {
 public:
  tape() = default;
  tape(const tape&) = delete;
  tape& operator=(const tape&) = delete;
  tape(tape&&) = default;
  tape& operator=(tape&&) = default;

  // Leaves. Inputs are gradient-tracked; slots are data terminals whose
  // values change per record but receive no gradient of their own.
  var input(std::size_t len);
  var slot(std::size_t len);
  var constant(std::span<const double> values);
  var constant(double value);

  // Elementwise primitives. Binary ops require equal lengths or a length-1
  // operand, which broadcasts.
  var add(var a, var b);
  var sub(var a, var b);
  var mul(var a, var b);
  var div(var a, var b);
  var neg(var a);
  var exp(var a);
  var log(var a);
  var sigmoid(var a);
  var sqrt(var a);

  // Reductions and shape ops.
  var dot(var a, var b);                    // inner product, equal lengths
  var sum(var a);                           // scalar
  var logsumexp(var a);                     // scalar, overflow-safe
  var stack(std::span<const var> scalars);  // scalars -> vector
  var slice(var a, std::size_t offset, std::size_t len);

  void set(var v, std::span<const double> values);
  void set(var v, double value);

  // Recomputes every non-leaf node in tape order. Throws std::domain_error
  // on invalid math (log/div/sqrt of bad arguments, exp overflow).
  void forward();
  // Accumulates d(root)/d(node) for every node; root must be scalar.
  void backward(var root);

  std::span<const double> value(var v) const;
  double scalar(var v) const;
  std::span<const double> gradient(var v) const;

  // Gradients of all inputs, concatenated in input creation order.
  std::size_t input_dim() const { return input_dim_; }
  void input_gradient(std::span<double> out) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  enum class op : std::uint8_t {
    leaf, add, sub, mul, div, neg, exp, log, sigmoid, sqrt,
    dot, sum, logsumexp, stack, slice,
  };

  struct node {
    op o;
    std::int32_t a = -1, b = -1;
    std::int32_t off = 0;   // offset into the value arena
    std::int32_t len = 0;
    std::int32_t aux = 0;   // slice source offset / stack varargs offset
    std::int32_t aux2 = 0;  // stack arity
  };

  var push(op o, std::int32_t a, std::int32_t b, std::size_t len);
  std::span<double> values_of(std::int32_t id);
  std::span<double> adjoint_of(std::int32_t id);
  var binary(op o, var a, var b);
  var unary(op o, var a);

  std::vector<node> nodes_;
  std::vector<double> values_;
  std::vector<double> adjoints_;
  std::vector<std::int32_t> varargs_;
  std::vector<std::int32_t> inputs_;
  std::size_t input_dim_ = 0;
};

// Operator sugar for model-building code.
var operator+(var a, var b);
var operator-(var a, var b);
var operator*(var a, var b);
var operator/(var a, var b);
var operator-(var a);
var operator+(var a, double b);
var operator+(double a, var b);
var operator-(var a, double b);
var operator-(double a, var b);
var operator*(var a, double b);
var operator*(double a, var b);
var operator/(var a, double b);
var operator/(double a, var b);

var exp(var a);
var log(var a);
var sigmoid(var a);
var sqrt(var a);
var dot(var a, var b);
var sum(var a);
var logsumexp(var a);
var slice(var a, std::size_t offset, std::size_t len);
// log(1 + e^x), built from logsumexp so it is overflow-safe.
var softplus(var a);

// Convenience for tests and small one-off evaluations: builds f's graph over
// a single tracked vector input, then returns f(x) and its gradient.
template <typename F>
std::pair<double, std::vector<double>> value_and_gradient(
    F&& f, std::span<const double> x) {
  tape t;
  var in = t.input(x.size());
  t.set(in, x);
  var root = f(t, in);
  t.forward();
  t.backward(root);
  std::vector<double> grad(x.size());
  t.input_gradient(grad);
  return {t.scalar(root), std::move(grad)};
}

}  // namespace dpvi::ad

#endif  // DPVI_AUTODIFF_HPP
