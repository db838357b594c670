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
#include "dpvi/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpvi::ad {
namespace {

[[noreturn]] void fail(const char* what) { throw std::domain_error(what); }

inline double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

var tape::push(op o, std::int32_t a, std::int32_t b, std::size_t len) {
  node n;
  n.o = o;
  n.a = a;
  n.b = b;
  n.off = std::int32_t(values_.size());
  n.len = std::int32_t(len);
  nodes_.push_back(n);
  values_.resize(values_.size() + len, 0.0);
  adjoints_.resize(values_.size(), 0.0);
  return var{this, std::int32_t(nodes_.size() - 1)};
}

std::span<double> tape::values_of(std::int32_t id) {
  const node& n = nodes_[std::size_t(id)];
  return {values_.data() + n.off, std::size_t(n.len)};
}

std::span<double> tape::adjoint_of(std::int32_t id) {
  const node& n = nodes_[std::size_t(id)];
  return {adjoints_.data() + n.off, std::size_t(n.len)};
}

var tape::input(std::size_t len) {
  var v = push(op::leaf, -1, -1, len);
  inputs_.push_back(v.id);
  input_dim_ += len;
  return v;
}

var tape::slot(std::size_t len) { return push(op::leaf, -1, -1, len); }

var tape::constant(std::span<const double> values) {
  var v = push(op::leaf, -1, -1, values.size());
  set(v, values);
  return v;
}

var tape::constant(double value) {
  var v = push(op::leaf, -1, -1, 1);
  values_[std::size_t(nodes_[std::size_t(v.id)].off)] = value;
  return v;
}

var tape::binary(op o, var a, var b) {
  const auto la = std::size_t(nodes_[std::size_t(a.id)].len);
  const auto lb = std::size_t(nodes_[std::size_t(b.id)].len);
  if (la != lb && la != 1 && lb != 1) fail("shape mismatch in binary op");
  return push(o, a.id, b.id, std::max(la, lb));
}

var tape::unary(op o, var a) {
  return push(o, a.id, -1, std::size_t(nodes_[std::size_t(a.id)].len));
}

var tape::add(var a, var b) { return binary(op::add, a, b); }
var tape::sub(var a, var b) { return binary(op::sub, a, b); }
var tape::mul(var a, var b) { return binary(op::mul, a, b); }
var tape::div(var a, var b) { return binary(op::div, a, b); }
var tape::neg(var a) { return unary(op::neg, a); }
var tape::exp(var a) { return unary(op::exp, a); }
var tape::log(var a) { return unary(op::log, a); }
var tape::sigmoid(var a) { return unary(op::sigmoid, a); }
var tape::sqrt(var a) { return unary(op::sqrt, a); }

var tape::dot(var a, var b) {
  if (nodes_[std::size_t(a.id)].len != nodes_[std::size_t(b.id)].len) {
    fail("shape mismatch in dot");
  }
  return push(op::dot, a.id, b.id, 1);
}

var tape::sum(var a) { return push(op::sum, a.id, -1, 1); }

var tape::logsumexp(var a) { return push(op::logsumexp, a.id, -1, 1); }

var tape::stack(std::span<const var> scalars) {
  if (scalars.empty()) fail("stack of zero vars");
  const auto vararg_off = std::int32_t(varargs_.size());
  for (var s : scalars) {
    if (nodes_[std::size_t(s.id)].len != 1) fail("stack expects scalars");
    varargs_.push_back(s.id);
  }
  var v = push(op::stack, -1, -1, scalars.size());
  nodes_[std::size_t(v.id)].aux = vararg_off;
  nodes_[std::size_t(v.id)].aux2 = std::int32_t(scalars.size());
  return v;
}

var tape::slice(var a, std::size_t offset, std::size_t len) {
  const node& src = nodes_[std::size_t(a.id)];
  if (offset + len > std::size_t(src.len)) fail("slice out of range");
  var v = push(op::slice, a.id, -1, len);
  nodes_[std::size_t(v.id)].aux = std::int32_t(offset);
  return v;
}

void tape::set(var v, std::span<const double> values) {
  node& n = nodes_[std::size_t(v.id)];
  if (values.size() != std::size_t(n.len)) fail("set: length mismatch");
  std::copy(values.begin(), values.end(), values_.begin() + n.off);
}

void tape::set(var v, double value) {
  node& n = nodes_[std::size_t(v.id)];
  if (n.len != 1) fail("set: scalar expected");
  values_[std::size_t(n.off)] = value;
}

std::span<const double> tape::value(var v) const {
  const node& n = nodes_[std::size_t(v.id)];
  return {values_.data() + n.off, std::size_t(n.len)};
}

double tape::scalar(var v) const {
  const node& n = nodes_[std::size_t(v.id)];
  if (n.len != 1) fail("scalar() on vector node");
  return values_[std::size_t(n.off)];
}

std::span<const double> tape::gradient(var v) const {
  const node& n = nodes_[std::size_t(v.id)];
  return {adjoints_.data() + n.off, std::size_t(n.len)};
}

void tape::input_gradient(std::span<double> out) const {
  std::size_t k = 0;
  for (std::int32_t id : inputs_) {
    const node& n = nodes_[std::size_t(id)];
    for (std::int32_t i = 0; i < n.len; ++i) {
      out[k++] = adjoints_[std::size_t(n.off + i)];
    }
  }
}

void tape::forward() {
  double* const vals = values_.data();
  for (const node& n : nodes_) {
    if (n.o == op::leaf) continue;
    double* out = vals + n.off;
    const node& na = nodes_[std::size_t(n.a)];
    const double* pa = vals + na.off;
    switch (n.o) {
      case op::add:
      case op::sub:
      case op::mul:
      case op::div: {
        const node& nb = nodes_[std::size_t(n.b)];
        const double* pb = vals + nb.off;
        const std::int32_t sa = na.len == 1 ? 0 : 1;
        const std::int32_t sb = nb.len == 1 ? 0 : 1;
        for (std::int32_t i = 0; i < n.len; ++i) {
          const double x = pa[i * sa], y = pb[i * sb];
          switch (n.o) {
            case op::add: out[i] = x + y; break;
            case op::sub: out[i] = x - y; break;
            case op::mul: out[i] = x * y; break;
            default:
              if (y == 0.0) fail("division by zero");
              out[i] = x / y;
          }
        }
        break;
      }
      case op::neg:
        for (std::int32_t i = 0; i < n.len; ++i) out[i] = -pa[i];
        break;
      case op::exp:
        for (std::int32_t i = 0; i < n.len; ++i) {
          out[i] = std::exp(pa[i]);
          if (!std::isfinite(out[i])) fail("exp overflow");
        }
        break;
      case op::log:
        for (std::int32_t i = 0; i < n.len; ++i) {
          if (!(pa[i] > 0.0)) fail("log of non-positive value");
          out[i] = std::log(pa[i]);
        }
        break;
      case op::sigmoid:
        for (std::int32_t i = 0; i < n.len; ++i) out[i] = stable_sigmoid(pa[i]);
        break;
      case op::sqrt:
        for (std::int32_t i = 0; i < n.len; ++i) {
          if (pa[i] < 0.0) fail("sqrt of negative value");
          out[i] = std::sqrt(pa[i]);
        }
        break;
      case op::dot: {
        const double* pb = vals + nodes_[std::size_t(n.b)].off;
        double acc = 0.0;
        for (std::int32_t i = 0; i < na.len; ++i) acc += pa[i] * pb[i];
        out[0] = acc;
        break;
      }
      case op::sum: {
        double acc = 0.0;
        for (std::int32_t i = 0; i < na.len; ++i) acc += pa[i];
        out[0] = acc;
        break;
      }
      case op::logsumexp: {
        double m = pa[0];
        for (std::int32_t i = 1; i < na.len; ++i) m = std::max(m, pa[i]);
        if (std::isinf(m) && m < 0) {  // all -inf
          out[0] = m;
          break;
        }
        double acc = 0.0;
        for (std::int32_t i = 0; i < na.len; ++i) acc += std::exp(pa[i] - m);
        out[0] = m + std::log(acc);
        break;
      }
      case op::stack:
        for (std::int32_t i = 0; i < n.len; ++i) {
          const node& src = nodes_[std::size_t(varargs_[std::size_t(n.aux + i)])];
          out[i] = vals[src.off];
        }
        break;
      case op::slice:
        for (std::int32_t i = 0; i < n.len; ++i) out[i] = pa[n.aux + i];
        break;
      case op::leaf:
        break;
    }
  }
}

void tape::backward(var root) {
  const node& r = nodes_[std::size_t(root.id)];
  if (r.len != 1) fail("backward root must be scalar");
  std::fill(adjoints_.begin(), adjoints_.end(), 0.0);
  adjoints_[std::size_t(r.off)] = 1.0;

  double* const vals = values_.data();
  double* const adj = adjoints_.data();
  for (std::size_t k = std::size_t(root.id) + 1; k-- > 0;) {
    const node& n = nodes_[k];
    if (n.o == op::leaf) continue;
    const double* g = adj + n.off;
    const double* out = vals + n.off;
    const node& na = nodes_[std::size_t(n.a)];
    const double* pa = vals + na.off;
    double* ga = adj + na.off;
    switch (n.o) {
      case op::add:
      case op::sub:
      case op::mul:
      case op::div: {
        const node& nb = nodes_[std::size_t(n.b)];
        const double* pb = vals + nb.off;
        double* gb = adj + nb.off;
        const std::int32_t sa = na.len == 1 ? 0 : 1;
        const std::int32_t sb = nb.len == 1 ? 0 : 1;
        for (std::int32_t i = 0; i < n.len; ++i) {
          const double gi = g[i];
          switch (n.o) {
            case op::add:
              ga[i * sa] += gi;
              gb[i * sb] += gi;
              break;
            case op::sub:
              ga[i * sa] += gi;
              gb[i * sb] -= gi;
              break;
            case op::mul:
              ga[i * sa] += gi * pb[i * sb];
              gb[i * sb] += gi * pa[i * sa];
              break;
            default: {  // div
              const double inv = 1.0 / pb[i * sb];
              ga[i * sa] += gi * inv;
              gb[i * sb] -= gi * out[i] * inv;
            }
          }
        }
        break;
      }
      case op::neg:
        for (std::int32_t i = 0; i < n.len; ++i) ga[i] -= g[i];
        break;
      case op::exp:
        for (std::int32_t i = 0; i < n.len; ++i) ga[i] += g[i] * out[i];
        break;
      case op::log:
        for (std::int32_t i = 0; i < n.len; ++i) ga[i] += g[i] / pa[i];
        break;
      case op::sigmoid:
        for (std::int32_t i = 0; i < n.len; ++i) {
          ga[i] += g[i] * out[i] * (1.0 - out[i]);
        }
        break;
      case op::sqrt:
        for (std::int32_t i = 0; i < n.len; ++i) {
          ga[i] += g[i] * 0.5 / out[i];
        }
        break;
      case op::dot: {
        const node& nb = nodes_[std::size_t(n.b)];
        const double* pb = vals + nb.off;
        double* gb = adj + nb.off;
        const double g0 = g[0];
        for (std::int32_t i = 0; i < na.len; ++i) {
          ga[i] += g0 * pb[i];
          gb[i] += g0 * pa[i];
        }
        break;
      }
      case op::sum: {
        const double g0 = g[0];
        for (std::int32_t i = 0; i < na.len; ++i) ga[i] += g0;
        break;
      }
      case op::logsumexp: {
        const double g0 = g[0];
        const double y = out[0];
        for (std::int32_t i = 0; i < na.len; ++i) {
          ga[i] += g0 * std::exp(pa[i] - y);
        }
        break;
      }
      case op::stack:
        for (std::int32_t i = 0; i < n.len; ++i) {
          const node& src = nodes_[std::size_t(varargs_[std::size_t(n.aux + i)])];
          adj[src.off] += g[i];
        }
        break;
      case op::slice:
        for (std::int32_t i = 0; i < n.len; ++i) ga[n.aux + i] += g[i];
        break;
      case op::leaf:
        break;
    }
  }
}

var operator+(var a, var b) { return a.t->add(a, b); }
var operator-(var a, var b) { return a.t->sub(a, b); }
var operator*(var a, var b) { return a.t->mul(a, b); }
var operator/(var a, var b) { return a.t->div(a, b); }
var operator-(var a) { return a.t->neg(a); }
var operator+(var a, double b) { return a + a.t->constant(b); }
var operator+(double a, var b) { return b.t->constant(a) + b; }
var operator-(var a, double b) { return a - a.t->constant(b); }
var operator-(double a, var b) { return b.t->constant(a) - b; }
var operator*(var a, double b) { return a * a.t->constant(b); }
var operator*(double a, var b) { return b.t->constant(a) * b; }
var operator/(var a, double b) { return a / a.t->constant(b); }
var operator/(double a, var b) { return b.t->constant(a) / b; }

var exp(var a) { return a.t->exp(a); }
var log(var a) { return a.t->log(a); }
var sigmoid(var a) { return a.t->sigmoid(a); }
var sqrt(var a) { return a.t->sqrt(a); }
var dot(var a, var b) { return a.t->dot(a, b); }
var sum(var a) { return a.t->sum(a); }
var logsumexp(var a) { return a.t->logsumexp(a); }
var slice(var a, std::size_t offset, std::size_t len) {
  return a.t->slice(a, offset, len);
}

var softplus(var a) {
  const var zero = a.t->constant(0.0);
  const var pair[] = {zero, a};
  return a.t->logsumexp(a.t->stack(pair));
}

}  // namespace dpvi::ad
