#include "rnli/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rnli/errors.hpp"

namespace rnli {
namespace {

void require(bool ok, const char* op, const Shape& expected, const Shape& got) {
  if (!ok) throw ShapeMismatch(op, expected.to_string(), got.to_string());
}

bool is_vector(const Shape& s) { return s.rank() == 1; }

}  // namespace

void Graph::reset() {
  nodes_.clear();
  values_.clear();
  grads_.clear();
  has_grads_ = false;
}

void Graph::reset(const ParamStore& store, Gradients* sink) {
  reset();
  store_ = &store;
  sink_ = sink;
  if (sink_ && sink_->size() != store.size()) {
    throw ShapeMismatch("Graph", std::to_string(store.size()) + " gradient tensors",
                        std::to_string(sink_->size()));
  }
}

std::size_t Graph::check(Var v) const {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw std::out_of_range("Var does not belong to this graph");
  }
  return static_cast<std::size_t>(v.id);
}

Var Graph::push(Node node) {
  nodes_.push_back(node);
  has_grads_ = false;
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

Var Graph::emit(Op op, Shape shape, Var a, Var b, Var c) {
  Node n{op, shape};
  n.a = a.id;
  n.b = b.id;
  n.c = c.id;
  n.offset = values_.size();
  values_.resize(values_.size() + shape.size());
  return push(n);
}

Var Graph::input(const Tensor& value) {
  if (value.size() == 0) throw std::invalid_argument("Graph::input: empty tensor");
  Var v = emit(Op::kInput, value.shape());
  std::copy(value.values().begin(), value.values().end(), val_mut(nodes_.back()));
  return v;
}

Var Graph::param(ParamId id) {
  if (!store_) throw std::logic_error("Graph::param: graph has no parameter store");
  const Tensor& t = store_->value(id);
  Node n{Op::kParam, t.shape()};
  n.ext_value = t.data();
  if (sink_) {
    n.ext_grad = (*sink_)[id].data();
  } else {
    n.offset = values_.size();
    values_.resize(values_.size() + t.size());
  }
  return push(n);
}

Var Graph::row(ParamId table, std::size_t r) {
  if (!store_) throw std::logic_error("Graph::row: graph has no parameter store");
  const Tensor& t = store_->value(table);
  if (t.shape().rank() != 2) throw ShapeMismatch("row", "rank-2 table", t.shape().to_string());
  if (r >= t.shape()[0]) throw std::out_of_range("Graph::row: row index out of range");
  const std::size_t d = t.shape()[1];
  Node n{Op::kRow, Shape::vector(d)};
  n.ext_value = t.data() + r * d;
  if (sink_) {
    n.ext_grad = (*sink_)[table].data() + r * d;
  } else {
    n.offset = values_.size();
    values_.resize(values_.size() + d);
  }
  return push(n);
}

Var Graph::matmul(Var a, Var b) {
  const Shape sa = shape(a);
  const Shape sb = shape(b);
  if (sa.rank() != 2) throw ShapeMismatch("matmul", "rank-2 left operand", sa.to_string());
  const std::size_t m = sa[0];
  const std::size_t k = sa[1];
  if (sb.rank() == 1) {
    require(sb[0] == k, "matmul", Shape::vector(k), sb);
    Var out = emit(Op::kMatVec, Shape::vector(m), a, b);
    const double* A = val(nodes_[check(a)]);
    const double* x = val(nodes_[check(b)]);
    double* y = val_mut(nodes_.back());
    for (std::size_t i = 0; i < m; ++i) {
      const double* Ai = A + i * k;
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += Ai[j] * x[j];
      y[i] = s;
    }
    return out;
  }
  require(sb.rank() == 2 && sb[0] == k, "matmul", Shape::matrix(k, sb.rank() == 2 ? sb[1] : 1), sb);
  const std::size_t n = sb[1];
  Var out = emit(Op::kMatMat, Shape::matrix(m, n), a, b);
  const double* A = val(nodes_[check(a)]);
  const double* B = val(nodes_[check(b)]);
  double* C = val_mut(nodes_.back());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      for (std::size_t j = 0; j < n; ++j) C[i * n + j] += aip * B[p * n + j];
    }
  }
  return out;
}

Var Graph::add(Var a, Var b) {
  require(shape(a) == shape(b), "add", shape(a), shape(b));
  Var out = emit(Op::kAdd, shape(a), a, b);
  const double* x = val(nodes_[check(a)]);
  const double* y = val(nodes_[check(b)]);
  double* z = val_mut(nodes_.back());
  const std::size_t n = shape(a).size();
  for (std::size_t i = 0; i < n; ++i) z[i] = x[i] + y[i];
  return out;
}

Var Graph::hadamard(Var a, Var b) {
  require(shape(a) == shape(b), "hadamard", shape(a), shape(b));
  Var out = emit(Op::kHadamard, shape(a), a, b);
  const double* x = val(nodes_[check(a)]);
  const double* y = val(nodes_[check(b)]);
  double* z = val_mut(nodes_.back());
  const std::size_t n = shape(a).size();
  for (std::size_t i = 0; i < n; ++i) z[i] = x[i] * y[i];
  return out;
}

Var Graph::scale(double c, Var x) {
  Var out = emit(Op::kScale, shape(x), x);
  nodes_.back().k = c;
  const double* in = val(nodes_[check(x)]);
  double* z = val_mut(nodes_.back());
  const std::size_t n = shape(x).size();
  for (std::size_t i = 0; i < n; ++i) z[i] = c * in[i];
  return out;
}

Var Graph::concat(Var a, Var b) {
  const Shape sa = shape(a);
  const Shape sb = shape(b);
  if (!is_vector(sa)) throw ShapeMismatch("concat", "vector", sa.to_string());
  if (!is_vector(sb)) throw ShapeMismatch("concat", "vector", sb.to_string());
  Var out = emit(Op::kConcat, Shape::vector(sa[0] + sb[0]), a, b);
  const double* x = val(nodes_[check(a)]);
  const double* y = val(nodes_[check(b)]);
  double* z = val_mut(nodes_.back());
  std::copy(x, x + sa[0], z);
  std::copy(y, y + sb[0], z + sa[0]);
  return out;
}

Var Graph::tanh(Var x) {
  Var out = emit(Op::kTanh, shape(x), x);
  const double* in = val(nodes_[check(x)]);
  double* z = val_mut(nodes_.back());
  const std::size_t n = shape(x).size();
  for (std::size_t i = 0; i < n; ++i) z[i] = std::tanh(in[i]);
  return out;
}

Var Graph::sigmoid(Var x) {
  Var out = emit(Op::kSigmoid, shape(x), x);
  const double* in = val(nodes_[check(x)]);
  double* z = val_mut(nodes_.back());
  const std::size_t n = shape(x).size();
  for (std::size_t i = 0; i < n; ++i) z[i] = 1.0 / (1.0 + std::exp(-in[i]));
  return out;
}

Var Graph::bilinear(Var x, Var t, Var y) {
  const Shape sx = shape(x);
  const Shape st = shape(t);
  const Shape sy = shape(y);
  if (!is_vector(sx)) throw ShapeMismatch("bilinear", "vector x", sx.to_string());
  if (!is_vector(sy)) throw ShapeMismatch("bilinear", "vector y", sy.to_string());
  const std::size_t m = sx[0];
  const std::size_t p = sy[0];
  if (st.rank() != 3 || st[1] != m || st[2] != p) {
    throw ShapeMismatch("bilinear", "(n x " + std::to_string(m) + " x " + std::to_string(p) + ")",
                        st.to_string());
  }
  const std::size_t n = st[0];
  Var out = emit(Op::kBilinear, Shape::vector(n), x, t, y);
  const double* xv = val(nodes_[check(x)]);
  const double* T = val(nodes_[check(t)]);
  const double* yv = val(nodes_[check(y)]);
  double* z = val_mut(nodes_.back());
  for (std::size_t kk = 0; kk < n; ++kk) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double* row = T + (kk * m + i) * p;
      double s = 0.0;
      for (std::size_t j = 0; j < p; ++j) s += row[j] * yv[j];
      acc += xv[i] * s;
    }
    z[kk] = acc;
  }
  return out;
}

Var Graph::sum(Var x) {
  Var out = emit(Op::kSum, Shape::vector(1), x);
  const double* in = val(nodes_[check(x)]);
  const std::size_t n = shape(x).size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += in[i];
  val_mut(nodes_.back())[0] = s;
  return out;
}

Var Graph::softmax_nll(Var logits, int target) {
  const Shape s = shape(logits);
  if (!is_vector(s)) throw ShapeMismatch("softmax_nll", "vector", s.to_string());
  if (target < 0 || static_cast<std::size_t>(target) >= s[0]) {
    throw std::out_of_range("softmax_nll: target index out of range");
  }
  Var out = emit(Op::kSoftmaxNll, Shape::vector(1), logits);
  nodes_.back().target = target;
  const double* z = val(nodes_[check(logits)]);
  const double mx = *std::max_element(z, z + s[0]);
  double denom = 0.0;
  for (std::size_t i = 0; i < s[0]; ++i) denom += std::exp(z[i] - mx);
  val_mut(nodes_.back())[0] = std::log(denom) - (z[target] - mx);
  return out;
}

std::span<const double> Graph::value(Var v) const {
  const Node& n = nodes_[check(v)];
  return {val(n), n.shape.size()};
}

double Graph::scalar(Var v) const {
  const Node& n = nodes_[check(v)];
  if (n.shape.size() != 1) throw NonScalarLoss("value of shape " + n.shape.to_string() + " is not a scalar");
  return val(n)[0];
}

std::span<const double> Graph::grad(Var v) const {
  if (!has_grads_) throw std::logic_error("Graph::grad called before backward()");
  const Node& n = nodes_[check(v)];
  return {n.ext_grad ? n.ext_grad : grads_.data() + n.offset, n.shape.size()};
}

void Graph::backward(Var loss, double seed) {
  const Node& root = nodes_[check(loss)];
  if (root.shape.size() != 1) {
    throw NonScalarLoss("loss of shape " + root.shape.to_string() + " is not a scalar");
  }
  grads_.assign(values_.size(), 0.0);
  has_grads_ = true;
  gradient(root)[0] += seed;
  for (std::size_t i = static_cast<std::size_t>(loss.id) + 1; i-- > 0;) backward_node(nodes_[i]);
}

void Graph::backward_node(const Node& n) {
  const double* g = n.ext_grad ? n.ext_grad : grads_.data() + n.offset;
  switch (n.op) {
    case Op::kInput:
    case Op::kParam:
    case Op::kRow:
      return;

    case Op::kMatVec: {
      const Node& an = nodes_[static_cast<std::size_t>(n.a)];
      const Node& bn = nodes_[static_cast<std::size_t>(n.b)];
      const std::size_t m = an.shape[0];
      const std::size_t k = an.shape[1];
      const double* A = val(an);
      const double* x = val(bn);
      double* gA = gradient(an);
      double* gx = gradient(bn);
      for (std::size_t i = 0; i < m; ++i) {
        const double gi = g[i];
        if (gi == 0.0) continue;
        const double* Ai = A + i * k;
        double* gAi = gA + i * k;
        for (std::size_t j = 0; j < k; ++j) {
          gAi[j] += gi * x[j];
          gx[j] += gi * Ai[j];
        }
      }
      return;
    }

    case Op::kMatMat: {
      const Node& an = nodes_[static_cast<std::size_t>(n.a)];
      const Node& bn = nodes_[static_cast<std::size_t>(n.b)];
      const std::size_t m = an.shape[0];
      const std::size_t k = an.shape[1];
      const std::size_t cols = bn.shape[1];
      const double* A = val(an);
      const double* B = val(bn);
      double* gA = gradient(an);
      double* gB = gradient(bn);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          const double aip = A[i * k + p];
          for (std::size_t j = 0; j < cols; ++j) {
            acc += g[i * cols + j] * B[p * cols + j];
            gB[p * cols + j] += aip * g[i * cols + j];
          }
          gA[i * k + p] += acc;
        }
      }
      return;
    }

    case Op::kAdd: {
      double* ga = gradient(nodes_[static_cast<std::size_t>(n.a)]);
      double* gb = gradient(nodes_[static_cast<std::size_t>(n.b)]);
      const std::size_t size = n.shape.size();
      for (std::size_t i = 0; i < size; ++i) ga[i] += g[i];
      for (std::size_t i = 0; i < size; ++i) gb[i] += g[i];
      return;
    }

    case Op::kHadamard: {
      const Node& an = nodes_[static_cast<std::size_t>(n.a)];
      const Node& bn = nodes_[static_cast<std::size_t>(n.b)];
      const double* x = val(an);
      const double* y = val(bn);
      double* ga = gradient(an);
      double* gb = gradient(bn);
      const std::size_t size = n.shape.size();
      for (std::size_t i = 0; i < size; ++i) {
        ga[i] += g[i] * y[i];
        gb[i] += g[i] * x[i];
      }
      return;
    }

    case Op::kScale: {
      double* ga = gradient(nodes_[static_cast<std::size_t>(n.a)]);
      const std::size_t size = n.shape.size();
      for (std::size_t i = 0; i < size; ++i) ga[i] += n.k * g[i];
      return;
    }

    case Op::kConcat: {
      const Node& an = nodes_[static_cast<std::size_t>(n.a)];
      const Node& bn = nodes_[static_cast<std::size_t>(n.b)];
      const std::size_t la = an.shape[0];
      const std::size_t lb = bn.shape[0];
      double* ga = gradient(an);
      double* gb = gradient(bn);
      for (std::size_t i = 0; i < la; ++i) ga[i] += g[i];
      for (std::size_t i = 0; i < lb; ++i) gb[i] += g[la + i];
      return;
    }

    case Op::kTanh: {
      const double* y = val(n);
      double* ga = gradient(nodes_[static_cast<std::size_t>(n.a)]);
      const std::size_t size = n.shape.size();
      for (std::size_t i = 0; i < size; ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
      return;
    }

    case Op::kSigmoid: {
      const double* y = val(n);
      double* ga = gradient(nodes_[static_cast<std::size_t>(n.a)]);
      const std::size_t size = n.shape.size();
      for (std::size_t i = 0; i < size; ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
      return;
    }

    case Op::kBilinear: {
      const Node& xn = nodes_[static_cast<std::size_t>(n.a)];
      const Node& tn = nodes_[static_cast<std::size_t>(n.b)];
      const Node& yn = nodes_[static_cast<std::size_t>(n.c)];
      const std::size_t out = tn.shape[0];
      const std::size_t m = tn.shape[1];
      const std::size_t p = tn.shape[2];
      const double* x = val(xn);
      const double* T = val(tn);
      const double* y = val(yn);
      double* gx = gradient(xn);
      double* gT = gradient(tn);
      double* gy = gradient(yn);
      for (std::size_t kk = 0; kk < out; ++kk) {
        const double gk = g[kk];
        if (gk == 0.0) continue;
        for (std::size_t i = 0; i < m; ++i) {
          const double* row = T + (kk * m + i) * p;
          double* grow = gT + (kk * m + i) * p;
          const double coef = gk * x[i];
          double s = 0.0;
          for (std::size_t j = 0; j < p; ++j) {
            s += row[j] * y[j];
            gy[j] += coef * row[j];
            grow[j] += coef * y[j];
          }
          gx[i] += gk * s;
        }
      }
      return;
    }

    case Op::kSum: {
      double* ga = gradient(nodes_[static_cast<std::size_t>(n.a)]);
      const std::size_t size = nodes_[static_cast<std::size_t>(n.a)].shape.size();
      for (std::size_t i = 0; i < size; ++i) ga[i] += g[0];
      return;
    }

    case Op::kSoftmaxNll: {
      const Node& ln = nodes_[static_cast<std::size_t>(n.a)];
      const std::size_t size = ln.shape[0];
      const double* z = val(ln);
      double* gz = gradient(ln);
      const double mx = *std::max_element(z, z + size);
      double denom = 0.0;
      for (std::size_t i = 0; i < size; ++i) denom += std::exp(z[i] - mx);
      for (std::size_t i = 0; i < size; ++i) {
        const double p = std::exp(z[i] - mx) / denom;
        gz[i] += g[0] * (p - (static_cast<int>(i) == n.target ? 1.0 : 0.0));
      }
      return;
    }
  }
}

}  // namespace rnli
