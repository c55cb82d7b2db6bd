#pragma once

// Reverse-mode automatic differentiation over a per-example tape.
//
// A Graph records every operation eagerly: the forward value is computed when
// the node is created, and backward() walks the tape in reverse creation order,
// which is a valid reverse topological order because inputs always precede
// their consumers. Parameters are read in place from a ParamStore; their
// gradients are accumulated directly into a caller-owned Gradients buffer, so
// many examples can share one buffer without copies.
//
// Shapes never broadcast. Every op validates its inputs and throws
// ShapeMismatch otherwise.

#include <cstdint>
#include <span>
#include <vector>

#include "rnli/params.hpp"
#include "rnli/tensor.hpp"

namespace rnli {

struct Var {
  std::int32_t id = -1;
  bool valid() const { return id >= 0; }
};

class Graph {
 public:
  Graph() = default;
  explicit Graph(const ParamStore& store, Gradients* sink = nullptr) { reset(store, sink); }

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Drops all nodes but keeps allocated capacity.
  void reset();
  void reset(const ParamStore& store, Gradients* sink = nullptr);

  // Leaves.
  Var input(const Tensor& value);
  Var param(ParamId id);
  // Row `row` of a rank-2 parameter, as a vector (embedding lookup).
  Var row(ParamId table, std::size_t row);

  // (m x k)(k) -> (m); (m x k)(k x n) -> (m x n)
  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var hadamard(Var a, Var b);
  Var scale(double c, Var x);
  // Two vectors joined end to end.
  Var concat(Var a, Var b);
  Var tanh(Var x);
  Var sigmoid(Var x);
  // out[k] = sum_ij x[i] T[k,i,j] y[j] for x (m), T (n x m x p), y (p).
  Var bilinear(Var x, Var t, Var y);
  // Sum of all entries, as a length-1 vector.
  Var sum(Var x);
  // -log softmax(logits)[target], with max subtraction.
  Var softmax_nll(Var logits, int target);

  const Shape& shape(Var v) const { return nodes_[check(v)].shape; }
  std::span<const double> value(Var v) const;
  double scalar(Var v) const;
  // Valid after backward().
  std::span<const double> grad(Var v) const;

  // Seeds d(loss)/d(loss) = seed and accumulates gradients into every node.
  // Throws NonScalarLoss when `loss` has more than one entry.
  void backward(Var loss, double seed = 1.0);

  std::size_t node_count() const { return nodes_.size(); }

 private:
  enum class Op : std::uint8_t {
    kInput, kParam, kRow, kMatVec, kMatMat, kAdd, kHadamard, kScale, kConcat,
    kTanh, kSigmoid, kBilinear, kSum, kSoftmaxNll,
  };

  struct Node {
    Op op;
    Shape shape;
    std::int32_t a = -1;
    std::int32_t b = -1;
    std::int32_t c = -1;
    std::size_t offset = 0;           // slot in values_/grads_
    const double* ext_value = nullptr;  // parameter storage
    double* ext_grad = nullptr;         // gradient sink storage
    double k = 0.0;
    int target = 0;
  };

  std::size_t check(Var v) const;
  Var push(Node node);
  // Appends a node with an arena slot of `shape.size()` entries.
  Var emit(Op op, Shape shape, Var a = {}, Var b = {}, Var c = {});

  const double* val(const Node& n) const { return n.ext_value ? n.ext_value : values_.data() + n.offset; }
  double* val_mut(const Node& n) { return values_.data() + n.offset; }
  double* gradient(const Node& n) { return n.ext_grad ? n.ext_grad : grads_.data() + n.offset; }

  void backward_node(const Node& n);

  const ParamStore* store_ = nullptr;
  Gradients* sink_ = nullptr;
  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<double> grads_;
  bool has_grads_ = false;
};

}  // namespace rnli
