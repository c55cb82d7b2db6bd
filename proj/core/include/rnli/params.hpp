#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rnli/tensor.hpp"

namespace rnli {

using ParamId = std::size_t;

struct AdaDeltaConfig {
  double rho = 0.95;
  double epsilon = 1e-6;
};

// Named trainable tensors with their AdaDelta accumulators E[g^2] and E[dx^2].
class ParamStore {
 public:
  explicit ParamStore(AdaDeltaConfig optimizer = {});

  ParamId add(std::string name, Tensor init);

  std::size_t size() const { return entries_.size(); }
  std::size_t total_entries() const;

  const std::string& name(ParamId id) const { return entries_.at(id).name; }
  const Tensor& value(ParamId id) const { return entries_[id].value; }
  Tensor& value(ParamId id) { return entries_[id].value; }
  const Tensor& sq_grad(ParamId id) const { return entries_[id].sq_grad; }
  Tensor& sq_grad(ParamId id) { return entries_[id].sq_grad; }
  const Tensor& sq_delta(ParamId id) const { return entries_[id].sq_delta; }
  Tensor& sq_delta(ParamId id) { return entries_[id].sq_delta; }

  std::optional<ParamId> find(std::string_view name) const;
  // Throws std::out_of_range when absent.
  ParamId id(std::string_view name) const;

  const AdaDeltaConfig& optimizer() const { return optimizer_; }
  void set_optimizer(AdaDeltaConfig config);

  bool all_finite() const;

 private:
  struct Entry {
    std::string name;
    Tensor value;
    Tensor sq_grad;
    Tensor sq_delta;
  };
  std::vector<Entry> entries_;
  AdaDeltaConfig optimizer_;
};

// One zero-initialized gradient tensor per parameter of a store.
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParamStore& store);

  std::size_t size() const { return grads_.size(); }
  Tensor& operator[](ParamId id) { return grads_[id]; }
  const Tensor& operator[](ParamId id) const { return grads_[id]; }

  void zero();
  void add(const Gradients& other);
  void scale(double factor);
  bool all_finite() const;

 private:
  std::vector<Tensor> grads_;
};

// Per entry:
//   E[g^2]  <- rho E[g^2] + (1 - rho) g^2
//   dx      <- -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
//   E[dx^2] <- rho E[dx^2] + (1 - rho) dx^2
//   x       <- x + dx
void adadelta_step(ParamStore& store, const Gradients& grads);

// lambda / 2 * sum of squares over every parameter, embeddings included.
double l2_penalty(const ParamStore& store, double lambda);
void add_l2_gradient(const ParamStore& store, double lambda, Gradients& grads);

// Evaluates a scalar loss at the store's current values. When `grads` is
// non-null the analytic gradient is accumulated into it.
using LossFunction = std::function<double(const ParamStore&, Gradients*)>;

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t entries_checked = 0;
};

// Central differences at every parameter entry against the analytic gradient;
// relative error is |a - n| / max(|a|, |n|, 1e-8). The store is restored.
GradientCheckResult gradient_check(const LossFunction& loss, ParamStore& store, double h = 1e-5);

}  // namespace rnli
