#include "rnli/params.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rnli/errors.hpp"

namespace rnli {

ParamStore::ParamStore(AdaDeltaConfig optimizer) { set_optimizer(optimizer); }

ParamId ParamStore::add(std::string name, Tensor init) {
  if (find(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  if (init.size() == 0) throw std::invalid_argument("parameter " + name + " has no shape");
  Tensor zeros(init.shape());
  entries_.push_back(Entry{std::move(name), std::move(init), zeros, zeros});
  return entries_.size() - 1;
}

std::size_t ParamStore::total_entries() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

std::optional<ParamId> ParamStore::find(std::string_view name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  return std::nullopt;
}

ParamId ParamStore::id(std::string_view name) const {
  if (auto found = find(name)) return *found;
  throw std::out_of_range("no parameter named " + std::string(name));
}

void ParamStore::set_optimizer(AdaDeltaConfig config) {
  if (!(config.rho > 0.0 && config.rho < 1.0)) throw std::invalid_argument("AdaDelta rho must be in (0, 1)");
  if (!(config.epsilon > 0.0)) throw std::invalid_argument("AdaDelta epsilon must be positive");
  optimizer_ = config;
}

bool ParamStore::all_finite() const {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](const Entry& e) { return e.value.all_finite(); });
}

Gradients::Gradients(const ParamStore& store) {
  grads_.reserve(store.size());
  for (ParamId id = 0; id < store.size(); ++id) grads_.emplace_back(store.value(id).shape());
}

void Gradients::zero() {
  for (auto& g : grads_) g.fill(0.0);
}

void Gradients::add(const Gradients& other) {
  if (other.grads_.size() != grads_.size()) {
    throw ShapeMismatch("Gradients::add", std::to_string(grads_.size()) + " tensors",
                        std::to_string(other.grads_.size()));
  }
  for (std::size_t i = 0; i < grads_.size(); ++i) {
    double* dst = grads_[i].data();
    const double* src = other.grads_[i].data();
    const std::size_t n = grads_[i].size();
    for (std::size_t j = 0; j < n; ++j) dst[j] += src[j];
  }
}

void Gradients::scale(double factor) {
  for (auto& g : grads_) {
    for (double& v : g.values()) v *= factor;
  }
}

bool Gradients::all_finite() const {
  return std::all_of(grads_.begin(), grads_.end(), [](const Tensor& t) { return t.all_finite(); });
}

void adadelta_step(ParamStore& store, const Gradients& grads) {
  if (grads.size() != store.size()) {
    throw ShapeMismatch("adadelta_step", std::to_string(store.size()) + " parameters",
                        std::to_string(grads.size()));
  }
  const double rho = store.optimizer().rho;
  const double eps = store.optimizer().epsilon;
  for (ParamId id = 0; id < store.size(); ++id) {
    if (grads[id].shape() != store.value(id).shape()) {
      throw ShapeMismatch("adadelta_step", store.value(id).shape().to_string(),
                          grads[id].shape().to_string());
    }
    double* x = store.value(id).data();
    double* eg = store.sq_grad(id).data();
    double* ed = store.sq_delta(id).data();
    const double* g = grads[id].data();
    const std::size_t n = store.value(id).size();
    for (std::size_t i = 0; i < n; ++i) {
      eg[i] = rho * eg[i] + (1.0 - rho) * g[i] * g[i];
      const double delta = -std::sqrt(ed[i] + eps) / std::sqrt(eg[i] + eps) * g[i];
      ed[i] = rho * ed[i] + (1.0 - rho) * delta * delta;
      x[i] += delta;
    }
  }
}

double l2_penalty(const ParamStore& store, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("L2 coefficient must be non-negative");
  if (lambda == 0.0) return 0.0;
  double sum = 0.0;
  for (ParamId id = 0; id < store.size(); ++id) {
    for (double v : store.value(id).values()) sum += v * v;
  }
  return 0.5 * lambda * sum;
}

void add_l2_gradient(const ParamStore& store, double lambda, Gradients& grads) {
  if (lambda == 0.0) return;
  for (ParamId id = 0; id < store.size(); ++id) {
    const double* x = store.value(id).data();
    double* g = grads[id].data();
    const std::size_t n = store.value(id).size();
    for (std::size_t i = 0; i < n; ++i) g[i] += lambda * x[i];
  }
}

GradientCheckResult gradient_check(const LossFunction& loss, ParamStore& store, double h) {
  Gradients analytic(store);
  loss(store, &analytic);

  GradientCheckResult result;
  for (ParamId id = 0; id < store.size(); ++id) {
    Tensor& value = store.value(id);
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + h;
      const double up = loss(store, nullptr);
      value[i] = saved - h;
      const double down = loss(store, nullptr);
      value[i] = saved;

      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[id][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double err = std::abs(a - numeric) / denom;
      ++result.entries_checked;
      if (err > result.max_relative_error || result.worst_param.empty()) {
        if (err >= result.max_relative_error) {
          result.max_relative_error = err;
          result.worst_param = store.name(id);
          result.worst_index = i;
          result.analytic = a;
          result.numeric = numeric;
        }
      }
    }
  }
  return result;
}

}  // namespace rnli
