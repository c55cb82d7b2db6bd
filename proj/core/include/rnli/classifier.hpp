#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rnli/autodiff.hpp"
#include "rnli/dataset.hpp"
#include "rnli/encoders.hpp"
#include "rnli/params.hpp"

namespace rnli {

struct ModelConfig {
  EncoderConfig encoder;
  std::size_t d_c = 64;
  std::uint64_t seed = 1;

  static ModelConfig defaults(EncoderKind kind);
  void validate() const;

  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);
};

// An Example compiled once for repeated forward passes.
struct PreparedExample {
  SentenceInput premise;
  SentenceInput hypothesis;
  Relation label = Relation::kEquivalence;
  int bin = 0;
};

PreparedExample prepare(const Example& e);
std::vector<PreparedExample> prepare_all(std::span<const Example> examples);

using Logits = std::array<double, kNumRelations>;

// Argmax with ties going to the lowest relation index.
Relation argmax_relation(std::span<const double> logits);

// Siamese entailment classifier: one encoder applied to both sentences, an
// NTN combining layer, two tanh layers of width d_c and a 7-way softmax.
class Model {
 public:
  explicit Model(const ModelConfig& config);
  // Binds to existing parameters (e.g. from a checkpoint).
  Model(const ModelConfig& config, ParamStore params);

  const ModelConfig& config() const { return config_; }
  const ParamStore& params() const { return params_; }
  ParamStore& params() { return params_; }
  const Encoder& encoder() const { return encoder_; }

  // tanh(M_c [l; r] + b_c) + tanh(l^T T_c r)
  Var combine_ntn(Graph& g, Var left, Var right) const;
  Var logits(Graph& g, const SentenceInput& premise, const SentenceInput& hypothesis) const;

  Logits predict_logits(const SentenceInput& premise, const SentenceInput& hypothesis) const;
  Relation predict(const PreparedExample& e) const;
  // Unregularized negative log likelihood of the gold label.
  double example_loss(const PreparedExample& e) const;

  // Mean NLL over `batch` plus l2_penalty(lambda). When `grads` is non-null the
  // gradient of that objective is accumulated into it.
  double batch_objective(std::span<const PreparedExample> batch, double lambda, Gradients* grads) const;

  void save(const std::filesystem::path& path) const;
  static Model load(const std::filesystem::path& path);

 private:
  struct Layer {
    ParamId w = 0;
    ParamId b = 0;
  };

  void wire_classifier(bool create);

  ModelConfig config_;
  ParamStore params_;
  Encoder encoder_;
  Layer combine_;
  ParamId tensor_ = 0;
  Layer hidden1_, hidden2_, output_;
};

}  // namespace rnli
