#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rnli/classifier.hpp"
#include "rnli/dataset.hpp"

namespace rnli {

struct TrainConfig {
  int epochs = 100;
  std::size_t batch_size = 32;
  double lambda = 1e-4;
  std::uint64_t seed = 1;
  AdaDeltaConfig optimizer;
  bool shuffle = true;
  // Keep the parameters of the epoch with the best validation accuracy
  // instead of the final ones. Needs a validation set.
  bool best_epoch = false;
  unsigned threads = 1;

  void validate() const;
  std::string to_json() const;
};

struct TrainHistory {
  // Mean minibatch objective (NLL + L2) per epoch, measured before each update.
  std::vector<double> epoch_loss;
  // Objective of the very first minibatch, before any update.
  double first_batch_loss = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> validation_accuracy;
  int selected_epoch = 0;  // 1-based
};

using EpochCallback = std::function<void(int epoch, double loss)>;

// Minibatch AdaDelta on mean NLL + L2. Each minibatch is split into a fixed
// number of contiguous shards whose gradients are reduced in shard order, so
// the result is bit-identical for every thread count.
TrainHistory train(Model& model, std::span<const Example> examples, const TrainConfig& config,
                   std::span<const Example> validation = {}, const EpochCallback& on_epoch = {});

struct BinStats {
  std::size_t count = 0;
  std::size_t correct = 0;
  double accuracy() const { return count ? static_cast<double>(correct) / static_cast<double>(count) : 0.0; }
};

using Confusion = std::array<std::array<std::size_t, kNumRelations>, kNumRelations>;

struct EvalReport {
  std::string model;
  int cutoff = -1;  // largest training bin, -1 when not from an experiment
  std::array<BinStats, kNumBins> bins{};
  // confusion[bin][gold][predicted]
  std::array<Confusion, kNumBins> confusion{};

  double train_accuracy = std::numeric_limits<double>::quiet_NaN();
  Relation baseline_relation = Relation::kEquivalence;
  double baseline_train_accuracy = std::numeric_limits<double>::quiet_NaN();
  std::array<double, kNumBins> baseline_accuracy{};
  bool degenerate = false;
  double lambda = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> history;
  std::string config_json;

  // Pooled accuracy over bins 1..12; bin 0 is reported on its own.
  double overall() const { return pooled_accuracy(1, kMaxBin); }
  double pooled_accuracy(int lo, int hi) const;
  double mean_bin_accuracy(int lo, int hi) const;
  std::size_t total_count() const;
  bool seen_size(int bin) const { return cutoff >= 0 && bin <= cutoff; }
};

using Predictor = std::function<Relation(const PreparedExample&)>;

EvalReport evaluate_predictions(std::span<const PreparedExample> examples, const Predictor& predictor);
// Runs inference on `threads` workers; parameters are never written.
EvalReport evaluate_by_bin(const Model& model, std::span<const Example> examples, unsigned threads = 1);
std::vector<Relation> predict_all(const Model& model, std::span<const PreparedExample> examples,
                                  unsigned threads = 1);
double accuracy(const Model& model, std::span<const PreparedExample> examples, unsigned threads = 1);

struct BaselineResult {
  Relation majority = Relation::kEquivalence;
  EvalReport report;
};
// Predicts the training majority relation everywhere.
BaselineResult baseline_most_frequent(std::span<const Example> train, std::span<const Example> test);

struct ExperimentResult {
  Model model;
  EvalReport report;
  TrainHistory history;
};

// Trains on training_subset(split, cutoff) and evaluates on the test side of bins 1..12.
ExperimentResult run_experiment(int cutoff, const DatasetSplit& split, const ModelConfig& model_config,
                                const TrainConfig& train_config, const EpochCallback& on_epoch = {});

struct CurvePoint {
  std::size_t size = 0;
  double accuracy = 0.0;
};

// For each size, trains on a seeded subset of the cutoff training set (the
// whole set, in order, when size equals what is available) and records
// overall test accuracy.
std::vector<CurvePoint> learning_curve(const ModelConfig& model_config, const DatasetSplit& split, int cutoff,
                                       std::span<const std::size_t> sizes, const TrainConfig& train_config);

struct LambdaSweep {
  std::vector<std::pair<double, double>> accuracy_by_lambda;
  double chosen = 0.0;
};

// Holds out a seeded slice of `examples`, trains once per lambda on the rest
// and picks the lambda with the best held-out accuracy (earliest on ties).
LambdaSweep sweep_lambda(const ModelConfig& model_config, std::span<const Example> examples,
                         const TrainConfig& train_config, std::span<const double> lambdas,
                         double holdout_fraction = 0.1);

}  // namespace rnli
