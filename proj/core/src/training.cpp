#include "rnli/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "rnli/errors.hpp"

namespace rnli {
namespace {

// Gradient shards per minibatch. Fixed so that the reduction order, and with
// it every bit of the result, does not depend on the thread count.
constexpr std::size_t kShards = 4;

template <typename Fn>
void run_workers(unsigned threads, std::size_t tasks, Fn&& fn) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1U, threads), tasks));
  if (workers <= 1) {
    for (std::size_t t = 0; t < tasks; ++t) fn(t);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t t = w; t < tasks; t += workers) fn(t);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (batch_size < 1) throw std::invalid_argument("minibatch size must be at least 1");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be non-negative");
}

std::string TrainConfig::to_json() const {
  nlohmann::ordered_json j;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["lambda"] = lambda;
  j["seed"] = seed;
  j["adadelta_rho"] = optimizer.rho;
  j["adadelta_epsilon"] = optimizer.epsilon;
  j["shuffle"] = shuffle;
  j["best_epoch"] = best_epoch;
  j["threads"] = threads;
  return j.dump();
}

TrainHistory train(Model& model, std::span<const Example> examples, const TrainConfig& config,
                   std::span<const Example> validation, const EpochCallback& on_epoch) {
  config.validate();
  if (examples.empty()) throw EmptyDataset("cannot train on an empty dataset");
  if (config.best_epoch && validation.empty()) {
    throw std::invalid_argument("best-epoch selection needs a validation set");
  }

  ParamStore& store = model.params();
  store.set_optimizer(config.optimizer);
  const auto data = prepare_all(examples);
  const auto held_out = prepare_all(validation);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(Rng::derive(config.seed, 0x5EED));

  std::vector<Gradients> shard_grads(kShards, Gradients(store));
  std::vector<Graph> graphs(kShards);
  std::array<double, kShards> shard_loss{};

  TrainHistory history;
  ParamStore best_params;
  double best_accuracy = -1.0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.shuffle) rng.shuffle(order);
    double epoch_total = 0.0;
    std::size_t batches = 0;

    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::size_t n = end - start;
      const double weight = 1.0 / static_cast<double>(n);

      run_workers(config.threads, kShards, [&](std::size_t s) {
        Gradients& grads = shard_grads[s];
        grads.zero();
        Graph& g = graphs[s];
        double total = 0.0;
        for (std::size_t i = start + s * n / kShards; i < start + (s + 1) * n / kShards; ++i) {
          const PreparedExample& e = data[order[i]];
          g.reset(store, &grads);
          const Var loss = g.softmax_nll(model.logits(g, e.premise, e.hypothesis), index_of(e.label));
          total += g.scalar(loss);
          g.backward(loss, weight);
        }
        shard_loss[s] = total;
      });

      double loss = 0.0;
      for (std::size_t s = 0; s < kShards; ++s) loss += shard_loss[s];
      for (std::size_t s = 1; s < kShards; ++s) shard_grads[0].add(shard_grads[s]);
      loss = loss * weight + l2_penalty(store, config.lambda);
      add_l2_gradient(store, config.lambda, shard_grads[0]);

      if (!std::isfinite(loss) || !shard_grads[0].all_finite()) throw NonFiniteLoss(epoch, batches + 1);
      if (epoch == 1 && batches == 0) history.first_batch_loss = loss;

      adadelta_step(store, shard_grads[0]);
      epoch_total += loss;
      ++batches;
    }
    if (!store.all_finite()) throw NonFiniteLoss(epoch, batches);

    const double epoch_loss = epoch_total / static_cast<double>(batches);
    history.epoch_loss.push_back(epoch_loss);
    history.selected_epoch = epoch;
    if (!held_out.empty()) {
      const double acc = accuracy(model, held_out, config.threads);
      history.validation_accuracy.push_back(acc);
      if (config.best_epoch && acc > best_accuracy) {
        best_accuracy = acc;
        best_params = store;
        history.selected_epoch = epoch;
      }
    }
    if (on_epoch) on_epoch(epoch, epoch_loss);
  }

  if (config.best_epoch) {
    store = best_params;
    history.selected_epoch = 1 + static_cast<int>(std::distance(
        history.validation_accuracy.begin(),
        std::max_element(history.validation_accuracy.begin(), history.validation_accuracy.end())));
  }
  return history;
}

// ---------------------------------------------------------------------------

double EvalReport::pooled_accuracy(int lo, int hi) const {
  std::size_t count = 0;
  std::size_t correct = 0;
  for (int b = std::max(lo, 0); b <= std::min(hi, kMaxBin); ++b) {
    count += bins[static_cast<std::size_t>(b)].count;
    correct += bins[static_cast<std::size_t>(b)].correct;
  }
  return count ? static_cast<double>(correct) / static_cast<double>(count) : 0.0;
}

double EvalReport::mean_bin_accuracy(int lo, int hi) const {
  double sum = 0.0;
  int n = 0;
  for (int b = std::max(lo, 0); b <= std::min(hi, kMaxBin); ++b) {
    if (bins[static_cast<std::size_t>(b)].count == 0) continue;
    sum += bins[static_cast<std::size_t>(b)].accuracy();
    ++n;
  }
  return n ? sum / n : 0.0;
}

std::size_t EvalReport::total_count() const {
  std::size_t n = 0;
  for (const auto& b : bins) n += b.count;
  return n;
}

EvalReport evaluate_predictions(std::span<const PreparedExample> examples, const Predictor& predictor) {
  EvalReport report;
  for (const PreparedExample& e : examples) {
    const Relation p = predictor(e);
    const auto b = static_cast<std::size_t>(e.bin);
    ++report.bins[b].count;
    if (p == e.label) ++report.bins[b].correct;
    ++report.confusion[b][static_cast<std::size_t>(index_of(e.label))][static_cast<std::size_t>(index_of(p))];
  }
  return report;
}

std::vector<Relation> predict_all(const Model& model, std::span<const PreparedExample> examples,
                                  unsigned threads) {
  std::vector<Relation> out(examples.size());
  constexpr std::size_t kChunk = 64;
  const std::size_t chunks = (examples.size() + kChunk - 1) / kChunk;
  run_workers(threads, chunks, [&](std::size_t c) {
    Graph g;
    for (std::size_t i = c * kChunk; i < std::min(examples.size(), (c + 1) * kChunk); ++i) {
      g.reset(model.params());
      const auto logits = g.value(model.logits(g, examples[i].premise, examples[i].hypothesis));
      out[i] = argmax_relation(logits);
    }
  });
  return out;
}

double accuracy(const Model& model, std::span<const PreparedExample> examples, unsigned threads) {
  if (examples.empty()) return 0.0;
  const auto predictions = predict_all(model, examples, threads);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < examples.size(); ++i) correct += predictions[i] == examples[i].label;
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

EvalReport evaluate_by_bin(const Model& model, std::span<const Example> examples, unsigned threads) {
  const auto prepared = prepare_all(examples);
  const auto predictions = predict_all(model, prepared, threads);
  std::size_t next = 0;
  EvalReport report = evaluate_predictions(prepared, [&](const PreparedExample&) { return predictions[next++]; });
  report.model = std::string(encoder_name(model.config().encoder.kind));
  return report;
}

BaselineResult baseline_most_frequent(std::span<const Example> train, std::span<const Example> test) {
  if (train.empty()) throw EmptyDataset("baseline needs a nonempty training set");
  BaselineResult result;
  result.majority = majority_relation(class_distribution(train));
  const auto prepared = prepare_all(test);
  result.report = evaluate_predictions(prepared, [&](const PreparedExample&) { return result.majority; });
  result.report.model = "most-frequent";
  return result;
}

ExperimentResult run_experiment(int cutoff, const DatasetSplit& split, const ModelConfig& model_config,
                                const TrainConfig& train_config, const EpochCallback& on_epoch) {
  const auto train_set = training_subset(split, cutoff);
  const auto test_set = filter_bins(split.test, 1, kMaxBin);
  if (test_set.empty()) throw EmptyDataset("no test examples in bins 1.." + std::to_string(kMaxBin));

  ExperimentResult result{Model(model_config), {}, {}};
  result.history = train(result.model, train_set, train_config, {}, on_epoch);
  result.report = evaluate_by_bin(result.model, test_set, train_config.threads);
  result.report.cutoff = cutoff;
  result.report.lambda = train_config.lambda;
  result.report.history = result.history.epoch_loss;
  result.report.train_accuracy = accuracy(result.model, prepare_all(train_set), train_config.threads);

  const BaselineResult baseline = baseline_most_frequent(train_set, test_set);
  result.report.baseline_relation = baseline.majority;
  for (std::size_t b = 0; b < kNumBins; ++b) {
    result.report.baseline_accuracy[b] = baseline.report.bins[b].accuracy();
  }
  const auto histogram = class_distribution(train_set);
  result.report.baseline_train_accuracy =
      static_cast<double>(histogram[static_cast<std::size_t>(index_of(baseline.majority))]) /
      static_cast<double>(train_set.size());
  result.report.degenerate = !(result.report.train_accuracy > result.report.baseline_train_accuracy);

  nlohmann::ordered_json cfg;
  cfg["model"] = nlohmann::json::parse(model_config.to_json());
  cfg["train"] = nlohmann::json::parse(train_config.to_json());
  cfg["cutoff"] = cutoff;
  cfg["train_examples"] = train_set.size();
  cfg["test_examples"] = test_set.size();
  result.report.config_json = cfg.dump();
  return result;
}

std::vector<CurvePoint> learning_curve(const ModelConfig& model_config, const DatasetSplit& split, int cutoff,
                                       std::span<const std::size_t> sizes, const TrainConfig& train_config) {
  const auto pool = training_subset(split, cutoff);
  const auto test_set = filter_bins(split.test, 1, kMaxBin);
  if (!std::is_sorted(sizes.begin(), sizes.end())) throw std::invalid_argument("sizes must be ascending");

  std::vector<CurvePoint> points;
  for (std::size_t size : sizes) {
    if (size > pool.size()) throw SizeExceedsAvailable(size, pool.size());
    if (size == 0) throw std::invalid_argument("learning-curve sizes must be positive");
    std::vector<Example> subset;
    if (size == pool.size()) {
      subset = pool;
    } else {
      std::vector<std::size_t> idx(pool.size());
      std::iota(idx.begin(), idx.end(), 0);
      Rng rng(Rng::derive(train_config.seed, 0xC0DE0000ULL + size));
      rng.shuffle(idx);
      idx.resize(size);
      std::sort(idx.begin(), idx.end());
      for (std::size_t i : idx) subset.push_back(pool[i]);
    }
    Model model(model_config);
    train(model, subset, train_config);
    points.push_back({size, evaluate_by_bin(model, test_set, train_config.threads).overall()});
  }
  return points;
}

LambdaSweep sweep_lambda(const ModelConfig& model_config, std::span<const Example> examples,
                         const TrainConfig& train_config, std::span<const double> lambdas,
                         double holdout_fraction) {
  if (lambdas.empty()) throw std::invalid_argument("no lambda values to sweep");
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
    throw std::invalid_argument("holdout fraction must be in (0, 1)");
  }
  std::vector<std::size_t> idx(examples.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(Rng::derive(train_config.seed, 0x1A4B));
  rng.shuffle(idx);
  const auto n_hold = static_cast<std::size_t>(std::floor(holdout_fraction * static_cast<double>(idx.size())));
  if (n_hold == 0 || n_hold == idx.size()) throw EmptyDataset("too few examples for a lambda sweep");

  std::vector<Example> fit;
  std::vector<Example> hold;
  for (std::size_t i = 0; i < idx.size(); ++i) (i < n_hold ? hold : fit).push_back(examples[idx[i]]);
  const auto hold_prepared = prepare_all(hold);

  LambdaSweep sweep;
  double best = -1.0;
  for (double lambda : lambdas) {
    TrainConfig cfg = train_config;
    cfg.lambda = lambda;
    Model model(model_config);
    train(model, fit, cfg);
    const double acc = accuracy(model, hold_prepared, cfg.threads);
    sweep.accuracy_by_lambda.emplace_back(lambda, acc);
    if (acc > best) {
      best = acc;
      sweep.chosen = lambda;
    }
  }
  return sweep;
}

}  // namespace rnli
