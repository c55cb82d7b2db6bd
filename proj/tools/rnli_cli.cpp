// rnli: data generation, training, evaluation, cutoff experiments and
// learning curves for the propositional-logic entailment task.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rnli/dataset.hpp"
#include "rnli/errors.hpp"
#include "rnli/report.hpp"
#include "rnli/training.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct GenArgs {
  std::uint64_t seed = 1;
  std::size_t per_bin = 1000;
  int max_bin = rnli::kMaxBin;
  std::string out_dir = "data";
  double split = 0.8;
  unsigned threads = 1;
};

struct ModelArgs {
  std::string model = "treernn";
  std::uint64_t seed = 1;
  std::size_t d_emb = 0;
  std::size_t d_hidden = 0;
  std::size_t d_c = 0;
  double init_scale = 0.0;
};

struct TrainArgs {
  int epochs = 100;
  std::size_t batch_size = 32;
  double lambda = -1.0;
  double rho = 0.95;
  double epsilon = 1e-6;
  bool best_epoch = false;
  bool sweep_lambda = false;
  unsigned threads = 1;
};

struct RunArgs {
  std::string data_dir = "data";
  std::string out_dir = "runs";
  int cutoff = 4;
  std::string sizes;
  std::string checkpoint;
  std::string data_file;
};

void add_model_flags(CLI::App* cmd, ModelArgs& m) {
  cmd->add_option("--model", m.model, "Sentence encoder")
      ->check(CLI::IsMember({"treernn", "treerntn", "treelstm", "lstm", "nbow"}));
  cmd->add_option("--seed", m.seed, "Seed for initialization and minibatch order");
  cmd->add_option("--d-emb", m.d_emb, "Embedding width (0 = encoder default)");
  cmd->add_option("--d-hidden", m.d_hidden, "Sentence vector width (0 = encoder default)");
  cmd->add_option("--d-c", m.d_c, "Comparison layer width (0 = default)");
  cmd->add_option("--init-scale", m.init_scale, "Uniform init half-width (0 = default)");
}

void add_train_flags(CLI::App* cmd, TrainArgs& t) {
  cmd->add_option("--epochs", t.epochs, "Training epochs")->check(CLI::PositiveNumber);
  cmd->add_option("--batch-size", t.batch_size, "Minibatch size")->check(CLI::PositiveNumber);
  cmd->add_option("--lambda", t.lambda, "L2 strength (default: library default)");
  cmd->add_option("--rho", t.rho, "AdaDelta decay");
  cmd->add_option("--epsilon", t.epsilon, "AdaDelta epsilon");
  cmd->add_flag("--best-epoch", t.best_epoch, "Keep the epoch with the best held-out accuracy");
  cmd->add_flag("--sweep-lambda", t.sweep_lambda, "Pick lambda from {1e-3, 1e-4, 1e-5} on a held-out slice");
  cmd->add_option("--threads", t.threads, "Worker threads")->check(CLI::PositiveNumber);
}

rnli::ModelConfig model_config(const ModelArgs& m) {
  const auto kind = rnli::encoder_from_name(m.model);
  if (!kind) throw std::invalid_argument("unknown model " + m.model);
  rnli::ModelConfig c = rnli::ModelConfig::defaults(*kind);
  c.seed = m.seed;
  if (m.d_emb) c.encoder.d_emb = m.d_emb;
  if (m.d_hidden) c.encoder.d_hidden = m.d_hidden;
  if (m.d_c) c.d_c = m.d_c;
  if (m.init_scale > 0.0) c.encoder.init_scale = m.init_scale;
  c.validate();
  return c;
}

rnli::TrainConfig train_config(const TrainArgs& t, std::uint64_t seed) {
  rnli::TrainConfig c;
  c.epochs = t.epochs;
  c.batch_size = t.batch_size;
  if (t.lambda >= 0.0) c.lambda = t.lambda;
  c.seed = seed;
  c.optimizer = rnli::AdaDeltaConfig{t.rho, t.epsilon};
  c.best_epoch = t.best_epoch;
  c.threads = t.threads;
  c.validate();
  return c;
}

rnli::DatasetSplit load_split(const std::string& dir) {
  rnli::DatasetSplit split;
  split.train = rnli::read_dataset(fs::path(dir) / "train.tsv");
  split.test = rnli::read_dataset(fs::path(dir) / "test.tsv");
  return split;
}

// Held-out slice for --best-epoch: the last tenth of the training pool.
std::vector<rnli::Example> carve_validation(std::vector<rnli::Example>& pool) {
  const std::size_t n = pool.size() / 10;
  std::vector<rnli::Example> held(pool.end() - static_cast<long>(n), pool.end());
  pool.erase(pool.end() - static_cast<long>(n), pool.end());
  return held;
}

void echo(const ordered_json& config) { std::cout << config.dump(2) << '\n'; }

void log_epochs(int epoch, double loss) {
  if (epoch == 1 || epoch % 10 == 0) std::cerr << "epoch " << epoch << " loss " << loss << '\n';
}

double choose_lambda(const rnli::ModelConfig& mc, std::span<const rnli::Example> pool, rnli::TrainConfig tc) {
  const std::vector<double> lambdas{1e-3, 1e-4, 1e-5};
  const rnli::LambdaSweep s = rnli::sweep_lambda(mc, pool, tc, lambdas);
  for (const auto& [lambda, acc] : s.accuracy_by_lambda) {
    std::cerr << "lambda " << lambda << " held-out accuracy " << acc << '\n';
  }
  return s.chosen;
}

std::vector<std::size_t> parse_sizes(const std::string& text, std::size_t available) {
  std::vector<std::size_t> sizes;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item == "full" || item == "all") {
      sizes.push_back(available);
    } else {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument("bad size '" + item + "'");
      sizes.push_back(static_cast<std::size_t>(v));
    }
  }
  if (sizes.empty()) throw std::invalid_argument("--sizes needs at least one value");
  std::sort(sizes.begin(), sizes.end());
  return sizes;
}

// ---------------------------------------------------------------------------

int run_gen(const GenArgs& a) {
  rnli::GenConfig config;
  config.seed = a.seed;
  config.per_bin_pairs = a.per_bin;
  config.max_bin = a.max_bin;
  config.validate();

  ordered_json echo_cfg;
  echo_cfg["command"] = "gen";
  echo_cfg["seed"] = config.seed;
  echo_cfg["per_bin"] = config.per_bin_pairs;
  echo_cfg["max_bin"] = config.max_bin;
  echo_cfg["negation_probability"] = config.negation_probability;
  echo_cfg["dedupe"] = config.dedupe;
  echo_cfg["cap_exhausted_bins"] = config.cap_exhausted_bins;
  echo_cfg["split"] = a.split;
  ordered_json shown = echo_cfg;
  shown["out_dir"] = a.out_dir;
  echo(shown);

  const auto examples = rnli::generate_pairs(config, a.threads);
  const rnli::DatasetSplit split = rnli::split_dataset(examples, a.split, a.seed);
  fs::create_directories(a.out_dir);
  rnli::write_dataset(split.train, fs::path(a.out_dir) / "train.tsv");
  rnli::write_dataset(split.test, fs::path(a.out_dir) / "test.tsv");
  rnli::write_text(fs::path(a.out_dir) / "stats.md",
                   rnli::dataset_stats_markdown(split.train, split.test, echo_cfg.dump()));
  std::cerr << "wrote " << split.train.size() << " train and " << split.test.size() << " test examples to "
            << a.out_dir << '\n';
  return 0;
}

int run_audit(const RunArgs& r) {
  int bad = 0;
  for (const char* name : {"train.tsv", "test.tsv"}) {
    const fs::path path = fs::path(r.data_dir) / name;
    const auto failures = rnli::audit(rnli::read_dataset(path));
    for (const auto& f : failures) std::cerr << path.string() << ':' << f.line << ": " << f.reason << '\n';
    bad += static_cast<int>(failures.size());
  }
  std::cout << (bad ? "FAIL" : "PASS") << ' ' << bad << " mismatches\n";
  return bad ? 1 : 0;
}

int run_train(const ModelArgs& m, const TrainArgs& t, const RunArgs& r) {
  const rnli::ModelConfig mc = model_config(m);
  rnli::TrainConfig tc = train_config(t, m.seed);
  const rnli::DatasetSplit split = load_split(r.data_dir);
  auto pool = rnli::training_subset(split, r.cutoff);
  std::vector<rnli::Example> held;
  if (tc.best_epoch) held = carve_validation(pool);
  if (t.sweep_lambda) tc.lambda = choose_lambda(mc, pool, tc);

  ordered_json cfg;
  cfg["command"] = "train";
  cfg["model"] = ordered_json::parse(mc.to_json());
  cfg["train"] = ordered_json::parse(tc.to_json());
  cfg["cutoff"] = r.cutoff;
  cfg["train_examples"] = pool.size();
  cfg["data_dir"] = r.data_dir;
  echo(cfg);

  rnli::Model model(mc);
  const auto history = rnli::train(model, pool, tc, held, log_epochs);
  const fs::path out = r.out_dir;
  fs::create_directories(out);
  model.save(out / "model.ckpt");
  std::ostringstream csv;
  csv << "epoch,loss\n";
  for (std::size_t i = 0; i < history.epoch_loss.size(); ++i) csv << i + 1 << ',' << history.epoch_loss[i] << '\n';
  rnli::write_text(out / "history.csv", csv.str());
  rnli::write_text(out / "config.json", cfg.dump(2) + "\n");
  std::cerr << "saved " << (out / "model.ckpt").string() << '\n';
  return 0;
}

int run_eval(const RunArgs& r, unsigned threads) {
  const rnli::Model model = rnli::Model::load(r.checkpoint);
  const fs::path data = r.data_file.empty() ? fs::path(r.data_dir) / "test.tsv" : fs::path(r.data_file);
  const auto examples = rnli::read_dataset(data);

  ordered_json cfg;
  cfg["command"] = "eval";
  cfg["checkpoint"] = r.checkpoint;
  cfg["data"] = data.string();
  cfg["model"] = ordered_json::parse(model.config().to_json());
  cfg["threads"] = threads;
  echo(cfg);

  const auto prepared = rnli::prepare_all(examples);
  const auto predictions = rnli::predict_all(model, prepared, threads);
  std::ostringstream tsv;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    tsv << rnli::label(examples[i].label) << '\t' << rnli::label(predictions[i]) << '\n';
  }
  std::size_t next = 0;
  rnli::EvalReport report =
      rnli::evaluate_predictions(prepared, [&](const rnli::PreparedExample&) { return predictions[next++]; });
  report.model = std::string(rnli::encoder_name(model.config().encoder.kind));
  report.config_json = cfg.dump();

  const fs::path out = r.out_dir;
  const std::vector<rnli::EvalReport> reports{report};
  rnli::write_text(out / "predictions.tsv", tsv.str());
  rnli::write_text(out / "accuracy.csv", rnli::accuracy_csv(reports));
  rnli::write_text(out / "summary.md", rnli::markdown_summary(reports));
  std::cerr << "overall accuracy (bins 1-" << rnli::kMaxBin << ") " << report.overall() << '\n';
  return 0;
}

int run_experiment_cmd(const ModelArgs& m, const TrainArgs& t, const RunArgs& r) {
  const rnli::ModelConfig mc = model_config(m);
  rnli::TrainConfig tc = train_config(t, m.seed);
  if (tc.best_epoch) throw std::invalid_argument("experiment reports final-epoch parameters; use train for --best-epoch");
  const rnli::DatasetSplit split = load_split(r.data_dir);
  if (t.sweep_lambda) tc.lambda = choose_lambda(mc, rnli::training_subset(split, r.cutoff), tc);

  ordered_json cfg;
  cfg["command"] = "experiment";
  cfg["model"] = ordered_json::parse(mc.to_json());
  cfg["train"] = ordered_json::parse(tc.to_json());
  cfg["cutoff"] = r.cutoff;
  cfg["sweep_lambda"] = t.sweep_lambda;
  cfg["data_dir"] = r.data_dir;
  echo(cfg);

  const rnli::ExperimentResult result = rnli::run_experiment(r.cutoff, split, mc, tc, log_epochs);
  rnli::EvalReport report = result.report;

  const fs::path out = fs::path(r.out_dir) / (m.model + "_cutoff" + std::to_string(r.cutoff));
  const std::vector<rnli::EvalReport> reports{report};
  rnli::write_text(out / "accuracy.csv", rnli::accuracy_csv(reports));
  rnli::write_text(out / "plot.csv", rnli::plot_csv(reports));
  rnli::write_text(out / "summary.md", rnli::markdown_summary(reports));
  rnli::write_text(out / "config.json", cfg.dump(2) + "\n");
  result.model.save(out / "model.ckpt");
  if (report.degenerate) std::cerr << "warning: train accuracy does not beat the most-frequent baseline\n";
  std::cerr << "bins 1-" << r.cutoff << ": " << report.pooled_accuracy(1, r.cutoff) << ", bins " << r.cutoff + 1
            << "-" << rnli::kMaxBin << ": " << report.pooled_accuracy(r.cutoff + 1, rnli::kMaxBin) << '\n';
  std::cerr << "wrote " << out.string() << '\n';
  return 0;
}

int run_curve(const ModelArgs& m, const TrainArgs& t, const RunArgs& r) {
  const rnli::ModelConfig mc = model_config(m);
  const rnli::TrainConfig tc = train_config(t, m.seed);
  const rnli::DatasetSplit split = load_split(r.data_dir);
  const std::size_t available = rnli::training_subset(split, r.cutoff).size();
  const auto sizes = parse_sizes(r.sizes.empty() ? "full" : r.sizes, available);

  ordered_json cfg;
  cfg["command"] = "curve";
  cfg["model"] = ordered_json::parse(mc.to_json());
  cfg["train"] = ordered_json::parse(tc.to_json());
  cfg["cutoff"] = r.cutoff;
  cfg["sizes"] = sizes;
  cfg["data_dir"] = r.data_dir;
  echo(cfg);

  const auto points = rnli::learning_curve(mc, split, r.cutoff, sizes, tc);
  const fs::path out = fs::path(r.out_dir) / (m.model + "_curve_cutoff" + std::to_string(r.cutoff));
  rnli::write_text(out / "curve.csv", rnli::curve_csv(points));
  rnli::write_text(out / "config.json", cfg.dump(2) + "\n");
  for (const auto& p : points) std::cerr << "size " << p.size << " accuracy " << p.accuracy << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recursive neural networks for logical entailment"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a dataset and its train/test split");
  gen_cmd->add_option("--seed", gen.seed, "Generator and split seed");
  gen_cmd->add_option("--per-bin", gen.per_bin, "Pairs per bin")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--max-bin", gen.max_bin, "Largest bin")->check(CLI::Range(0, rnli::kMaxBin));
  gen_cmd->add_option("--out-dir", gen.out_dir, "Output directory");
  gen_cmd->add_option("--split", gen.split, "Training fraction per bin")->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--threads", gen.threads, "Worker threads")->check(CLI::PositiveNumber);

  ModelArgs model;
  TrainArgs training;
  RunArgs run;

  auto* train_cmd = app.add_subcommand("train", "Train one model and save a checkpoint");
  add_model_flags(train_cmd, model);
  add_train_flags(train_cmd, training);
  train_cmd->add_option("--data-dir", run.data_dir, "Directory with train.tsv and test.tsv");
  train_cmd->add_option("--cutoff", run.cutoff, "Largest training bin")->check(CLI::Range(0, rnli::kMaxBin));
  train_cmd->add_option("--out-dir", run.out_dir, "Where to write model.ckpt");

  unsigned eval_threads = 1;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint and write predictions");
  eval_cmd->add_option("--checkpoint", run.checkpoint, "Checkpoint written by train or experiment")->required();
  eval_cmd->add_option("--data-dir", run.data_dir, "Directory whose test.tsv is evaluated");
  eval_cmd->add_option("--data", run.data_file, "Dataset TSV to evaluate instead of <data-dir>/test.tsv");
  eval_cmd->add_option("--out-dir", run.out_dir, "Where to write predictions.tsv and reports");
  eval_cmd->add_option("--threads", eval_threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* exp_cmd = app.add_subcommand("experiment", "Train on bins <= cutoff and report accuracy per bin");
  add_model_flags(exp_cmd, model);
  add_train_flags(exp_cmd, training);
  exp_cmd->add_option("--data-dir", run.data_dir, "Directory with train.tsv and test.tsv");
  exp_cmd->add_option("--cutoff", run.cutoff, "Largest training bin")->check(CLI::IsMember({3, 4, 6}));
  exp_cmd->add_option("--out-dir", run.out_dir, "Report directory");

  auto* curve_cmd = app.add_subcommand("curve", "Learning curve over training-set sizes");
  add_model_flags(curve_cmd, model);
  add_train_flags(curve_cmd, training);
  curve_cmd->add_option("--data-dir", run.data_dir, "Directory with train.tsv and test.tsv");
  curve_cmd->add_option("--cutoff", run.cutoff, "Largest training bin")->check(CLI::Range(0, rnli::kMaxBin));
  curve_cmd->add_option("--sizes", run.sizes, "Comma list of sizes; 'full' means every available example");
  curve_cmd->add_option("--out-dir", run.out_dir, "Report directory");

  auto* audit_cmd = app.add_subcommand("audit", "Recheck every label and bin in a dataset");
  audit_cmd->add_option("--data-dir", run.data_dir, "Directory with train.tsv and test.tsv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*audit_cmd) return run_audit(run);
    if (*train_cmd) return run_train(model, training, run);
    if (*eval_cmd) return run_eval(run, eval_threads);
    if (*exp_cmd) return run_experiment_cmd(model, training, run);
    if (*curve_cmd) return run_curve(model, training, run);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
