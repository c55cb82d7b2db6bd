// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails. Reports from the training runs go to --out-dir.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "rnli/classifier.hpp"
#include "rnli/dataset.hpp"
#include "rnli/logic.hpp"
#include "rnli/report.hpp"
#include "rnli/training.hpp"

namespace fs = std::filesystem;
using namespace rnli;

namespace {

// Thresholds, as fractions of 1.
constexpr double kGradientTolerance = 1e-4;
constexpr double kGradientStep = 1e-5;
constexpr double kTrivialFitAccuracy = 0.95;
constexpr double kBaselineMargin = 0.15;
constexpr double kDataRichnessMargin = 0.02;
constexpr double kNbowMargin = 0.15;

constexpr int kAlgebraPairs = 1000;
constexpr int kAlgebraMaxBin = 8;
constexpr std::size_t kTrivialFitSize = 500;
constexpr int kTrivialFitEpochs = 30;
constexpr int kDeskEpochs = 100;
constexpr int kDeskCutoff = 4;

constexpr EncoderKind kTreeKinds[] = {EncoderKind::kTreeRnn, EncoderKind::kTreeRntn, EncoderKind::kTreeLstm};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, value);
  return buf;
}

std::string pct(double fraction) { return fmt("%.1f%%", 100.0 * fraction); }

class Suite {
 public:
  Suite(fs::path out_dir, unsigned threads) : out_dir_(std::move(out_dir)), threads_(threads) {}

  Outcome oracle_examples() const {
    struct Case {
      const char* premise;
      const char* hypothesis;
      Relation want;
    };
    const Case cases[] = {
        {"( not p3 )", "p3", Relation::kNegation},
        {"p3", "( p3 ( or p2 ) )", Relation::kForwardEntail},
        {"( ( not p2 ) ( and p6 ) )", "( not ( p6 ( or ( p5 ( or p3 ) ) ) ) )", Relation::kAlternation},
        {"( p4 ( or ( not ( ( p1 ( or p6 ) ) ( or p4 ) ) ) ) )",
         "( not ( ( ( ( not p6 ) ( or ( not p4 ) ) ) ( and ( not p5 ) ) ) ( and ( p6 ( and p6 ) ) ) ) )",
         Relation::kForwardEntail},
    };
    int exact = 0;
    std::string got;
    for (const Case& c : cases) {
      const Relation r = relation_of_pair(parse_sentence(c.premise), parse_sentence(c.hypothesis));
      exact += r == c.want;
      got += std::string(got.empty() ? "" : " ") + std::string(label(r));
    }
    return {exact == 4, std::to_string(exact) + "/4 exact, labels " + got};
  }

  Outcome oracle_algebra() const {
    Rng rng(20240601);
    int violations = 0;
    std::string first;
    auto check = [&](bool ok, const char* what, const Formula& x, const Formula& y) {
      if (ok) return;
      if (violations++ == 0) first = std::string(what) + " on " + render(x) + " / " + render(y);
    };
    for (int i = 0; i < kAlgebraPairs; ++i) {
      const int bin = rng.uniform_int(0, kAlgebraMaxBin);
      const int other = rng.uniform_int(0, bin);
      const bool premise_full = rng.uniform_int(0, 1) == 0;
      const Formula x = sample_formula(rng, premise_full ? bin : other);
      const Formula y = sample_formula(rng, premise_full ? other : bin);
      const Formula not_x = Formula::negation(x);
      const Formula not_y = Formula::negation(y);
      check(relation_of_pair(x, y) == converse(relation_of_pair(y, x)), "converse", x, y);
      check(relation_of_pair(x, x) == Relation::kEquivalence, "identity", x, y);
      check(relation_of_pair(x, Formula::negation(not_x)) == Relation::kEquivalence, "double negation", x, y);
      check(relation_of_pair(Formula::negation(Formula::binary(Connective::kAnd, x, y)),
                             Formula::binary(Connective::kOr, not_x, not_y)) == Relation::kEquivalence,
            "de morgan", x, y);
      const Relation weak = relation_of_pair(x, Formula::binary(Connective::kOr, x, y));
      check(weak == Relation::kForwardEntail || weak == Relation::kEquivalence, "disjunction weakening", x, y);
    }
    std::string detail = std::to_string(kAlgebraPairs) + " pairs, " + std::to_string(violations) + " violations";
    if (violations) detail += ", first: " + first;
    return {violations == 0, detail};
  }

  Outcome gradients() const {
    Rng rng(33);
    std::vector<Example> raw;
    while (raw.size() < 3) {
      const int bin = rng.uniform_int(0, 2);
      const int other = rng.uniform_int(0, bin);
      raw.push_back(Example::labeled(sample_formula(rng, bin), sample_formula(rng, other)));
    }
    const auto batch = prepare_all(raw);
    bool pass = true;
    std::string detail;
    for (EncoderKind kind : kAllEncoderKinds) {
      ModelConfig c = ModelConfig::defaults(kind);
      c.encoder.d_emb = 4;
      c.encoder.d_hidden = is_tree_encoder(kind) && kind != EncoderKind::kTreeLstm ? 4 : 5;
      c.encoder.init_scale = 0.5;
      c.d_c = 6;
      c.seed = 7;
      Model m(c);
      const LossFunction loss = [&](const ParamStore& store, Gradients* grads) {
        const Model view(m.config(), store);
        return view.batch_objective(batch, TrainConfig{}.lambda, grads);
      };
      const GradientCheckResult r = gradient_check(loss, m.params(), kGradientStep);
      pass = pass && r.max_relative_error < kGradientTolerance;
      detail += std::string(detail.empty() ? "" : ", ") + std::string(encoder_name(kind)) + " " +
                fmt("%.2e", r.max_relative_error);
      if (r.max_relative_error >= kGradientTolerance) {
        detail += " at " + r.worst_param + "[" + std::to_string(r.worst_index) + "] analytic " +
                  fmt("%.3e", r.analytic) + " numeric " + fmt("%.3e", r.numeric);
      }
    }
    return {pass, "max relative error " + detail};
  }

  Outcome trivial_fit() const {
    GenConfig g;
    g.seed = 5;
    g.max_bin = 1;
    g.per_bin_pairs = kTrivialFitSize - 36;
    const std::vector<Example> data = generate_pairs(g, threads_);
    bool pass = data.size() == kTrivialFitSize;
    std::string detail = std::to_string(data.size()) + " examples";
    const auto prepared = prepare_all(data);
    for (EncoderKind kind : kAllEncoderKinds) {
      Model m(ModelConfig::defaults(kind));
      TrainConfig t;
      t.epochs = kTrivialFitEpochs;
      t.threads = threads_;
      train(m, data, t);
      const double acc = accuracy(m, prepared, threads_);
      pass = pass && acc >= kTrivialFitAccuracy;
      detail += ", " + std::string(encoder_name(kind)) + " " + pct(acc);
    }
    return {pass, "train accuracy: " + detail};
  }

  Outcome desk_generalization() {
    const EvalReport& base = baseline();
    const double base14 = base.pooled_accuracy(1, kDeskCutoff);
    bool a = true;
    std::string da;
    for (EncoderKind kind : kDeskKinds) {
      const double acc = run(kind, kDeskCutoff).pooled_accuracy(1, kDeskCutoff);
      a = a && acc - base14 >= kBaselineMargin;
      da += " " + std::string(encoder_name(kind)) + " " + pct(acc);
    }
    const EvalReport& lstm = run(EncoderKind::kSeqLstm, kDeskCutoff);
    const double lstm57 = lstm.mean_bin_accuracy(5, 7);
    const double lstm_drop = lstm.bins[4].accuracy() - lstm.bins[5].accuracy();
    bool b = true;
    double worst_tree_drop = -1.0;
    std::string db;
    std::string dc;
    for (EncoderKind kind : kTreeKinds) {
      const EvalReport& r = run(kind, kDeskCutoff);
      b = b && r.mean_bin_accuracy(5, 7) > lstm57;
      const double drop = r.bins[4].accuracy() - r.bins[5].accuracy();
      worst_tree_drop = std::max(worst_tree_drop, drop);
      db += " " + std::string(encoder_name(kind)) + " " + pct(r.mean_bin_accuracy(5, 7));
      dc += " " + std::string(encoder_name(kind)) + " " + fmt("%+.1f", 100.0 * drop);
    }
    const bool c = lstm_drop > worst_tree_drop;
    write_reports();

    std::ostringstream os;
    os << "(a) " << (a ? "pass" : "FAIL") << ": bins 1-4 baseline " << pct(base14) << " needs >= "
       << pct(base14 + kBaselineMargin) << ";" << da << "; (b) " << (b ? "pass" : "FAIL")
       << ": bins 5-7 mean lstm " << pct(lstm57) << " vs" << db << "; (c) " << (c ? "pass" : "FAIL")
       << ": bin 4->5 drop lstm " << fmt("%+.1f", 100.0 * lstm_drop) << " vs" << dc;
    return {a && b && c, os.str()};
  }

  Outcome data_richness() {
    const double c3 = run(EncoderKind::kSeqLstm, 3).pooled_accuracy(5, kMaxBin);
    const double c6 = run(EncoderKind::kSeqLstm, 6).pooled_accuracy(5, kMaxBin);
    write_reports();
    return {c6 - c3 >= kDataRichnessMargin,
            "lstm bins 5-12: cutoff 3 " + pct(c3) + ", cutoff 6 " + pct(c6) + ", needs margin >= " +
                pct(kDataRichnessMargin)};
  }

  Outcome nbow_weakness() {
    const double nbow4 = run(EncoderKind::kNbow, kDeskCutoff).bins[4].accuracy();
    double best = 0.0;
    std::string best_name;
    for (EncoderKind kind : kTreeKinds) {
      const double acc = run(kind, kDeskCutoff).bins[4].accuracy();
      if (acc > best) {
        best = acc;
        best_name = encoder_name(kind);
      }
    }
    write_reports();
    return {nbow4 <= best - kNbowMargin,
            "bin 4: nbow " + pct(nbow4) + ", best tree " + best_name + " " + pct(best) + ", needs gap >= " +
                pct(kNbowMargin)};
  }

  Outcome determinism() {
    const EvalReport& first = run(EncoderKind::kTreeRnn, kDeskCutoff);
    const EvalReport second = train_and_evaluate(EncoderKind::kTreeRnn, kDeskCutoff);
    const std::string a = accuracy_csv(std::span<const EvalReport>(&first, 1));
    const std::string b = accuracy_csv(std::span<const EvalReport>(&second, 1));
    write_text(out_dir_ / "determinism" / "first.csv", a);
    write_text(out_dir_ / "determinism" / "second.csv", b);
    return {a == b, a == b ? "report CSVs identical (" + std::to_string(a.size()) + " bytes)"
                           : "report CSVs differ"};
  }

 private:
  static constexpr EncoderKind kDeskKinds[] = {EncoderKind::kTreeRnn, EncoderKind::kTreeRntn,
                                               EncoderKind::kTreeLstm, EncoderKind::kSeqLstm};

  const DatasetSplit& split() {
    if (!split_) {
      const std::vector<Example> all = generate_pairs(GenConfig{}, threads_);
      split_ = split_dataset(all, 0.8, GenConfig{}.seed);
      std::fprintf(stderr, "dataset: %zu train, %zu test\n", split_->train.size(), split_->test.size());
    }
    return *split_;
  }

  const EvalReport& baseline() {
    if (!baseline_) {
      const auto train_set = training_subset(split(), kDeskCutoff);
      baseline_ = baseline_most_frequent(train_set, split().test).report;
      baseline_->cutoff = kDeskCutoff;
    }
    return *baseline_;
  }

  EvalReport train_and_evaluate(EncoderKind kind, int cutoff) {
    TrainConfig t;
    t.epochs = kDeskEpochs;
    t.threads = threads_;
    const auto start = std::chrono::steady_clock::now();
    const std::string name(encoder_name(kind));
    const EpochCallback progress = [&](int epoch, double loss) {
      if (epoch == 1 || epoch % 10 == 0) {
        std::fprintf(stderr, "  %s cutoff %d epoch %d loss %.4f\n", name.c_str(), cutoff, epoch, loss);
      }
    };
    ExperimentResult r = run_experiment(cutoff, split(), ModelConfig::defaults(kind), t, progress);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::fprintf(stderr, "%s cutoff %d: overall %.4f (%.0f s)\n", name.c_str(), cutoff, r.report.overall(), secs);
    return std::move(r.report);
  }

  const EvalReport& run(EncoderKind kind, int cutoff) {
    const auto key = std::make_pair(static_cast<int>(kind), cutoff);
    auto it = runs_.find(key);
    if (it == runs_.end()) it = runs_.emplace(key, train_and_evaluate(kind, cutoff)).first;
    return it->second;
  }

  void write_reports() {
    std::vector<EvalReport> reports;
    if (baseline_) {
      EvalReport b = *baseline_;
      b.model = "baseline";
      reports.push_back(std::move(b));
    }
    for (const auto& [key, report] : runs_) reports.push_back(report);
    write_text(out_dir_ / "accuracy.csv", accuracy_csv(reports));
    write_text(out_dir_ / "plot.csv", plot_csv(reports));
    write_text(out_dir_ / "summary.md", markdown_summary(reports));
  }

  fs::path out_dir_;
  unsigned threads_;
  std::optional<DatasetSplit> split_;
  std::optional<EvalReport> baseline_;
  std::map<std::pair<int, int>, EvalReport> runs_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rnli acceptance suite"};
  fs::path out_dir = "acceptance_out";
  std::vector<int> only;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--out-dir", out_dir, "Directory for run reports");
  app.add_option("--only", only, "Criteria to run (default: all)")->delimiter(',')->check(CLI::Range(1, 8));
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  Suite suite(out_dir, threads);
  const std::vector<std::pair<int, std::pair<const char*, std::function<Outcome()>>>> criteria = {
      {1, {"oracle exactness on the four example pairs", [&] { return suite.oracle_examples(); }}},
      {2, {"oracle algebra on random pairs", [&] { return suite.oracle_algebra(); }}},
      {3, {"end-to-end gradient checks", [&] { return suite.gradients(); }}},
      {4, {"trivial fit on bins 0-1", [&] { return suite.trivial_fit(); }}},
      {5, {"generalization past the training cutoff", [&] { return suite.desk_generalization(); }}},
      {6, {"more training data helps the sequence LSTM", [&] { return suite.data_richness(); }}},
      {7, {"bag of words falls behind on bin 4", [&] { return suite.nbow_weakness(); }}},
      {8, {"rerun gives identical reports", [&] { return suite.determinism(); }}},
  };

  const std::set<int> selected(only.begin(), only.end());
  std::vector<std::string> lines;
  int failures = 0;
  for (const auto& [id, entry] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = entry.second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char line[64];
    std::snprintf(line, sizeof line, "[%s] criterion %d ", o.pass ? "PASS" : "FAIL", id);
    const std::string text = line + std::string(entry.first) + ": " + o.detail + fmt(" (%.1f s)", secs);
    std::printf("%s\n", text.c_str());
    std::fflush(stdout);
    lines.push_back(text);
    failures += !o.pass;
  }
  std::string summary;
  for (const auto& l : lines) summary += l + "\n";
  write_text(out_dir / "acceptance.txt", summary);
  std::printf("%d of %zu criteria passed\n", static_cast<int>(lines.size()) - failures, lines.size());
  return failures == 0 ? 0 : 1;
}
