#include "rnli/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rnli/errors.hpp"

namespace rnli {
namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string percent(double v) { return fixed(100.0 * v, 1); }

}  // namespace

std::string report_label(const EvalReport& report) {
  std::string name = report.model.empty() ? "model" : report.model;
  if (report.cutoff >= 0) name += "@" + std::to_string(report.cutoff);
  return name;
}

std::string accuracy_csv(std::span<const EvalReport> reports) {
  std::ostringstream out;
  out << "bin,examples";
  for (const auto& r : reports) out << ',' << report_label(r);
  out << '\n';
  for (int b = 1; b <= kMaxBin; ++b) {
    const auto i = static_cast<std::size_t>(b);
    out << b << ',' << (reports.empty() ? 0 : reports.front().bins[i].count);
    for (const auto& r : reports) out << ',' << fixed(r.bins[i].accuracy());
    out << '\n';
  }
  std::size_t n = 0;
  if (!reports.empty()) {
    for (int b = 1; b <= kMaxBin; ++b) n += reports.front().bins[static_cast<std::size_t>(b)].count;
  }
  out << "overall," << n;
  for (const auto& r : reports) out << ',' << fixed(r.overall());
  out << '\n';
  return out.str();
}

std::string plot_csv(std::span<const EvalReport> reports) {
  std::ostringstream out;
  out << "model,cutoff,bin,accuracy,seen\n";
  for (const auto& r : reports) {
    for (int b = 1; b <= kMaxBin; ++b) {
      const auto& stats = r.bins[static_cast<std::size_t>(b)];
      if (stats.count == 0) continue;
      out << r.model << ',' << r.cutoff << ',' << b << ',' << fixed(stats.accuracy()) << ','
          << (r.seen_size(b) ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

std::string markdown_summary(std::span<const EvalReport> reports) {
  std::ostringstream out;
  out << "# Accuracy by bin\n\n";
  out << "Bins count the connectives in the longer sentence of each pair. Bins at or below a "
         "model's training cutoff are seen sizes; the rest measure generalization.\n\n";
  out << "| bin | n |";
  for (const auto& r : reports) out << ' ' << report_label(r) << " |";
  out << "\n|---:|---:|";
  for (std::size_t i = 0; i < reports.size(); ++i) out << "---:|";
  out << '\n';
  for (int b = 1; b <= kMaxBin; ++b) {
    const auto i = static_cast<std::size_t>(b);
    out << "| " << b << " | " << (reports.empty() ? 0 : reports.front().bins[i].count) << " |";
    for (const auto& r : reports) {
      out << ' ' << percent(r.bins[i].accuracy()) << (r.seen_size(b) ? "" : "*") << " |";
    }
    out << '\n';
  }
  out << "| all | |";
  for (const auto& r : reports) out << ' ' << percent(r.overall()) << " |";
  out << "\n\n`*` marks bins above the training cutoff.\n\n";

  out << "## Runs\n\n";
  for (const auto& r : reports) {
    out << "### " << report_label(r) << "\n\n";
    const auto& bin0 = r.bins[0];
    if (bin0.count) out << "- bin 0 (reported separately): " << percent(bin0.accuracy()) << "% of " << bin0.count << "\n";
    if (r.cutoff >= 0) {
      out << "- seen-size bins 1-" << r.cutoff << ": " << percent(r.pooled_accuracy(1, r.cutoff)) << "%\n";
      out << "- generalization bins " << r.cutoff + 1 << "-" << kMaxBin << ": "
          << percent(r.pooled_accuracy(r.cutoff + 1, kMaxBin)) << "%\n";
    }
    if (r.train_accuracy == r.train_accuracy) out << "- train accuracy: " << percent(r.train_accuracy) << "%\n";
    if (r.baseline_train_accuracy == r.baseline_train_accuracy) {
      out << "- most-frequent baseline (" << label(r.baseline_relation)
          << "): train " << percent(r.baseline_train_accuracy) << "%\n";
    }
    if (r.degenerate) out << "- **degenerate run**: train accuracy does not beat the baseline\n";
    if (r.lambda == r.lambda) out << "- lambda: " << r.lambda << "\n";
    if (!r.history.empty()) {
      out << "- loss: first epoch " << fixed(r.history.front(), 4) << ", last epoch "
          << fixed(r.history.back(), 4) << " (" << r.history.size() << " epochs)\n";
    }
    if (!r.config_json.empty()) out << "- config: `" << r.config_json << "`\n";
    out << '\n';
  }
  return out.str();
}

std::string curve_csv(std::span<const CurvePoint> points) {
  std::ostringstream out;
  out << "size,accuracy\n";
  for (const auto& p : points) out << p.size << ',' << fixed(p.accuracy) << '\n';
  return out.str();
}

std::string dataset_stats_markdown(std::span<const Example> train, std::span<const Example> test,
                                   const std::string& config_json) {
  std::ostringstream out;
  const auto tr = bin_counts(train);
  const auto te = bin_counts(test);
  out << "# Dataset statistics\n\n";
  out << "config: `" << config_json << "`\n\n";
  out << "| bin | train | test |\n|---:|---:|---:|\n";
  for (std::size_t b = 0; b < kNumBins; ++b) {
    if (tr[b] + te[b] == 0) continue;
    out << "| " << b << " | " << tr[b] << " | " << te[b] << " |\n";
  }
  out << "| all | " << train.size() << " | " << test.size() << " |\n\n";

  std::vector<Example> all(train.begin(), train.end());
  all.insert(all.end(), test.begin(), test.end());
  const auto hist = class_distribution(all);
  out << "## Relation distribution\n\n| relation | label | count | fraction |\n|---|---|---:|---:|\n";
  for (Relation r : kAllRelations) {
    const auto c = hist[static_cast<std::size_t>(index_of(r))];
    // A bare pipe would split the table cell.
    const std::string sym = r == Relation::kAlternation ? "\\|" : std::string(symbol(r));
    const std::string lab = r == Relation::kAlternation ? "\\|" : "`" + std::string(label(r)) + "`";
    out << "| " << sym << " | " << lab << " | " << c << " | "
        << fixed(all.empty() ? 0.0 : static_cast<double>(c) / static_cast<double>(all.size()), 4) << " |\n";
  }
  const Relation major = majority_relation(hist);
  const double frac = all.empty() ? 0.0
                                  : static_cast<double>(hist[static_cast<std::size_t>(index_of(major))]) /
                                        static_cast<double>(all.size());
  out << "\nmajority class: `" << label(major) << "` (" << symbol(major) << ") fraction " << fixed(frac, 4) << "\n";
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace rnli
