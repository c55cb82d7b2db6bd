#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "rnli/dataset.hpp"
#include "rnli/training.hpp"

namespace rnli {

// Column label for a report: "<model>" or "<model>@<cutoff>".
std::string report_label(const EvalReport& report);

// Rows are bins 1..12 plus an "overall" row; one accuracy column per report.
// Accuracies use six fixed decimals so equal reports give identical bytes.
std::string accuracy_csv(std::span<const EvalReport> reports);
// One row per (report, bin): model,cutoff,bin,accuracy,seen. `seen` is 1 for
// bins at or below the training cutoff, the dotted line of a per-bin plot.
std::string plot_csv(std::span<const EvalReport> reports);
std::string markdown_summary(std::span<const EvalReport> reports);
std::string curve_csv(std::span<const CurvePoint> points);

// Bin counts and the relation histogram of a generated dataset.
std::string dataset_stats_markdown(std::span<const Example> train, std::span<const Example> test,
                                   const std::string& config_json);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace rnli
