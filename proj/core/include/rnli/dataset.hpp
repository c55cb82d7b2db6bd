#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rnli/logic.hpp"
#include "rnli/rng.hpp"

namespace rnli {

inline constexpr int kMaxBin = 12;
inline constexpr int kNumBins = kMaxBin + 1;

struct Example {
  Formula premise;
  Formula hypothesis;
  Relation label = Relation::kEquivalence;
  int bin = 0;

  // Labels and bins the pair with the oracle.
  static Example labeled(Formula premise, Formula hypothesis);

  friend bool operator==(const Example&, const Example&) = default;
};

struct GenConfig {
  std::uint64_t seed = 1;
  std::size_t per_bin_pairs = 1000;
  int max_bin = kMaxBin;
  double negation_probability = 1.0 / 3.0;
  bool dedupe = true;
  // With dedupe on, a bin whose distinct-pair space runs out (bin 0 holds only
  // 36 ordered pairs) keeps what it found instead of raising GenerationExhausted.
  bool cap_exhausted_bins = true;

  void validate() const;
};

struct DatasetSplit {
  std::vector<Example> train;
  std::vector<Example> test;
  double split_fraction = 0.8;
  std::uint64_t seed = 1;
};

// Random formula with exactly `connectives` connectives.
Formula sample_formula(Rng& rng, int connectives, double negation_probability = 1.0 / 3.0);

// Examples for bins 0..max_bin in bin order. Each bin draws from its own
// stream Rng::derive(seed, bin), so the result does not depend on `threads`.
std::vector<Example> generate_pairs(const GenConfig& config, unsigned threads = 1);

// Per-bin seeded shuffle, then floor(fraction * n) examples of each bin go to train.
DatasetSplit split_dataset(std::span<const Example> examples, double fraction, std::uint64_t seed);

std::vector<Example> training_subset(const DatasetSplit& split, int cutoff);
std::vector<Example> filter_bins(std::span<const Example> examples, int min_bin, int max_bin);

// TSV: "label<TAB>premise<TAB>hypothesis", one example per line, no header.
std::string format_example(const Example& e);
void write_dataset(std::span<const Example> examples, const std::filesystem::path& path);
// Bins are recomputed from the sentences; the stored label is kept as written
// so that audit() can compare it with the oracle.
std::vector<Example> read_dataset(const std::filesystem::path& path);

using ClassHistogram = std::array<std::size_t, kNumRelations>;
ClassHistogram class_distribution(std::span<const Example> examples);
// Most frequent relation, ties broken by canonical relation order.
Relation majority_relation(const ClassHistogram& histogram);

std::array<std::size_t, kNumBins> bin_counts(std::span<const Example> examples);

struct AuditFailure {
  std::size_t line;  // 1-based
  std::string reason;
};
// Recomputes every label with the oracle and every bin from connective counts.
std::vector<AuditFailure> audit(std::span<const Example> examples);

}  // namespace rnli
