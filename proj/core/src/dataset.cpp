#include "rnli/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_set>

#include "rnli/errors.hpp"

namespace rnli {
namespace {

// Consecutive duplicate draws after which a bin counts as exhausted.
constexpr std::size_t kMaxConsecutiveDuplicates = 20000;

std::vector<Example> generate_bin(const GenConfig& config, int bin) {
  Rng rng(Rng::derive(config.seed, static_cast<std::uint64_t>(bin)));
  std::vector<Example> out;
  out.reserve(config.per_bin_pairs);
  std::unordered_set<std::string> seen;
  std::size_t duplicates = 0;
  while (out.size() < config.per_bin_pairs) {
    const bool premise_is_full = rng.below(2) == 0;
    const int other = rng.uniform_int(0, bin);
    Formula premise = sample_formula(rng, premise_is_full ? bin : other, config.negation_probability);
    Formula hypothesis = sample_formula(rng, premise_is_full ? other : bin, config.negation_probability);
    if (config.dedupe) {
      std::string key = render(premise) + '\t' + render(hypothesis);
      if (!seen.insert(std::move(key)).second) {
        if (++duplicates >= kMaxConsecutiveDuplicates) {
          if (config.cap_exhausted_bins) break;
          throw GenerationExhausted(bin);
        }
        continue;
      }
      duplicates = 0;
    }
    out.push_back(Example::labeled(std::move(premise), std::move(hypothesis)));
  }
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

}  // namespace

Example Example::labeled(Formula premise, Formula hypothesis) {
  const Relation label = relation_of_pair(premise, hypothesis);
  const int bin = std::max(connective_count(premise), connective_count(hypothesis));
  return Example{std::move(premise), std::move(hypothesis), label, bin};
}

void GenConfig::validate() const {
  if (per_bin_pairs == 0) throw std::invalid_argument("per_bin_pairs must be positive");
  if (max_bin < 0 || max_bin > kMaxBin) {
    throw std::invalid_argument("max_bin must be in 0.." + std::to_string(kMaxBin));
  }
  if (!(negation_probability > 0.0 && negation_probability < 1.0)) {
    throw std::invalid_argument("negation_probability must be in (0, 1)");
  }
}

Formula sample_formula(Rng& rng, int connectives, double negation_probability) {
  if (connectives < 0) throw std::invalid_argument("connective count must be non-negative");
  if (connectives == 0) return Formula::var(rng.uniform_int(1, kNumVariables));
  if (rng.bernoulli(negation_probability)) {
    return Formula::negation(sample_formula(rng, connectives - 1, negation_probability));
  }
  const Connective op = rng.below(2) == 0 ? Connective::kAnd : Connective::kOr;
  const int left = rng.uniform_int(0, connectives - 1);
  Formula l = sample_formula(rng, left, negation_probability);
  Formula r = sample_formula(rng, connectives - 1 - left, negation_probability);
  return Formula::binary(op, std::move(l), std::move(r));
}

std::vector<Example> generate_pairs(const GenConfig& config, unsigned threads) {
  config.validate();
  const int bins = config.max_bin + 1;
  std::vector<std::vector<Example>> per_bin(static_cast<std::size_t>(bins));
  const unsigned workers = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(bins));

  if (workers == 1) {
    for (int b = 0; b < bins; ++b) per_bin[static_cast<std::size_t>(b)] = generate_bin(config, b);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int b = static_cast<int>(w); b < bins; b += static_cast<int>(workers)) {
            per_bin[static_cast<std::size_t>(b)] = generate_bin(config, b);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<Example> out;
  for (auto& bucket : per_bin) {
    std::move(bucket.begin(), bucket.end(), std::back_inserter(out));
  }
  return out;
}

DatasetSplit split_dataset(std::span<const Example> examples, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("split fraction must be in (0, 1)");
  }
  std::array<std::vector<Example>, kNumBins> by_bin;
  for (const Example& e : examples) {
    if (e.bin < 0 || e.bin > kMaxBin) throw std::invalid_argument("example bin out of range");
    by_bin[static_cast<std::size_t>(e.bin)].push_back(e);
  }

  DatasetSplit split;
  split.split_fraction = fraction;
  split.seed = seed;
  for (std::size_t b = 0; b < by_bin.size(); ++b) {
    auto& bucket = by_bin[b];
    Rng rng(Rng::derive(seed, b));
    rng.shuffle(bucket);
    const auto n_train = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(bucket.size())));
    for (std::size_t i = 0; i < bucket.size(); ++i) {
      (i < n_train ? split.train : split.test).push_back(std::move(bucket[i]));
    }
  }
  return split;
}

std::vector<Example> training_subset(const DatasetSplit& split, int cutoff) {
  if (cutoff < 0 || cutoff > kMaxBin) throw std::invalid_argument("cutoff out of range");
  return filter_bins(split.train, 0, cutoff);
}

std::vector<Example> filter_bins(std::span<const Example> examples, int min_bin, int max_bin) {
  std::vector<Example> out;
  for (const Example& e : examples) {
    if (e.bin >= min_bin && e.bin <= max_bin) out.push_back(e);
  }
  return out;
}

std::string format_example(const Example& e) {
  std::string line(label(e.label));
  line += '\t';
  line += render(e.premise);
  line += '\t';
  line += render(e.hypothesis);
  return line;
}

void write_dataset(std::span<const Example> examples, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const Example& e : examples) out << format_example(e) << '\n';
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<Example> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<Example> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_tabs(line);
    if (fields.size() != 3) throw DatasetParseError(number, line, "expected 3 tab-separated fields");
    const auto rel = relation_from_label(fields[0]);
    if (!rel) throw DatasetParseError(number, line, "unknown relation label");
    try {
      Formula premise = parse_sentence(fields[1]);
      Formula hypothesis = parse_sentence(fields[2]);
      const int bin = std::max(connective_count(premise), connective_count(hypothesis));
      if (bin > kMaxBin) {
        throw DatasetParseError(number, line, "more than " + std::to_string(kMaxBin) + " connectives");
      }
      out.push_back(Example{std::move(premise), std::move(hypothesis), *rel, bin});
    } catch (const DatasetParseError&) {
      throw;
    } catch (const Error& e) {
      throw DatasetParseError(number, line, e.what());
    }
  }
  if (in.bad()) throw IoError("read failed: " + path.string());
  return out;
}

ClassHistogram class_distribution(std::span<const Example> examples) {
  ClassHistogram h{};
  for (const Example& e : examples) ++h[static_cast<std::size_t>(index_of(e.label))];
  return h;
}

Relation majority_relation(const ClassHistogram& histogram) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < histogram.size(); ++i) {
    if (histogram[i] > histogram[best]) best = i;
  }
  return relation_at(static_cast<int>(best));
}

std::array<std::size_t, kNumBins> bin_counts(std::span<const Example> examples) {
  std::array<std::size_t, kNumBins> counts{};
  for (const Example& e : examples) ++counts[static_cast<std::size_t>(e.bin)];
  return counts;
}

std::vector<AuditFailure> audit(std::span<const Example> examples) {
  std::vector<AuditFailure> failures;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const Example& e = examples[i];
    const Relation oracle = relation_of_pair(e.premise, e.hypothesis);
    if (oracle != e.label) {
      failures.push_back({i + 1, "label " + std::string(label(e.label)) + " but oracle gives " +
                                     std::string(label(oracle))});
    }
    const int bin = std::max(connective_count(e.premise), connective_count(e.hypothesis));
    if (bin != e.bin) {
      failures.push_back({i + 1, "bin " + std::to_string(e.bin) + " but connective count gives " +
                                     std::to_string(bin)});
    } else if (bin > kMaxBin) {
      failures.push_back({i + 1, "bin " + std::to_string(bin) + " exceeds " + std::to_string(kMaxBin)});
    }
  }
  return failures;
}

}  // namespace rnli
