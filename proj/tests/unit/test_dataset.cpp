#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "rnli/dataset.hpp"
#include "rnli/errors.hpp"

using namespace rnli;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "rnli_test_dataset";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Example> bin_examples(int bin, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(Example::labeled(sample_formula(rng, bin), sample_formula(rng, rng.uniform_int(0, bin))));
  }
  return out;
}

}  // namespace

TEST_CASE("sample_formula has the requested size") {
  Rng rng(3);
  for (int k = 0; k <= 12; ++k) {
    for (int t = 0; t < 50; ++t) CHECK(connective_count(sample_formula(rng, k)) == k);
  }
  for (int t = 0; t < 50; ++t) {
    const Formula f = sample_formula(rng, 0);
    REQUIRE(f.kind() == Formula::Kind::kVar);
    CHECK(f.variable() >= 1);
    CHECK(f.variable() <= 6);
  }
  for (int t = 0; t < 50; ++t) {
    const Formula f = sample_formula(rng, 1);
    if (f.kind() == Formula::Kind::kNot) {
      CHECK(f.child().kind() == Formula::Kind::kVar);
    } else {
      REQUIRE(f.kind() == Formula::Kind::kBin);
      CHECK(f.left().kind() == Formula::Kind::kVar);
      CHECK(f.right().kind() == Formula::Kind::kVar);
    }
  }
  CHECK_THROWS_AS(sample_formula(rng, -1), std::invalid_argument);
}

TEST_CASE("sample_formula matches the golden file for seed 42, k=3") {
  std::ifstream in(fs::path(RNLI_GOLDEN_DIR) / "sample_formula_seed42_k3.txt");
  REQUIRE(in);
  std::string expected;
  std::getline(in, expected);
  Rng rng(42);
  CHECK(render(sample_formula(rng, 3)) == expected);
  Rng again(42);
  CHECK(render(sample_formula(again, 3)) == expected);
}

TEST_CASE("generate_pairs counts and labels") {
  GenConfig config;
  config.per_bin_pairs = 10;
  config.max_bin = 2;
  const auto examples = generate_pairs(config);
  CHECK(examples.size() == 30);
  const auto counts = bin_counts(examples);
  CHECK(counts[0] == 10);
  CHECK(counts[1] == 10);
  CHECK(counts[2] == 10);
  std::set<std::string> seen;
  for (const Example& e : examples) {
    CHECK(e.label == oracle::enumerate_relation(e.premise, e.hypothesis));
    CHECK(e.bin == std::max(connective_count(e.premise), connective_count(e.hypothesis)));
    CHECK(seen.insert(format_example(e)).second);
  }
}

TEST_CASE("bin 0 holds at most 36 distinct pairs") {
  GenConfig config;
  config.per_bin_pairs = 100;
  config.max_bin = 0;
  const auto capped = generate_pairs(config);
  CHECK(capped.size() == 36);
  config.cap_exhausted_bins = false;
  try {
    generate_pairs(config);
    FAIL("expected GenerationExhausted");
  } catch (const GenerationExhausted& e) {
    CHECK(e.bin() == 0);
  }
}

TEST_CASE("generate_pairs is deterministic and thread-count independent") {
  GenConfig config;
  config.per_bin_pairs = 40;
  config.seed = 9;
  const auto a = generate_pairs(config, 1);
  const auto b = generate_pairs(config, 4);
  CHECK(a == b);
  config.seed = 10;
  CHECK_FALSE(generate_pairs(config) == a);
}

TEST_CASE("GenConfig validation") {
  GenConfig config;
  config.per_bin_pairs = 0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = GenConfig{};
  config.max_bin = 13;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("split_dataset uses a per-bin floor") {
  const auto ex = bin_examples(3, 100, 1);
  const DatasetSplit s = split_dataset(ex, 0.8, 5);
  CHECK(s.train.size() == 80);
  CHECK(s.test.size() == 20);
  const DatasetSplit again = split_dataset(ex, 0.8, 5);
  CHECK(s.train == again.train);
  CHECK(s.test == again.test);

  const auto three = bin_examples(2, 3, 2);
  const DatasetSplit small = split_dataset(three, 0.5, 1);
  CHECK(small.train.size() == 1);
  CHECK(small.test.size() == 2);

  std::vector<Example> mixed = bin_examples(1, 10, 3);
  const auto more = bin_examples(4, 7, 4);
  mixed.insert(mixed.end(), more.begin(), more.end());
  const DatasetSplit m = split_dataset(mixed, 0.8, 1);
  CHECK(bin_counts(m.train)[1] == 8);
  CHECK(bin_counts(m.train)[4] == 5);
  CHECK(m.train.size() + m.test.size() == mixed.size());
}

TEST_CASE("training_subset respects the cutoff") {
  GenConfig config;
  config.per_bin_pairs = 10;
  const DatasetSplit s = split_dataset(generate_pairs(config), 0.8, 1);
  for (const Example& e : training_subset(s, 3)) CHECK(e.bin <= 3);
  for (const Example& e : training_subset(s, 0)) CHECK(e.bin == 0);
  CHECK(training_subset(s, kMaxBin).size() == s.train.size());
  CHECK_THROWS_AS(training_subset(s, 13), std::invalid_argument);
  CHECK(filter_bins(s.test, 5, 7).size() == bin_counts(s.test)[5] + bin_counts(s.test)[6] + bin_counts(s.test)[7]);
}

TEST_CASE("dataset TSV format") {
  const Example row1 = Example::labeled(parse_sentence("( not p3 )"), parse_sentence("p3"));
  CHECK(format_example(row1) == "^\t( not p3 )\tp3");

  const fs::path one = temp_file("one.tsv");
  write_dataset(std::vector<Example>{row1}, one);
  CHECK(slurp(one) == "^\t( not p3 )\tp3\n");

  const fs::path empty = temp_file("empty.tsv");
  write_dataset({}, empty);
  CHECK(slurp(empty).empty());
  CHECK(read_dataset(empty).empty());
}

TEST_CASE("dataset round trip") {
  GenConfig config;
  config.per_bin_pairs = 15;
  const auto ex = generate_pairs(config);
  const fs::path p = temp_file("round.tsv");
  write_dataset(ex, p);
  CHECK(read_dataset(p) == ex);
  CHECK(audit(ex).empty());
}

TEST_CASE("read_dataset rejects malformed lines") {
  auto expect_line = [](const std::string& text, std::size_t line) {
    const fs::path p = temp_file("bad.tsv");
    std::ofstream(p) << text;
    try {
      read_dataset(p);
      FAIL("expected DatasetParseError");
    } catch (const DatasetParseError& e) {
      CHECK(e.line() == line);
    }
  };
  expect_line("=\tp1\tp1\n?\tp1\tp2\n", 2);
  expect_line("=\tp1\n", 1);
  expect_line("=\tp1\tp9\n", 1);
  expect_line("=\t( p1\tp1\n", 1);
  CHECK_THROWS_AS(read_dataset(temp_file("missing/none.tsv")), IoError);
}

TEST_CASE("audit names corrupted lines") {
  auto ex = bin_examples(2, 5, 11);
  ex[3].label = ex[3].label == Relation::kIndependence ? Relation::kEquivalence : Relation::kIndependence;
  const auto failures = audit(ex);
  REQUIRE(failures.size() == 1);
  CHECK(failures[0].line == 4);
  CHECK(audit({}).empty());
}

TEST_CASE("class_distribution and majority_relation") {
  std::vector<Example> same;
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const Formula f = sample_formula(rng, i % 5);
    same.push_back(Example::labeled(f, f));
  }
  const auto h = class_distribution(same);
  CHECK(h[index_of(Relation::kEquivalence)] == 20);
  CHECK(majority_relation(h) == Relation::kEquivalence);

  const ClassHistogram zero = class_distribution({});
  for (std::size_t c : zero) CHECK(c == 0);

  ClassHistogram tie{};
  tie[index_of(Relation::kCover)] = 4;
  tie[index_of(Relation::kForwardEntail)] = 4;
  CHECK(majority_relation(tie) == Relation::kForwardEntail);
}
