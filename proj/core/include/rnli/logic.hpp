#pragma once

// The artificial propositional language: six variables p1..p6 combined with
// `not`, `and`, `or` under a complete binary bracketing, plus the exact
// seven-way relation oracle computed by truth-table enumeration.

#include <array>
#include <bit>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rnli {

inline constexpr int kNumVariables = 6;
inline constexpr int kNumAssignments = 1 << kNumVariables;

// ---------------------------------------------------------------------------
// Tokens
// ---------------------------------------------------------------------------

enum class TokenKind : std::uint8_t { kVariable, kNot, kAnd, kOr, kLParen, kRParen };

struct Token {
  TokenKind kind = TokenKind::kVariable;
  int variable = 0;  // 1..6 when kind == kVariable, 0 otherwise

  static Token var(int index);
  static constexpr Token of(TokenKind k) { return Token{k, 0}; }

  friend bool operator==(const Token&, const Token&) = default;
};

// Dense index of a token in the sequence vocabulary:
// p1..p6 -> 0..5, not -> 6, and -> 7, or -> 8, ( -> 9, ) -> 10.
// The first nine entries are the tree vocabulary.
inline constexpr int kTreeVocabularySize = 9;
inline constexpr int kSequenceVocabularySize = 11;

int vocabulary_index(Token t);
Token token_at(int vocabulary_index);
std::string_view spelling(Token t);

// Splits on whitespace; throws UnknownToken for anything outside the vocabulary.
std::vector<Token> tokenize(std::string_view text);

// Space-separated rendering, the inverse of tokenize.
std::string join_tokens(std::span<const Token> tokens);

// ---------------------------------------------------------------------------
// Formulas
// ---------------------------------------------------------------------------

enum class Connective : std::uint8_t { kAnd, kOr };

// Immutable formula tree. Copies share structure, so values are cheap to pass
// around and safe to read from any thread.
class Formula {
 public:
  enum class Kind : std::uint8_t { kVar, kNot, kBin };

  static Formula var(int index);
  static Formula negation(Formula child);
  static Formula binary(Connective op, Formula left, Formula right);

  Kind kind() const;
  int variable() const;            // kVar only
  Connective connective() const;   // kBin only
  const Formula& child() const;    // kNot only
  const Formula& left() const;     // kBin only
  const Formula& right() const;    // kBin only

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

// Builds the unique formula whose canonical rendering equals `tokens`.
// Grammar: S := p_i | ( not S ) | ( S ( op S ) )
Formula parse(std::span<const Token> tokens);
Formula parse_sentence(std::string_view text);

// Canonical bracketing: p_i, "( not C )", "( L ( op R ) )".
std::vector<Token> render_tokens(const Formula& f);
std::string render(const Formula& f);

int connective_count(const Formula& f);

// ---------------------------------------------------------------------------
// Truth sets
// ---------------------------------------------------------------------------

// Satisfying assignments among the 64 valuations of p1..p6. Bit `a` is set
// when the formula holds under assignment `a`, where p_i takes bit (i-1) of a.
class TruthSet {
 public:
  constexpr TruthSet() = default;
  constexpr explicit TruthSet(std::uint64_t bits) : bits_(bits) {}

  static constexpr TruthSet empty() { return TruthSet(0); }
  static constexpr TruthSet universe() { return TruthSet(~std::uint64_t{0}); }
  static TruthSet of_variable(int index);

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool contains(int assignment) const { return (bits_ >> assignment) & 1U; }
  constexpr int size() const { return std::popcount(bits_); }

  constexpr TruthSet complement() const { return TruthSet(~bits_); }
  constexpr TruthSet operator&(TruthSet o) const { return TruthSet(bits_ & o.bits_); }
  constexpr TruthSet operator|(TruthSet o) const { return TruthSet(bits_ | o.bits_); }

  friend constexpr bool operator==(TruthSet, TruthSet) = default;

 private:
  std::uint64_t bits_ = 0;
};

TruthSet satisfying_set(const Formula& f);

// ---------------------------------------------------------------------------
// Relations
// ---------------------------------------------------------------------------

// Canonical order; the underlying value is the class index used by the
// classifier and by every report.
enum class Relation : std::uint8_t {
  kEquivalence = 0,     // ≡
  kForwardEntail = 1,   // ⊏
  kReverseEntail = 2,   // ⊐
  kNegation = 3,        // ^
  kAlternation = 4,     // |
  kCover = 5,           // ⌣
  kIndependence = 6,    // #
};

inline constexpr int kNumRelations = 7;
inline constexpr std::array<Relation, kNumRelations> kAllRelations = {
    Relation::kEquivalence, Relation::kForwardEntail, Relation::kReverseEntail,
    Relation::kNegation,    Relation::kAlternation,   Relation::kCover,
    Relation::kIndependence};

constexpr int index_of(Relation r) { return static_cast<int>(r); }
Relation relation_at(int index);

// ASCII labels used in files: = < > ^ | v #
std::string_view label(Relation r);
std::optional<Relation> relation_from_label(std::string_view text);
// Display symbol (UTF-8).
std::string_view symbol(Relation r);

// First match wins: ≡, ⊏, ⊐, ^, |, ⌣, #.
Relation relation(TruthSet a, TruthSet b);
Relation relation_of_pair(const Formula& premise, const Formula& hypothesis);
Relation converse(Relation r);

}  // namespace rnli
