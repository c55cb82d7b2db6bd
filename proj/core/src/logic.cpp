#include "rnli/logic.hpp"

#include <cctype>
#include <stdexcept>

#include "rnli/errors.hpp"

namespace rnli {

// ---------------------------------------------------------------------------
// Tokens

Token Token::var(int index) {
  if (index < 1 || index > kNumVariables) {
    throw std::invalid_argument("variable index out of range: " + std::to_string(index));
  }
  return Token{TokenKind::kVariable, index};
}

int vocabulary_index(Token t) {
  switch (t.kind) {
    case TokenKind::kVariable: return t.variable - 1;
    case TokenKind::kNot: return 6;
    case TokenKind::kAnd: return 7;
    case TokenKind::kOr: return 8;
    case TokenKind::kLParen: return 9;
    case TokenKind::kRParen: return 10;
  }
  return -1;
}

Token token_at(int index) {
  if (index >= 0 && index < kNumVariables) return Token::var(index + 1);
  switch (index) {
    case 6: return Token::of(TokenKind::kNot);
    case 7: return Token::of(TokenKind::kAnd);
    case 8: return Token::of(TokenKind::kOr);
    case 9: return Token::of(TokenKind::kLParen);
    case 10: return Token::of(TokenKind::kRParen);
    default: throw std::out_of_range("vocabulary index " + std::to_string(index));
  }
}

std::string_view spelling(Token t) {
  static constexpr std::string_view kVars[] = {"p1", "p2", "p3", "p4", "p5", "p6"};
  switch (t.kind) {
    case TokenKind::kVariable: return kVars[t.variable - 1];
    case TokenKind::kNot: return "not";
    case TokenKind::kAnd: return "and";
    case TokenKind::kOr: return "or";
    case TokenKind::kLParen: return "(";
    case TokenKind::kRParen: return ")";
  }
  return "?";
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    const std::string_view item = text.substr(i, j - i);
    const std::size_t position = out.size();
    if (item == "(") {
      out.push_back(Token::of(TokenKind::kLParen));
    } else if (item == ")") {
      out.push_back(Token::of(TokenKind::kRParen));
    } else if (item == "not") {
      out.push_back(Token::of(TokenKind::kNot));
    } else if (item == "and") {
      out.push_back(Token::of(TokenKind::kAnd));
    } else if (item == "or") {
      out.push_back(Token::of(TokenKind::kOr));
    } else if (item.size() == 2 && item[0] == 'p' && item[1] >= '1' && item[1] <= '6') {
      out.push_back(Token::var(item[1] - '0'));
    } else {
      throw UnknownToken(std::string(item), position);
    }
    i = j;
  }
  return out;
}

std::string join_tokens(std::span<const Token> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += spelling(tokens[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Formulas

struct Formula::Node {
  Kind kind;
  int variable = 0;
  Connective op = Connective::kAnd;
  std::optional<Formula> a;
  std::optional<Formula> b;
};

Formula Formula::var(int index) {
  if (index < 1 || index > kNumVariables) {
    throw std::invalid_argument("variable index out of range: " + std::to_string(index));
  }
  return Formula(std::make_shared<const Node>(Node{Kind::kVar, index, Connective::kAnd, {}, {}}));
}

Formula Formula::negation(Formula child) {
  return Formula(std::make_shared<const Node>(
      Node{Kind::kNot, 0, Connective::kAnd, std::move(child), {}}));
}

Formula Formula::binary(Connective op, Formula left, Formula right) {
  return Formula(std::make_shared<const Node>(
      Node{Kind::kBin, 0, op, std::move(left), std::move(right)}));
}

Formula::Kind Formula::kind() const { return node_->kind; }
int Formula::variable() const { return node_->variable; }
Connective Formula::connective() const { return node_->op; }
const Formula& Formula::child() const { return *node_->a; }
const Formula& Formula::left() const { return *node_->a; }
const Formula& Formula::right() const { return *node_->b; }

bool operator==(const Formula& x, const Formula& y) {
  if (x.node_ == y.node_) return true;
  if (x.kind() != y.kind()) return false;
  switch (x.kind()) {
    case Formula::Kind::kVar: return x.variable() == y.variable();
    case Formula::Kind::kNot: return x.child() == y.child();
    case Formula::Kind::kBin:
      return x.connective() == y.connective() && x.left() == y.left() && x.right() == y.right();
  }
  return false;
}

namespace {

class Parser {
 public:
  explicit Parser(std::span<const Token> tokens) : tokens_(tokens) {}

  Formula sentence() {
    if (pos_ >= tokens_.size()) throw SentenceError(SentenceError::Kind::kUnexpectedToken, pos_);
    const Token t = tokens_[pos_];
    if (t.kind == TokenKind::kVariable) {
      ++pos_;
      return Formula::var(t.variable);
    }
    expect(TokenKind::kLParen);
    if (peek(TokenKind::kNot)) {
      ++pos_;
      Formula child = sentence();
      expect(TokenKind::kRParen);
      return Formula::negation(std::move(child));
    }
    Formula left = sentence();
    expect(TokenKind::kLParen);
    Connective op;
    if (peek(TokenKind::kAnd)) {
      op = Connective::kAnd;
    } else if (peek(TokenKind::kOr)) {
      op = Connective::kOr;
    } else {
      throw SentenceError(SentenceError::Kind::kUnexpectedToken, pos_);
    }
    ++pos_;
    Formula right = sentence();
    expect(TokenKind::kRParen);
    expect(TokenKind::kRParen);
    return Formula::binary(op, std::move(left), std::move(right));
  }

  bool done() const { return pos_ == tokens_.size(); }
  std::size_t position() const { return pos_; }

 private:
  bool peek(TokenKind k) const { return pos_ < tokens_.size() && tokens_[pos_].kind == k; }

  void expect(TokenKind k) {
    if (!peek(k)) throw SentenceError(SentenceError::Kind::kUnexpectedToken, pos_);
    ++pos_;
  }

  std::span<const Token> tokens_;
  std::size_t pos_ = 0;
};

void render_into(const Formula& f, std::vector<Token>& out) {
  switch (f.kind()) {
    case Formula::Kind::kVar:
      out.push_back(Token::var(f.variable()));
      return;
    case Formula::Kind::kNot:
      out.push_back(Token::of(TokenKind::kLParen));
      out.push_back(Token::of(TokenKind::kNot));
      render_into(f.child(), out);
      out.push_back(Token::of(TokenKind::kRParen));
      return;
    case Formula::Kind::kBin:
      out.push_back(Token::of(TokenKind::kLParen));
      render_into(f.left(), out);
      out.push_back(Token::of(TokenKind::kLParen));
      out.push_back(Token::of(f.connective() == Connective::kAnd ? TokenKind::kAnd : TokenKind::kOr));
      render_into(f.right(), out);
      out.push_back(Token::of(TokenKind::kRParen));
      out.push_back(Token::of(TokenKind::kRParen));
      return;
  }
}

}  // namespace

Formula parse(std::span<const Token> tokens) {
  long depth = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].kind == TokenKind::kLParen) ++depth;
    if (tokens[i].kind == TokenKind::kRParen && --depth < 0) {
      throw SentenceError(SentenceError::Kind::kUnbalancedParens, i);
    }
  }
  if (depth != 0) throw SentenceError(SentenceError::Kind::kUnbalancedParens, tokens.size());

  Parser parser(tokens);
  Formula f = parser.sentence();
  if (!parser.done()) throw SentenceError(SentenceError::Kind::kTrailingInput, parser.position());
  return f;
}

Formula parse_sentence(std::string_view text) {
  const auto tokens = tokenize(text);
  return parse(tokens);
}

std::vector<Token> render_tokens(const Formula& f) {
  std::vector<Token> out;
  render_into(f, out);
  return out;
}

std::string render(const Formula& f) { return join_tokens(render_tokens(f)); }

int connective_count(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::kVar: return 0;
    case Formula::Kind::kNot: return 1 + connective_count(f.child());
    case Formula::Kind::kBin: return 1 + connective_count(f.left()) + connective_count(f.right());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Truth sets

TruthSet TruthSet::of_variable(int index) {
  if (index < 1 || index > kNumVariables) {
    throw std::invalid_argument("variable index out of range: " + std::to_string(index));
  }
  std::uint64_t bits = 0;
  for (int a = 0; a < kNumAssignments; ++a) {
    if ((a >> (index - 1)) & 1) bits |= std::uint64_t{1} << a;
  }
  return TruthSet(bits);
}

TruthSet satisfying_set(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::kVar: return TruthSet::of_variable(f.variable());
    case Formula::Kind::kNot: return satisfying_set(f.child()).complement();
    case Formula::Kind::kBin: {
      const TruthSet l = satisfying_set(f.left());
      const TruthSet r = satisfying_set(f.right());
      return f.connective() == Connective::kAnd ? (l & r) : (l | r);
    }
  }
  return TruthSet::empty();
}

// ---------------------------------------------------------------------------
// Relations

Relation relation_at(int index) {
  if (index < 0 || index >= kNumRelations) {
    throw std::out_of_range("relation index " + std::to_string(index));
  }
  return kAllRelations[static_cast<std::size_t>(index)];
}

std::string_view label(Relation r) {
  static constexpr std::string_view kLabels[] = {"=", "<", ">", "^", "|", "v", "#"};
  return kLabels[index_of(r)];
}

std::optional<Relation> relation_from_label(std::string_view text) {
  for (Relation r : kAllRelations) {
    if (label(r) == text) return r;
  }
  return std::nullopt;
}

std::string_view symbol(Relation r) {
  static constexpr std::string_view kSymbols[] = {"≡", "⊏", "⊐", "^", "|", "⌣", "#"};
  return kSymbols[index_of(r)];
}

Relation relation(TruthSet a, TruthSet b) {
  const TruthSet meet = a & b;
  const TruthSet join = a | b;
  if (a == b) return Relation::kEquivalence;
  if (meet == a) return Relation::kForwardEntail;  // a ⊊ b
  if (meet == b) return Relation::kReverseEntail;  // a ⊋ b
  const bool disjoint = meet == TruthSet::empty();
  const bool exhaustive = join == TruthSet::universe();
  if (disjoint && exhaustive) return Relation::kNegation;
  if (disjoint) return Relation::kAlternation;
  if (exhaustive) return Relation::kCover;
  return Relation::kIndependence;
}

Relation relation_of_pair(const Formula& premise, const Formula& hypothesis) {
  return relation(satisfying_set(premise), satisfying_set(hypothesis));
}

Relation converse(Relation r) {
  switch (r) {
    case Relation::kForwardEntail: return Relation::kReverseEntail;
    case Relation::kReverseEntail: return Relation::kForwardEntail;
    default: return r;
  }
}

}  // namespace rnli
