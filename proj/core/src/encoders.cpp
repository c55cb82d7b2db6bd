#include "rnli/encoders.hpp"

#include <stdexcept>
#include <string>

#include "rnli/errors.hpp"

namespace rnli {
namespace {

enum class Init { kWeight, kBias, kForgetBias };

int compile_tree(const Formula& f, std::vector<SentenceInput::Step>& steps) {
  auto leaf = [&](int token) {
    steps.push_back({token, -1, -1});
    return static_cast<int>(steps.size() - 1);
  };
  auto compose = [&](int l, int r) {
    steps.push_back({-1, l, r});
    return static_cast<int>(steps.size() - 1);
  };
  switch (f.kind()) {
    case Formula::Kind::kVar:
      return leaf(vocabulary_index(Token::var(f.variable())));
    case Formula::Kind::kNot: {
      const int op = leaf(vocabulary_index(Token::of(TokenKind::kNot)));
      const int child = compile_tree(f.child(), steps);
      return compose(op, child);
    }
    case Formula::Kind::kBin: {
      const int l = compile_tree(f.left(), steps);
      const TokenKind k = f.connective() == Connective::kAnd ? TokenKind::kAnd : TokenKind::kOr;
      const int op = leaf(vocabulary_index(Token::of(k)));
      const int r = compile_tree(f.right(), steps);
      const int rhs = compose(op, r);
      return compose(l, rhs);
    }
  }
  return -1;
}

}  // namespace

std::string_view encoder_name(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::kTreeRnn: return "treernn";
    case EncoderKind::kTreeRntn: return "treerntn";
    case EncoderKind::kTreeLstm: return "treelstm";
    case EncoderKind::kSeqLstm: return "lstm";
    case EncoderKind::kNbow: return "nbow";
  }
  return "?";
}

std::optional<EncoderKind> encoder_from_name(std::string_view name) {
  for (EncoderKind k : kAllEncoderKinds) {
    if (encoder_name(k) == name) return k;
  }
  return std::nullopt;
}

bool is_tree_encoder(EncoderKind kind) {
  return kind == EncoderKind::kTreeRnn || kind == EncoderKind::kTreeRntn ||
         kind == EncoderKind::kTreeLstm;
}

EncoderConfig EncoderConfig::defaults(EncoderKind kind) {
  EncoderConfig c;
  c.kind = kind;
  c.d_emb = 32;
  c.d_hidden = (kind == EncoderKind::kTreeLstm || kind == EncoderKind::kSeqLstm) ? 64 : 32;
  return c;
}

void EncoderConfig::validate() const {
  if (d_emb == 0 || d_hidden == 0) throw std::invalid_argument("encoder dimensions must be positive");
  if ((kind == EncoderKind::kTreeRnn || kind == EncoderKind::kTreeRntn) && d_emb != d_hidden) {
    throw std::invalid_argument("TreeRNN/TreeRNTN need d_emb == d_hidden");
  }
  if (!(init_scale > 0.0)) throw std::invalid_argument("init_scale must be positive");
}

int EncoderConfig::vocabulary_size() const {
  return is_tree_encoder(kind) ? kTreeVocabularySize : kSequenceVocabularySize;
}

SentenceInput compile_sentence(const Formula& f) {
  SentenceInput s;
  for (const Token& t : render_tokens(f)) s.tokens.push_back(vocabulary_index(t));
  compile_tree(f, s.tree);
  return s;
}

SentenceInput compile_tokens(std::span<const Token> tokens) {
  if (tokens.empty()) return {};
  return compile_sentence(parse(tokens));
}

// ---------------------------------------------------------------------------

template <typename Store, typename Make>
void Encoder::wire(Store& store, Make&& make) {
  const std::size_t e = config_.d_emb;
  const std::size_t h = config_.d_hidden;
  const auto vocab = static_cast<std::size_t>(config_.vocabulary_size());
  (void)store;

  embedding_ = make("enc.embedding", Shape::matrix(vocab, e), Init::kWeight);
  auto affine_params = [&](const std::string& name, std::size_t out, std::size_t in, Init bias) {
    Affine a;
    a.w = make("enc." + name + ".W", Shape::matrix(out, in), Init::kWeight);
    a.b = make("enc." + name + ".b", Shape::vector(out), bias);
    return a;
  };

  switch (config_.kind) {
    case EncoderKind::kTreeRntn:
      tensor_ = make("enc.T", Shape::cube(h, h, h), Init::kWeight);
      [[fallthrough]];
    case EncoderKind::kTreeRnn:
      combine_ = affine_params("compose", h, 2 * h, Init::kBias);
      break;
    case EncoderKind::kTreeLstm:
      leaf_c_ = affine_params("leaf_c", h, e, Init::kBias);
      leaf_o_ = affine_params("leaf_o", h, e, Init::kBias);
      input_gate_ = affine_params("input", h, 2 * h, Init::kBias);
      output_gate_ = affine_params("output", h, 2 * h, Init::kBias);
      update_ = affine_params("update", h, 2 * h, Init::kBias);
      forget_ = affine_params("forget_left", h, 2 * h, Init::kForgetBias);
      forget_right_ = affine_params("forget_right", h, 2 * h, Init::kForgetBias);
      break;
    case EncoderKind::kSeqLstm:
      input_gate_ = affine_params("input", h, e + h, Init::kBias);
      forget_ = affine_params("forget", h, e + h, Init::kForgetBias);
      output_gate_ = affine_params("output", h, e + h, Init::kBias);
      update_ = affine_params("update", h, e + h, Init::kBias);
      break;
    case EncoderKind::kNbow:
      combine_ = affine_params("project", h, e, Init::kBias);
      break;
  }
}

Encoder Encoder::create(const EncoderConfig& config, ParamStore& store, Rng& rng) {
  config.validate();
  Encoder enc(config);
  enc.wire(store, [&](const std::string& name, Shape shape, Init init) {
    Tensor t(shape);
    switch (init) {
      case Init::kWeight:
        for (double& v : t.values()) v = rng.uniform(-config.init_scale, config.init_scale);
        break;
      case Init::kBias: break;
      case Init::kForgetBias: t.fill(1.0); break;
    }
    return store.add(name, std::move(t));
  });
  return enc;
}

Encoder Encoder::bind(const EncoderConfig& config, const ParamStore& store) {
  config.validate();
  Encoder enc(config);
  enc.wire(store, [&](const std::string& name, Shape shape, Init) {
    const ParamId id = store.id(name);
    if (store.value(id).shape() != shape) {
      throw ShapeMismatch("Encoder::bind " + name, shape.to_string(), store.value(id).shape().to_string());
    }
    return id;
  });
  return enc;
}

Var Encoder::affine(Graph& g, const Affine& a, Var x) const {
  return g.add(g.matmul(g.param(a.w), x), g.param(a.b));
}

Var Encoder::embed(Graph& g, int token) const {
  if (token < 0 || token >= config_.vocabulary_size()) {
    throw std::out_of_range("token index " + std::to_string(token) + " outside the " +
                            std::string(encoder_name(config_.kind)) + " vocabulary");
  }
  return g.row(embedding_, static_cast<std::size_t>(token));
}

Var Encoder::compose_tree_rnn(Graph& g, Var left, Var right) const {
  return g.tanh(affine(g, combine_, g.concat(left, right)));
}

Var Encoder::compose_tree_rntn(Graph& g, Var left, Var right) const {
  const Var nn = compose_tree_rnn(g, left, right);
  return g.add(nn, g.tanh(g.bilinear(left, g.param(tensor_), right)));
}

LstmState Encoder::tree_lstm_leaf(Graph& g, Var x) const {
  const Var c = affine(g, leaf_c_, x);
  const Var o = g.sigmoid(affine(g, leaf_o_, x));
  return {g.hadamard(o, g.tanh(c)), c};
}

LstmState Encoder::compose_tree_lstm(Graph& g, LstmState left, LstmState right) const {
  const Var children = g.concat(left.h, right.h);
  const Var i = g.sigmoid(affine(g, input_gate_, children));
  const Var o = g.sigmoid(affine(g, output_gate_, children));
  const Var u = g.tanh(affine(g, update_, children));
  const Var fl = g.sigmoid(affine(g, forget_, children));
  const Var fr = g.sigmoid(affine(g, forget_right_, children));
  const Var c = g.add(g.hadamard(i, u), g.add(g.hadamard(fl, left.c), g.hadamard(fr, right.c)));
  return {g.hadamard(o, g.tanh(c)), c};
}

LstmState Encoder::lstm_step(Graph& g, Var x, LstmState state) const {
  const Var xh = g.concat(x, state.h);
  const Var i = g.sigmoid(affine(g, input_gate_, xh));
  const Var f = g.sigmoid(affine(g, forget_, xh));
  const Var o = g.sigmoid(affine(g, output_gate_, xh));
  const Var u = g.tanh(affine(g, update_, xh));
  const Var c = g.add(g.hadamard(f, state.c), g.hadamard(i, u));
  return {g.hadamard(o, g.tanh(c)), c};
}

Var Encoder::encode(Graph& g, const SentenceInput& sentence) const {
  if (is_tree_encoder(config_.kind)) {
    if (sentence.tree.empty()) throw EmptySentence();
    std::vector<LstmState> nodes;
    nodes.reserve(sentence.tree.size());
    for (const auto& step : sentence.tree) {
      if (step.token >= 0) {
        const Var x = embed(g, step.token);
        nodes.push_back(config_.kind == EncoderKind::kTreeLstm ? tree_lstm_leaf(g, x) : LstmState{x, {}});
        continue;
      }
      const LstmState& l = nodes.at(static_cast<std::size_t>(step.left));
      const LstmState& r = nodes.at(static_cast<std::size_t>(step.right));
      switch (config_.kind) {
        case EncoderKind::kTreeRnn: nodes.push_back({compose_tree_rnn(g, l.h, r.h), {}}); break;
        case EncoderKind::kTreeRntn: nodes.push_back({compose_tree_rntn(g, l.h, r.h), {}}); break;
        default: nodes.push_back(compose_tree_lstm(g, l, r)); break;
      }
    }
    return nodes.back().h;
  }

  if (sentence.tokens.empty()) throw EmptySentence();
  if (config_.kind == EncoderKind::kSeqLstm) {
    const Tensor zeros(Shape::vector(config_.d_hidden));
    LstmState state{g.input(zeros), g.input(zeros)};
    for (int token : sentence.tokens) state = lstm_step(g, embed(g, token), state);
    return state.h;
  }

  Var total = embed(g, sentence.tokens.front());
  for (std::size_t i = 1; i < sentence.tokens.size(); ++i) {
    total = g.add(total, embed(g, sentence.tokens[i]));
  }
  const Var mean = g.scale(1.0 / static_cast<double>(sentence.tokens.size()), total);
  return g.tanh(affine(g, combine_, mean));
}

}  // namespace rnli
