#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "rnli/autodiff.hpp"
#include "rnli/logic.hpp"
#include "rnli/params.hpp"
#include "rnli/rng.hpp"

namespace rnli {

enum class EncoderKind : std::uint8_t { kTreeRnn, kTreeRntn, kTreeLstm, kSeqLstm, kNbow };

inline constexpr EncoderKind kAllEncoderKinds[] = {
    EncoderKind::kTreeRnn, EncoderKind::kTreeRntn, EncoderKind::kTreeLstm, EncoderKind::kSeqLstm,
    EncoderKind::kNbow};

// CLI spellings: treernn, treerntn, treelstm, lstm, nbow.
std::string_view encoder_name(EncoderKind kind);
std::optional<EncoderKind> encoder_from_name(std::string_view name);

bool is_tree_encoder(EncoderKind kind);

struct EncoderConfig {
  EncoderKind kind = EncoderKind::kTreeRnn;
  std::size_t d_emb = 32;
  std::size_t d_hidden = 32;
  // Weights start uniform in [-init_scale, init_scale].
  double init_scale = 0.2;

  // d_emb = 32 everywhere; d_hidden = 64 for the LSTM variants and 32 otherwise.
  static EncoderConfig defaults(EncoderKind kind);
  void validate() const;
  // 9 for tree encoders (no parentheses), 11 for sequence encoders.
  int vocabulary_size() const;
};

// A sentence compiled for the encoders: the token sequence (with
// parentheses) and the binary composition tree in post-order, root last.
// Under the canonical bracketing the connective words are leaves:
//   not C     -> compose(not, C)
//   L op R    -> compose(L, compose(op, R))
struct SentenceInput {
  struct Step {
    int token = -1;  // vocabulary index for a leaf, -1 for a composition
    int left = -1;
    int right = -1;
  };
  std::vector<int> tokens;
  std::vector<Step> tree;
};

SentenceInput compile_sentence(const Formula& f);
SentenceInput compile_tokens(std::span<const Token> tokens);

struct LstmState {
  Var h;
  Var c;
};

// Parameter handles for one sentence model. The tensors live in a ParamStore
// under the "enc." prefix; the Encoder itself is a small copyable value.
class Encoder {
 public:
  // Registers freshly initialized parameters: weights uniform in
  // (-init_scale, init_scale), biases zero, LSTM forget-gate biases +1.
  static Encoder create(const EncoderConfig& config, ParamStore& store, Rng& rng);
  // Looks up existing parameters by name.
  static Encoder bind(const EncoderConfig& config, const ParamStore& store);

  const EncoderConfig& config() const { return config_; }

  Var encode(Graph& g, const SentenceInput& sentence) const;

  Var embed(Graph& g, int token) const;
  Var compose_tree_rnn(Graph& g, Var left, Var right) const;
  Var compose_tree_rntn(Graph& g, Var left, Var right) const;
  LstmState tree_lstm_leaf(Graph& g, Var x) const;
  LstmState compose_tree_lstm(Graph& g, LstmState left, LstmState right) const;
  LstmState lstm_step(Graph& g, Var x, LstmState state) const;

  ParamId embedding_id() const { return embedding_; }

 private:
  struct Affine {
    ParamId w = 0;
    ParamId b = 0;
  };

  explicit Encoder(EncoderConfig config) : config_(config) {}
  template <typename Store, typename Make>
  void wire(Store& store, Make&& make);

  Var affine(Graph& g, const Affine& a, Var x) const;

  EncoderConfig config_;
  ParamId embedding_ = 0;
  // TreeRNN/TreeRNTN composition and the NBOW projection.
  Affine combine_;
  ParamId tensor_ = 0;
  // TreeLSTM leaf transform.
  Affine leaf_c_, leaf_o_;
  // Gates shared by TreeLSTM (forget_ = left child) and SeqLSTM.
  Affine input_gate_, output_gate_, update_, forget_, forget_right_;
};

}  // namespace rnli
