#include "rnli/errors.hpp"

namespace rnli {
namespace {

const char* describe(SentenceError::Kind kind) {
  switch (kind) {
    case SentenceError::Kind::kUnbalancedParens: return "unbalanced parentheses";
    case SentenceError::Kind::kUnexpectedToken: return "unexpected token";
    case SentenceError::Kind::kTrailingInput: return "trailing input";
  }
  return "malformed sentence";
}

}  // namespace

UnknownToken::UnknownToken(std::string item, std::size_t position)
    : Error("unknown token '" + item + "' at position " + std::to_string(position)),
      item_(std::move(item)),
      position_(position) {}

SentenceError::SentenceError(Kind kind, std::size_t position)
    : Error(std::string(describe(kind)) + " at token " + std::to_string(position)),
      kind_(kind),
      position_(position) {}

ShapeMismatch::ShapeMismatch(const std::string& op, const std::string& expected,
                             const std::string& got)
    : Error(op + ": shape mismatch, expected " + expected + ", got " + got) {}

GenerationExhausted::GenerationExhausted(int bin)
    : Error("cannot find enough distinct pairs for bin " + std::to_string(bin)), bin_(bin) {}

DatasetParseError::DatasetParseError(std::size_t line, std::string text, const std::string& reason)
    : Error("line " + std::to_string(line) + ": " + reason + ": '" + text + "'"),
      line_(line),
      text_(std::move(text)) {}

NonFiniteLoss::NonFiniteLoss(int epoch, std::size_t batch)
    : Error("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
            std::to_string(batch)),
      epoch_(epoch),
      batch_(batch) {}

SizeExceedsAvailable::SizeExceedsAvailable(std::size_t requested, std::size_t available)
    : Error("requested " + std::to_string(requested) + " training examples but only " +
            std::to_string(available) + " are available") {}

}  // namespace rnli
