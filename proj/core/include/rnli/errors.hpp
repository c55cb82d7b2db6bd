#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rnli {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A word outside the eleven-token vocabulary.
class UnknownToken : public Error {
 public:
  UnknownToken(std::string item, std::size_t position);
  const std::string& item() const noexcept { return item_; }
  std::size_t position() const noexcept { return position_; }

 private:
  std::string item_;
  std::size_t position_;
};

// A token sequence that is not a canonical complete binary bracketing.
class SentenceError : public Error {
 public:
  enum class Kind { kUnbalancedParens, kUnexpectedToken, kTrailingInput };

  SentenceError(Kind kind, std::size_t position);
  Kind kind() const noexcept { return kind_; }
  std::size_t position() const noexcept { return position_; }

 private:
  Kind kind_;
  std::size_t position_;
};

class ShapeMismatch : public Error {
 public:
  ShapeMismatch(const std::string& op, const std::string& expected, const std::string& got);
};

class NonScalarLoss : public Error {
 public:
  using Error::Error;
};

class EmptySentence : public Error {
 public:
  EmptySentence() : Error("cannot encode an empty sentence") {}
};

class GenerationExhausted : public Error {
 public:
  explicit GenerationExhausted(int bin);
  int bin() const noexcept { return bin_; }

 private:
  int bin_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed line in a dataset file; line numbers are 1-based.
class DatasetParseError : public Error {
 public:
  DatasetParseError(std::size_t line, std::string text, const std::string& reason);
  std::size_t line() const noexcept { return line_; }
  const std::string& text() const noexcept { return text_; }

 private:
  std::size_t line_;
  std::string text_;
};

class NonFiniteLoss : public Error {
 public:
  NonFiniteLoss(int epoch, std::size_t batch);
  int epoch() const noexcept { return epoch_; }
  std::size_t batch() const noexcept { return batch_; }

 private:
  int epoch_;
  std::size_t batch_;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

class SizeExceedsAvailable : public Error {
 public:
  SizeExceedsAvailable(std::size_t requested, std::size_t available);
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace rnli
