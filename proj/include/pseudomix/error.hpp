#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pseudomix {

// Base of every error thrown by the toolkit. Subclasses only exist where a
// caller has a reason to tell them apart.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Parallel files or lists whose lengths disagree.
class AlignmentError : public Error {
 public:
  AlignmentError(std::size_t left, std::size_t right, const std::string& what)
      : Error(what + " (" + std::to_string(left) + " vs " + std::to_string(right) + ")"),
        left_(left),
        right_(right) {}

  std::size_t left() const { return left_; }
  std::size_t right() const { return right_; }

 private:
  std::size_t left_;
  std::size_t right_;
};

class DecodeError : public Error {
 public:
  DecodeError(std::size_t line, const std::string& what)
      : Error(what + " at line " + std::to_string(line)), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class MalformedStreamError : public Error {
 public:
  MalformedStreamError(std::size_t position, const std::string& what)
      : Error(what + " at unit " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class CorruptionError : public Error {
 public:
  CorruptionError(std::size_t offset, const std::string& what)
      : Error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class TranslationError : public Error {
 public:
  TranslationError(std::size_t index, const std::string& what)
      : Error(what + " (item " + std::to_string(index) + ")"), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

// A pipeline stage failed; the original message is kept.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace pseudomix
