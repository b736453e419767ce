#pragma once

#include <stdexcept>
#include <string>

namespace salprop {

enum class Err {
  FileNotFound,
  DecodeError,
  TooSmall,
  BadMagic,
  Truncated,
  BadValue,
  AlreadySparse,
  EmptyInput,
  SizeMismatch,
  TooLarge,
  EmptyTrainingSet,
  NonFinite,
  BadVersion,
  ParseError,
  MissingField,
  IdMismatch,
  NoGroundTruth,
  ImageTooSmall,
  DegenerateContext,
};

// All library failures surface as Error; the CLI maps code() onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  Err code() const noexcept { return code_; }

 private:
  Err code_;
};

const char* err_name(Err code);

[[noreturn]] inline void fail(Err code, const std::string& msg) {
  throw Error(code, std::string(err_name(code)) + ": " + msg);
}

}  // namespace salprop
