#pragma once

#include <stdexcept>
#include <string>

namespace dbtsdf {

enum class ErrorKind {
  Config,
  Resource,
  Format,
  Corruption,
  Evaluation,
  Io,
  InvalidDirection,
  Contract,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so the CLI can map it
/// to a stable exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace dbtsdf
