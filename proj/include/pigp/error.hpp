#pragma once

#include <stdexcept>
#include <string>

namespace pigp {

// Mirrors the status codes of the C API and the CLI exit codes.
enum class ErrorKind {
  InvalidArgument = 1,
  Config = 2,
  Data = 3,
  Numerical = 4,
  Io = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace pigp
