#pragma once

#include <stdexcept>
#include <string>

namespace supou {

// Failure categories, mirrored by the CLI exit codes: contract violations and
// bad configuration exit 2, numerical failures exit 3, resource and I/O
// problems exit 4.
enum class errc {
  contract,
  numeric,
  resource,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(errc kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}

  errc kind() const noexcept { return kind_; }

 private:
  errc kind_;
};

[[noreturn]] inline void fail(errc kind, const std::string& msg) { throw Error(kind, msg); }

inline void require(bool cond, errc kind, const std::string& msg) {
  if (!cond) fail(kind, msg);
}

}  // namespace supou
