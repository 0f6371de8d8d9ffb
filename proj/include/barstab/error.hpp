#pragma once

#include <stdexcept>
#include <string>

namespace barstab {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the arguments was violated (bad truncation, ell = 0, ...).
class invalid_input : public error {
 public:
  using error::error;
};

/// The dense eigensolver did not converge.
class convergence_failure : public error {
 public:
  using error::error;
};

/// A time integration produced NaN or overflowed.
class numerical_blowup : public error {
 public:
  numerical_blowup(const std::string& what, long step)
      : error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  long step() const noexcept { return step_; }

 private:
  long step_;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw invalid_input(message);
}

}  // namespace detail
}  // namespace barstab
