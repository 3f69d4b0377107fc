#pragma once

#include <stdexcept>
#include <string>

namespace itdt {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration value violates a documented invariant.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's precondition (shapes, ids, ordering).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A numeric argument is outside the operation's domain.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Sampling requested before enough data was collected.
class NotReadyError : public Error {
 public:
  using Error::Error;
};

/// Problem instance exceeds an exhaustive-search guard.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value detected during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

namespace detail {

template <class E>
void require(bool ok, const std::string& what) {
  if (!ok) throw E(what);
}

}  // namespace detail
}  // namespace itdt
