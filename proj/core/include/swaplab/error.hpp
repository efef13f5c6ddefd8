// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace swaplab {

/// Violated precondition or shape contract.
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Non-finite value produced during computation.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input file or configuration.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Internal consistency failure, e.g. phase-1 replica divergence.
struct IntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void check(bool cond, const std::string& msg) {
  if (!cond) throw ContractError(msg);
}

}  // namespace swaplab
