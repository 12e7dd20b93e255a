#pragma once

#include <stdexcept>
#include <string>

namespace kspec {

/// Raised when an argument violates a documented precondition or type
/// invariant (model mismatch, out-of-window parameters, malformed input).
/// The CLI maps it to exit code 2.
class ContractError : public std::invalid_argument {
  public:
    explicit ContractError(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when an estimator or data pipeline cannot produce a result
/// (too few usable scales, enumeration cap exceeded, empty window).
/// The CLI maps it to exit code 3.
class EstimatorError : public std::runtime_error {
  public:
    explicit EstimatorError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ContractError(what);
}

}  // namespace kspec
