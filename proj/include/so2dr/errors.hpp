#ifndef SO2DR_ERRORS_HPP
#define SO2DR_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace so2dr {

/// Base class for every error this library raises on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed stencil/grid/run parameters (bad radius, sz not divisible by d, ...).
class InvalidSpecError : public Error {
 public:
  using Error::Error;
};

/// A run-time configuration that violates a planner constraint. Carries the
/// name of the violated constraint so callers can surface it verbatim.
class InfeasibleError : public Error {
 public:
  InfeasibleError(std::string constraint, const std::string& detail)
      : Error("infeasible configuration: violated constraint \"" + constraint +
              "\" (" + detail + ")"),
        constraint_(std::move(constraint)) {}
  const std::string& constraint() const { return constraint_; }

 private:
  std::string constraint_;
};

/// Simulated device memory exhausted; names the allocation that did not fit.
class OutOfDeviceMemoryError : public Error {
 public:
  OutOfDeviceMemoryError(std::string id, std::uint64_t requested,
                         std::uint64_t in_use, std::uint64_t capacity)
      : Error("out of device memory: allocation \"" + id + "\" of " +
              std::to_string(requested) + " bytes does not fit (" +
              std::to_string(in_use) + " of " + std::to_string(capacity) +
              " bytes in use)"),
        id_(std::move(id)) {}
  const std::string& allocation_id() const { return id_; }

 private:
  std::string id_;
};

/// API misuse: aliased buffers, double free, share-buffer protocol violations,
/// negative ledger amounts.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// File / serialization problems (grid dumps, profiles, spec files).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace so2dr

#endif  // SO2DR_ERRORS_HPP
