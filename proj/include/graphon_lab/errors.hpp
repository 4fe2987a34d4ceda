#ifndef GRAPHON_LAB_ERRORS_HPP
#define GRAPHON_LAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace graphon_lab {

// Bad parameter values or infeasible (e,t) requests. CLI exit code 1.
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// Complexity guards (hom density term count, enumeration size). CLI exit code 2.
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

// Iterative method failed to converge; message carries last-iterate diagnostics.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Microcanonical window misses the (E,T) lattice entirely, or holds no counted
// states. Distinct from a zero count sneaking through as ln(0).
class EmptyWindowError : public DomainError {
 public:
  explicit EmptyWindowError(const std::string& what) : DomainError(what) {}
};

}  // namespace graphon_lab

#endif
