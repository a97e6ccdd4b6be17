#ifndef CARNOT_ERRORS_HPP
#define CARNOT_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace carnot {

// Base class for all domain errors. The CLI maps these to exit code 1;
// anything else escaping is a bug.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : DomainError {
  using DomainError::DomainError;
};

struct DimensionMismatch : DomainError {
  using DomainError::DomainError;
};

// ---- algebra construction / validation -------------------------------------

struct JacobiViolation : DomainError {
  std::size_t i, j, k;  // 1-based basis indices of the witnessing triple
  JacobiViolation(std::size_t i_, std::size_t j_, std::size_t k_)
      : DomainError("Jacobi identity fails on basis triple (" + std::to_string(i_) + "," +
                    std::to_string(j_) + "," + std::to_string(k_) + ")"),
        i(i_), j(j_), k(k_) {}
};

struct GradingViolation : DomainError {
  std::size_t i, j;  // 1-based basis indices of the offending bracket
  GradingViolation(std::size_t i_, std::size_t j_)
      : DomainError("bracket [b" + std::to_string(i_) + ",b" + std::to_string(j_) +
                    "] has support outside its target layer"),
        i(i_), j(j_) {}
};

struct GenerationFailure : DomainError {
  std::size_t layer;  // 1-based layer that is not generated
  explicit GenerationFailure(std::size_t layer_)
      : DomainError("layer " + std::to_string(layer_) + " is not spanned by brackets of V1 with the previous layer"),
        layer(layer_) {}
};

struct ZeroDilation : DomainError {
  ZeroDilation() : DomainError("dilation parameter must be nonzero") {}
};

struct NotCentral : DomainError {
  using DomainError::DomainError;
};

struct NotIndependent : DomainError {
  using DomainError::DomainError;
};

struct QuotientNotCarnot : DomainError {
  using DomainError::DomainError;
};

// ---- rank analysis / classification ----------------------------------------

struct RankNotOne : DomainError {
  using DomainError::DomainError;
};

struct WitnessNotRankOne : DomainError {
  using DomainError::DomainError;
};

struct EmptyWitnessSet : DomainError {
  EmptyWitnessSet() : DomainError("no witnesses supplied") {}
};

struct SearchInconclusive : DomainError {
  double best_residual;
  explicit SearchInconclusive(double r)
      : DomainError("minimum-rank search inconclusive, best residual " + std::to_string(r)),
        best_residual(r) {}
};

struct NotAnAutomorphism : DomainError {
  std::size_t index;  // position in the supplied list
  NotAnAutomorphism(std::size_t idx, const std::string& why)
      : DomainError("matrix #" + std::to_string(idx) + " is not a graded automorphism: " + why),
        index(idx) {}
};

struct DegenerateForm : DomainError {
  using DomainError::DomainError;
};

struct DecompositionIncomplete : DomainError {
  using DomainError::DomainError;
};

struct ConjugateClassCollision : DomainError {
  using DomainError::DomainError;
};

struct UnequalSummandDimensions : DomainError {
  using DomainError::DomainError;
};

struct NotFiliform : DomainError {
  using DomainError::DomainError;
};

struct PreconditionViolation : DomainError {
  using DomainError::DomainError;
};

// An exact identity that holds as a theorem failed to verify. Always indicates
// a bug in this library or corrupted input data, never a property of the input.
struct TheoremViolation : std::logic_error {
  using std::logic_error::logic_error;
};

struct InternalInconsistency : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace carnot

#endif
