#ifndef PHLQG_ERROR_HPP
#define PHLQG_ERROR_HPP

#include <stdexcept>
#include <string>

namespace phlqg {

enum class ErrorCode {
  InvalidArgument,
  NotPSD,
  NotSymmetric,
  SchurFailure,
  SingularPencil,
  StructureViolation,
  SingularTransformation,
  NoStabilizingSolution,
  SingularV21,
  IllConditionedQ,
  ResidualTooLarge,
  InconsistentCertificates,
  CertificateFailure,
  NoMaximalSolution,
  IllConditioned,
  NegativeEigenvalue,
  SingularReducedPencil,
  GapTooSmall,
  NotImpulseFree,
  IllConditionedTrailingBlock,
  NotStabilizing,
  SingularA22,
  UnstableSystem,
  SingularI_PfPc,
  RankDeficientN,
  ParseError,
};

const char* to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code. The CLI maps codes to exit
/// statuses and prints `code: message` records on stderr.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace phlqg

#endif  // PHLQG_ERROR_HPP
