#include "phlqg/error.hpp"

namespace phlqg {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::SchurFailure: return "SchurFailure";
    case ErrorCode::SingularPencil: return "SingularPencil";
    case ErrorCode::StructureViolation: return "StructureViolation";
    case ErrorCode::SingularTransformation: return "SingularTransformation";
    case ErrorCode::NoStabilizingSolution: return "NoStabilizingSolution";
    case ErrorCode::SingularV21: return "SingularV21";
    case ErrorCode::IllConditionedQ: return "IllConditionedQ";
    case ErrorCode::ResidualTooLarge: return "ResidualTooLarge";
    case ErrorCode::InconsistentCertificates: return "InconsistentCertificates";
    case ErrorCode::CertificateFailure: return "CertificateFailure";
    case ErrorCode::NoMaximalSolution: return "NoMaximalSolution";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::NegativeEigenvalue: return "NegativeEigenvalue";
    case ErrorCode::SingularReducedPencil: return "SingularReducedPencil";
    case ErrorCode::GapTooSmall: return "GapTooSmall";
    case ErrorCode::NotImpulseFree: return "NotImpulseFree";
    case ErrorCode::IllConditionedTrailingBlock: return "IllConditionedTrailingBlock";
    case ErrorCode::NotStabilizing: return "NotStabilizing";
    case ErrorCode::SingularA22: return "SingularA22";
    case ErrorCode::UnstableSystem: return "UnstableSystem";
    case ErrorCode::SingularI_PfPc: return "SingularI_PfPc";
    case ErrorCode::RankDeficientN: return "RankDeficientN";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace phlqg
