#include "smc/errors.hpp"

namespace smc {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingValue: return "MissingValue";
    case ErrorCode::UnknownUnit: return "UnknownUnit";
    case ErrorCode::InvalidSplit: return "InvalidSplit";
    case ErrorCode::DuplicateUnit: return "DuplicateUnit";
    case ErrorCode::NoCovariates: return "NoCovariates";
    case ErrorCode::ZeroVarianceCovariate: return "ZeroVarianceCovariate";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NotPsd: return "NotPsd";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::InsufficientPeriods: return "InsufficientPeriods";
    case ErrorCode::AllUnitsDegenerate: return "AllUnitsDegenerate";
    case ErrorCode::EmptyDonorPool: return "EmptyDonorPool";
    case ErrorCode::InvalidKeepCount: return "InvalidKeepCount";
    case ErrorCode::TruthUnavailable: return "TruthUnavailable";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

SmcError::SmcError(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + detail),
      code_(code) {}

void fail(ErrorCode code, const std::string& detail) {
  throw SmcError(code, detail);
}

}  // namespace smc
