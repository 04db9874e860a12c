#pragma once

#include <stdexcept>
#include <string>

namespace smc {

// Failure categories raised by loaders, solvers and estimators. The CLI prints
// the category name in front of the message so callers can match on it.
enum class ErrorCode {
  MissingValue,
  UnknownUnit,
  InvalidSplit,
  DuplicateUnit,
  NoCovariates,
  ZeroVarianceCovariate,
  NegativeWeight,
  LengthMismatch,
  NotPsd,
  Diverged,
  RankDeficient,
  InsufficientPeriods,
  AllUnitsDegenerate,
  EmptyDonorPool,
  InvalidKeepCount,
  TruthUnavailable,
  InvalidConfig,
};

const char* error_code_name(ErrorCode code);

class SmcError : public std::runtime_error {
 public:
  SmcError(ErrorCode code, const std::string& detail);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Throws SmcError with "<CodeName>: detail" as the message.
[[noreturn]] void fail(ErrorCode code, const std::string& detail);

}  // namespace smc
