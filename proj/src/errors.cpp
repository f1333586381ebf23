#include "bcwe/errors.hpp"

#include <utility>

namespace bcwe {

std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kLookup: return "LOOKUP";
    case ErrorCode::kDomain: return "DOMAIN";
    case ErrorCode::kSchema: return "SCHEMA";
    case ErrorCode::kPriorSum: return "PRIOR_SUM";
    case ErrorCode::kPriorNonpositive: return "PRIOR_NONPOSITIVE";
    case ErrorCode::kCurveBreakpoints: return "CURVE_BREAKPOINTS";
    case ErrorCode::kCurveDiscontinuous: return "CURVE_DISCONTINUOUS";
    case ErrorCode::kDuplicateAction: return "DUPLICATE_ACTION";
    case ErrorCode::kUnusedResource: return "UNUSED_RESOURCE";
    case ErrorCode::kUnsupportedModel: return "UNSUPPORTED_MODEL";
    case ErrorCode::kConvergence: return "CONVERGENCE";
    case ErrorCode::kConsistency: return "CONSISTENCY";
    case ErrorCode::kInfeasible: return "INFEASIBLE";
    case ErrorCode::kResource: return "RESOURCE";
    case ErrorCode::kInternal: return "INTERNAL";
  }
  return "UNKNOWN";
}

Error::Error(ErrorCode code, const std::string& message, std::string path)
    : std::runtime_error(path.empty() ? std::string(code_name(code)) + ": " + message
                                      : std::string(code_name(code)) + " at " + path + ": " + message),
      code_(code),
      message_(message),
      path_(std::move(path)) {}

ConvergenceError::ConvergenceError(const std::string& message, double best_gap)
    : Error(ErrorCode::kConvergence, message), best_gap_(best_gap) {}

InfeasibleError::InfeasibleError(const std::string& message, double residual,
                                 Eigen::VectorXd certificate)
    : Error(ErrorCode::kInfeasible, message),
      residual_(residual),
      certificate_(std::move(certificate)) {}

}  // namespace bcwe
