#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace bcwe {

enum class ErrorCode {
  kLookup,
  kDomain,
  kSchema,
  kPriorSum,
  kPriorNonpositive,
  kCurveBreakpoints,
  kCurveDiscontinuous,
  kDuplicateAction,
  kUnusedResource,
  kUnsupportedModel,
  kConvergence,
  kConsistency,
  kInfeasible,
  kResource,
  kInternal,
};

/// Stable upper-case diagnostic name, e.g. "PRIOR_SUM".
std::string_view code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string path = {});

  ErrorCode code() const { return code_; }
  /// Location inside an input document ("costs.b.high.pieces[1]"), empty when not applicable.
  const std::string& path() const { return path_; }
  /// Message without the code and path prefix.
  const std::string& message() const { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
  std::string path_;
};

/// Iteration cap reached before the requested equilibrium gap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, double best_gap);
  double best_gap() const { return best_gap_; }

 private:
  double best_gap_;
};

/// Phase one of the simplex method ended with positive artificial mass.
/// The certificate is a Farkas row multiplier y (see solve_lp).
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& message, double residual, Eigen::VectorXd certificate);
  double residual() const { return residual_; }
  const Eigen::VectorXd& certificate() const { return certificate_; }

 private:
  double residual_;
  Eigen::VectorXd certificate_;
};

}  // namespace bcwe
