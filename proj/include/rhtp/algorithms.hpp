#pragma once

#include "rhtp/regularizer.hpp"
#include "rhtp/sensing.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rhtp {

enum class AlgorithmKind { rhtp, htp, iht };

enum class StopKind { support_stable, residual_below, error_below };

struct StopRule {
  StopKind kind = StopKind::support_stable;
  double tol = 0.0;  // unused for support_stable

  static StopRule support_stable() { return {StopKind::support_stable, 0.0}; }
  static StopRule residual_below(double tol) { return {StopKind::residual_below, tol}; }
  static StopRule error_below(double tol) { return {StopKind::error_below, tol}; }
};

struct AlgoConfig {
  AlgorithmKind algorithm = AlgorithmKind::htp;
  std::optional<Regularizer> regularizer;  // required for rhtp
  double mu = 1.0;
  Index K = 1;
  int max_iters = 100;
  StopRule stop = StopRule::support_stable();
  /// Initial estimate; zero when absent.
  std::optional<Vector> x0;
  /// Under the residual/error rules, end the run once x^{k+1} == x^k: every
  /// later iterate would be identical.
  bool stop_at_fixed_point = true;
  Tolerances tol;

  void validate(Index n) const;
};

enum class TerminalStatus {
  converged_support_stable,
  hit_max_iters,
  recovered,
  residual_below,
  failed,
};

std::string_view to_string(TerminalStatus s);
std::string_view to_string(AlgorithmKind a);

struct IterationRecord {
  int k = 0;
  SparseIterate x;
  Vector x_hat;  // empty for k = 0
  double residual_norm = 0.0;
  std::optional<double> error_norm;
};

struct IterationTrace {
  AlgorithmKind algorithm = AlgorithmKind::htp;
  std::vector<IterationRecord> records;  // records.size() == iterations_used + 1
  TerminalStatus status = TerminalStatus::hit_max_iters;
  int iterations_used = 0;
  std::string error_message;

  const IterationRecord& last() const { return records.back(); }
};

struct StepResult {
  SparseIterate x_next;
  Vector x_hat;
  SupportSet support_next;
};

/// x + mu Phi^t (y - Phi x) - Gamma grad J(x). Equal to Psi(x) - mu grad f(x).
Vector identification_argument(const ProblemInstance& inst, double mu, const Regularizer* reg,
                               const Vector& x);

/// One RHTP iteration: threshold the regularized gradient step, then least
/// squares on the selected support.
StepResult rhtp_step(const ProblemInstance& inst, const AlgoConfig& cfg, const Regularizer& reg,
                     const SparseIterate& x_k);

/// Plain HTP iteration; kept separate from rhtp_step so the zero-regularizer
/// reduction can be checked against an independent code path.
StepResult htp_step(const ProblemInstance& inst, const AlgoConfig& cfg, const SparseIterate& x_k);

/// IHT: x^{k+1} = H_K(x^k + mu Phi^t (y - Phi x^k)).
SparseIterate iht_step(const ProblemInstance& inst, const AlgoConfig& cfg, const SparseIterate& x_k);

/// Runs the configured algorithm from x0 until the stop rule fires or
/// max_iters is reached. Step errors end the run with status `failed`.
IterationTrace run(const ProblemInstance& inst, const AlgoConfig& cfg);

/// 0.5 * ||y - Phi x||^2
double least_squares_objective(const ProblemInstance& inst, const Vector& x);

}  // namespace rhtp
