#include "rhtp/algorithms.hpp"

#include <cmath>

namespace rhtp {

std::string_view to_string(TerminalStatus s) {
  switch (s) {
    case TerminalStatus::converged_support_stable: return "converged_support_stable";
    case TerminalStatus::hit_max_iters: return "hit_max_iters";
    case TerminalStatus::recovered: return "recovered";
    case TerminalStatus::residual_below: return "residual_below";
    case TerminalStatus::failed: return "failed";
  }
  return "unknown";
}

std::string_view to_string(AlgorithmKind a) {
  switch (a) {
    case AlgorithmKind::rhtp: return "rhtp";
    case AlgorithmKind::htp: return "htp";
    case AlgorithmKind::iht: return "iht";
  }
  return "unknown";
}

void AlgoConfig::validate(Index n) const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ArgumentError("step size mu must be positive");
  if (K < 1 || K > n) throw ArgumentError("sparsity K must satisfy 1 <= K <= n");
  if (max_iters < 0) throw ArgumentError("max_iters must be nonnegative");
  if (stop.kind != StopKind::support_stable && !(stop.tol > 0.0))
    throw ArgumentError("stop tolerance must be positive");
  if (algorithm == AlgorithmKind::rhtp) {
    if (!regularizer) throw ArgumentError("rhtp needs a regularizer");
    if (regularizer->size() != n) throw ArgumentError("regularizer size does not match n");
  }
  if (x0 && x0->size() != n) throw ArgumentError("x0 length does not match n");
}

double least_squares_objective(const ProblemInstance& inst, const Vector& x) {
  return 0.5 * (inst.y() - inst.phi() * x).squaredNorm();
}

Vector identification_argument(const ProblemInstance& inst, double mu, const Regularizer* reg,
                               const Vector& x) {
  const Vector resid = inst.y() - inst.phi() * x;
  Vector arg = x + mu * (inst.phi().transpose() * resid);
  if (reg) {
    for (Index j = 0; j < arg.size(); ++j) arg[j] -= reg->gamma(j) * reg->g_prime(j, x[j]);
  }
  return arg;
}

StepResult rhtp_step(const ProblemInstance& inst, const AlgoConfig& cfg, const Regularizer& reg,
                     const SparseIterate& x_k) {
  if (reg.size() != inst.n()) throw ArgumentError("regularizer size does not match n");
  const Vector arg = identification_argument(inst, cfg.mu, &reg, x_k.values);
  SparseIterate thresholded = hard_threshold(arg, cfg.K);
  SparseIterate x_next = restricted_least_squares(inst, thresholded.support, cfg.tol);
  return {std::move(x_next), std::move(thresholded.values), std::move(thresholded.support)};
}

StepResult htp_step(const ProblemInstance& inst, const AlgoConfig& cfg, const SparseIterate& x_k) {
  const Vector grad_step = inst.phi().transpose() * (inst.y() - inst.phi() * x_k.values);
  const Vector arg = x_k.values + cfg.mu * grad_step;
  SparseIterate thresholded = hard_threshold(arg, cfg.K);
  SparseIterate x_next = restricted_least_squares(inst, thresholded.support, cfg.tol);
  return {std::move(x_next), std::move(thresholded.values), std::move(thresholded.support)};
}

SparseIterate iht_step(const ProblemInstance& inst, const AlgoConfig& cfg, const SparseIterate& x_k) {
  return hard_threshold(identification_argument(inst, cfg.mu, nullptr, x_k.values), cfg.K);
}

namespace {

IterationRecord make_record(const ProblemInstance& inst, int k, SparseIterate x, Vector x_hat) {
  IterationRecord rec;
  rec.k = k;
  rec.residual_norm = (inst.y() - inst.phi() * x.values).norm();
  if (inst.x_star()) rec.error_norm = (x.values - *inst.x_star()).norm();
  rec.x = std::move(x);
  rec.x_hat = std::move(x_hat);
  return rec;
}

}  // namespace

IterationTrace run(const ProblemInstance& inst, const AlgoConfig& cfg) {
  cfg.validate(inst.n());
  if (cfg.stop.kind == StopKind::error_below && !inst.x_star())
    throw ArgumentError("error_below stop rule needs the ground truth x_star");

  IterationTrace trace;
  trace.algorithm = cfg.algorithm;
  SparseIterate x0 = cfg.x0 ? SparseIterate{*cfg.x0, SupportSet::nonzeros(*cfg.x0)}
                            : SparseIterate::zeros(inst.n());
  trace.records.push_back(make_record(inst, 0, std::move(x0), Vector()));

  for (int k = 0; k < cfg.max_iters; ++k) {
    const SparseIterate& cur = trace.records.back().x;
    SparseIterate next;
    Vector x_hat;
    try {
      switch (cfg.algorithm) {
        case AlgorithmKind::rhtp: {
          auto s = rhtp_step(inst, cfg, *cfg.regularizer, cur);
          next = std::move(s.x_next);
          x_hat = std::move(s.x_hat);
          break;
        }
        case AlgorithmKind::htp: {
          auto s = htp_step(inst, cfg, cur);
          next = std::move(s.x_next);
          x_hat = std::move(s.x_hat);
          break;
        }
        case AlgorithmKind::iht:
          next = iht_step(inst, cfg, cur);
          x_hat = next.values;
          break;
      }
    } catch (const Error& err) {
      trace.status = TerminalStatus::failed;
      trace.error_message = err.what();
      trace.iterations_used = k;
      return trace;
    }

    const bool same_support = next.support == cur.support;
    const bool same_point = same_support && next.values == cur.values;
    if (same_support && cfg.algorithm != AlgorithmKind::iht && !same_point)
      throw InternalError("least squares on an unchanged support produced a different iterate");

    trace.records.push_back(make_record(inst, k + 1, std::move(next), std::move(x_hat)));
    trace.iterations_used = k + 1;
    const IterationRecord& rec = trace.records.back();

    switch (cfg.stop.kind) {
      case StopKind::support_stable:
        if (same_support) {
          trace.status = TerminalStatus::converged_support_stable;
          return trace;
        }
        break;
      case StopKind::residual_below:
        if (rec.residual_norm < cfg.stop.tol) {
          trace.status = TerminalStatus::residual_below;
          return trace;
        }
        break;
      case StopKind::error_below:
        if (*rec.error_norm < cfg.stop.tol) {
          trace.status = TerminalStatus::recovered;
          return trace;
        }
        break;
    }
    if (cfg.stop_at_fixed_point && same_point) {
      trace.status = TerminalStatus::converged_support_stable;
      return trace;
    }
  }
  trace.status = TerminalStatus::hit_max_iters;
  return trace;
}

}  // namespace rhtp
