#pragma once

#include "rhtp/analysis.hpp"

#include <json.hpp>

namespace rhtp::analysis {

/// Runs every applicable checker over one trace and collects the results as
/// {constants, condition_flags, violations, predicted_iters, observed_iters}.
/// Theorems are asserted (reported as violations) only in verified mode,
/// i.e. when the constants they use are exact; otherwise the document is
/// marked "estimated".
nlohmann::ordered_json analysis_report(const ProblemInstance& inst, const IterationTrace& trace,
                                       const PsiMap& map, double mu, const DeltaTable& delta);

}  // namespace rhtp::analysis
