#pragma once

#include "rhtp/algorithms.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rhtp::bench {

enum class Ensemble {
  gaussian,     // i.i.d. N(0, 1/m)
  tight_frame,  // m rows of a random orthogonal matrix, columns rescaled to unit norm
};

std::string_view to_string(Ensemble e);
Ensemble ensemble_from_string(std::string_view s);

struct RegularizerSpec {
  std::string kind = "smooth_power";  // or "zero"
  double q = 1.0;
  double eps = 0.42;
  double gamma = 0.3;

  Regularizer build(Index n) const;
};

struct AlgorithmSpec {
  AlgorithmKind kind = AlgorithmKind::htp;
  std::optional<RegularizerSpec> regularizer;  // rhtp only
  double mu = 0.3;

  /// "htp", "iht", or "rhtp_q<q>".
  std::string label() const;
  /// q of the regularizer, if any.
  std::optional<double> q() const;
};

struct ExperimentConfig {
  std::string name = "custom";
  Index n = 512;
  std::vector<Index> m_values{256};
  std::vector<Index> K_values{51};
  int num_trials = 100;
  std::uint64_t seed = 0;
  std::vector<AlgorithmSpec> algorithms;
  double success_tol = 1e-6;
  int max_iters = 100;
  double noise_std = 0.0;
  Ensemble ensemble = Ensemble::gaussian;
  std::string output_dir = "results";
  int workers = 0;  // 0: hardware concurrency
  bool write_traces = false;
  bool trace_full = false;

  /// Throws ArgumentError on invalid values.
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);
/// Throws ArgumentError naming the path when it cannot be read or parsed.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Named configurations: "paper-msd", "paper-fig2", "paper-fig3", plus
/// "smoke". Throws ArgumentError for unknown names.
ExperimentConfig preset(std::string_view name);
std::vector<std::string> preset_names();

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);
/// Seed of one trial, a function of (base, m, K, trial) only.
std::uint64_t trial_seed(std::uint64_t base, Index m, Index K, int trial);

/// y = Phi x* + e with a uniformly drawn size-K support, N(0, 1) nonzeros and
/// e ~ N(0, noise_std^2 I) (exactly zero when noise_std == 0).
ProblemInstance generate_instance(Index n, Index m, Index K, double noise_std, std::uint64_t seed,
                                  Ensemble ensemble = Ensemble::gaussian);

struct AlgoTrialResult {
  bool recovered = false;
  int iters = 0;
  double final_error = 0.0;
  std::vector<double> msd;  // ||x^k - x*||^2, k = 0..iters
  TerminalStatus status = TerminalStatus::hit_max_iters;
};

struct TrialResult {
  std::uint64_t seed = 0;
  std::vector<AlgoTrialResult> per_algo;  // config order
  std::vector<IterationTrace> traces;     // kept only when traces are written
};

TrialResult run_trial(const ExperimentConfig& cfg, Index m, Index K, int trial,
                      bool keep_traces = false);

struct PointResult {
  std::string label;
  std::string algo;
  std::optional<double> q;
  Index K = 0;
  Index m = 0;
  Index n = 0;
  int trials = 0;
  int recovered = 0;
  int failed_runs = 0;  // runs that ended with an error
  double prob_recovery = 0.0;
  double mean_iters = 0.0;  // over recovered trials; NaN when none
  double mean_final_error = 0.0;
  std::vector<double> mean_msd;  // padded with each run's last value to max_iters + 1
};

struct SweepResult {
  ExperimentConfig config;
  std::vector<PointResult> rows;  // m-major, then K, then algorithm
};

/// Runs every (m, K, trial) task on a pool of workers; aggregation order is
/// fixed, so results do not depend on scheduling. When `trace_dir` is given
/// and traces are enabled, each run's trace is written there.
SweepResult run_sweep(const ExperimentConfig& cfg,
                      const std::optional<std::filesystem::path>& trace_dir = std::nullopt);

/// Worker count after applying RHTP_WORKERS and hardware limits.
int effective_workers(const ExperimentConfig& cfg);

inline constexpr std::string_view kCsvHeader =
    "algo,q,K,m,n,trials,prob_recovery,mean_iters,mean_final_error";

std::string results_csv(const SweepResult& r);
nlohmann::ordered_json results_json(const SweepResult& r);

/// results.csv, results.json, and one two-column .dat file per curve:
/// prob_/iters_<label>_m<m>.dat (against K), prob_/iters_<label>_K<K>.dat
/// (against m), msd_<label>_m<m>_K<K>.dat (mean MSD against iteration).
void write_outputs(const SweepResult& r, const std::filesystem::path& dir);
/// The .dat curves alone, for rows in any order.
void write_curves(const std::vector<PointResult>& rows, const std::filesystem::path& dir);

/// Rows of a results.csv; label is rebuilt from algo and q, mean_msd is empty.
std::vector<PointResult> parse_results_csv(std::string_view text);

/// Shortest round-trip decimal form; "nan" for NaN.
std::string format_double(double v);

}  // namespace rhtp::bench
