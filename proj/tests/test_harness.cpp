#include <doctest.h>

#include "rhtp/harness.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rhtp;
using namespace rhtp::bench;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c = preset("smoke");
  c.num_trials = 3;
  c.workers = 1;
  return c;
}

}  // namespace

TEST_CASE("instances are a deterministic function of the seed") {
  const auto a = generate_instance(64, 32, 4, 0.0, 42);
  const auto b = generate_instance(64, 32, 4, 0.0, 42);
  CHECK(a.phi() == b.phi());
  CHECK(a.y() == b.y());
  CHECK(*a.x_star() == *b.x_star());
  const auto c = generate_instance(64, 32, 4, 0.0, 43);
  CHECK(a.phi() != c.phi());
}

TEST_CASE("gaussian columns have unit squared norm on average") {
  double sum = 0.0;
  int count = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = generate_instance(512, 256, 1, 0.0, seed);
    sum += inst.phi().colwise().squaredNorm().mean();
    ++count;
  }
  const double mean = sum / count;
  CHECK(mean >= 0.9);
  CHECK(mean <= 1.1);
}

TEST_CASE("noiseless instances satisfy y = Phi x* exactly") {
  const auto inst = generate_instance(64, 32, 5, 0.0, 7);
  CHECK(inst.noiseless());
  CHECK(inst.y() == inst.phi() * *inst.x_star());
  CHECK(SupportSet::nonzeros(*inst.x_star()).size() == 5);

  const auto noisy = generate_instance(64, 32, 5, 0.01, 7);
  CHECK_FALSE(noisy.noiseless());
  CHECK((noisy.y() - noisy.phi() * *noisy.x_star() - *noisy.e()).norm() <= 1e-14);
}

TEST_CASE("tight frame ensemble has orthonormal rows up to column scaling") {
  const auto inst = generate_instance(12, 8, 2, 0.0, 3, Ensemble::tight_frame);
  const Vector norms = inst.phi().colwise().norm();
  for (Index j = 0; j < norms.size(); ++j) CHECK(norms[j] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("trial seeds are distinct and independent of scheduling") {
  CHECK(trial_seed(1, 256, 51, 0) != trial_seed(1, 256, 51, 1));
  CHECK(trial_seed(1, 256, 51, 0) != trial_seed(1, 256, 61, 0));
  CHECK(trial_seed(1, 256, 51, 0) != trial_seed(1, 240, 51, 0));
  CHECK(trial_seed(1, 256, 51, 0) != trial_seed(2, 256, 51, 0));
  CHECK(trial_seed(5, 10, 2, 3) == trial_seed(5, 10, 2, 3));

  // A trial's outcome does not depend on which other trials ran.
  const auto cfg = small_config();
  const auto alone = run_trial(cfg, 32, 4, 2);
  ExperimentConfig more = cfg;
  more.num_trials = 10;
  const auto again = run_trial(more, 32, 4, 2);
  CHECK(alone.seed == again.seed);
  CHECK(alone.per_algo[0].final_error == again.per_algo[0].final_error);
}

TEST_CASE("a single point with one trial yields one row per algorithm") {
  ExperimentConfig cfg = small_config();
  cfg.K_values = {2};
  cfg.num_trials = 1;
  const auto r = run_sweep(cfg);
  CHECK(r.rows.size() == cfg.algorithms.size());
  for (const auto& p : r.rows) {
    CHECK(p.trials == 1);
    CHECK(p.mean_msd.size() == static_cast<std::size_t>(cfg.max_iters) + 1);
  }
}

TEST_CASE("one-sparse signals are always recovered with many measurements") {
  ExperimentConfig cfg = preset("paper-msd");
  cfg.m_values = {256};
  cfg.K_values = {1};
  cfg.num_trials = 5;
  const auto r = run_sweep(cfg);
  for (const auto& p : r.rows) CHECK(p.prob_recovery == 1.0);
}

TEST_CASE("recovery at K = 1 is at least recovery at K = m / 2") {
  ExperimentConfig cfg = preset("paper-fig2");
  cfg.n = 128;
  cfg.m_values = {64};
  cfg.K_values = {1, 32};
  cfg.num_trials = 10;
  const auto r = run_sweep(cfg);
  for (const auto& lo : r.rows)
    for (const auto& hi : r.rows)
      if (lo.label == hi.label && lo.K == 1 && hi.K == 32) CHECK(lo.prob_recovery >= hi.prob_recovery);
}

TEST_CASE("CSV has the documented header and one line per row") {
  const auto r = run_sweep(small_config());
  const std::string csv = results_csv(r);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == kCsvHeader);
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    if (line.rfind("htp,", 0) == 0) CHECK(line.substr(0, 5) == "htp,,");
  }
  CHECK(lines == r.rows.size());
}

TEST_CASE("sweeps are identical across worker counts") {
  ExperimentConfig a = small_config();
  ExperimentConfig b = a;
  b.workers = 3;
  CHECK(results_csv(run_sweep(a)) == results_csv(run_sweep(b)));
}

TEST_CASE("config JSON round trip and validation") {
  for (const auto& name : preset_names()) {
    const auto c = preset(name);
    const auto back = config_from_json(nlohmann::json::parse(config_to_json(c).dump()));
    CHECK(config_to_json(back).dump() == config_to_json(c).dump());
  }
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"n": 10, "bogus": 1})")), ArgumentError);
  CHECK_THROWS_AS(preset("nope"), ArgumentError);
  const auto c = config_from_json(nlohmann::json::parse(R"({"m": 20, "K": [1, 2], "algorithms": [{"algorithm": "htp"}]})"));
  CHECK(c.m_values == std::vector<Index>{20});
  CHECK(c.K_values == std::vector<Index>{1, 2});

  ExperimentConfig bad = small_config();
  bad.num_trials = 0;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad = small_config();
  bad.K_values = {40};
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ArgumentError);
}

TEST_CASE("paper presets carry the published settings") {
  const auto c = preset("paper-msd");
  CHECK(c.n == 512);
  CHECK(c.m_values == std::vector<Index>{256});
  CHECK(c.K_values == std::vector<Index>{51});
  CHECK(c.num_trials == 100);
  CHECK(c.success_tol == 1e-6);
  bool has_htp = false;
  for (const auto& a : c.algorithms) {
    CHECK(a.mu == 0.3);
    if (a.kind == AlgorithmKind::htp) has_htp = true;
    if (a.regularizer) {
      CHECK(a.regularizer->eps == 0.42);
      CHECK(a.regularizer->gamma == 0.3);
    }
  }
  CHECK(has_htp);
}

TEST_CASE("outputs are written to disk") {
  const auto dir = std::filesystem::temp_directory_path() / "rhtp_harness_test";
  std::filesystem::remove_all(dir);
  const auto r = run_sweep(small_config());
  write_outputs(r, dir);
  CHECK(std::filesystem::exists(dir / "results.csv"));
  CHECK(std::filesystem::exists(dir / "results.json"));
  CHECK(std::filesystem::exists(dir / "prob_htp_m32.dat"));
  CHECK(std::filesystem::exists(dir / "msd_htp_m32_K2.dat"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("format_double is the shortest round-trip form") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e-6) == "1e-06");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
