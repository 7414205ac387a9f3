#include "rhtp/harness.hpp"

#include "rhtp/trace_io.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace rhtp::bench {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string_view to_string(Ensemble e) {
  switch (e) {
    case Ensemble::gaussian: return "gaussian";
    case Ensemble::tight_frame: return "tight_frame";
  }
  return "unknown";
}

Ensemble ensemble_from_string(std::string_view s) {
  if (s == "gaussian") return Ensemble::gaussian;
  if (s == "tight_frame") return Ensemble::tight_frame;
  throw ArgumentError("unknown ensemble: " + std::string(s));
}

Regularizer RegularizerSpec::build(Index n) const {
  if (kind == "zero") return Regularizer::zero(n);
  if (kind == "smooth_power") return Regularizer::uniform(q, eps, gamma, n);
  throw ArgumentError("unknown regularizer kind: " + kind);
}

std::string AlgorithmSpec::label() const {
  if (kind != AlgorithmKind::rhtp) return std::string(to_string(kind));
  if (!regularizer || regularizer->kind == "zero") return "rhtp_zero";
  return "rhtp_q" + format_double(regularizer->q);
}

std::optional<double> AlgorithmSpec::q() const {
  if (kind == AlgorithmKind::rhtp && regularizer && regularizer->kind == "smooth_power")
    return regularizer->q;
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  if (n < 1) throw ArgumentError("n must be positive");
  if (m_values.empty()) throw ArgumentError("m sweep must be nonempty");
  if (K_values.empty()) throw ArgumentError("K sweep must be nonempty");
  for (Index m : m_values)
    if (m < 1 || m > n) throw ArgumentError("every m must satisfy 1 <= m <= n");
  for (Index K : K_values)
    for (Index m : m_values)
      if (K < 1 || K > m) throw ArgumentError("every K must satisfy 1 <= K <= m");
  if (num_trials < 1) throw ArgumentError("num_trials must be at least 1");
  if (!(success_tol > 0.0)) throw ArgumentError("success_tol must be positive");
  if (max_iters < 0) throw ArgumentError("max_iters must be nonnegative");
  if (!(noise_std >= 0.0)) throw ArgumentError("noise_std must be nonnegative");
  if (algorithms.empty()) throw ArgumentError("at least one algorithm is required");
  if (workers < 0) throw ArgumentError("workers must be nonnegative");
  for (const auto& a : algorithms) {
    if (!(a.mu > 0.0)) throw ArgumentError("algorithm step size mu must be positive");
    if (a.kind == AlgorithmKind::rhtp) {
      if (!a.regularizer) throw ArgumentError("rhtp entries need a regularizer");
      a.regularizer->build(1);  // parameter validation
    }
  }
}

// ---------------------------------------------------------------------------
// JSON

namespace {

std::vector<Index> index_list(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_number_integer()) return {v.get<Index>()};
  if (v.is_array()) return v.get<std::vector<Index>>();
  throw ArgumentError(std::string("config key '") + key + "' must be an integer or a list");
}

AlgorithmKind algorithm_from_string(const std::string& s) {
  if (s == "rhtp") return AlgorithmKind::rhtp;
  if (s == "htp") return AlgorithmKind::htp;
  if (s == "iht") return AlgorithmKind::iht;
  throw ArgumentError("unknown algorithm: " + s);
}

const std::vector<std::string> kConfigKeys = {
    "name",     "n",           "m",          "K",        "num_trials", "seed",   "algorithms",
    "success_tol", "max_iters", "noise_std", "ensemble", "output_dir", "workers", "traces",
    "trace_full"};

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ArgumentError("config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end())
      throw ArgumentError("unknown config key: " + key);
  ExperimentConfig c;
  try {
    if (j.contains("name")) c.name = j["name"].get<std::string>();
    if (j.contains("n")) c.n = j["n"].get<Index>();
    if (j.contains("m")) c.m_values = index_list(j, "m");
    if (j.contains("K")) c.K_values = index_list(j, "K");
    if (j.contains("num_trials")) c.num_trials = j["num_trials"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("success_tol")) c.success_tol = j["success_tol"].get<double>();
    if (j.contains("max_iters")) c.max_iters = j["max_iters"].get<int>();
    if (j.contains("noise_std")) c.noise_std = j["noise_std"].get<double>();
    if (j.contains("ensemble")) c.ensemble = ensemble_from_string(j["ensemble"].get<std::string>());
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("workers")) c.workers = j["workers"].get<int>();
    if (j.contains("traces")) c.write_traces = j["traces"].get<bool>();
    if (j.contains("trace_full")) c.trace_full = j["trace_full"].get<bool>();
    if (j.contains("algorithms")) {
      for (const auto& a : j["algorithms"]) {
        AlgorithmSpec s;
        s.kind = algorithm_from_string(a.at("algorithm").get<std::string>());
        if (a.contains("mu")) s.mu = a["mu"].get<double>();
        if (a.contains("regularizer")) {
          const auto& r = a["regularizer"];
          RegularizerSpec rs;
          rs.kind = r.at("kind").get<std::string>();
          if (r.contains("q")) rs.q = r["q"].get<double>();
          if (r.contains("eps")) rs.eps = r["eps"].get<double>();
          if (r.contains("gamma")) rs.gamma = r["gamma"].get<double>();
          s.regularizer = rs;
        }
        c.algorithms.push_back(s);
      }
    }
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("invalid config: ") + e.what());
  }
  c.validate();
  return c;
}

ojson config_to_json(const ExperimentConfig& c) {
  ojson j;
  j["name"] = c.name;
  j["n"] = c.n;
  j["m"] = c.m_values.size() == 1 ? ojson(c.m_values[0]) : ojson(c.m_values);
  j["K"] = c.K_values.size() == 1 ? ojson(c.K_values[0]) : ojson(c.K_values);
  j["num_trials"] = c.num_trials;
  j["seed"] = c.seed;
  ojson algos = ojson::array();
  for (const auto& a : c.algorithms) {
    ojson e;
    e["algorithm"] = std::string(to_string(a.kind));
    e["mu"] = a.mu;
    if (a.regularizer) {
      ojson r;
      r["kind"] = a.regularizer->kind;
      if (a.regularizer->kind != "zero") {
        r["q"] = a.regularizer->q;
        r["eps"] = a.regularizer->eps;
        r["gamma"] = a.regularizer->gamma;
      }
      e["regularizer"] = r;
    }
    algos.push_back(e);
  }
  j["algorithms"] = algos;
  j["success_tol"] = c.success_tol;
  j["max_iters"] = c.max_iters;
  j["noise_std"] = c.noise_std;
  j["ensemble"] = std::string(to_string(c.ensemble));
  j["output_dir"] = c.output_dir;
  j["workers"] = c.workers;
  j["traces"] = c.write_traces;
  j["trace_full"] = c.trace_full;
  return j;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open config file: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ArgumentError("cannot parse config file " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Presets

namespace {

std::vector<AlgorithmSpec> paper_algorithms() {
  std::vector<AlgorithmSpec> out;
  for (double q : {0.5, 1.0, 1.5, 2.0}) {
    AlgorithmSpec a;
    a.kind = AlgorithmKind::rhtp;
    a.regularizer = RegularizerSpec{"smooth_power", q, 0.42, 0.3};
    a.mu = 0.3;
    out.push_back(a);
  }
  AlgorithmSpec h;
  h.kind = AlgorithmKind::htp;
  h.mu = 0.3;
  out.push_back(h);
  return out;
}

std::vector<Index> range(Index lo, Index hi, Index step) {
  std::vector<Index> v;
  for (Index x = lo; x <= hi; x += step) v.push_back(x);
  return v;
}

}  // namespace

std::vector<std::string> preset_names() { return {"paper-msd", "paper-fig2", "paper-fig3", "smoke"}; }

ExperimentConfig preset(std::string_view name) {
  ExperimentConfig c;
  c.name = std::string(name);
  c.n = 512;
  c.num_trials = 100;
  c.seed = 20190101;
  c.success_tol = 1e-6;
  c.max_iters = 100;
  c.algorithms = paper_algorithms();
  if (name == "paper-msd") {
    c.m_values = {256};
    c.K_values = {51};
    c.output_dir = "results/paper-msd";
  } else if (name == "paper-fig2") {
    c.m_values = {256};
    c.K_values = range(11, 131, 10);
    c.output_dir = "results/paper-fig2";
  } else if (name == "paper-fig3") {
    c.m_values = range(128, 320, 16);
    c.K_values = {51};
    c.output_dir = "results/paper-fig3";
  } else if (name == "smoke") {
    c.n = 64;
    c.m_values = {32};
    c.K_values = {2, 4};
    c.num_trials = 4;
    c.output_dir = "results/smoke";
  } else {
    throw ArgumentError("unknown preset: " + std::string(name));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Instances

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t base, Index m, Index K, int trial) {
  std::uint64_t s = splitmix64(base);
  s = splitmix64(s ^ static_cast<std::uint64_t>(m));
  s = splitmix64(s ^ static_cast<std::uint64_t>(K));
  return splitmix64(s ^ static_cast<std::uint64_t>(trial));
}

ProblemInstance generate_instance(Index n, Index m, Index K, double noise_std, std::uint64_t seed,
                                  Ensemble ensemble) {
  if (m < 1 || m > n || K < 1 || K > m) throw ArgumentError("invalid instance dimensions");
  if (!(noise_std >= 0.0)) throw ArgumentError("noise_std must be nonnegative");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, 1.0);

  Matrix phi(m, n);
  if (ensemble == Ensemble::gaussian) {
    const double sd = 1.0 / std::sqrt(static_cast<double>(m));
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < m; ++i) phi(i, j) = sd * nd(gen);
  } else {
    Matrix g(n, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) g(i, j) = nd(gen);
    Eigen::HouseholderQR<Matrix> qr(g);
    const Matrix Q = qr.householderQ();
    phi = Q.topRows(m);
    for (Index j = 0; j < n; ++j) phi.col(j).normalize();
  }

  // Uniform size-K support by partial Fisher-Yates.
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (Index i = 0; i < K; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(gen))]);
  }
  Vector x = Vector::Zero(n);
  for (Index i = 0; i < K; ++i) {
    double v = nd(gen);
    while (v == 0.0) v = nd(gen);
    x[idx[static_cast<std::size_t>(i)]] = v;
  }

  Vector e = Vector::Zero(m);
  if (noise_std > 0.0)
    for (Index i = 0; i < m; ++i) e[i] = noise_std * nd(gen);
  Vector y = phi * x + e;
  return ProblemInstance(std::move(phi), std::move(y), K, std::move(x), std::move(e));
}

// ---------------------------------------------------------------------------
// Trials

TrialResult run_trial(const ExperimentConfig& cfg, Index m, Index K, int trial, bool keep_traces) {
  TrialResult out;
  out.seed = trial_seed(cfg.seed, m, K, trial);
  const ProblemInstance inst = generate_instance(cfg.n, m, K, cfg.noise_std, out.seed, cfg.ensemble);
  const Vector& xs = *inst.x_star();

  for (const auto& spec : cfg.algorithms) {
    AlgoConfig a;
    a.algorithm = spec.kind;
    if (spec.kind == AlgorithmKind::rhtp) a.regularizer = spec.regularizer->build(cfg.n);
    a.mu = spec.mu;
    a.K = K;
    a.max_iters = cfg.max_iters;
    a.stop = StopRule::error_below(cfg.success_tol);
    IterationTrace t = run(inst, a);

    AlgoTrialResult r;
    r.status = t.status;
    r.iters = t.iterations_used;
    r.final_error = (t.last().x.values - xs).norm();
    r.recovered = r.final_error < cfg.success_tol;
    r.msd.reserve(t.records.size());
    for (const auto& rec : t.records) r.msd.push_back((rec.x.values - xs).squaredNorm());
    out.per_algo.push_back(std::move(r));
    if (keep_traces) out.traces.push_back(std::move(t));
  }
  return out;
}

int effective_workers(const ExperimentConfig& cfg) {
  int w = cfg.workers;
  if (const char* env = std::getenv("RHTP_WORKERS")) {
    int v = 0;
    const std::string_view s(env);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || v < 0)
      throw ArgumentError("RHTP_WORKERS must be a nonnegative integer");
    w = v;
  }
  if (w == 0) w = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return w;
}

SweepResult run_sweep(const ExperimentConfig& cfg, const std::optional<fs::path>& trace_dir) {
  cfg.validate();
  struct Task {
    Index m, K;
    int trial;
  };
  std::vector<Task> tasks;
  for (Index m : cfg.m_values)
    for (Index K : cfg.K_values)
      if (K <= m)
        for (int t = 0; t < cfg.num_trials; ++t) tasks.push_back({m, K, t});

  const bool traces = cfg.write_traces && trace_dir.has_value();
  if (traces) fs::create_directories(*trace_dir);

  std::vector<TrialResult> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        const Task& t = tasks[i];
        results[i] = run_trial(cfg, t.m, t.K, t.trial, traces);
        if (traces) {
          for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
            std::ostringstream name;
            name << cfg.algorithms[a].label() << "_m" << t.m << "_K" << t.K << "_t" << t.trial
                 << ".jsonl";
            std::ofstream f(*trace_dir / name.str());
            io::write_trace_jsonl(f, results[i].traces[a], cfg.trace_full);
          }
          results[i].traces.clear();
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const int nw = std::min<int>(effective_workers(cfg), static_cast<int>(std::max<std::size_t>(1, tasks.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < nw; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);

  SweepResult out;
  out.config = cfg;
  const std::size_t curve_len = static_cast<std::size_t>(cfg.max_iters) + 1;
  std::size_t cursor = 0;
  for (Index m : cfg.m_values) {
    for (Index K : cfg.K_values) {
      if (K > m) continue;
      const std::size_t begin = cursor;
      cursor += static_cast<std::size_t>(cfg.num_trials);
      for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
        PointResult p;
        p.label = cfg.algorithms[a].label();
        p.algo = std::string(to_string(cfg.algorithms[a].kind));
        p.q = cfg.algorithms[a].q();
        p.K = K;
        p.m = m;
        p.n = cfg.n;
        p.trials = cfg.num_trials;
        p.mean_msd.assign(curve_len, 0.0);
        double iter_sum = 0.0, err_sum = 0.0;
        for (std::size_t t = begin; t < cursor; ++t) {
          const AlgoTrialResult& r = results[t].per_algo[a];
          if (r.recovered) {
            ++p.recovered;
            iter_sum += r.iters;
          }
          if (r.status == TerminalStatus::failed) ++p.failed_runs;
          err_sum += r.final_error;
          for (std::size_t k = 0; k < curve_len; ++k)
            p.mean_msd[k] += k < r.msd.size() ? r.msd[k] : r.msd.back();
        }
        const double nt = static_cast<double>(cfg.num_trials);
        for (double& v : p.mean_msd) v /= nt;
        p.prob_recovery = p.recovered / nt;
        p.mean_iters = p.recovered ? iter_sum / p.recovered : std::nan("");
        p.mean_final_error = err_sum / nt;
        out.rows.push_back(std::move(p));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string results_csv(const SweepResult& r) {
  std::ostringstream s;
  s << kCsvHeader << '\n';
  for (const auto& p : r.rows) {
    s << p.algo << ',' << (p.q ? format_double(*p.q) : "") << ',' << p.K << ',' << p.m << ','
      << p.n << ',' << p.trials << ',' << format_double(p.prob_recovery) << ','
      << format_double(p.mean_iters) << ',' << format_double(p.mean_final_error) << '\n';
  }
  return s.str();
}

ojson results_json(const SweepResult& r) {
  ojson j;
  j["config"] = config_to_json(r.config);
  ojson rows = ojson::array();
  for (const auto& p : r.rows) {
    ojson e;
    e["label"] = p.label;
    e["algo"] = p.algo;
    e["q"] = p.q ? ojson(*p.q) : ojson(nullptr);
    e["K"] = p.K;
    e["m"] = p.m;
    e["n"] = p.n;
    e["trials"] = p.trials;
    e["recovered"] = p.recovered;
    e["failures"] = p.trials - p.recovered;
    e["failed_runs"] = p.failed_runs;
    e["prob_recovery"] = p.prob_recovery;
    e["mean_iters"] = std::isnan(p.mean_iters) ? ojson(nullptr) : ojson(p.mean_iters);
    e["mean_final_error"] = p.mean_final_error;
    e["mean_msd"] = p.mean_msd;
    rows.push_back(e);
  }
  j["rows"] = rows;
  return j;
}

namespace {

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ArgumentError("cannot write " + p.string());
  f << content;
}

}  // namespace

void write_curves(const std::vector<PointResult>& rows, const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<std::string> labels;
  std::set<Index> ms, Ks;
  for (const auto& p : rows) {
    if (std::find(labels.begin(), labels.end(), p.label) == labels.end()) labels.push_back(p.label);
    ms.insert(p.m);
    Ks.insert(p.K);
  }
  const auto curve = [&](const std::string& label, bool against_K, Index fixed) {
    std::ostringstream s, it;
    const char* axis = against_K ? "K" : "m";
    s << "# " << axis << " prob_recovery\n";
    it << "# " << axis << " mean_iters\n";
    for (const auto& p : rows) {
      if (p.label != label || (against_K ? p.m : p.K) != fixed) continue;
      const Index x = against_K ? p.K : p.m;
      s << x << ' ' << format_double(p.prob_recovery) << '\n';
      it << x << ' ' << format_double(p.mean_iters) << '\n';
    }
    const std::string suffix = label + (against_K ? "_m" : "_K") + std::to_string(fixed) + ".dat";
    write_file(dir / ("prob_" + suffix), s.str());
    write_file(dir / ("iters_" + suffix), it.str());
  };
  for (const auto& label : labels) {
    if (Ks.size() > 1)
      for (Index m : ms) curve(label, true, m);
    if (ms.size() > 1)
      for (Index K : Ks) curve(label, false, K);
    for (const auto& p : rows) {
      if (p.label != label || p.mean_msd.empty()) continue;
      std::ostringstream s;
      s << "# iteration mean_msd\n";
      for (std::size_t k = 0; k < p.mean_msd.size(); ++k) s << k << ' ' << format_double(p.mean_msd[k]) << '\n';
      write_file(dir / ("msd_" + label + "_m" + std::to_string(p.m) + "_K" + std::to_string(p.K) + ".dat"),
                 s.str());
    }
  }
}

void write_outputs(const SweepResult& r, const fs::path& dir) {
  fs::create_directories(dir);
  write_file(dir / "results.csv", results_csv(r));
  write_file(dir / "results.json", results_json(r).dump(2) + "\n");
  write_curves(r.rows, dir);
}

std::vector<PointResult> parse_results_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw ArgumentError("results CSV must start with the header: " + std::string(kCsvHeader));
  std::vector<PointResult> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 9) throw ArgumentError("results CSV line " + std::to_string(lineno) + ": expected 9 fields");
    try {
      PointResult p;
      p.algo = f[0];
      if (!f[1].empty()) p.q = std::stod(f[1]);
      p.label = p.q ? p.algo + "_q" + format_double(*p.q) : p.algo;
      p.K = std::stol(f[2]);
      p.m = std::stol(f[3]);
      p.n = std::stol(f[4]);
      p.trials = std::stoi(f[5]);
      p.prob_recovery = std::stod(f[6]);
      p.mean_iters = std::stod(f[7]);
      p.mean_final_error = std::stod(f[8]);
      p.recovered = static_cast<int>(std::lround(p.prob_recovery * p.trials));
      rows.push_back(std::move(p));
    } catch (const std::logic_error&) {
      throw ArgumentError("results CSV line " + std::to_string(lineno) + ": malformed number");
    }
  }
  return rows;
}

}  // namespace rhtp::bench
