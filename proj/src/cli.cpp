#include "rhtp/cli.hpp"

#include "rhtp/analysis_report.hpp"
#include "rhtp/harness.hpp"
#include "rhtp/matrix_io.hpp"
#include "rhtp/trace_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

namespace rhtp::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace rhtp::bench;

// Errors raised while reading inputs or options map to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << text;
}

Vector load_vector(const fs::path& path) {
  Matrix a;
  try {
    a = io::load_matrix(path);
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  if (a.cols() == 1) return a.col(0);
  if (a.rows() == 1) return a.row(0).transpose();
  throw ConfigError(path.string() + " does not hold a vector");
}

// Fills in vectors of a compact trace. For pursuit algorithms x^k is the
// least-squares fit on the recorded support and x_hat^{k+1} is the
// identification argument at x^k restricted to support k+1.
void reconstruct_vectors(IterationTrace& trace, const ProblemInstance& inst, double mu,
                         const Regularizer* reg) {
  auto& recs = trace.records;
  for (std::size_t k = 1; k < recs.size(); ++k)
    recs[k].x = restricted_least_squares(inst, recs[k].x.support);
  for (std::size_t k = 0; k + 1 < recs.size(); ++k) {
    const Vector arg = identification_argument(inst, mu, reg, recs[k].x.values);
    Vector hat = Vector::Zero(inst.n());
    for (Index i : recs[k + 1].x.support) hat[i] = arg[i];
    recs[k + 1].x_hat = std::move(hat);
  }
}

bool trace_is_full(const fs::path& path) {
  std::ifstream f(path);
  std::string line;
  if (!std::getline(f, line)) throw ConfigError("empty trace " + path.string());
  try {
    return ordered_json::parse(line).contains("x");
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("malformed trace " + path.string());
  }
}

IterationTrace load_trace(const fs::path& path, const ProblemInstance& inst, AlgorithmKind kind,
                          double mu, const Regularizer* reg) {
  if (!fs::exists(path)) throw ConfigError("trace not found: " + path.string());
  const bool full = trace_is_full(path);
  std::ifstream f(path);
  IterationTrace trace;
  try {
    trace = io::read_trace_jsonl(f, inst.n());
  } catch (const ArgumentError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  trace.algorithm = kind;
  if (!full) reconstruct_vectors(trace, inst, mu, reg);
  return trace;
}

ordered_json analyze_one(const ProblemInstance& inst, const IterationTrace& trace,
                         const Regularizer& reg, double mu, std::uint64_t ric_samples) {
  const auto delta =
      analysis::compute_deltas(inst.phi(), analysis::required_orders(inst.K(), inst.n()), ric_samples);
  return analysis::analysis_report(inst, trace, PsiMap(reg), mu, delta);
}

// ---------------------------------------------------------------------------

struct RunOptions {
  std::string config;
  std::optional<std::string> name, output_dir, ensemble;
  std::optional<Index> n;
  std::vector<Index> m, K;
  std::optional<int> num_trials, max_iters, workers;
  std::optional<std::uint64_t> seed;
  std::optional<double> success_tol, noise_std;
  bool traces = false, trace_full = false;
};

void add_run(CLI::App& app, RunOptions& o) {
  auto* run = app.add_subcommand("run", "Execute an experiment config");
  run->add_option("--config", o.config, "Config JSON file")->required();
  run->add_option("--name", o.name);
  run->add_option("--n", o.n, "Signal length");
  run->add_option("--m", o.m, "Measurement counts")->delimiter(',');
  run->add_option("--K", o.K, "Sparsity levels")->delimiter(',');
  run->add_option("--num_trials", o.num_trials);
  run->add_option("--seed", o.seed);
  run->add_option("--success_tol", o.success_tol);
  run->add_option("--max_iters", o.max_iters);
  run->add_option("--noise_std", o.noise_std);
  run->add_option("--ensemble", o.ensemble, "gaussian or tight_frame");
  run->add_option("--output_dir", o.output_dir);
  run->add_option("--workers", o.workers);
  run->add_flag("--traces", o.traces, "Write per-run traces to <output_dir>/traces");
  run->add_flag("--trace_full,--trace-full", o.trace_full, "Include dense vectors in traces");
}

int do_run(const RunOptions& o, std::ostream& out) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(o.config);
    if (o.name) cfg.name = *o.name;
    if (o.n) cfg.n = *o.n;
    if (!o.m.empty()) cfg.m_values = o.m;
    if (!o.K.empty()) cfg.K_values = o.K;
    if (o.num_trials) cfg.num_trials = *o.num_trials;
    if (o.seed) cfg.seed = *o.seed;
    if (o.success_tol) cfg.success_tol = *o.success_tol;
    if (o.max_iters) cfg.max_iters = *o.max_iters;
    if (o.noise_std) cfg.noise_std = *o.noise_std;
    if (o.ensemble) cfg.ensemble = ensemble_from_string(*o.ensemble);
    if (o.output_dir) cfg.output_dir = *o.output_dir;
    if (o.workers) cfg.workers = *o.workers;
    if (o.traces) cfg.write_traces = true;
    if (o.trace_full) cfg.write_traces = cfg.trace_full = true;
    cfg.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  const fs::path dir = cfg.output_dir;
  const auto result = run_sweep(cfg, dir / "traces");
  write_outputs(result, dir);
  write_text(dir / "config.json", config_to_json(cfg).dump(2) + "\n");
  out << results_csv(result);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct AnalyzeOptions {
  // Directory mode: traces written by `run`, instances regenerated from the config.
  std::string config, traces;
  // Single-trace mode.
  std::string matrix, y, x_star, trace, algorithm = "rhtp";
  Index K = 0;
  double mu = 0.3, q = 1.0, eps = 0.42, gamma = 0.3;
  std::uint64_t ric_samples = 200;
  std::string out;
};

void add_analyze(CLI::App& app, AnalyzeOptions& o) {
  auto* a = app.add_subcommand("analyze", "Run the analysis checkers over stored traces");
  a->add_option("--config", o.config, "Config the traces were produced with");
  a->add_option("--traces", o.traces, "Directory of .jsonl traces");
  a->add_option("--matrix", o.matrix, "Sensing matrix (binary or CSV)");
  a->add_option("--y", o.y, "Measurements");
  a->add_option("--x-star,--x_star", o.x_star, "Ground truth, enables contraction and iteration checks");
  a->add_option("--trace", o.trace, "Trace file (.jsonl)");
  a->add_option("--algorithm", o.algorithm, "rhtp or htp");
  a->add_option("--K", o.K);
  a->add_option("--mu", o.mu);
  a->add_option("--q", o.q);
  a->add_option("--eps", o.eps);
  a->add_option("--gamma", o.gamma);
  a->add_option("--ric-samples,--ric_samples", o.ric_samples,
                "Sampled supports per order when exact enumeration is too large");
  a->add_option("--out", o.out, "Write the report here instead of stdout");
}

int do_analyze(const AnalyzeOptions& o, std::ostream& out) {
  ordered_json doc;
  if (!o.traces.empty()) {
    if (o.config.empty()) throw ConfigError("analyze --traces needs --config");
    ExperimentConfig cfg;
    try {
      cfg = load_config(o.config);
    } catch (const ArgumentError& e) {
      throw ConfigError(e.what());
    }
    if (!fs::is_directory(o.traces)) throw ConfigError("not a directory: " + o.traces);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(o.traces))
      if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    const std::regex pattern(R"((.+)_m(\d+)_K(\d+)_t(\d+)\.jsonl)");
    doc = ordered_json::array();
    for (const auto& file : files) {
      std::smatch mt;
      const std::string fname = file.filename().string();
      if (!std::regex_match(fname, mt, pattern)) throw ConfigError("unrecognized trace name " + fname);
      const auto spec = std::find_if(cfg.algorithms.begin(), cfg.algorithms.end(),
                                     [&](const AlgorithmSpec& s) { return s.label() == mt[1].str(); });
      if (spec == cfg.algorithms.end()) throw ConfigError("no algorithm " + mt[1].str() + " in config");
      if (spec->kind == AlgorithmKind::iht) continue;
      const Index m = std::stol(mt[2]), K = std::stol(mt[3]);
      const int t = std::stoi(mt[4]);
      const auto inst = generate_instance(cfg.n, m, K, cfg.noise_std, trial_seed(cfg.seed, m, K, t),
                                          cfg.ensemble);
      const Regularizer reg = spec->regularizer ? spec->regularizer->build(cfg.n) : Regularizer::zero(cfg.n);
      const auto trace = load_trace(file, inst, spec->kind, spec->mu, &reg);
      ordered_json r;
      r["trace"] = fname;
      const ordered_json rep = analyze_one(inst, trace, reg, spec->mu, o.ric_samples);
      for (const auto& [k, v] : rep.items()) r[k] = v;
      doc.push_back(std::move(r));
    }
  } else {
    if (o.matrix.empty() || o.y.empty() || o.trace.empty() || o.K < 1)
      throw ConfigError("analyze needs either --config and --traces, or --matrix, --y, --trace and --K");
    Matrix phi;
    try {
      phi = io::load_matrix(o.matrix);
    } catch (const ArgumentError& e) {
      throw ConfigError(e.what());
    }
    const Vector y = load_vector(o.y);
    const auto inst = [&] {
      try {
        if (o.x_star.empty()) return ProblemInstance(phi, y, o.K);
        const Vector x = load_vector(o.x_star);
        if (x.size() != phi.cols()) throw ConfigError("x-star length does not match the matrix");
        return ProblemInstance(phi, y, o.K, x, y - phi * x);
      } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
      }
    }();
    AlgorithmKind kind;
    if (o.algorithm == "rhtp") kind = AlgorithmKind::rhtp;
    else if (o.algorithm == "htp") kind = AlgorithmKind::htp;
    else throw ConfigError("analyze supports --algorithm rhtp or htp");
    Regularizer reg = Regularizer::zero(inst.n());
    if (kind == AlgorithmKind::rhtp) {
      try {
        reg = Regularizer::uniform(o.q, o.eps, o.gamma, inst.n());
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    }
    const auto trace = load_trace(o.trace, inst, kind, o.mu, &reg);
    doc = analyze_one(inst, trace, reg, o.mu, o.ric_samples);
  }
  const std::string text = doc.dump(2) + "\n";
  if (o.out.empty()) out << text;
  else write_text(o.out, text);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct RicOptions {
  std::string matrix;
  std::vector<Index> orders;
  bool randomized = false;
  std::uint64_t samples = 10000, seed = 0;
};

void add_ric(CLI::App& app, RicOptions& o) {
  auto* r = app.add_subcommand("ric", "Restricted isometry constants of a stored matrix");
  r->add_option("--matrix", o.matrix, "Matrix file (binary or CSV)")->required();
  r->add_option("--order", o.orders, "Orders s")->required()->delimiter(',');
  r->add_flag("--randomized", o.randomized, "Sample supports instead of enumerating");
  r->add_option("--samples", o.samples);
  r->add_option("--seed", o.seed);
}

int do_ric(const RicOptions& o, std::ostream& out) {
  Matrix phi;
  try {
    phi = io::load_matrix(o.matrix);
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  for (Index s : o.orders) {
    if (s < 1 || s > phi.cols()) throw ConfigError("order " + std::to_string(s) + " out of range");
    const auto est = estimate_ric(phi, s, o.randomized ? RicMode::randomized : RicMode::exact,
                                  o.samples, o.seed);
    out << "delta_" << s << ' ' << format_double(est.value) << ' '
        << (est.exact ? "exact" : "lower_bound") << ' ' << est.supports_evaluated << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct ReportOptions {
  std::vector<std::string> inputs;
  std::string out = "report";
};

void add_report(CLI::App& app, ReportOptions& o) {
  auto* r = app.add_subcommand("report", "Merge results CSVs into plot-ready curves");
  r->add_option("--input", o.inputs, "results.csv files or directories holding one")->required();
  r->add_option("--out", o.out, "Output directory");
}

int do_report(const ReportOptions& o, std::ostream& out) {
  std::vector<PointResult> rows;
  for (const auto& in : o.inputs) {
    fs::path p = in;
    if (fs::is_directory(p)) p /= "results.csv";
    if (!fs::exists(p)) throw ConfigError("results not found: " + p.string());
    try {
      auto part = parse_results_csv(read_text(p));
      rows.insert(rows.end(), part.begin(), part.end());
    } catch (const ArgumentError& e) {
      throw ConfigError(p.string() + ": " + e.what());
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const PointResult& a, const PointResult& b) {
    return std::tie(a.label, a.m, a.K) < std::tie(b.label, b.m, b.K);
  });
  SweepResult merged;
  merged.rows = rows;
  write_text(fs::path(o.out) / "results.csv", results_csv(merged));
  write_curves(rows, o.out);
  out << rows.size() << " rows written to " << o.out << '\n';
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse recovery experiments with regularized hard thresholding pursuit", "rhtp"};
  app.require_subcommand(1);

  RunOptions run_opts;
  AnalyzeOptions analyze_opts;
  RicOptions ric_opts;
  ReportOptions report_opts;
  std::string preset_name, preset_out;

  add_run(app, run_opts);
  auto* pre = app.add_subcommand("preset", "Print a named preset config");
  pre->add_option("name", preset_name, "One of: paper-msd, paper-fig2, paper-fig3, smoke")->required();
  pre->add_option("--out", preset_out, "Write to a file instead of stdout");
  add_analyze(app, analyze_opts);
  add_ric(app, ric_opts);
  add_report(app, report_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  try {
    if (app.got_subcommand("run")) return do_run(run_opts, out);
    if (app.got_subcommand("preset")) {
      ExperimentConfig cfg;
      try {
        cfg = preset(preset_name);
      } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
      }
      const std::string text = config_to_json(cfg).dump(2) + "\n";
      if (preset_out.empty()) out << text;
      else write_text(preset_out, text);
      return kExitOk;
    }
    if (app.got_subcommand("analyze")) return do_analyze(analyze_opts, out);
    if (app.got_subcommand("ric")) return do_ric(ric_opts, out);
    if (app.got_subcommand("report")) return do_report(report_opts, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}

int cli_main(int argc, const char* const* argv) { return cli_main(argc, argv, std::cout, std::cerr); }

}  // namespace rhtp::cli
