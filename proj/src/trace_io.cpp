#include "rhtp/trace_io.hpp"

#include <json.hpp>

#include <istream>
#include <ostream>
#include <string>

namespace rhtp::io {

using ojson = nlohmann::ordered_json;

namespace {

ojson dense(const Vector& v) {
  ojson a = ojson::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector to_vector(const ojson& a) {
  Vector v(static_cast<Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Index>(i)] = a[i].get<double>();
  return v;
}

}  // namespace

void write_trace_jsonl(std::ostream& out, const IterationTrace& trace, bool full) {
  for (const auto& rec : trace.records) {
    ojson j;
    j["k"] = rec.k;
    j["support"] = rec.x.support.indices();
    j["residual"] = rec.residual_norm;
    j["error"] = rec.error_norm ? ojson(*rec.error_norm) : ojson(nullptr);
    if (full) {
      j["x"] = dense(rec.x.values);
      j["x_hat"] = dense(rec.x_hat);
    }
    out << j.dump() << '\n';
  }
}

IterationTrace read_trace_jsonl(std::istream& in, Index n) {
  IterationTrace trace;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ojson j;
    try {
      j = ojson::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ArgumentError(std::string("malformed trace line: ") + e.what());
    }
    IterationRecord rec;
    rec.k = j.at("k").get<int>();
    SupportSet support(j.at("support").get<std::vector<Index>>());
    rec.residual_norm = j.at("residual").get<double>();
    if (!j.at("error").is_null()) rec.error_norm = j.at("error").get<double>();
    Vector x = j.contains("x") ? to_vector(j["x"]) : Vector::Zero(n);
    if (x.size() != n) throw ArgumentError("trace vector length does not match n");
    rec.x = {std::move(x), std::move(support)};
    if (j.contains("x_hat")) rec.x_hat = to_vector(j["x_hat"]);
    trace.records.push_back(std::move(rec));
  }
  if (trace.records.empty()) throw ArgumentError("empty trace");
  trace.iterations_used = static_cast<int>(trace.records.size()) - 1;
  return trace;
}

}  // namespace rhtp::io
