#pragma once

#include "rhtp/algorithms.hpp"

#include <iosfwd>

namespace rhtp::io {

/// JSON lines, one object per iteration with keys in the fixed order
/// {k, support, residual, error}; with `full`, the dense "x" and "x_hat"
/// vectors follow.
void write_trace_jsonl(std::ostream& out, const IterationTrace& trace, bool full);

/// Reads records written by write_trace_jsonl. Vectors are only restored
/// when the file was written with `full`; n is needed to size them otherwise.
IterationTrace read_trace_jsonl(std::istream& in, Index n);

}  // namespace rhtp::io
