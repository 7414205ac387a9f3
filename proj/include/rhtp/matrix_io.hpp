#pragma once

#include "rhtp/common.hpp"

#include <filesystem>
#include <iosfwd>

namespace rhtp::io {

// Binary layout: "RHTPMAT1", rows (u64 LE), cols (u64 LE), then rows*cols
// IEEE-754 doubles (LE) in column-major order. Vectors are rows x 1.
inline constexpr char kMatrixMagic[8] = {'R', 'H', 'T', 'P', 'M', 'A', 'T', '1'};

void write_matrix(std::ostream& out, const Matrix& a);
Matrix read_matrix(std::istream& in);

void write_matrix(const std::filesystem::path& path, const Matrix& a);
Matrix read_matrix(const std::filesystem::path& path);

/// Plain CSV, one matrix row per line. Blank lines and lines starting with
/// '#' are skipped.
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& a);

/// Reads either format; the binary magic decides.
Matrix load_matrix(const std::filesystem::path& path);

}  // namespace rhtp::io
