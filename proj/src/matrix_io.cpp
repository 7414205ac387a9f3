#include "rhtp/matrix_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace rhtp::io {

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(b.data(), 8);
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  in.read(reinterpret_cast<char*>(b.data()), 8);
  if (!in) throw ArgumentError("matrix file truncated in header");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
  return v;
}

}  // namespace

void write_matrix(std::ostream& out, const Matrix& a) {
  out.write(kMatrixMagic, 8);
  put_u64(out, static_cast<std::uint64_t>(a.rows()));
  put_u64(out, static_cast<std::uint64_t>(a.cols()));
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) put_u64(out, std::bit_cast<std::uint64_t>(a(i, j)));
  if (!out) throw Error("failed writing matrix");
}

Matrix read_matrix(std::istream& in) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMatrixMagic, 8) != 0)
    throw ArgumentError("not an RHTPMAT1 matrix file");
  const std::uint64_t rows = get_u64(in);
  const std::uint64_t cols = get_u64(in);
  if (rows > (1u << 24) || cols > (1u << 24)) throw ArgumentError("matrix dimensions implausible");
  Matrix a(static_cast<Index>(rows), static_cast<Index>(cols));
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) a(i, j) = std::bit_cast<double>(get_u64(in));
  return a;
}

void write_matrix(const std::filesystem::path& path, const Matrix& a) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_matrix(out, a);
}

Matrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open " + path.string());
  return read_matrix(in);
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto first = cell.find_first_not_of(" \t");
      const auto last = cell.find_last_not_of(" \t");
      if (first == std::string::npos) throw ArgumentError("empty CSV cell in " + path.string());
      const std::string tok = cell.substr(first, last - first + 1);
      double v = 0.0;
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || p != tok.data() + tok.size())
        throw ArgumentError("bad number '" + tok + "' in " + path.string());
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ArgumentError("ragged CSV rows in " + path.string());
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ArgumentError("empty CSV matrix " + path.string());
  Matrix a(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) a(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return a;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& a) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  std::array<char, 32> buf{};
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), a(i, j));
      (void)ec;
      if (j) out << ',';
      out.write(buf.data(), p - buf.data());
    }
    out << '\n';
  }
}

Matrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open " + path.string());
  char magic[8] = {};
  in.read(magic, 8);
  if (in && std::memcmp(magic, kMatrixMagic, 8) == 0) {
    in.seekg(0);
    return read_matrix(in);
  }
  return read_matrix_csv(path);
}

}  // namespace rhtp::io
