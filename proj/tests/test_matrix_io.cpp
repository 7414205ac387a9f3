#include <doctest.h>

#include "oracles.hpp"
#include "rhtp/matrix_io.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rhtp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "rhtp_test_matrix_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("binary matrix round trip is bit exact") {
  const Matrix a = oracle::gaussian(5, 7, 1.0, 1);
  std::stringstream buf;
  io::write_matrix(buf, a);
  const std::string bytes = buf.str();
  REQUIRE(bytes.size() == 8 + 16 + 8 * 35);
  CHECK(std::memcmp(bytes.data(), "RHTPMAT1", 8) == 0);
  // rows as little-endian u64
  CHECK(static_cast<unsigned char>(bytes[8]) == 5);
  CHECK(bytes[9] == 0);
  CHECK(static_cast<unsigned char>(bytes[16]) == 7);

  const Matrix b = io::read_matrix(buf);
  CHECK(b.rows() == 5);
  CHECK(b.cols() == 7);
  CHECK(b == a);

  // First payload double is a(0, 0): column-major order.
  double first;
  std::memcpy(&first, bytes.data() + 24, 8);
  CHECK(first == a(0, 0));
  double second;
  std::memcpy(&second, bytes.data() + 32, 8);
  CHECK(second == a(1, 0));
}

TEST_CASE("binary reader rejects bad input") {
  std::stringstream bad("NOTAMATRIX-------------------");
  CHECK_THROWS_AS(io::read_matrix(bad), ArgumentError);

  std::stringstream buf;
  io::write_matrix(buf, Matrix::Ones(3, 3));
  std::string truncated = buf.str().substr(0, 40);
  std::stringstream t(truncated);
  CHECK_THROWS_AS(io::read_matrix(t), ArgumentError);

  CHECK_THROWS_AS(io::read_matrix(fs::path("/nonexistent/rhtp.mat")), ArgumentError);
}

TEST_CASE("file round trip and format detection") {
  const Matrix a = oracle::gaussian(4, 6, 1.0, 2);
  const auto bin = scratch("a.mat");
  io::write_matrix(bin, a);
  CHECK(io::load_matrix(bin) == a);

  const auto csv = scratch("a.csv");
  io::write_matrix_csv(csv, a);
  CHECK(io::load_matrix(csv) == a);
}

TEST_CASE("CSV loader skips comments and rejects ragged rows") {
  const auto p = scratch("b.csv");
  {
    std::ofstream f(p);
    f << "# header\n1, 2, 3\n\n4,5,6\n";
  }
  const Matrix m = io::read_matrix_csv(p);
  Matrix expect(2, 3);
  expect << 1, 2, 3, 4, 5, 6;
  CHECK(m == expect);

  {
    std::ofstream f(p);
    f << "1,2\n3\n";
  }
  CHECK_THROWS_AS(io::read_matrix_csv(p), ArgumentError);
  {
    std::ofstream f(p);
    f << "1,abc\n";
  }
  CHECK_THROWS_AS(io::read_matrix_csv(p), ArgumentError);
}
