#include <cstring>
#include <filesystem>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "aadl/storage.hpp"
#include "oracles.hpp"

using namespace aadl;
using namespace aadl::storage;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("aadl_storage_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string parse_error(std::string_view text) {
  try {
    parse_matrix_csv(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    return e.what();
  }
  ADD_FAILURE() << "no error for: " << text;
  return {};
}

}  // namespace

TEST(MatrixCsv, SingleValueIsShortestForm) {
  const fs::path dir = scratch_dir("single");
  write_matrix(Matrix::Constant(1, 1, 0.1), dir / "m.csv");
  EXPECT_EQ(read_text(dir / "m.csv"), "0.1");
}

TEST(MatrixCsv, RandomRoundTripIsBitwise) {
  std::mt19937_64 rng(61);
  Matrix m = oracle::random_matrix(50, 50, rng);
  m(0, 0) = std::numeric_limits<double>::denorm_min();
  m(0, 1) = -std::numeric_limits<double>::max();
  m(0, 2) = 1.0 / 3.0;
  m(0, 3) = -0.0;
  const fs::path dir = scratch_dir("roundtrip");
  write_matrix(m, dir / "m.csv");
  const Matrix back = read_matrix(dir / "m.csv");
  ASSERT_EQ(back.rows(), 50);
  ASSERT_EQ(back.cols(), 50);
  for (Index i = 0; i < m.size(); ++i)
    EXPECT_EQ(std::memcmp(&m(i), &back(i), sizeof(double)), 0) << i;
}

TEST(MatrixCsv, NonFiniteIsRefused) {
  Matrix m = Matrix::Ones(2, 2);
  m(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(matrix_to_csv(m), Error);
  m(1, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(matrix_to_csv(m), Error);
}

TEST(MatrixCsv, ParsesSmallMatrix) {
  Matrix expected(2, 2);
  expected << 1, 2, 3, 4;
  EXPECT_EQ(parse_matrix_csv("1,2\n3,4"), expected);
  EXPECT_EQ(parse_matrix_csv("1,2\r\n3,4\n"), expected);
}

TEST(MatrixCsv, ErrorsCarryLocation) {
  EXPECT_NE(parse_error("").find("empty matrix"), std::string::npos);
  EXPECT_NE(parse_error("1,2\n3").find("ragged row at line 2"), std::string::npos);
  const std::string bad = parse_error("1,2\n3,x4");
  EXPECT_NE(bad.find("'x4'"), std::string::npos);
  EXPECT_NE(bad.find("line 2, field 2"), std::string::npos);
  EXPECT_NE(parse_error("1,nan").find("field 2"), std::string::npos);
  EXPECT_NE(parse_error("1,2\n\n3,4").find("blank line 2"), std::string::npos);
}

TEST(MatrixCsv, MissingFileIsIoError) {
  try {
    read_matrix("/nonexistent/m.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
    EXPECT_NE(std::string(e.what()).find("/nonexistent/m.csv"), std::string::npos);
  }
}

TEST(Sha256, KnownDigests) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Manifest, RecordsShapesAndDetectsTampering) {
  const fs::path dir = scratch_dir("manifest");
  std::mt19937_64 rng(62);
  write_matrix(oracle::random_matrix(3, 4, rng), dir / "A.csv");
  write_json(json{{"k", 1}}, dir / "meta.json");
  const BundleManifest m = make_manifest(dir, {"A.csv"}, {"meta.json"});
  ASSERT_EQ(m.entries.size(), 2u);
  EXPECT_EQ(m.entries[0].rows, 3);
  EXPECT_EQ(m.entries[0].cols, 4);
  EXPECT_EQ(m.to_json()["files"][0]["rows"], 3);
  EXPECT_FALSE(m.to_json()["files"][1].contains("rows"));
  EXPECT_TRUE(verify_manifest(dir, m).empty());

  // Flip one byte of every position in turn; each change must be detected.
  const std::string original = read_text(dir / "meta.json");
  for (std::size_t i = 0; i < original.size(); ++i) {
    std::string corrupt = original;
    corrupt[i] = static_cast<char>(corrupt[i] ^ 0x01);
    write_text(dir / "meta.json", corrupt);
    EXPECT_EQ(verify_manifest(dir, m), std::vector<std::string>{"meta.json"}) << i;
  }
  write_text(dir / "meta.json", original);
  fs::remove(dir / "A.csv");
  EXPECT_EQ(verify_manifest(dir, m), std::vector<std::string>{"A.csv"});
}

TEST(Json, ParseErrorNamesFile) {
  const fs::path dir = scratch_dir("json");
  write_text(dir / "bad.json", "{\"a\": ");
  try {
    read_json(dir / "bad.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_NE(std::string(e.what()).find("bad.json"), std::string::npos);
  }
}
