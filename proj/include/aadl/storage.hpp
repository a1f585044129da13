#pragma once

// Plain-CSV matrix files (no header, row-major, shortest round-trip decimal
// form) and JSON sidecars, plus SHA-256 checksums for bundle manifests.

#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"

#include "aadl/model.hpp"

namespace aadl::storage {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Shortest decimal string that parses back to exactly `v`.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline std::string matrix_to_csv(const Matrix& m) {
  std::string out;
  out.reserve(static_cast<std::size_t>(m.size()) * 20);
  for (Index i = 0; i < m.rows(); ++i) {
    if (i > 0) out += '\n';
    for (Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (!std::isfinite(v))
        throw Error(ErrorKind::InvalidArgument,
                    "refusing to write non-finite entry at (" + std::to_string(i) +
                        ", " + std::to_string(j) + ")");
      if (j > 0) out += ',';
      out += format_double(v);
    }
  }
  return out;
}

inline void write_text(const fs::path& path, std::string_view text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!os) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

inline std::string read_text(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline void write_matrix(const Matrix& m, const fs::path& path) {
  write_text(path, matrix_to_csv(m));
}

inline Matrix parse_matrix_csv(std::string_view text, const std::string& origin = "<csv>") {
  std::vector<double> values;
  Index cols = -1;
  Index rows = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (pos > text.size()) break;  // trailing newline
      throw Error(ErrorKind::Parse, origin + ": blank line " + std::to_string(line_no));
    }
    Index count = 0;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      std::string_view tok = line.substr(start, comma == std::string_view::npos
                                                    ? std::string_view::npos
                                                    : comma - start);
      while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
      while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t')) tok.remove_suffix(1);
      double v = 0.0;
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (tok.empty() || res.ec != std::errc() || res.ptr != tok.data() + tok.size() ||
          !std::isfinite(v))
        throw Error(ErrorKind::Parse, origin + ": invalid number '" + std::string(tok) +
                                          "' at line " + std::to_string(line_no) +
                                          ", field " + std::to_string(count + 1));
      values.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cols < 0) cols = count;
    if (count != cols)
      throw Error(ErrorKind::Parse, origin + ": ragged row at line " +
                                        std::to_string(line_no) + " (" +
                                        std::to_string(count) + " fields, expected " +
                                        std::to_string(cols) + ")");
    ++rows;
  }
  if (rows == 0) throw Error(ErrorKind::Parse, origin + ": empty matrix");
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  return m;
}

inline Matrix read_matrix(const fs::path& path) {
  return parse_matrix_csv(read_text(path), path.string());
}

inline void write_json(const json& j, const fs::path& path) {
  write_text(path, j.dump(2) + "\n");
}

inline json read_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

inline std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::Io, "SHA-256 computation failed");
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(md[i]);
  return os.str();
}

inline std::string sha256_file(const fs::path& path) { return sha256_hex(read_text(path)); }

struct ManifestEntry {
  std::string file;
  Index rows = 0;  // 0 for non-matrix files
  Index cols = 0;
  std::string sha256;
};

struct BundleManifest {
  std::vector<ManifestEntry> entries;

  json to_json() const {
    json files = json::array();
    for (const auto& e : entries) {
      json f = {{"file", e.file}, {"sha256", e.sha256}};
      if (e.rows > 0) f["rows"] = e.rows, f["cols"] = e.cols;
      files.push_back(std::move(f));
    }
    return json{{"files", std::move(files)}};
  }
};

/// Checksums every listed file in `dir`; matrix files also record their shape.
inline BundleManifest make_manifest(const fs::path& dir,
                                    const std::vector<std::string>& matrix_files,
                                    const std::vector<std::string>& other_files) {
  BundleManifest m;
  for (const auto& f : matrix_files) {
    const std::string text = read_text(dir / f);
    const Matrix mat = parse_matrix_csv(text, (dir / f).string());
    m.entries.push_back({f, mat.rows(), mat.cols(), sha256_hex(text)});
  }
  for (const auto& f : other_files) m.entries.push_back({f, 0, 0, sha256_file(dir / f)});
  return m;
}

/// Re-reads every file and compares shape and checksum. Returns the names of
/// files that no longer match.
inline std::vector<std::string> verify_manifest(const fs::path& dir, const BundleManifest& m) {
  std::vector<std::string> bad;
  for (const auto& e : m.entries) {
    try {
      const std::string text = read_text(dir / e.file);
      bool ok = sha256_hex(text) == e.sha256;
      if (ok && e.rows > 0) {
        const Matrix mat = parse_matrix_csv(text);
        ok = mat.rows() == e.rows && mat.cols() == e.cols;
      }
      if (!ok) bad.push_back(e.file);
    } catch (const Error&) {
      bad.push_back(e.file);
    }
  }
  return bad;
}

}  // namespace aadl::storage
