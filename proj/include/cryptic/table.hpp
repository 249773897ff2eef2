#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "cryptic/error.hpp"

namespace cryptic {

/// Renders a real for tables: NaN as "NA", infinities as "INF"/"-INF", otherwise the
/// shortest round-tripping decimal.
inline std::string format_value(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "INF" : "-INF";
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, end);
}

/// Buffered tab-separated table with a header row.
class TsvWriter {
 public:
  TsvWriter(std::filesystem::path path, std::initializer_list<std::string_view> header)
      : path_(std::move(path)) {
    for (auto h : header) cell(h);
    end_row();
  }
  TsvWriter(const TsvWriter&) = delete;
  TsvWriter& operator=(const TsvWriter&) = delete;
  ~TsvWriter() {
    if (!closed_) {
      try {
        close();
      } catch (...) {
      }
    }
  }

  TsvWriter& cell(std::string_view s) {
    if (!row_start_) buf_ += '\t';
    buf_ += s;
    row_start_ = false;
    return *this;
  }
  TsvWriter& cell(double v) { return cell(std::string_view(format_value(v))); }
  TsvWriter& cell(std::int64_t v) { return cell(std::string_view(std::to_string(v))); }
  TsvWriter& cell(int v) { return cell(static_cast<std::int64_t>(v)); }
  TsvWriter& cell(std::size_t v) { return cell(std::string_view(std::to_string(v))); }
  TsvWriter& cell(const std::string& s) { return cell(std::string_view(s)); }
  TsvWriter& cell(const char* s) { return cell(std::string_view(s)); }

  void end_row() {
    buf_ += '\n';
    row_start_ = true;
  }

  void close() {
    closed_ = true;
    std::ofstream os(path_, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ExitCode::kDataIntegrity, "cannot write " + path_.string());
    os.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    if (!os) throw Error(ExitCode::kDataIntegrity, "failed writing " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::string buf_;
  bool row_start_ = true;
  bool closed_ = false;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (header[j] == name) return j;
    }
    throw LookupError("table has no column '" + std::string(name) + "'");
  }
};

inline std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    const auto tab = line.find('\t', pos);
    out.emplace_back(line.substr(pos, tab == std::string_view::npos ? tab : tab - pos));
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  return out;
}

inline Table read_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  Table t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split_tabs(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw ParseError(path.string(), lineno,
                       "expected " + std::to_string(t.header.size()) + " columns");
    }
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw ParseError(path.string(), 1, "missing header");
  return t;
}

/// 64-bit FNV-1a over a byte string.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
  return s;
}

inline std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ExitCode::kMissingArtifact, "cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::vector<char> buf(1 << 20);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h = fnv1a64(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())), h);
  }
  return hex64(h);
}

}  // namespace cryptic
