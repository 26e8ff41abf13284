#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace mobiscope::csv {

/// Line-oriented reader for the comma-separated stream files. Fields are
/// unquoted; blank lines are rejected rather than skipped.
class Reader {
 public:
  explicit Reader(const std::filesystem::path& path);

  const std::vector<std::string>& header() const { return header_; }
  /// Advances to the next data row; false at end of file.
  bool next();
  const std::vector<std::string_view>& fields() const { return fields_; }
  std::size_t line() const { return line_; }
  const std::filesystem::path& path() const { return path_; }

  /// Throws ParseError naming file and current line.
  [[noreturn]] void fail(const std::string& what) const;

  std::int64_t int64_at(std::size_t i) const;
  double double_at(std::size_t i) const;
  /// Requires exactly `n` fields on the current row.
  void expect_width(std::size_t n) const;

 private:
  std::filesystem::path path_;
  std::string buffer_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
  std::vector<std::string> header_;
  std::vector<std::string_view> fields_;
};

/// Shortest representation that parses back to the identical double.
std::string format_double(double v);

/// Buffered writer; flushes on destruction.
class Writer {
 public:
  Writer(const std::filesystem::path& path, const std::vector<std::string>& header);
  ~Writer();
  Writer(const Writer&) = delete;
  Writer& operator=(const Writer&) = delete;

  Writer& field(std::int64_t v);
  Writer& field(double v);
  Writer& field(std::string_view v);
  void end_row();

 private:
  std::ofstream out_;
  std::string row_;
  bool first_ = true;
};

}  // namespace mobiscope::csv
