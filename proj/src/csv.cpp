#include "mobiscope/csv.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "mobiscope/error.hpp"

namespace mobiscope::csv {

namespace {

void split(std::string_view line, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

Reader::Reader(const std::filesystem::path& path) : path_(path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  buffer_ = std::move(ss).str();
  if (!next()) throw Error(Errc::ParseError, path.string() + ":1: missing header row");
  header_.assign(fields_.begin(), fields_.end());
}

bool Reader::next() {
  if (pos_ >= buffer_.size()) return false;
  std::size_t end = buffer_.find('\n', pos_);
  if (end == std::string::npos) end = buffer_.size();
  std::string_view line(buffer_.data() + pos_, end - pos_);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  pos_ = end + 1;
  ++line_;
  if (line.empty()) fail("blank line");
  split(line, fields_);
  return true;
}

void Reader::fail(const std::string& what) const {
  throw Error(Errc::ParseError, path_.string() + ":" + std::to_string(line_) + ": " + what);
}

void Reader::expect_width(std::size_t n) const {
  if (fields_.size() != n) {
    fail("expected " + std::to_string(n) + " columns, found " + std::to_string(fields_.size()));
  }
}

std::int64_t Reader::int64_at(std::size_t i) const {
  const std::string_view f = fields_.at(i);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || ptr != f.data() + f.size() || f.empty()) {
    fail("column " + std::to_string(i + 1) + ": invalid integer '" + std::string(f) + "'");
  }
  return v;
}

double Reader::double_at(std::size_t i) const {
  const std::string_view f = fields_.at(i);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || ptr != f.data() + f.size() || f.empty()) {
    fail("column " + std::to_string(i + 1) + ": invalid number '" + std::string(f) + "'");
  }
  if (!std::isfinite(v)) fail("column " + std::to_string(i + 1) + ": non-finite value");
  return v;
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

Writer::Writer(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary) {
  if (!out_) throw Error(Errc::IoError, "cannot write " + path.string());
  for (const auto& h : header) field(std::string_view(h));
  end_row();
}

Writer::~Writer() { out_.flush(); }

Writer& Writer::field(std::int64_t v) {
  if (!first_) row_.push_back(',');
  row_ += std::to_string(v);
  first_ = false;
  return *this;
}

Writer& Writer::field(double v) {
  if (!first_) row_.push_back(',');
  row_ += format_double(v);
  first_ = false;
  return *this;
}

Writer& Writer::field(std::string_view v) {
  if (!first_) row_.push_back(',');
  row_ += v;
  first_ = false;
  return *this;
}

void Writer::end_row() {
  row_.push_back('\n');
  out_ << row_;
  row_.clear();
  first_ = true;
  if (!out_) throw Error(Errc::IoError, "write failed");
}

}  // namespace mobiscope::csv
