#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace sqf {

/// Doubles print with 9 significant digits.
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

/// One CSV field. Integers print exactly, reals via format_real.
class Cell {
 public:
  Cell() = default;
  Cell(std::string s) : text_(std::move(s)) {}
  Cell(const char* s) : text_(s) {}
  Cell(bool b) : text_(b ? "true" : "false") {}
  Cell(double v) : text_(format_real(v)) {}
  template <class T, std::enable_if_t<std::is_integral_v<T> && !std::is_same_v<T, bool>, int> = 0>
  Cell(T v) : text_(std::to_string(v)) {}

  [[nodiscard]] const std::string& text() const noexcept { return text_; }

 private:
  std::string text_;
};

/// Comma-separated output with '#' metadata lines and LF endings.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void meta(const std::string& key, const Cell& value) {
    os_ << "# " << key << '=' << value.text() << '\n';
  }
  void comment(const std::string& text) { os_ << "# " << text << '\n'; }

  void header(const std::vector<std::string>& columns) {
    columns_ = columns.size();
    write_line(columns);
  }

  void row(const std::vector<Cell>& cells) {
    std::vector<std::string> text;
    text.reserve(cells.size());
    for (const auto& c : cells) {
      text.push_back(c.text());
    }
    write_line(text);
  }

  [[nodiscard]] std::size_t columns() const noexcept { return columns_; }

 private:
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
      return s;
    }
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') {
        out += '"';
      }
      out += c;
    }
    return out + '"';
  }

  void write_line(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) {
        os_ << ',';
      }
      os_ << quote(fields[i]);
    }
    os_ << '\n';
  }

  std::ostream& os_;
  std::size_t columns_ = 0;
};

}  // namespace sqf
