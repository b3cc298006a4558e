#pragma once
// Small CSV writing helpers. Doubles are written with %.17g so outputs are
// value-exact and reruns are byte-identical.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "envgame/errors.hpp"

namespace envgame {

inline std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path, std::ios::trunc) {
    if (!out_) throw ConfigError("output: cannot open " + path);
  }

  void header(const std::vector<std::string>& names) { line(names); }

  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

}  // namespace envgame
