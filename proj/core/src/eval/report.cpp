#include "slic/eval/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "slic/manifest.hpp"

namespace slic {

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) os << ',';
    os << csv_escape(header[i]);
  }
  os << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::logic_error("write_csv: row width mismatch for " + path);
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << csv_escape(row[i]);
    }
    os << '\n';
  }
  write_text_atomic(path, os.str());
}

std::string format_num(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace slic
