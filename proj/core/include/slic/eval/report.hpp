#pragma once

#include <string>
#include <vector>

namespace slic {

// Minimal CSV writing with RFC-4180-style quoting. Numbers are formatted
// by the caller (format_num below keeps reports diffable).
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::string format_num(double v);  // "%.6g"; empty string for non-finite

}  // namespace slic
