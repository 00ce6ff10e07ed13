#pragma once

#include <optional>
#include <string>
#include <vector>

namespace roundstat {

// Shortest round-trip decimal form; empty for NaN.
std::string format_double(double x);
std::string format_double(const std::optional<double>& x);

struct CsvTable {
  std::string comment;  // written as "# " + comment when nonempty
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string str() const;
  void write(const std::string& path) const;
  void append(const CsvTable& other);  // same header required
};

}  // namespace roundstat
