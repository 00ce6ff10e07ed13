#include "roundstat/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "roundstat/errors.hpp"

namespace roundstat {

std::string format_double(double x) {
  if (std::isnan(x)) return "";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, end);
}

std::string format_double(const std::optional<double>& x) { return x ? format_double(*x) : ""; }

std::string CsvTable::str() const {
  std::string out;
  if (!comment.empty()) out += "# " + comment + "\n";
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

void CsvTable::write(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << str();
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

void CsvTable::append(const CsvTable& other) {
  if (header.empty()) header = other.header;
  if (other.header != header) throw PreconditionError("CsvTable::append: header mismatch");
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

}  // namespace roundstat
