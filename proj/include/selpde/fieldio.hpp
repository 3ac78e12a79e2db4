#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "selpde/grid.hpp"

namespace selpde {

// 17 significant digits: enough to round-trip any double exactly.
std::string format_g17(double v);

// Temp-file + rename so readers never observe a half-written file.
void write_text_atomic(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Field files: "# selpde-field v1" header, then dim=/grid=/R=|bounds=/nodes=
// lines, then one "coordinate value" row per node in index order.  The grid
// is reconstructed from the coordinate column so graded grids round-trip.
void write_field_file(const std::string& path, const DiscreteField& f);
DiscreteField read_field_file(const std::string& path);
std::string field_to_string(const DiscreteField& f);

std::uint64_t fnv1a64(const void* data, std::size_t n);
std::uint64_t fnv1a64(const std::string& s);
std::uint64_t hash_file(const std::string& path);
std::string hash_hex(std::uint64_t h);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
std::string csv_to_string(const CsvTable& t);
void write_csv_atomic(const std::string& path, const CsvTable& t);

}  // namespace selpde
