#pragma once

#include <string>
#include <vector>

namespace gpgrad {

// Minimal CSV support: mandatory header row, comma separation, UTF-8, '.'
// decimal separator, no quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int col(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

// shortest representation that round-trips a double exactly
std::string num17(double v);

}  // namespace gpgrad
