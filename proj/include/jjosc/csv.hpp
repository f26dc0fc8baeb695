#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace jjosc {

struct CsvColumn {
  std::string name;
  const std::vector<double>* values;
};

/// Header line then one row per sample, `\n` terminated, 12 significant
/// digits. Throws std::invalid_argument if the columns differ in length.
void write_csv(std::ostream& os, std::span<const CsvColumn> columns);

/// Shortest representation that parses back to the same double.
std::string format_exact(double value);

}  // namespace jjosc
