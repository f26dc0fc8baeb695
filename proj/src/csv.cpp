#include "jjosc/csv.hpp"

#include <fmt/format.h>

#include <ostream>
#include <stdexcept>

namespace jjosc {

void write_csv(std::ostream& os, std::span<const CsvColumn> columns) {
  if (columns.empty()) return;
  const std::size_t rows = columns.front().values->size();
  for (const auto& c : columns) {
    if (c.values->size() != rows) {
      throw std::invalid_argument("csv column '" + c.name + "' has mismatched length");
    }
  }
  fmt::memory_buffer buf;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (j) buf.push_back(',');
    fmt::format_to(std::back_inserter(buf), "{}", columns[j].name);
  }
  buf.push_back('\n');
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (j) buf.push_back(',');
      fmt::format_to(std::back_inserter(buf), "{:.12g}", (*columns[j].values)[i]);
    }
    buf.push_back('\n');
  }
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::string format_exact(double value) { return fmt::format("{}", value); }

}  // namespace jjosc
