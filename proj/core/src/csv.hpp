#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

namespace macromc::detail {

struct CsvRow {
    std::size_t line = 0;
    std::vector<double> values;
};

struct CsvDocument {
    std::vector<std::string> comments; ///< comment lines with the leading '#' stripped
    std::vector<CsvRow> rows;
};

/// Numeric CSV with a mandatory header matching `columns` exactly. Blank and `#` lines are skipped.
CsvDocument read_numeric_csv(std::istream& in, const std::vector<std::string>& columns);

/// Opens `path` and forwards to the stream overload. Throws IoError when it cannot be opened.
CsvDocument read_numeric_csv(const std::filesystem::path& path, const std::vector<std::string>& columns);

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double value);

} // namespace macromc::detail
