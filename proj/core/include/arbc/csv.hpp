// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace arbc {

/// Read one numeric column.  With an empty column name the first column is
/// used and a leading non-numeric row is treated as a header; otherwise a
/// header row is required and must contain the named column.  Empty or
/// non-finite fields raise CsvError carrying the 1-based row number.
std::vector<double> read_series_csv(std::istream& in,
                                    const std::string& column = "");
std::vector<double> read_series_file(const std::filesystem::path& path,
                                     const std::string& column = "");

void write_series_csv(std::ostream& out, std::span<const double> values,
                      const std::string& header = "value");

} // namespace arbc
