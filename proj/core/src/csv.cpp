// SPDX-License-Identifier: Apache-2.0
#include "arbc/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "arbc/errors.hpp"

namespace arbc {

namespace {

std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string trim(const std::string& s)
{
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos)
        return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

bool try_parse(const std::string& raw, double& out)
{
    const std::string s = trim(raw);
    if (s.empty())
        return false;
    errno = 0;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && errno != ERANGE;
}

} // namespace

std::vector<double> read_series_csv(std::istream& in, const std::string& column)
{
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        lines.push_back(line);
    while (!lines.empty() && trim(lines.back()).empty())
        lines.pop_back();
    if (lines.empty())
        throw CsvError("series input is empty", 1);

    std::size_t col = 0;
    std::size_t first_data = 0;

    if (!column.empty()) {
        const auto header = split_fields(lines[0]);
        bool found = false;
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (trim(header[i]) == column) {
                col = i;
                found = true;
                break;
            }
        }
        if (!found)
            throw CsvError("column '" + column + "' not found in header", 1);
        first_data = 1;
    } else {
        double v;
        if (!try_parse(split_fields(lines[0])[0], v))
            first_data = 1; // single leading header row
    }

    if (first_data >= lines.size())
        throw CsvError("no data rows", static_cast<long>(lines.size()));

    std::vector<double> values;
    values.reserve(lines.size() - first_data);
    for (std::size_t r = first_data; r < lines.size(); ++r) {
        const long rowno = static_cast<long>(r) + 1;
        const auto fields = split_fields(lines[r]);
        if (col >= fields.size())
            throw CsvError("row " + std::to_string(rowno)
                           + ": missing column " + std::to_string(col + 1),
                           rowno);
        double v;
        if (!try_parse(fields[col], v))
            throw CsvError("row " + std::to_string(rowno)
                           + ": value '" + trim(fields[col]) + "' is not a number",
                           rowno);
        if (!std::isfinite(v))
            throw CsvError("row " + std::to_string(rowno)
                           + ": value is not finite", rowno);
        values.push_back(v);
    }
    return values;
}

std::vector<double> read_series_file(const std::filesystem::path& path,
                                     const std::string& column)
{
    std::ifstream in(path);
    if (!in)
        throw CsvError("cannot open series file: " + path.string(), 0);
    return read_series_csv(in, column);
}

void write_series_csv(std::ostream& out, std::span<const double> values,
                      const std::string& header)
{
    if (!header.empty())
        out << header << '\n';
    char buf[40];
    for (double v : values) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf << '\n';
    }
}

} // namespace arbc
