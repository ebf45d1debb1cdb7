// SPDX-License-Identifier: Apache-2.0
#include "arbc/table.hpp"

#include <cerrno>
#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "arbc/errors.hpp"
#include "arbc/hermite.hpp"

namespace arbc {

namespace {

constexpr char kMagic[] = "arbiascorrect-table";

std::uint64_t fnv1a64(const std::string& bytes)
{
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s)
{
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || s.empty() || errno == ERANGE)
        throw TableFormatError("table: malformed number '" + s + "'");
    return v;
}

long long parse_int(const std::string& s)
{
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size() || s.empty() || errno == ERANGE)
        throw TableFormatError("table: malformed integer '" + s + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& s)
{
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size() || s.empty() || errno == ERANGE)
        throw TableFormatError("table: malformed unsigned integer '" + s + "'");
    return v;
}

void append_array(std::string& out, const char* key,
                  const std::vector<double>& v)
{
    out += key;
    out += '=';
    out += std::to_string(v.size());
    out += ':';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            out += ' ';
        out += format_double(v[i]);
    }
    out += '\n';
}

std::vector<double> parse_array(const std::string& s)
{
    const std::size_t colon = s.find(':');
    if (colon == std::string::npos)
        throw TableFormatError("table: array value missing length prefix");
    const long long count = parse_int(s.substr(0, colon));
    if (count < 0 || count > 1000000)
        throw TableFormatError("table: implausible array length");
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(count));
    std::istringstream in(s.substr(colon + 1));
    std::string tok;
    while (in >> tok)
        v.push_back(parse_double(tok));
    if (static_cast<long long>(v.size()) != count)
        throw TableFormatError("table: array length prefix does not match contents");
    return v;
}

struct ParsedFile {
    std::map<std::string, std::string> kv;
    std::vector<std::string> order_seen;

    const std::string& need(const std::string& key) const
    {
        const auto it = kv.find(key);
        if (it == kv.end())
            throw TableFormatError("table: missing key '" + key + "'");
        return it->second;
    }
    bool has(const std::string& key) const { return kv.count(key) != 0; }
};

std::string render_body(const CalibrationTable& t)
{
    std::string out;
    out += kMagic;
    out += '\n';
    out += "format.version=" + std::to_string(kTableFormatVersion) + '\n';
    out += "order=" + std::to_string(t.order) + '\n';
    out += "method=" + std::string(method_code(t.method)) + '\n';
    out += "n=" + std::to_string(t.n) + '\n';
    out += "K=" + std::to_string(t.K) + '\n';
    out += "basis=" + t.basis + '\n';
    out += "grid.start=" + format_double(t.grid.start) + '\n';
    out += "grid.step=" + format_double(t.grid.step) + '\n';
    out += "grid.count=" + std::to_string(t.grid.count) + '\n';
    out += "m=" + std::to_string(t.m) + '\n';
    out += "seed=" + std::to_string(t.seed) + '\n';
    append_array(out, "beta1", t.correction.beta1);
    if (t.order == 2)
        append_array(out, "beta2", t.correction.beta2);
    append_array(out, "surface.mu1", t.surfaces.mu1);
    append_array(out, "surface.logsigma1", t.surfaces.log_sigma1);
    append_array(out, "surface.logxi1", t.surfaces.log_xi1);
    if (t.order == 2) {
        append_array(out, "surface.mu2", t.surfaces.mu2);
        append_array(out, "surface.logsigma2", t.surfaces.log_sigma2);
        append_array(out, "surface.logxi2", t.surfaces.log_xi2);
        append_array(out, "surface.rho", t.surfaces.rho);
    }
    return out;
}

void check_sizes(const CalibrationTable& t, const char* who)
{
    const int nb = t.order == 1 ? basis_size_1d(t.K) : basis_size_2d(t.K);
    auto is_nb = [&](const std::vector<double>& v) {
        return static_cast<int>(v.size()) == nb;
    };
    bool ok = t.order == 1 || t.order == 2;
    ok = ok && is_nb(t.correction.beta1) && is_nb(t.surfaces.mu1)
       && is_nb(t.surfaces.log_sigma1) && is_nb(t.surfaces.log_xi1);
    if (t.order == 2)
        ok = ok && is_nb(t.correction.beta2) && is_nb(t.surfaces.mu2)
           && is_nb(t.surfaces.log_sigma2) && is_nb(t.surfaces.log_xi2)
           && is_nb(t.surfaces.rho);
    else
        ok = ok && t.correction.beta2.empty();
    ok = ok && t.basis == basis_id(t.order, t.K);
    if (!ok)
        throw TableFormatError(std::string(who)
                               + ": coefficient blocks inconsistent with order/K");
}

} // namespace

CalibrationTable build_table(const GridSample& sample, EstimationMethod method,
                             int K, unsigned threads)
{
    CalibrationTable t;
    t.order = sample.order;
    t.method = method;
    t.n = sample.n;
    t.K = K;
    t.grid = sample.grid;
    t.m = sample.m;
    t.seed = sample.seed;
    t.basis = basis_id(sample.order, K);
    t.correction = fit_correction(sample, method, K);
    const CellDistributions cells = fit_cell_distributions(sample, method, threads);
    t.surfaces = fit_parameter_surfaces(sample, cells, K);
    return t;
}

std::string table_filename(int order, EstimationMethod method, int n)
{
    return "ar" + std::to_string(order) + "_" + std::string(method_code(method))
         + "_n" + std::to_string(n) + ".tbl";
}

void save_table(const CalibrationTable& t, const std::filesystem::path& path)
{
    check_sizes(t, "save_table");
    std::string body = render_body(t);
    char line[64];
    std::snprintf(line, sizeof line, "checksum=fnv1a64:%016" PRIx64 "\n",
                  fnv1a64(body));
    body += line;

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw TableError("save_table: cannot open '" + path.string()
                         + "' for writing");
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    out.flush();
    if (!out)
        throw TableError("save_table: write to '" + path.string() + "' failed");
}

CalibrationTable load_table(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw TableNotFoundError("calibration table not found: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();

    // Magic first: anything else is not one of our files.
    const std::size_t first_nl = bytes.find('\n');
    if (first_nl == std::string::npos
        || bytes.substr(0, first_nl) != kMagic)
        throw TableFormatError("table: bad magic line in " + path.string());

    // The checksum line must be the final line of a complete file.
    const std::string tail_key = "checksum=fnv1a64:";
    if (bytes.empty() || bytes.back() != '\n')
        throw TableTruncationError("table: missing final newline in "
                                   + path.string());
    const std::size_t last_nl = bytes.rfind('\n', bytes.size() - 2);
    const std::size_t tail_start = last_nl == std::string::npos ? 0 : last_nl + 1;
    const std::string tail = bytes.substr(tail_start, bytes.size() - tail_start - 1);
    if (tail.rfind(tail_key, 0) != 0)
        throw TableTruncationError("table: checksum line missing in "
                                   + path.string());
    const std::string hex = tail.substr(tail_key.size());
    if (hex.size() != 16)
        throw TableFormatError("table: malformed checksum in " + path.string());
    std::uint64_t want = 0;
    const auto [p, ec] = std::from_chars(hex.data(), hex.data() + 16, want, 16);
    if (ec != std::errc() || p != hex.data() + 16)
        throw TableFormatError("table: malformed checksum in " + path.string());
    const std::string body = bytes.substr(0, tail_start);
    if (fnv1a64(body) != want)
        throw TableChecksumError("table: checksum mismatch in " + path.string());

    ParsedFile f;
    std::istringstream lines(body);
    std::string line;
    std::getline(lines, line); // magic, already verified
    long lineno = 1;
    while (std::getline(lines, line)) {
        ++lineno;
        if (line.empty())
            continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw TableFormatError("table: line " + std::to_string(lineno)
                                   + " is not key=value");
        const std::string key = line.substr(0, eq);
        if (f.kv.count(key))
            throw TableFormatError("table: duplicate key '" + key + "'");
        f.kv[key] = line.substr(eq + 1);
    }

    const long long version = parse_int(f.need("format.version"));
    if (version != kTableFormatVersion)
        throw TableVersionError("table: format version "
                                + std::to_string(version) + " not supported");

    CalibrationTable t;
    t.order = static_cast<int>(parse_int(f.need("order")));
    if (t.order != 1 && t.order != 2)
        throw TableFormatError("table: order out of range");
    t.method = method_from_code(f.need("method"));
    t.n = static_cast<int>(parse_int(f.need("n")));
    t.K = static_cast<int>(parse_int(f.need("K")));
    t.basis = f.need("basis");
    t.grid.start = parse_double(f.need("grid.start"));
    t.grid.step = parse_double(f.need("grid.step"));
    t.grid.count = static_cast<int>(parse_int(f.need("grid.count")));
    t.m = static_cast<int>(parse_int(f.need("m")));
    t.seed = parse_u64(f.need("seed"));

    t.correction.order = t.order;
    t.correction.K = t.K;
    t.correction.n = t.n;
    t.correction.method = t.method;
    t.correction.beta1 = parse_array(f.need("beta1"));
    if (t.order == 2)
        t.correction.beta2 = parse_array(f.need("beta2"));

    t.surfaces.order = t.order;
    t.surfaces.K = t.K;
    t.surfaces.mu1 = parse_array(f.need("surface.mu1"));
    t.surfaces.log_sigma1 = parse_array(f.need("surface.logsigma1"));
    t.surfaces.log_xi1 = parse_array(f.need("surface.logxi1"));
    if (t.order == 2) {
        t.surfaces.mu2 = parse_array(f.need("surface.mu2"));
        t.surfaces.log_sigma2 = parse_array(f.need("surface.logsigma2"));
        t.surfaces.log_xi2 = parse_array(f.need("surface.logxi2"));
        t.surfaces.rho = parse_array(f.need("surface.rho"));
    }

    try {
        check_sizes(t, "load_table");
    } catch (const TableFormatError& e) {
        throw TableFormatError(std::string(e.what()) + " in " + path.string());
    }
    return t;
}

CalibrationTable load_table_for(const std::filesystem::path& dir, int order,
                                EstimationMethod method, int n)
{
    const CalibrationTable t =
        load_table(dir / table_filename(order, method, n));
    if (t.order != order || t.method != method || t.n != n)
        throw TableMismatchError(
            "table: file describes ar" + std::to_string(t.order) + "/"
            + std::string(method_code(t.method)) + "/n=" + std::to_string(t.n)
            + " but ar" + std::to_string(order) + "/"
            + std::string(method_code(method)) + "/n=" + std::to_string(n)
            + " was requested");
    return t;
}

} // namespace arbc
