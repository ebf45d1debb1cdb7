// SPDX-License-Identifier: Apache-2.0
//
// biascorrect: calibrate, apply and evaluate finite-sample bias
// corrections for AR(1)/AR(2) coefficient estimates on short series.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "arbc/calibration.hpp"
#include "arbc/csv.hpp"
#include "arbc/errors.hpp"
#include "arbc/inference.hpp"
#include "arbc/table.hpp"

namespace {

namespace fs = std::filesystem;
using namespace arbc;

enum class OutFormat { human, csv, structured };

OutFormat parse_format(const std::string& s)
{
    if (s == "human")
        return OutFormat::human;
    if (s == "csv")
        return OutFormat::csv;
    if (s == "structured")
        return OutFormat::structured;
    throw DomainError("unknown output format '" + s
                      + "' (expected human, csv or structured)");
}

std::string fmt_full(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_short(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

fs::path default_tables_dir(const std::string& flag_value)
{
    if (!flag_value.empty())
        return flag_value;
    if (const char* env = std::getenv("ARBC_TABLES"); env && *env)
        return env;
    return "tables";
}

std::vector<double> parse_phi_list(const std::string& s, int order)
{
    std::vector<double> out;
    std::string cur;
    auto flush = [&] {
        if (cur.empty())
            throw DomainError("--phi: empty coefficient in list");
        char* end = nullptr;
        const double v = std::strtod(cur.c_str(), &end);
        if (end != cur.c_str() + cur.size())
            throw DomainError("--phi: '" + cur + "' is not a number");
        out.push_back(v);
        cur.clear();
    };
    for (char ch : s) {
        if (ch == ',')
            flush();
        else if (ch != ' ')
            cur += ch;
    }
    flush();
    if (static_cast<int>(out.size()) != order)
        throw DomainError("--phi: expected " + std::to_string(order)
                          + " coefficient(s), got " + std::to_string(out.size()));
    return out;
}

ArCoefficients coefficients_from_cli(int order, const std::vector<double>& phi)
{
    ArCoefficients c = order == 1 ? make_ar1(phi[0]) : make_ar2(phi[0], phi[1]);
    if (!is_stationary(c))
        throw DomainError("--phi: coefficients are outside the stationarity region");
    return c;
}

std::vector<EstimationMethod> expand_methods(std::vector<std::string> names)
{
    if (names.empty())
        names.push_back("mle");
    std::vector<EstimationMethod> out;
    for (const auto& name : names) {
        if (name == "all") {
            for (EstimationMethod m : all_methods())
                out.push_back(m);
            continue;
        }
        out.push_back(method_from_code(name));
    }
    // Drop duplicates, keeping the first occurrence.
    std::vector<EstimationMethod> uniq;
    for (EstimationMethod m : out) {
        bool seen = false;
        for (EstimationMethod u : uniq)
            seen = seen || u == m;
        if (!seen)
            uniq.push_back(m);
    }
    return uniq;
}

void check_cli_n(int n)
{
    if (n < 10 || n > 50)
        throw DomainError("n must lie in [10,50]; got " + std::to_string(n));
}

// ---------------------------------------------------------------- correct

struct CorrectOpts {
    int order = 1;
    std::string phi;
    std::string input;
    std::string column;
    int n = 0;
    std::string method = "mle";
    std::string tables;
    int draws = 10000;
    std::uint64_t seed = 1;
    double level = 0.95;
    std::string plugin = "original";
    std::string format = "human";
};

void print_correct(const CorrectionReport& rep, OutFormat fm, int n,
                   std::uint64_t seed)
{
    const int order = rep.order;
    if (fm == OutFormat::structured) {
        std::cout << "order=" << order << '\n'
                  << "method=" << method_code(rep.method) << '\n'
                  << "n=" << n << '\n'
                  << "level=" << fmt_full(rep.level) << '\n'
                  << "draws=" << rep.draws << '\n'
                  << "seed=" << seed << '\n'
                  << "plugin="
                  << (rep.plugin == PlugInMode::original ? "original" : "corrected")
                  << '\n'
                  << "clamped=" << (rep.original.clamped ? 1 : 0) << '\n';
        for (int k = 0; k < order; ++k) {
            const std::string tag = order == 1 ? "" : "." + std::to_string(k + 1);
            std::cout << "phi.hat" << tag << '='
                      << fmt_full(rep.original.phi[static_cast<std::size_t>(k)]) << '\n'
                      << "phi.correct" << tag << '='
                      << fmt_full(rep.corrected.phi[static_cast<std::size_t>(k)]) << '\n'
                      << "ci.hat" << tag << ".lo="
                      << fmt_full(rep.ci_original[static_cast<std::size_t>(k)].lo) << '\n'
                      << "ci.hat" << tag << ".hi="
                      << fmt_full(rep.ci_original[static_cast<std::size_t>(k)].hi) << '\n'
                      << "ci.correct" << tag << ".lo="
                      << fmt_full(rep.ci_corrected[static_cast<std::size_t>(k)].lo) << '\n'
                      << "ci.correct" << tag << ".hi="
                      << fmt_full(rep.ci_corrected[static_cast<std::size_t>(k)].hi) << '\n';
        }
        return;
    }
    if (fm == OutFormat::csv) {
        std::cout << "order,method,n,coef,phi.hat,phi.correct,"
                     "ci.hat.lo,ci.hat.hi,ci.correct.lo,ci.correct.hi\n";
        for (int k = 0; k < order; ++k) {
            std::cout << order << ',' << method_code(rep.method) << ',' << n
                      << ',' << (k + 1) << ','
                      << fmt_full(rep.original.phi[static_cast<std::size_t>(k)]) << ','
                      << fmt_full(rep.corrected.phi[static_cast<std::size_t>(k)]) << ','
                      << fmt_full(rep.ci_original[static_cast<std::size_t>(k)].lo) << ','
                      << fmt_full(rep.ci_original[static_cast<std::size_t>(k)].hi) << ','
                      << fmt_full(rep.ci_corrected[static_cast<std::size_t>(k)].lo) << ','
                      << fmt_full(rep.ci_corrected[static_cast<std::size_t>(k)].hi) << '\n';
        }
        return;
    }
    std::cout << "AR(" << order << ") " << method_label(rep.method)
              << " estimate, n=" << n << " (" << 100.0 * rep.level
              << "% intervals, " << rep.draws << " draws)\n";
    if (rep.original.clamped)
        std::cout << "note: raw estimate fell outside the stationarity region "
                     "and was clamped\n";
    for (int k = 0; k < order; ++k) {
        const std::string name = order == 1 ? "phi" : "phi" + std::to_string(k + 1);
        std::cout << "  " << name << ": "
                  << fmt_short(rep.original.phi[static_cast<std::size_t>(k)])
                  << "  [" << fmt_short(rep.ci_original[static_cast<std::size_t>(k)].lo)
                  << ", " << fmt_short(rep.ci_original[static_cast<std::size_t>(k)].hi)
                  << "]\n";
        std::cout << "  " << name << " corrected: "
                  << fmt_short(rep.corrected.phi[static_cast<std::size_t>(k)])
                  << "  [" << fmt_short(rep.ci_corrected[static_cast<std::size_t>(k)].lo)
                  << ", " << fmt_short(rep.ci_corrected[static_cast<std::size_t>(k)].hi)
                  << "]\n";
    }
}

void run_correct(const CorrectOpts& o)
{
    const OutFormat fm = parse_format(o.format);
    if (o.order != 1 && o.order != 2)
        throw DomainError("--order must be 1 or 2");
    const EstimationMethod method = method_from_code(o.method);
    if (o.phi.empty() == o.input.empty())
        throw DomainError("exactly one of --phi or --input is required");

    EstimateRecord est;
    int n = o.n;
    if (!o.phi.empty()) {
        if (o.n == 0)
            throw DomainError("--n is required with --phi");
        check_cli_n(n);
        const auto phi = parse_phi_list(o.phi, o.order);
        const ArCoefficients c = coefficients_from_cli(o.order, phi);
        est.method = method;
        est.order = o.order;
        est.phi = c.phi;
    } else {
        const std::vector<double> series = read_series_file(o.input, o.column);
        const int len = static_cast<int>(series.size());
        if (o.n != 0 && o.n != len)
            throw DomainError("--n=" + std::to_string(o.n)
                              + " disagrees with the series length "
                              + std::to_string(len));
        n = len;
        check_cli_n(n);
        est = estimate(method, TimeSeries{series}, o.order);
    }

    const CalibrationTable table =
        load_table_for(default_tables_dir(o.tables), o.order, method, n);
    const PlugInMode mode = o.plugin == "corrected" ? PlugInMode::corrected
                          : o.plugin == "original" ? PlugInMode::original
                          : throw DomainError("--plugin must be original or corrected");
    const CorrectionReport rep =
        correct_estimate(table, est, o.level, o.draws, o.seed, mode);
    print_correct(rep, fm, n, o.seed);
}

// --------------------------------------------------------------- simulate

struct SimulateOpts {
    int order = 1;
    std::string phi;
    double mu = 0.0;
    double sigma = 1.0;
    int n = 0;
    std::uint64_t seed = 1;
    std::string out;
};

void run_simulate(const SimulateOpts& o)
{
    if (o.order != 1 && o.order != 2)
        throw DomainError("--order must be 1 or 2");
    if (o.phi.empty())
        throw DomainError("--phi is required");
    // Simulation has no table behind it, so the [10,50] window does not
    // apply; any length the process model supports is fine.
    if (o.n < 3)
        throw DomainError("--n must be at least 3");
    const auto phi = parse_phi_list(o.phi, o.order);
    ArCoefficients c = coefficients_from_cli(o.order, phi);
    c.mu = o.mu;
    c.sigma = o.sigma;
    if (!(o.sigma > 0.0))
        throw DomainError("--sigma must be positive");

    const TimeSeries series = simulate(c, o.n, o.seed);
    if (o.out.empty()) {
        write_series_csv(std::cout, series.values);
    } else {
        std::ofstream out(o.out);
        if (!out)
            throw DomainError("cannot open output file: " + o.out);
        write_series_csv(out, series.values);
    }
}

// -------------------------------------------------------------- calibrate

struct CalibrateOpts {
    int order = 1;
    std::string n_spec;
    std::vector<std::string> methods;
    int m = 0;
    double grid_step = 0.0;
    int K = 3;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::string out = "tables";
    bool paper_scale = false;
    bool skip_existing = false;
    bool quiet = false;
};

std::pair<int, int> parse_n_spec(const std::string& s)
{
    const std::size_t colon = s.find(':');
    auto to_int = [](const std::string& t) {
        char* end = nullptr;
        const long v = std::strtol(t.c_str(), &end, 10);
        if (end != t.c_str() + t.size() || t.empty())
            throw DomainError("--n: '" + t + "' is not an integer");
        return static_cast<int>(v);
    };
    int lo, hi;
    if (colon == std::string::npos) {
        lo = hi = to_int(s);
    } else {
        lo = to_int(s.substr(0, colon));
        hi = to_int(s.substr(colon + 1));
    }
    if (lo > hi)
        throw DomainError("--n: empty range");
    check_cli_n(lo);
    check_cli_n(hi);
    return {lo, hi};
}

CalibrationConfig config_for(const CalibrateOpts& o, int n)
{
    CalibrationConfig cfg = o.paper_scale
        ? CalibrationConfig::paper_scale(o.order, n)
        : CalibrationConfig::desk_scale(o.order, n);
    if (o.m > 0)
        cfg.m = o.m;
    if (o.grid_step > 0.0) {
        const int count =
            static_cast<int>(std::floor((0.95 - (-0.95)) / o.grid_step + 1e-9)) + 1;
        cfg.grid = GridSpec{-0.95, o.grid_step, count};
    }
    cfg.K = o.K;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    cfg.methods = expand_methods(o.methods);
    cfg.validate();
    return cfg;
}

double rough_seconds(const CalibrationConfig& cfg)
{
    const double cells = cfg.order == 1 ? cfg.grid.count
                                        : static_cast<double>(cfg.grid.count) * cfg.grid.count;
    const double series = cells * cfg.m;
    double per_series = 40e-9 * cfg.n; // simulation
    for (EstimationMethod m : cfg.methods) {
        if (m == EstimationMethod::exact_mle)
            per_series += cfg.order == 1 ? 3e-6 : 2e-5;
        else
            per_series += 50e-9 * cfg.n;
    }
    const double fit = cfg.order == 1 ? 1.0 : 6.0; // correction + surfaces
    return series * per_series + fit * static_cast<double>(cfg.methods.size());
}

void run_calibrate(const CalibrateOpts& o)
{
    const auto [n_lo, n_hi] = parse_n_spec(o.n_spec);
    const fs::path out_dir = o.out;
    fs::create_directories(out_dir);

    double total_est = 0.0;
    for (int n = n_lo; n <= n_hi; ++n)
        total_est += rough_seconds(config_for(o, n));
    if (!o.quiet) {
        std::fprintf(stderr, "calibrating ar%d, n=%d..%d: rough estimate %.0f s\n",
                     o.order, n_lo, n_hi, total_est);
    }

    for (int n = n_lo; n <= n_hi; ++n) {
        const CalibrationConfig cfg = config_for(o, n);
        bool all_present = o.skip_existing;
        if (o.skip_existing) {
            for (EstimationMethod m : cfg.methods)
                all_present = all_present
                    && fs::exists(out_dir / table_filename(o.order, m, n));
            if (all_present)
                continue;
        }

        const int cells = cfg.order == 1 ? cfg.grid.count
                                         : cfg.grid.count * cfg.grid.count;
        const int stride = std::max(1, cells / 10);
        auto progress = [&](int done, int total) {
            if (!o.quiet && (done % stride == 0 || done == total))
                std::fprintf(stderr, "\rar%d n=%d: cell %d/%d", o.order, n, done,
                             total);
        };
        const GridSample sample = run_grid_simulation(cfg, progress);
        if (!o.quiet)
            std::fprintf(stderr, "\n");

        for (EstimationMethod m : cfg.methods) {
            if (o.skip_existing
                && fs::exists(out_dir / table_filename(o.order, m, n)))
                continue;
            const CalibrationTable table =
                build_table(sample, m, cfg.K, cfg.threads);
            save_table(table, out_dir / table_filename(o.order, m, n));
            if (!o.quiet) {
                const CorrectionModel& model = table.correction;
                const GridSummary s = summarize_grid(sample, m, &model);
                std::fprintf(stderr,
                             "ar%d n=%d %-4s: bias %+0.4f -> %+0.4f, rmse %0.4f"
                             " -> %0.4f, resims %ld\n",
                             o.order, n, std::string(method_code(m)).c_str(),
                             s.bias, s.bias_corrected, s.rmse, s.rmse_corrected,
                             sample.total_resimulations());
            }
        }
    }
}

// --------------------------------------------------------------- coverage

struct CoverageOpts {
    int order = 1;
    int n = 0;
    std::vector<std::string> methods;
    int reps = 2000;
    int draws = 10000;
    double level = 0.95;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::string plugin = "original";
    std::string tables;
    std::string format = "human";
};

void run_coverage_cmd(const CoverageOpts& o)
{
    const OutFormat fm = parse_format(o.format);
    if (o.order != 1 && o.order != 2)
        throw DomainError("--order must be 1 or 2");
    check_cli_n(o.n);
    const auto methods = expand_methods(o.methods);
    const fs::path dir = default_tables_dir(o.tables);

    std::vector<CalibrationTable> tables;
    tables.reserve(methods.size());
    for (EstimationMethod m : methods)
        tables.push_back(load_table_for(dir, o.order, m, o.n));

    CoverageConfig cfg;
    cfg.reps = o.reps;
    cfg.draws = o.draws;
    cfg.level = o.level;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    cfg.plugin = o.plugin == "corrected" ? PlugInMode::corrected
               : o.plugin == "original" ? PlugInMode::original
               : throw DomainError("--plugin must be original or corrected");

    const CoverageResult res = run_coverage(tables, cfg);

    if (fm == OutFormat::structured) {
        std::cout << "order=" << res.order << '\n'
                  << "n=" << res.n << '\n'
                  << "reps=" << res.reps << '\n'
                  << "draws=" << res.draws << '\n'
                  << "level=" << fmt_full(res.level) << '\n'
                  << "seed=" << o.seed << '\n';
        for (const MethodCoverage& row : res.rows) {
            const std::string mc(method_code(row.method));
            for (int k = 0; k < res.order; ++k) {
                const std::string tag =
                    res.order == 1 ? "" : "." + std::to_string(k + 1);
                std::cout << "coverage." << mc << tag << ".hat="
                          << fmt_full(row.original[static_cast<std::size_t>(k)]) << '\n'
                          << "coverage." << mc << tag << ".correct="
                          << fmt_full(row.corrected[static_cast<std::size_t>(k)]) << '\n'
                          << "width." << mc << tag << ".hat="
                          << fmt_full(row.width_original[static_cast<std::size_t>(k)]) << '\n'
                          << "width." << mc << tag << ".correct="
                          << fmt_full(row.width_corrected[static_cast<std::size_t>(k)]) << '\n';
            }
            std::cout << "resimulations." << mc << '=' << row.resimulations << '\n';
        }
        return;
    }
    if (fm == OutFormat::csv) {
        std::cout << "order,n,method,coef,coverage.hat,coverage.correct,"
                     "width.hat,width.correct\n";
        for (const MethodCoverage& row : res.rows)
            for (int k = 0; k < res.order; ++k)
                std::cout << res.order << ',' << res.n << ','
                          << method_code(row.method) << ',' << (k + 1) << ','
                          << fmt_full(row.original[static_cast<std::size_t>(k)]) << ','
                          << fmt_full(row.corrected[static_cast<std::size_t>(k)]) << ','
                          << fmt_full(row.width_original[static_cast<std::size_t>(k)]) << ','
                          << fmt_full(row.width_corrected[static_cast<std::size_t>(k)]) << '\n';
        return;
    }
    std::cout << "interval coverage, AR(" << res.order << ") n=" << res.n
              << ", " << res.reps << " replicates, nominal "
              << 100.0 * res.level << "%\n";
    for (const MethodCoverage& row : res.rows) {
        for (int k = 0; k < res.order; ++k) {
            const std::string name =
                res.order == 1 ? "phi" : "phi" + std::to_string(k + 1);
            std::cout << "  " << method_label(row.method) << ' ' << name
                      << ": original " << fmt_short(row.original[static_cast<std::size_t>(k)])
                      << " (width " << fmt_short(row.width_original[static_cast<std::size_t>(k)])
                      << "), corrected " << fmt_short(row.corrected[static_cast<std::size_t>(k)])
                      << " (width " << fmt_short(row.width_corrected[static_cast<std::size_t>(k)])
                      << ")\n";
        }
        if (row.resimulations > 0)
            std::cout << "  " << method_label(row.method) << ": "
                      << row.resimulations << " replicate redraws\n";
    }
}

// ----------------------------------------------------------------- report

struct ReportOpts {
    int order = 1;
    int n = 0;
    std::string method = "mle";
    std::string tables;
    int m = 0;
    double grid_step = 0.0;
    bool paper_scale = false;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::string format = "human";
    std::string export_grid;
};

void run_report(const ReportOpts& o)
{
    const OutFormat fm = parse_format(o.format);
    if (o.order != 1 && o.order != 2)
        throw DomainError("--order must be 1 or 2");
    check_cli_n(o.n);
    const EstimationMethod method = method_from_code(o.method);
    const CalibrationTable table =
        load_table_for(default_tables_dir(o.tables), o.order, method, o.n);

    CalibrationConfig cfg = o.paper_scale
        ? CalibrationConfig::paper_scale(o.order, o.n)
        : CalibrationConfig::desk_scale(o.order, o.n);
    if (o.m > 0)
        cfg.m = o.m;
    if (o.grid_step > 0.0) {
        const int count =
            static_cast<int>(std::floor(1.9 / o.grid_step + 1e-9)) + 1;
        cfg.grid = GridSpec{-0.95, o.grid_step, count};
    }
    cfg.K = table.K;
    cfg.methods = {method};
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    cfg.validate();

    const GridSample sample = run_grid_simulation(cfg);
    const GridSummary s = summarize_grid(sample, method, &table.correction);

    if (fm == OutFormat::structured) {
        std::cout << "order=" << o.order << '\n'
                  << "method=" << method_code(method) << '\n'
                  << "n=" << o.n << '\n'
                  << "cells=" << sample.cell_count() << '\n'
                  << "m=" << sample.m << '\n'
                  << "seed=" << o.seed << '\n'
                  << "resimulations=" << sample.total_resimulations() << '\n'
                  << "bias.hat=" << fmt_full(s.bias) << '\n'
                  << "bias.correct=" << fmt_full(s.bias_corrected) << '\n'
                  << "variance.hat=" << fmt_full(s.variance) << '\n'
                  << "variance.correct=" << fmt_full(s.variance_corrected) << '\n'
                  << "rmse.hat=" << fmt_full(s.rmse) << '\n'
                  << "rmse.correct=" << fmt_full(s.rmse_corrected) << '\n';
    } else if (fm == OutFormat::csv) {
        std::cout << "order,method,n,quantity,original,corrected\n"
                  << o.order << ',' << method_code(method) << ',' << o.n
                  << ",bias," << fmt_full(s.bias) << ','
                  << fmt_full(s.bias_corrected) << '\n'
                  << o.order << ',' << method_code(method) << ',' << o.n
                  << ",variance," << fmt_full(s.variance) << ','
                  << fmt_full(s.variance_corrected) << '\n'
                  << o.order << ',' << method_code(method) << ',' << o.n
                  << ",rmse," << fmt_full(s.rmse) << ','
                  << fmt_full(s.rmse_corrected) << '\n';
    } else {
        std::cout << "AR(" << o.order << ") " << method_label(method)
                  << ", n=" << o.n << ": " << sample.cell_count()
                  << " cells x " << sample.m << " replicates\n"
                  << "  bias:     " << fmt_short(s.bias) << " -> "
                  << fmt_short(s.bias_corrected) << '\n'
                  << "  variance: " << fmt_short(s.variance) << " -> "
                  << fmt_short(s.variance_corrected) << '\n'
                  << "  rmse:     " << fmt_short(s.rmse) << " -> "
                  << fmt_short(s.rmse_corrected) << '\n';
        if (sample.total_resimulations() > 0)
            std::cout << "  replicate redraws: " << sample.total_resimulations()
                      << '\n';
    }

    if (!o.export_grid.empty()) {
        std::ofstream out(o.export_grid);
        if (!out)
            throw DomainError("cannot open export file: " + o.export_grid);
        if (o.order == 1) {
            out << "psi.true,phi.true,phi.hat.mean,phi.correct.mean\n";
            for (int cell = 0; cell < sample.cell_count(); ++cell)
                out << fmt_full(sample.true_psi(cell, 0)) << ','
                    << fmt_full(s.true_phi[static_cast<std::size_t>(cell)]) << ','
                    << fmt_full(s.mean_phi[static_cast<std::size_t>(cell)]) << ','
                    << fmt_full(s.mean_phi_corrected[static_cast<std::size_t>(cell)])
                    << '\n';
        } else {
            out << "psi1.true,psi2.true,phi1.true,phi2.true,"
                   "phi1.hat.mean,phi2.hat.mean,phi1.correct.mean,"
                   "phi2.correct.mean\n";
            for (int cell = 0; cell < sample.cell_count(); ++cell) {
                const std::size_t b = static_cast<std::size_t>(cell) * 2;
                out << fmt_full(sample.true_psi(cell, 0)) << ','
                    << fmt_full(sample.true_psi(cell, 1)) << ','
                    << fmt_full(s.true_phi[b]) << ',' << fmt_full(s.true_phi[b + 1])
                    << ',' << fmt_full(s.mean_phi[b]) << ','
                    << fmt_full(s.mean_phi[b + 1]) << ','
                    << fmt_full(s.mean_phi_corrected[b]) << ','
                    << fmt_full(s.mean_phi_corrected[b + 1]) << '\n';
            }
        }
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Simulation-calibrated bias correction for short AR(1)/AR(2) series"};
    app.require_subcommand(1);

    auto correct_opts = std::make_shared<CorrectOpts>();
    CLI::App* correct = app.add_subcommand(
        "correct", "Correct an estimate and report confidence intervals");
    correct->add_option("--order", correct_opts->order, "Model order (1 or 2)")
        ->required();
    correct->add_option("--phi", correct_opts->phi,
                        "Estimated coefficients, comma separated");
    correct->add_option("--input", correct_opts->input,
                        "CSV file with the observed series");
    correct->add_option("--column", correct_opts->column,
                        "Column name in the CSV input");
    correct->add_option("--n", correct_opts->n, "Series length behind --phi");
    correct->add_option("--method", correct_opts->method,
                        "Estimator: mle, cmle, burg or yw");
    correct->add_option("--tables", correct_opts->tables,
                        "Calibration table directory");
    correct->add_option("--draws", correct_opts->draws, "Monte Carlo draws");
    correct->add_option("--seed", correct_opts->seed, "Monte Carlo seed");
    correct->add_option("--level", correct_opts->level, "Interval level");
    correct->add_option("--plugin", correct_opts->plugin,
                        "Plug-in point: original or corrected");
    correct->add_option("--format", correct_opts->format,
                        "Output format: human, csv or structured");
    correct->callback([correct_opts] { run_correct(*correct_opts); });

    auto simulate_opts = std::make_shared<SimulateOpts>();
    CLI::App* simulate_cmd = app.add_subcommand(
        "simulate", "Draw an exact stationary sample path");
    simulate_cmd->add_option("--order", simulate_opts->order, "Model order")
        ->required();
    simulate_cmd->add_option("--phi", simulate_opts->phi,
                             "True coefficients, comma separated")
        ->required();
    simulate_cmd->add_option("--mu", simulate_opts->mu, "Process mean");
    simulate_cmd->add_option("--sigma", simulate_opts->sigma,
                             "Innovation standard deviation");
    simulate_cmd->add_option("--n", simulate_opts->n, "Series length")
        ->required();
    simulate_cmd->add_option("--seed", simulate_opts->seed, "Seed");
    simulate_cmd->add_option("--out", simulate_opts->out,
                             "Output CSV (default: stdout)");
    simulate_cmd->callback([simulate_opts] { run_simulate(*simulate_opts); });

    auto calibrate_opts = std::make_shared<CalibrateOpts>();
    CLI::App* calibrate = app.add_subcommand(
        "calibrate", "Simulate grids and fit calibration tables");
    calibrate->add_option("--order", calibrate_opts->order, "Model order")
        ->required();
    calibrate->add_option("--n", calibrate_opts->n_spec,
                          "Series length or range, e.g. 15 or 10:50")
        ->required();
    calibrate->add_option("--method", calibrate_opts->methods,
                          "Estimators (repeatable; 'all' for every method)");
    calibrate->add_option("--m", calibrate_opts->m,
                          "Replicates per cell (default: scale preset)");
    calibrate->add_option("--grid-step", calibrate_opts->grid_step,
                          "Grid spacing on [-0.95, 0.95]");
    calibrate->add_option("--K", calibrate_opts->K, "Basis degree: 3, 5 or 7");
    calibrate->add_option("--seed", calibrate_opts->seed, "Master seed");
    calibrate->add_option("--threads", calibrate_opts->threads,
                          "Worker threads (0 = hardware)");
    calibrate->add_option("--out", calibrate_opts->out, "Output directory");
    calibrate->add_flag("--paper-scale", calibrate_opts->paper_scale,
                        "Publication-density grids (slow)");
    calibrate->add_flag("--skip-existing", calibrate_opts->skip_existing,
                        "Keep tables that already exist");
    calibrate->add_flag("--quiet", calibrate_opts->quiet,
                        "Suppress progress output");
    calibrate->callback([calibrate_opts] { run_calibrate(*calibrate_opts); });

    auto coverage_opts = std::make_shared<CoverageOpts>();
    CLI::App* coverage = app.add_subcommand(
        "coverage", "Empirical interval coverage under random truths");
    coverage->add_option("--order", coverage_opts->order, "Model order")
        ->required();
    coverage->add_option("--n", coverage_opts->n, "Series length")->required();
    coverage->add_option("--method", coverage_opts->methods,
                         "Estimators (repeatable; 'all' for every method)");
    coverage->add_option("--reps", coverage_opts->reps, "Replicates");
    coverage->add_option("--draws", coverage_opts->draws,
                         "Monte Carlo draws per interval");
    coverage->add_option("--level", coverage_opts->level, "Interval level");
    coverage->add_option("--seed", coverage_opts->seed, "Seed");
    coverage->add_option("--threads", coverage_opts->threads, "Worker threads");
    coverage->add_option("--plugin", coverage_opts->plugin,
                         "Plug-in point: original or corrected");
    coverage->add_option("--tables", coverage_opts->tables,
                         "Calibration table directory");
    coverage->add_option("--format", coverage_opts->format, "Output format");
    coverage->callback([coverage_opts] { run_coverage_cmd(*coverage_opts); });

    auto report_opts = std::make_shared<ReportOpts>();
    CLI::App* report = app.add_subcommand(
        "report", "Re-simulate a grid and summarize estimator error");
    report->add_option("--order", report_opts->order, "Model order")->required();
    report->add_option("--n", report_opts->n, "Series length")->required();
    report->add_option("--method", report_opts->method, "Estimator");
    report->add_option("--tables", report_opts->tables,
                       "Calibration table directory");
    report->add_option("--m", report_opts->m, "Replicates per cell");
    report->add_option("--grid-step", report_opts->grid_step, "Grid spacing");
    report->add_flag("--paper-scale", report_opts->paper_scale,
                     "Publication-density grid");
    report->add_option("--seed", report_opts->seed, "Simulation seed");
    report->add_option("--threads", report_opts->threads, "Worker threads");
    report->add_option("--format", report_opts->format, "Output format");
    report->add_option("--export-grid", report_opts->export_grid,
                       "Write per-cell means to this CSV file");
    report->callback([report_opts] { run_report(*report_opts); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const CsvError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const TableError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const FitError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
