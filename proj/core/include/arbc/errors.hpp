// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace arbc {

/// Invalid user-supplied value: unsupported order, non-stationary
/// coefficients, out-of-range sample size, bad configuration.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative routine exhausted its retries without reaching tolerance.
/// Carries the best iterate seen so the caller can inspect or salvage it.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, std::vector<double> best_point,
                     double best_value)
        : std::runtime_error(what),
          best_point_(std::move(best_point)),
          best_value_(best_value) {}

    const std::vector<double>& best_point() const noexcept { return best_point_; }
    double best_value() const noexcept { return best_value_; }

private:
    std::vector<double> best_point_;
    double best_value_;
};

/// Degenerate input to a fitting routine: too few samples, zero spread,
/// a singular design, or a cell whose failure budget was exceeded.
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A derived quantity left its valid range at evaluation time, e.g. a
/// correction map that is not monotone where it needs inverting.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Base for calibration-table persistence failures.  Each failure mode
/// below gets its own type so callers can react (and tests can assert)
/// without string matching.
class TableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TableNotFoundError : public TableError {
public:
    using TableError::TableError;
};

class TableFormatError : public TableError {
public:
    using TableError::TableError;
};

class TableVersionError : public TableError {
public:
    using TableError::TableError;
};

class TableChecksumError : public TableError {
public:
    using TableError::TableError;
};

class TableTruncationError : public TableError {
public:
    using TableError::TableError;
};

/// Table loaded fine but describes a different (order, method, n) than
/// the one requested.
class TableMismatchError : public TableError {
public:
    using TableError::TableError;
};

/// Malformed series input; remembers the 1-based row that failed.
class CsvError : public std::runtime_error {
public:
    CsvError(const std::string& what, long row)
        : std::runtime_error(what), row_(row) {}

    long row() const noexcept { return row_; }

private:
    long row_;
};

} // namespace arbc
