// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include "arbc/calibration.hpp"
#include "arbc/surfaces.hpp"

namespace arbc {

inline constexpr int kTableFormatVersion = 1;

/// Everything needed to correct estimates and build intervals for one
/// (order, method, n) combination, plus the provenance of the simulation
/// that produced it.
struct CalibrationTable {
    int order = 1;
    EstimationMethod method = EstimationMethod::exact_mle;
    int n = 0;
    int K = 3;
    GridSpec grid{};
    int m = 0;
    std::uint64_t seed = 0;
    std::string basis;

    CorrectionModel correction;
    SurfaceSet surfaces;
};

/// Fit the correction map, the per-cell distributions, and the parameter
/// surfaces from one grid sample.
CalibrationTable build_table(const GridSample& sample, EstimationMethod method,
                             int K, unsigned threads = 0);

/// Canonical file name, e.g. "ar1_mle_n30.tbl".
std::string table_filename(int order, EstimationMethod method, int n);

/// Line-oriented text format with a trailing whole-file checksum.  Numbers
/// are written with enough digits to round-trip bit-exactly.
void save_table(const CalibrationTable& table, const std::filesystem::path& path);

/// Load and fully validate one table file.  Failure modes are distinct
/// types: TableNotFoundError, TableFormatError, TableVersionError,
/// TableTruncationError, TableChecksumError.
CalibrationTable load_table(const std::filesystem::path& path);

/// Load dir/table_filename(order,method,n) and verify the metadata matches
/// the request (TableMismatchError otherwise).
CalibrationTable load_table_for(const std::filesystem::path& dir, int order,
                                EstimationMethod method, int n);

} // namespace arbc
