// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "arbc/table.hpp"

namespace arbc {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    bool contains(double x) const { return lo <= x && x <= hi; }
};

/// Which point the sampling-distribution surfaces are evaluated at when
/// intervals are built.
enum class PlugInMode { original, corrected };

/// Equi-tailed percentile interval from Monte Carlo draws: with
/// k = ceil(alpha/2 * N), the bounds are the k-th smallest and k-th
/// largest draws, so at most k-1 draws fall strictly outside each side.
/// Reorders its argument.
Interval equi_tailed_interval(std::vector<double>& draws, double level);

struct IntervalsAr1 {
    Interval original;
    Interval corrected;
};

/// Shared-draw intervals for the original and corrected estimators: one
/// set of skew-normal draws on the logit scale at the plug-in point, read
/// back directly and through the correction map.
IntervalsAr1 mc_interval_ar1(const CalibrationTable& table, double psi_plugin,
                             double level, int draws, std::uint64_t seed);

struct IntervalsAr2 {
    std::array<Interval, 2> original;
    std::array<Interval, 2> corrected;
};

/// Gaussian-copula draws of the logit pair with the predicted marginals
/// and correlation, mapped to the phi scale with and without correction.
IntervalsAr2 mc_interval_ar2(const CalibrationTable& table,
                             const PartialAutocorrelations& plugin,
                             double level, int draws, std::uint64_t seed);

struct CorrectionReport {
    int order = 1;
    EstimationMethod method = EstimationMethod::exact_mle;
    EstimateRecord original;
    ArCoefficients corrected;
    double level = 0.95;
    int draws = 0;
    PlugInMode plugin = PlugInMode::original;
    std::array<Interval, 2> ci_original;
    std::array<Interval, 2> ci_corrected;
};

/// Correct one estimate and attach Monte Carlo intervals for both the
/// original and the corrected coefficients.  The estimate must match the
/// table's order and method.  Requires draws >= 100 and level in (0.5, 1).
CorrectionReport correct_estimate(const CalibrationTable& table,
                                  const EstimateRecord& est, double level,
                                  int draws, std::uint64_t seed,
                                  PlugInMode mode = PlugInMode::original);

/// Finite-sample density of the original order-1 estimator at the plug-in,
/// i.e. the fitted logit-scale skew normal pushed back through g.
double original_sampling_density(const CalibrationTable& table,
                                 double phi_plugin, double at);

/// Density of the corrected order-1 estimator at the plug-in.  The
/// correction map is inverted through a monotone cubic interpolant with
/// exact node derivatives over the region carrying all but 1e-6 of the
/// plug-in mass; a map that is not monotone there throws NumericalError.
class CorrectedDensity {
public:
    CorrectedDensity(const CalibrationTable& table, double phi_plugin);

    /// Density at a corrected-coefficient value; zero outside the support.
    double operator()(double t) const;

    double support_lo() const { return t_.front(); }
    double support_hi() const { return t_.back(); }

private:
    SkewNormalParams theta_;
    std::vector<double> t_;    // corrected values, strictly increasing
    std::vector<double> z_;    // matching logit-scale originals
    std::vector<double> dzdt_; // node derivatives of z(t)
};

double corrected_sampling_density(const CalibrationTable& table,
                                  double phi_plugin, double at);

struct CoverageConfig {
    int reps = 2000;
    int draws = 10000;
    double level = 0.95;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    PlugInMode plugin = PlugInMode::original;
};

struct MethodCoverage {
    EstimationMethod method = EstimationMethod::exact_mle;
    std::array<double, 2> original{0.0, 0.0};  // per coefficient
    std::array<double, 2> corrected{0.0, 0.0};
    std::array<double, 2> width_original{0.0, 0.0};
    std::array<double, 2> width_corrected{0.0, 0.0};
    long resimulations = 0;
};

struct CoverageResult {
    int order = 1;
    int n = 0;
    int reps = 0;
    int draws = 0;
    double level = 0.95;
    std::vector<MethodCoverage> rows;
};

/// Empirical interval coverage under truths drawn uniformly from the open
/// region (on the psi scale).  One series per replicate, shared by all
/// tables' methods; replicates whose estimation fails are redrawn and the
/// redraws counted.  Bit-identical across thread counts for a fixed seed.
CoverageResult run_coverage(const std::vector<CalibrationTable>& tables,
                            const CoverageConfig& config);

} // namespace arbc
