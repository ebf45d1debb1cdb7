// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string_view>

#include "arbc/ar_model.hpp"

namespace arbc {

enum class EstimationMethod {
    exact_mle,
    conditional_mle,
    burg,
    yule_walker,
};

constexpr std::array<EstimationMethod, 4> all_methods()
{
    return {EstimationMethod::exact_mle, EstimationMethod::conditional_mle,
            EstimationMethod::burg, EstimationMethod::yule_walker};
}

/// Short codes used on the command line and in table files:
/// "mle", "cmle", "burg", "yw".
std::string_view method_code(EstimationMethod m);
std::string_view method_label(EstimationMethod m);
EstimationMethod method_from_code(std::string_view code);

struct EstimateRecord {
    EstimationMethod method = EstimationMethod::exact_mle;
    int order = 1;
    std::array<double, 2> phi{0.0, 0.0};
    /// Set when the raw estimate fell outside the open stationarity region
    /// and was pulled back to its edge (margin 1e-6 on the psi scale).
    /// Only the conditional MLE can trigger this; the other three are
    /// interior by construction.
    bool clamped = false;
};

/// Partial autocorrelations of the (already stationary) estimate.
PartialAutocorrelations estimate_partial(const EstimateRecord& e);

/// Sample mean is removed first in every method; all four see the same
/// centered series.  Series must have positive sample variance and at
/// least order + 2 observations.
EstimateRecord yule_walker(const TimeSeries& series, int order);
EstimateRecord burg(const TimeSeries& series, int order);
EstimateRecord conditional_mle(const TimeSeries& series, int order);

/// Exact stationary Gaussian MLE with the innovation variance profiled
/// out.  Optimized on the logit-psi scale from the Burg estimate; throws
/// ConvergenceError (carrying the best iterate) if that fails.
EstimateRecord exact_mle(const TimeSeries& series, int order);

EstimateRecord estimate(EstimationMethod m, const TimeSeries& series, int order);

/// First-order bias approximation -(1+3 phi)/n for the AR(1) mean-adjusted
/// least-squares family.  Useful as a sanity yardstick, not a correction.
double asymptotic_bias_ar1(double phi, int n);

} // namespace arbc
