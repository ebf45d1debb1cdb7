// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "arbc/ar_model.hpp"
#include "arbc/estimators.hpp"

namespace arbc {

/// Uniform one-axis grid start, start+step, ..., start+(count-1)*step.
/// For order 2 the same axis is used for both partial autocorrelations,
/// giving count^2 cells enumerated row-major: cell = i*count + j places
/// psi_1 at point i and psi_2 at point j.
struct GridSpec {
    double start = -0.95;
    double step = 0.05;
    int count = 39;

    double point(int i) const { return start + step * i; }
    double last() const { return point(count - 1); }
};

std::vector<double> grid_points(const GridSpec& g);

struct CalibrationConfig {
    int order = 1;
    int n = 30;
    std::vector<EstimationMethod> methods{EstimationMethod::exact_mle};
    int m = 2000;             // replicates per grid cell
    GridSpec grid{};
    int K = 3;                // total degree of the correction basis
    std::uint64_t seed = 1;
    unsigned threads = 0;     // 0 = hardware concurrency
    /// Per-cell failure budget: a cell aborts once more than this fraction
    /// of its replicates needed resimulation.
    double max_cell_failure_rate = 0.01;

    void validate() const;

    /// Small grids sized so a full table fits in seconds to minutes.
    static CalibrationConfig desk_scale(int order, int n);
    /// Publication-density grids; hours of CPU, gigabytes of replicates.
    static CalibrationConfig paper_scale(int order, int n);
};

/// Raw simulation output: every per-replicate estimate for every cell and
/// method, on the partial-autocorrelation scale.  All methods of one
/// replicate saw the identical series, and replicate (cell, rep) is
/// reproducible from the stored seed alone.
struct GridSample {
    int order = 1;
    int n = 0;
    int m = 0;
    int K = 3;
    std::uint64_t seed = 0;
    GridSpec grid{};
    std::vector<EstimationMethod> methods;

    std::vector<double> psi_true;              // cells x order
    std::vector<std::vector<double>> psi_hat;  // per method: cells x m x order
    std::vector<int> resimulations;            // per cell

    int cell_count() const
    {
        return order == 1 ? grid.count : grid.count * grid.count;
    }
    int method_index(EstimationMethod m_) const;

    double true_psi(int cell, int k) const
    {
        return psi_true[static_cast<std::size_t>(cell) * order + k];
    }
    double hat_psi(int mi, int cell, int rep, int k) const
    {
        const auto base =
            (static_cast<std::size_t>(cell) * m + rep) * order + k;
        return psi_hat[static_cast<std::size_t>(mi)][base];
    }
    long total_resimulations() const;
};

/// Simulate the full grid.  Replicate seeds depend only on
/// (seed, order, n, cell, rep, attempt), so results are bit-identical for
/// any thread count.  When an estimator fails on a draw, the replicate is
/// resimulated (fresh attempt index) for all methods together, preserving
/// the shared-series property; a cell whose failure budget is exhausted
/// throws FitError.
GridSample run_grid_simulation(
    const CalibrationConfig& config,
    const std::function<void(int done, int total)>& progress = {});

/// Correction map on the logit scale: corrected psi_i is
/// g^{-1}( beta_i . B(g(psi_hat)) ) with B the Hermite basis row (1-D in
/// g(psi_hat_1) for order 1, 2-D in both logit coordinates for order 2).
struct CorrectionModel {
    int order = 1;
    int K = 3;
    int n = 0;
    EstimationMethod method = EstimationMethod::exact_mle;
    std::vector<double> beta1;
    std::vector<double> beta2; // empty for order 1

    /// Coefficients reproducing the identity map (no correction).
    static CorrectionModel identity(int order, int K, int n,
                                    EstimationMethod method);
};

/// Weighted least-squares objective
///   F(beta) = sum_cells w_r ( mean_j f(psi_hat_rj; beta) - psi_r )^2
/// summed over coefficients for order 2, with w_r the reciprocal of the
/// per-cell estimate variance (floored at 1e-6).  Exposes an analytic
/// gradient; logit values of the estimates are cached at construction.
class CorrectionObjective {
public:
    CorrectionObjective(const GridSample& sample, EstimationMethod method,
                        int K);

    std::size_t dim() const { return beta_dim_; }
    std::vector<double> identity_start() const;

    /// Closed-form initializer: weighted least squares of the logit targets
    /// on the basis evaluated at the per-cell mean logit estimates.
    std::vector<double> linear_start() const;

    double value(std::span<const double> beta) const;
    double value_and_gradient(std::span<const double> beta,
                              std::span<double> grad) const;

private:
    int order_;
    int K_;
    int nb_;     // basis functions per coefficient
    int cells_;
    int m_;
    std::size_t beta_dim_;
    std::vector<double> z_;      // cells x m x order, logit estimates
    std::vector<double> target_; // cells x order
    std::vector<double> weight_; // cells x order
};

/// Fit the correction for one method by quasi-Newton descent from the
/// identity map.  For order 2 both coefficient blocks are optimized
/// jointly.  Throws ConvergenceError with the best iterate on failure.
/// The fitted AR(1) map must be strictly increasing over (-0.999, 0.999);
/// when the unconstrained minimum violates that (the logit link saturates
/// into a step map on heavily biased configurations) the fit is redone
/// with a penalty on negative slope, and FitError is thrown only if no
/// increasing fit is found.
CorrectionModel fit_correction_ar1(const GridSample& sample,
                                   EstimationMethod method, int K);
CorrectionModel fit_correction_ar2(const GridSample& sample,
                                   EstimationMethod method, int K);
CorrectionModel fit_correction(const GridSample& sample,
                               EstimationMethod method, int K);

/// Apply the correction on the partial scale.
PartialAutocorrelations correct_partial(const CorrectionModel& model,
                                        const PartialAutocorrelations& est);

/// Correct an estimate and return coefficients on the phi scale.
ArCoefficients evaluate_correction(const CorrectionModel& model,
                                   const PartialAutocorrelations& est);

/// Grid-averaged error measures on the phi scale.  Per-cell moments are
/// computed first and then averaged over cells (and both coefficients for
/// order 2), matching the usual reporting convention for these designs.
struct GridSummary {
    double bias = 0.0;
    double variance = 0.0;
    double rmse = 0.0;
    bool has_corrected = false;
    double bias_corrected = 0.0;
    double variance_corrected = 0.0;
    double rmse_corrected = 0.0;

    std::vector<double> true_phi;           // cells x order
    std::vector<double> mean_phi;           // cells x order
    std::vector<double> mean_phi_corrected; // cells x order (when corrected)
};

GridSummary summarize_grid(const GridSample& sample, EstimationMethod method,
                           const CorrectionModel* model = nullptr);

} // namespace arbc
