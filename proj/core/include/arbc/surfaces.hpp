// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "arbc/ar_model.hpp"
#include "arbc/calibration.hpp"
#include "arbc/skew_normal.hpp"

namespace arbc {

/// Finite-sample distribution fits, one per grid cell, of the estimates on
/// the logit scale.  For order 2 the dependence between the two logit
/// coordinates is kept as a per-cell Pearson correlation.
struct CellDistributions {
    int order = 1;
    std::vector<SkewNormalParams> marginal1; // cells
    std::vector<SkewNormalParams> marginal2; // cells, order 2 only
    std::vector<double> rho;                 // cells, order 2 only
};

CellDistributions fit_cell_distributions(const GridSample& sample,
                                         EstimationMethod method,
                                         unsigned threads = 0);

/// Smooth parameter surfaces over the true partial autocorrelations:
/// ordinary least squares on Hermite basis rows evaluated at g(psi_true).
/// Location is fitted as is; scale and shape on the log scale so the
/// predictions stay positive; the correlation on the plain scale, clamped
/// at prediction time.
struct SurfaceSet {
    int order = 1;
    int K = 3;
    std::vector<double> mu1, log_sigma1, log_xi1;
    std::vector<double> mu2, log_sigma2, log_xi2; // order 2 only
    std::vector<double> rho;                      // order 2 only
};

SurfaceSet fit_parameter_surfaces(const GridSample& sample,
                                  const CellDistributions& cells, int K);

struct SurfacePrediction {
    SkewNormalParams marginal1;
    SkewNormalParams marginal2; // meaningful for order 2 only
    double rho = 0.0;           // likewise
};

/// Evaluate the surfaces at a plug-in point in the open region.
SurfacePrediction predict_surfaces(const SurfaceSet& surfaces,
                                   const PartialAutocorrelations& at);

} // namespace arbc
