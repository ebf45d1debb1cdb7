// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>
#include <vector>

namespace arbc {

struct ScalarMinimum {
    double x = 0.0;
    double value = 0.0;
    int evals = 0;
};

/// Minimize a smooth unimodal-ish scalar function.  Starting from x0 the
/// routine expands a downhill bracket and then runs Brent's parabolic
/// interpolation.  Intended for coercive objectives (value grows without
/// bound in both directions), where a bracket always exists.
ScalarMinimum minimize_scalar(const std::function<double(double)>& f,
                              double x0, double step,
                              double xtol = 1e-11, int max_iter = 200);

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    int evals = 0;
    bool converged = false;
};

/// Nelder-Mead with the standard reflect/expand/contract/shrink moves.
/// Stops when the value spread across the simplex drops below
/// ftol * (1 + |f_best|) or after max_iter iterations.
SimplexResult nelder_mead(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x0, double step, double ftol, int max_iter);

struct BfgsResult {
    std::vector<double> x;
    double value = 0.0;
    std::vector<double> gradient;
    int iterations = 0;
    int evals = 0;
    bool converged = false;
};

/// BFGS with Armijo backtracking and a curvature guard on the inverse
/// Hessian update.  fg must write the gradient into its second argument
/// and return the value.  Converged means the value stalled below ftol
/// (relative) or the gradient max-norm fell below gtol.
BfgsResult bfgs(
    const std::function<double(std::span<const double>, std::span<double>)>& fg,
    std::span<const double> x0, double ftol = 1e-9, double gtol = 1e-8,
    int max_iter = 500);

} // namespace arbc
