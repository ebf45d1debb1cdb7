// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

namespace arbc {

/// Two-piece skew normal with inverse-scale-factor skewing: density
///   p(x) = (2 / (xi + 1/xi)) / sigma * phi(z/xi)   for z > 0,
///          (2 / (xi + 1/xi)) / sigma * phi(z xi)   for z <= 0,
/// with z = (x - mu)/sigma and phi the standard normal density.
/// xi = 1 recovers the normal; xi > 1 puts mass on the right.
/// mu and sigma are the location and scale of the density as written,
/// not the mean and standard deviation.
struct SkewNormalParams {
    double mu = 0.0;
    double sigma = 1.0;
    double xi = 1.0;
};

double sn_pdf(const SkewNormalParams& p, double x);
double sn_log_pdf(const SkewNormalParams& p, double x);

/// Closed-form distribution function; F(mu) = 1/(1+xi^2).
double sn_cdf(const SkewNormalParams& p, double x);

/// Exact piecewise inverse of sn_cdf, u in (0,1).
double sn_quantile(const SkewNormalParams& p, double u);

double sn_neg_log_likelihood(const SkewNormalParams& p,
                             std::span<const double> samples);

/// Maximum likelihood fit of (mu, sigma, xi), optimized over
/// (mu, log sigma, log xi) from the moment-matched normal start, so the
/// fitted likelihood never falls below the plain-normal one.  Requires at
/// least 8 samples with positive spread.
SkewNormalParams sn_fit(std::span<const double> samples);

} // namespace arbc
