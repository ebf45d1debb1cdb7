// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace arbc {

/// Standard normal density.
double normal_pdf(double x);

/// Standard normal distribution function, accurate in both tails.
double normal_cdf(double x);

/// Inverse of normal_cdf for u in (0,1).  Wichura's rational
/// approximation, good to full double precision; u outside (0,1)
/// throws DomainError.
double normal_quantile(double u);

} // namespace arbc
