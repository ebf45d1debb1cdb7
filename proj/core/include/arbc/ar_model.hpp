// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace arbc {

/// Autoregressive model of order 1 or 2,
///   x_t = mu + phi_1 (x_{t-1} - mu) + phi_2 (x_{t-2} - mu) + sigma e_t,
/// with iid standard normal innovations e_t.
struct ArCoefficients {
    int order = 1;
    std::array<double, 2> phi{0.0, 0.0}; // phi[k] multiplies lag k+1
    double mu = 0.0;
    double sigma = 1.0;
};

ArCoefficients make_ar1(double phi1, double mu = 0.0, double sigma = 1.0);
ArCoefficients make_ar2(double phi1, double phi2, double mu = 0.0,
                        double sigma = 1.0);

/// Strict stationarity region: |phi_1| < 1 for order 1; for order 2 the
/// open triangle phi_2 + phi_1 < 1, phi_2 - phi_1 < 1, |phi_2| < 1.
bool is_stationary(const ArCoefficients& c);

/// Partial autocorrelations (psi_1, psi_2).  For order 2 this
/// reparametrizes the stationarity triangle as the open unit square:
/// psi_1 = phi_1 / (1 - phi_2), psi_2 = phi_2.
struct PartialAutocorrelations {
    int order = 1;
    std::array<double, 2> psi{0.0, 0.0};
};

/// True when every |psi_k| < 1.
bool in_open_region(const PartialAutocorrelations& p);

/// Both directions of the reparametrization throw DomainError when the
/// input is outside the open region (or non-stationary).
PartialAutocorrelations to_partial(const ArCoefficients& c);
ArCoefficients from_partial(const PartialAutocorrelations& p, double mu = 0.0,
                            double sigma = 1.0);

/// True iff the order-2 lag polynomial has complex roots, i.e. the process
/// is pseudo-periodic.  Equivalent to phi_1^2 + 4 phi_2 < 0.
bool is_pseudo_periodic(const PartialAutocorrelations& p);

/// g(v) = log((1+v)/(1-v)), mapping (-1,1) onto the real line.
double logit_transform(double v);

/// Inverse of g.  Output is clamped to the largest representable open
/// subinterval of (-1,1), so downstream code can rely on strict interiority.
double inverse_logit_transform(double z);

/// g'(v) = 1/(1+v) + 1/(1-v), written in the cancellation-free form.
double logit_jacobian(double v);

struct TimeSeries {
    std::vector<double> values;

    int length() const noexcept { return static_cast<int>(values.size()); }
};

/// First autocovariances gamma_0, gamma_1, gamma_2 of the stationary
/// process, from the Yule-Walker relations.
std::array<double, 3> stationary_autocovariance(const ArCoefficients& c);

/// Draw an exact stationary sample path of length n.  The initial value
/// (pair, for order 2) comes from the stationary Gaussian distribution,
/// so no burn-in is involved and the marginal law is exact at every t.
/// Deterministic in (c, n, seed).
TimeSeries simulate(const ArCoefficients& c, int n, std::uint64_t seed);

} // namespace arbc
