// SPDX-License-Identifier: Apache-2.0
#include "arbc/ar_model.hpp"

#include <cmath>

#include "arbc/errors.hpp"
#include "arbc/rng.hpp"

namespace arbc {

namespace {

void check_order(int order, const char* who)
{
    if (order != 1 && order != 2)
        throw DomainError(std::string(who) + ": order must be 1 or 2");
}

void check_scale(double mu, double sigma, const char* who)
{
    if (!std::isfinite(mu))
        throw DomainError(std::string(who) + ": mu must be finite");
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw DomainError(std::string(who) + ": sigma must be positive");
}

} // namespace

ArCoefficients make_ar1(double phi1, double mu, double sigma)
{
    check_scale(mu, sigma, "make_ar1");
    if (!std::isfinite(phi1))
        throw DomainError("make_ar1: phi1 must be finite");
    return ArCoefficients{1, {phi1, 0.0}, mu, sigma};
}

ArCoefficients make_ar2(double phi1, double phi2, double mu, double sigma)
{
    check_scale(mu, sigma, "make_ar2");
    if (!std::isfinite(phi1) || !std::isfinite(phi2))
        throw DomainError("make_ar2: coefficients must be finite");
    return ArCoefficients{2, {phi1, phi2}, mu, sigma};
}

bool is_stationary(const ArCoefficients& c)
{
    check_order(c.order, "is_stationary");
    if (c.order == 1)
        return std::fabs(c.phi[0]) < 1.0;
    const double p1 = c.phi[0];
    const double p2 = c.phi[1];
    return p2 + p1 < 1.0 && p2 - p1 < 1.0 && std::fabs(p2) < 1.0;
}

bool in_open_region(const PartialAutocorrelations& p)
{
    check_order(p.order, "in_open_region");
    for (int k = 0; k < p.order; ++k)
        if (!(std::fabs(p.psi[k]) < 1.0))
            return false;
    return true;
}

PartialAutocorrelations to_partial(const ArCoefficients& c)
{
    if (!is_stationary(c))
        throw DomainError("to_partial: coefficients are not stationary");
    if (c.order == 1)
        return PartialAutocorrelations{1, {c.phi[0], 0.0}};
    return PartialAutocorrelations{2, {c.phi[0] / (1.0 - c.phi[1]), c.phi[1]}};
}

ArCoefficients from_partial(const PartialAutocorrelations& p, double mu,
                            double sigma)
{
    if (!in_open_region(p))
        throw DomainError("from_partial: partial autocorrelations must lie in (-1,1)");
    check_scale(mu, sigma, "from_partial");
    if (p.order == 1)
        return ArCoefficients{1, {p.psi[0], 0.0}, mu, sigma};
    return ArCoefficients{2, {p.psi[0] * (1.0 - p.psi[1]), p.psi[1]}, mu, sigma};
}

bool is_pseudo_periodic(const PartialAutocorrelations& p)
{
    if (p.order != 2)
        throw DomainError("is_pseudo_periodic: defined for order 2 only");
    if (!in_open_region(p))
        throw DomainError("is_pseudo_periodic: input outside the open square");
    const double phi1 = p.psi[0] * (1.0 - p.psi[1]);
    return phi1 * phi1 + 4.0 * p.psi[1] < 0.0;
}

double logit_transform(double v)
{
    if (!(std::fabs(v) < 1.0))
        throw DomainError("logit_transform: argument must lie in (-1,1)");
    return 2.0 * std::atanh(v);
}

double inverse_logit_transform(double z)
{
    if (std::isnan(z))
        throw DomainError("inverse_logit_transform: argument is NaN");
    const double v = std::tanh(0.5 * z);
    // tanh saturates to exactly +-1 in double for |z| beyond ~38; pull the
    // result back into the open interval so g(g^{-1}(z)) stays finite.
    const double top = std::nextafter(1.0, 0.0);
    if (v > top)
        return top;
    if (v < -top)
        return -top;
    return v;
}

double logit_jacobian(double v)
{
    if (!(std::fabs(v) < 1.0))
        throw DomainError("logit_jacobian: argument must lie in (-1,1)");
    return 1.0 / (1.0 + v) + 1.0 / (1.0 - v);
}

std::array<double, 3> stationary_autocovariance(const ArCoefficients& c)
{
    if (!is_stationary(c))
        throw DomainError("stationary_autocovariance: coefficients are not stationary");
    const double s2 = c.sigma * c.sigma;
    if (c.order == 1) {
        const double p = c.phi[0];
        const double g0 = s2 / (1.0 - p * p);
        return {g0, p * g0, p * p * g0};
    }
    const double p1 = c.phi[0];
    const double p2 = c.phi[1];
    const double g0 = s2 * (1.0 - p2)
        / ((1.0 + p2) * ((1.0 - p2) * (1.0 - p2) - p1 * p1));
    const double g1 = p1 / (1.0 - p2) * g0;
    const double g2 = p1 * g1 + p2 * g0;
    return {g0, g1, g2};
}

TimeSeries simulate(const ArCoefficients& c, int n, std::uint64_t seed)
{
    if (!is_stationary(c))
        throw DomainError("simulate: coefficients are not stationary");
    if (n < c.order)
        throw DomainError("simulate: series length shorter than the order");

    NormalSampler rng(seed);
    TimeSeries out;
    out.values.resize(static_cast<std::size_t>(n));
    auto& x = out.values;

    if (c.order == 1) {
        const double p = c.phi[0];
        x[0] = c.mu + c.sigma / std::sqrt(1.0 - p * p) * rng.normal();
        for (int t = 1; t < n; ++t)
            x[t] = c.mu + p * (x[t - 1] - c.mu) + c.sigma * rng.normal();
        return out;
    }

    const auto g = stationary_autocovariance(c);
    // (x_1, x_2) from the stationary bivariate normal via its Cholesky factor.
    const double sd1 = std::sqrt(g[0]);
    const double r = g[1] / g[0];
    const double sd2 = std::sqrt(g[0] * (1.0 - r * r));
    x[0] = c.mu + sd1 * rng.normal();
    if (n > 1)
        x[1] = c.mu + r * (x[0] - c.mu) + sd2 * rng.normal();
    for (int t = 2; t < n; ++t)
        x[t] = c.mu + c.phi[0] * (x[t - 1] - c.mu)
             + c.phi[1] * (x[t - 2] - c.mu) + c.sigma * rng.normal();
    return out;
}

} // namespace arbc
