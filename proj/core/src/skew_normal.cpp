// SPDX-License-Identifier: Apache-2.0
#include "arbc/skew_normal.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "arbc/errors.hpp"
#include "arbc/normal.hpp"
#include "arbc/optim.hpp"

namespace arbc {

namespace {

void check_params(const SkewNormalParams& p, const char* who)
{
    if (!(p.sigma > 0.0) || !std::isfinite(p.sigma))
        throw DomainError(std::string(who) + ": sigma must be positive");
    if (!(p.xi > 0.0) || !std::isfinite(p.xi))
        throw DomainError(std::string(who) + ": xi must be positive");
    if (!std::isfinite(p.mu))
        throw DomainError(std::string(who) + ": mu must be finite");
}

double norm_const(double xi)
{
    return 2.0 / (xi + 1.0 / xi);
}

// z scaled by the side-dependent factor; z <= 0 belongs to the left piece.
double effective_z(double z, double xi)
{
    return z > 0.0 ? z / xi : z * xi;
}

} // namespace

double sn_pdf(const SkewNormalParams& p, double x)
{
    check_params(p, "sn_pdf");
    const double z = (x - p.mu) / p.sigma;
    return norm_const(p.xi) / p.sigma * normal_pdf(effective_z(z, p.xi));
}

double sn_log_pdf(const SkewNormalParams& p, double x)
{
    check_params(p, "sn_log_pdf");
    const double z = (x - p.mu) / p.sigma;
    const double ze = effective_z(z, p.xi);
    return std::log(norm_const(p.xi)) - std::log(p.sigma)
         - 0.5 * ze * ze - 0.5 * std::log(2.0 * std::numbers::pi);
}

double sn_cdf(const SkewNormalParams& p, double x)
{
    check_params(p, "sn_cdf");
    const double z = (x - p.mu) / p.sigma;
    const double xi2 = p.xi * p.xi;
    if (z <= 0.0)
        return 2.0 / (1.0 + xi2) * normal_cdf(z * p.xi);
    return 1.0 - 2.0 * xi2 / (1.0 + xi2) * normal_cdf(-z / p.xi);
}

double sn_quantile(const SkewNormalParams& p, double u)
{
    check_params(p, "sn_quantile");
    if (!(u > 0.0 && u < 1.0))
        throw DomainError("sn_quantile: u must lie strictly in (0,1)");
    const double xi2 = p.xi * p.xi;
    const double split = 1.0 / (1.0 + xi2);
    double z;
    if (u <= split)
        z = normal_quantile(0.5 * u * (1.0 + xi2)) / p.xi;
    else
        z = -p.xi * normal_quantile(0.5 * (1.0 - u) * (1.0 + xi2) / xi2);
    return p.mu + p.sigma * z;
}

double sn_neg_log_likelihood(const SkewNormalParams& p,
                             std::span<const double> samples)
{
    check_params(p, "sn_neg_log_likelihood");
    const double m = static_cast<double>(samples.size());
    double sumsq = 0.0;
    for (double x : samples) {
        const double ze = effective_z((x - p.mu) / p.sigma, p.xi);
        sumsq += ze * ze;
    }
    return m * (std::log(p.sigma) - std::log(norm_const(p.xi))
                + 0.5 * std::log(2.0 * std::numbers::pi))
         + 0.5 * sumsq;
}

SkewNormalParams sn_fit(std::span<const double> samples)
{
    const std::size_t m = samples.size();
    if (m < 8)
        throw FitError("sn_fit: need at least 8 samples");
    double mean = 0.0;
    for (double x : samples) {
        if (!std::isfinite(x))
            throw FitError("sn_fit: samples contain non-finite values");
        mean += x;
    }
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (double x : samples)
        var += (x - mean) * (x - mean);
    var /= static_cast<double>(m);
    if (!(var > 0.0))
        throw FitError("sn_fit: samples have zero spread");
    const double sd = std::sqrt(var);

    // Optimize in units of the moment fit: theta = (mu offset, log sigma
    // offset, log xi), so a common simplex step suits all coordinates.
    auto unpack = [&](std::span<const double> t) {
        SkewNormalParams p;
        p.mu = mean + sd * t[0];
        p.sigma = sd * std::exp(t[1]);
        p.xi = std::exp(t[2]);
        return p;
    };
    auto objective = [&](std::span<const double> t) {
        if (std::fabs(t[1]) > 40.0 || std::fabs(t[2]) > 40.0)
            return 1e300;
        return sn_neg_log_likelihood(unpack(t), samples);
    };

    std::vector<double> t0{0.0, 0.0, 0.0};
    SimplexResult best{};
    best.value = 1e301;
    for (double step : {0.25, 0.05, 1.0}) {
        const SimplexResult r = nelder_mead(objective, t0, step, 1e-11, 1000);
        if (r.value < best.value)
            best = r;
        if (r.converged && r.value < 1e300)
            return unpack(r.x);
        t0 = best.x;
    }
    const SkewNormalParams p = unpack(best.x);
    throw ConvergenceError("sn_fit: simplex failed to converge",
                           {p.mu, p.sigma, p.xi}, best.value);
}

} // namespace arbc
