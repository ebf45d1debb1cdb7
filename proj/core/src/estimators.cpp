// SPDX-License-Identifier: Apache-2.0
#include "arbc/estimators.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "arbc/errors.hpp"
#include "arbc/optim.hpp"

namespace arbc {

namespace {

constexpr double kPsiEdge = 1.0 - 1e-6;

std::vector<double> demean(const TimeSeries& series, int order, const char* who)
{
    const int n = series.length();
    if (order != 1 && order != 2)
        throw DomainError(std::string(who) + ": order must be 1 or 2");
    if (n < order + 2)
        throw DomainError(std::string(who) + ": series too short for the order");
    const double mean =
        std::accumulate(series.values.begin(), series.values.end(), 0.0) / n;
    std::vector<double> y(series.values.size());
    double ss = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        y[t] = series.values[t] - mean;
        if (!std::isfinite(y[t]))
            throw DomainError(std::string(who) + ": series contains non-finite values");
        ss += y[t] * y[t];
    }
    if (!(ss > 0.0))
        throw FitError(std::string(who) + ": series has zero sample variance");
    return y;
}

// Pull psi back into the open square if needed; returns true if it moved.
bool clamp_partial(double& psi)
{
    if (std::isnan(psi)) {
        psi = 0.0;
        return true;
    }
    if (psi > kPsiEdge) {
        psi = kPsiEdge;
        return true;
    }
    if (psi < -kPsiEdge) {
        psi = -kPsiEdge;
        return true;
    }
    return false;
}

EstimateRecord from_psi(EstimationMethod m, int order, double psi1, double psi2,
                        bool clamped)
{
    PartialAutocorrelations p{order, {psi1, psi2}};
    const ArCoefficients c = from_partial(p);
    return EstimateRecord{m, order, c.phi, clamped};
}

// Biased autocovariances c_k = (1/n) sum y_t y_{t+k}.
std::array<double, 3> autocov(const std::vector<double>& y, int kmax)
{
    const auto n = y.size();
    std::array<double, 3> c{0.0, 0.0, 0.0};
    for (int k = 0; k <= kmax; ++k) {
        double s = 0.0;
        for (std::size_t t = 0; t + k < n; ++t)
            s += y[t] * y[t + static_cast<std::size_t>(k)];
        c[static_cast<std::size_t>(k)] = s / static_cast<double>(n);
    }
    return c;
}

} // namespace

std::string_view method_code(EstimationMethod m)
{
    switch (m) {
    case EstimationMethod::exact_mle: return "mle";
    case EstimationMethod::conditional_mle: return "cmle";
    case EstimationMethod::burg: return "burg";
    case EstimationMethod::yule_walker: return "yw";
    }
    throw DomainError("method_code: unknown method");
}

std::string_view method_label(EstimationMethod m)
{
    switch (m) {
    case EstimationMethod::exact_mle: return "exact MLE";
    case EstimationMethod::conditional_mle: return "conditional MLE";
    case EstimationMethod::burg: return "Burg";
    case EstimationMethod::yule_walker: return "Yule-Walker";
    }
    throw DomainError("method_label: unknown method");
}

EstimationMethod method_from_code(std::string_view code)
{
    for (EstimationMethod m : all_methods())
        if (code == method_code(m))
            return m;
    throw DomainError("unknown estimation method code: " + std::string(code));
}

PartialAutocorrelations estimate_partial(const EstimateRecord& e)
{
    ArCoefficients c;
    c.order = e.order;
    c.phi = e.phi;
    return to_partial(c);
}

EstimateRecord yule_walker(const TimeSeries& series, int order)
{
    const auto y = demean(series, order, "yule_walker");
    const auto c = autocov(y, order);
    if (!(std::fabs(c[1]) < c[0]))
        throw FitError("yule_walker: degenerate autocovariance sequence");

    if (order == 1) {
        double psi1 = c[1] / c[0];
        const bool cl = clamp_partial(psi1);
        return from_psi(EstimationMethod::yule_walker, 1, psi1, 0.0, cl);
    }
    const double det = c[0] * c[0] - c[1] * c[1];
    const double phi2 = (c[0] * c[2] - c[1] * c[1]) / det;
    const double phi1 = c[1] * (c[0] - c[2]) / det;
    double psi1 = phi1 / (1.0 - phi2);
    double psi2 = phi2;
    bool cl = clamp_partial(psi1);
    cl = clamp_partial(psi2) || cl;
    return from_psi(EstimationMethod::yule_walker, 2, psi1, psi2, cl);
}

EstimateRecord burg(const TimeSeries& series, int order)
{
    auto y = demean(series, order, "burg");
    const auto n = y.size();
    std::vector<double> f = y;
    std::vector<double> b = y;
    double k1 = 0.0, k2 = 0.0;

    for (int m = 1; m <= order; ++m) {
        double num = 0.0, den = 0.0;
        for (std::size_t t = static_cast<std::size_t>(m); t < n; ++t) {
            num += f[t] * b[t - 1];
            den += f[t] * f[t] + b[t - 1] * b[t - 1];
        }
        if (!(den > 0.0))
            throw FitError("burg: degenerate prediction errors");
        const double k = 2.0 * num / den;
        (m == 1 ? k1 : k2) = k;
        // Descending so b[t-1] is still the previous stage's value.
        for (std::size_t t = n - 1; t >= static_cast<std::size_t>(m); --t) {
            const double ft = f[t];
            const double bt = b[t - 1];
            f[t] = ft - k * bt;
            b[t] = bt - k * ft;
        }
    }

    bool cl = clamp_partial(k1);
    if (order == 1)
        return from_psi(EstimationMethod::burg, 1, k1, 0.0, cl);
    cl = clamp_partial(k2) || cl;
    return from_psi(EstimationMethod::burg, 2, k1, k2, cl);
}

EstimateRecord conditional_mle(const TimeSeries& series, int order)
{
    const auto y = demean(series, order, "conditional_mle");
    const auto n = y.size();

    if (order == 1) {
        double num = 0.0, den = 0.0;
        for (std::size_t t = 1; t < n; ++t) {
            num += y[t] * y[t - 1];
            den += y[t - 1] * y[t - 1];
        }
        if (!(den > 0.0))
            throw FitError("conditional_mle: degenerate regressor");
        double psi1 = num / den;
        const bool cl = clamp_partial(psi1);
        return from_psi(EstimationMethod::conditional_mle, 1, psi1, 0.0, cl);
    }

    double s11 = 0.0, s22 = 0.0, s12 = 0.0, r1 = 0.0, r2 = 0.0;
    for (std::size_t t = 2; t < n; ++t) {
        s11 += y[t - 1] * y[t - 1];
        s22 += y[t - 2] * y[t - 2];
        s12 += y[t - 1] * y[t - 2];
        r1 += y[t] * y[t - 1];
        r2 += y[t] * y[t - 2];
    }
    const double det = s11 * s22 - s12 * s12;
    if (!(det > 1e-12 * s11 * s22) || !(s11 > 0.0) || !(s22 > 0.0))
        throw FitError("conditional_mle: collinear lag regressors");
    const double phi1 = (r1 * s22 - r2 * s12) / det;
    const double phi2 = (r2 * s11 - r1 * s12) / det;
    double psi1 = phi1 / (1.0 - phi2);
    double psi2 = phi2;
    bool cl = clamp_partial(psi1);
    cl = clamp_partial(psi2) || cl;
    return from_psi(EstimationMethod::conditional_mle, 2, psi1, psi2, cl);
}

EstimateRecord exact_mle(const TimeSeries& series, int order)
{
    const auto y = demean(series, order, "exact_mle");
    const auto n = y.size();
    const double nn = static_cast<double>(n);
    const EstimateRecord init = burg(series, order);
    const PartialAutocorrelations psi0 = estimate_partial(init);

    if (order == 1) {
        const double y1sq = y[0] * y[0];
        double a = 0.0, b = 0.0, c = 0.0;
        for (std::size_t t = 1; t < n; ++t) {
            a += y[t] * y[t];
            b += y[t] * y[t - 1];
            c += y[t - 1] * y[t - 1];
        }
        auto objective = [&](double z) {
            const double phi = std::tanh(0.5 * z);
            const double one_m = 1.0 - phi * phi;
            const double s = y1sq + a - 2.0 * phi * b
                           + phi * phi * (c - y1sq);
            if (!(s > 0.0) || !(one_m > 0.0))
                return 1e300;
            return nn * std::log(s) - std::log(one_m);
        };
        const double z0 = logit_transform(psi0.psi[0]);
        const ScalarMinimum min = minimize_scalar(objective, z0, 0.5);
        const double phi = inverse_logit_transform(min.x);
        return EstimateRecord{EstimationMethod::exact_mle, 1, {phi, 0.0}, false};
    }

    // Lag moments of the conditional sum of squares, t = 3..n.
    double s00 = 0.0, s01 = 0.0, s02 = 0.0, s11 = 0.0, s12 = 0.0, s22 = 0.0;
    for (std::size_t t = 2; t < n; ++t) {
        s00 += y[t] * y[t];
        s01 += y[t] * y[t - 1];
        s02 += y[t] * y[t - 2];
        s11 += y[t - 1] * y[t - 1];
        s12 += y[t - 1] * y[t - 2];
        s22 += y[t - 2] * y[t - 2];
    }
    const double q11 = y[0] * y[0] + y[1] * y[1];
    const double q12 = y[0] * y[1];

    auto objective = [&](std::span<const double> z) {
        const double psi1 = std::tanh(0.5 * z[0]);
        const double psi2 = std::tanh(0.5 * z[1]);
        const double phi2 = psi2;
        const double phi1 = psi1 * (1.0 - psi2);
        // Scaled stationary covariance of (x_1, x_2): v0 = gamma_0/sigma^2.
        const double denom = (1.0 + phi2)
            * ((1.0 - phi2) * (1.0 - phi2) - phi1 * phi1);
        if (!(denom > 0.0))
            return 1e300;
        const double v0 = (1.0 - phi2) / denom;
        const double v1 = psi1 * v0;
        const double detv = v0 * v0 - v1 * v1;
        if (!(detv > 0.0) || !(v0 > 0.0))
            return 1e300;
        const double quad = (v0 * q11 - 2.0 * v1 * q12) / detv;
        const double sc = s00 - 2.0 * phi1 * s01 - 2.0 * phi2 * s02
                        + phi1 * phi1 * s11 + 2.0 * phi1 * phi2 * s12
                        + phi2 * phi2 * s22;
        const double total = quad + sc;
        if (!(total > 0.0))
            return 1e300;
        return nn * std::log(total) + std::log(detv);
    };

    const double start[2] = {logit_transform(psi0.psi[0]),
                             logit_transform(psi0.psi[1])};
    const double steps[3] = {0.3, 0.05, 0.8};
    std::vector<double> x(start, start + 2);
    SimplexResult best{};
    best.value = 1e301;
    for (double step : steps) {
        const SimplexResult r = nelder_mead(objective, x, step, 1e-12, 600);
        if (r.value < best.value)
            best = r;
        if (r.converged && r.value < 1e300) {
            const double p1 = inverse_logit_transform(r.x[0]);
            const double p2 = inverse_logit_transform(r.x[1]);
            return from_psi(EstimationMethod::exact_mle, 2, p1, p2, false);
        }
        x = best.x;
    }
    const double p1 = inverse_logit_transform(best.x[0]);
    const double p2 = inverse_logit_transform(best.x[1]);
    const ArCoefficients bc = from_partial({2, {p1, p2}});
    throw ConvergenceError("exact_mle: simplex failed to converge",
                           {bc.phi[0], bc.phi[1]}, best.value);
}

EstimateRecord estimate(EstimationMethod m, const TimeSeries& series, int order)
{
    switch (m) {
    case EstimationMethod::exact_mle: return exact_mle(series, order);
    case EstimationMethod::conditional_mle: return conditional_mle(series, order);
    case EstimationMethod::burg: return burg(series, order);
    case EstimationMethod::yule_walker: return yule_walker(series, order);
    }
    throw DomainError("estimate: unknown method");
}

double asymptotic_bias_ar1(double phi, int n)
{
    if (n < 1)
        throw DomainError("asymptotic_bias_ar1: n must be positive");
    return -(1.0 + 3.0 * phi) / static_cast<double>(n);
}

} // namespace arbc
