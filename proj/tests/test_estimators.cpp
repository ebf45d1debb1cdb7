// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "arbc/ar_model.hpp"
#include "arbc/errors.hpp"
#include "arbc/estimators.hpp"
#include "helpers.hpp"

using namespace arbc;

namespace {

TimeSeries series_of(std::initializer_list<double> v)
{
    return TimeSeries{std::vector<double>(v)};
}

// Independent biased-autocovariance reference.
double autocov(const std::vector<double>& y, int lag)
{
    const double mu = testutil::mean(y);
    double s = 0.0;
    for (std::size_t t = lag; t < y.size(); ++t)
        s += (y[t] - mu) * (y[t - lag] - mu);
    return s / static_cast<double>(y.size());
}

// Independent Burg lattice for order <= 2, straight from the update
// equations, with the series demeaned first.
std::array<double, 2> burg_reference(const std::vector<double>& y, int order)
{
    const double mu = testutil::mean(y);
    std::vector<double> f, b;
    for (std::size_t t = 1; t < y.size(); ++t) {
        f.push_back(y[t] - mu);
        b.push_back(y[t - 1] - mu);
    }
    auto reflect = [](const std::vector<double>& fv,
                      const std::vector<double>& bv) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < fv.size(); ++i) {
            num += fv[i] * bv[i];
            den += fv[i] * fv[i] + bv[i] * bv[i];
        }
        return 2.0 * num / den;
    };
    const double k1 = reflect(f, b);
    if (order == 1)
        return {k1, 0.0};
    std::vector<double> f2, b2;
    for (std::size_t i = 1; i < f.size(); ++i) {
        f2.push_back(f[i] - k1 * b[i]);
        b2.push_back(b[i - 1] - k1 * f[i - 1]);
    }
    const double k2 = reflect(f2, b2);
    return {k1, k2};
}

// Independent exact-likelihood objective: dense stationary covariance,
// Cholesky solve, sigma^2 profiled out, mean fixed at the sample mean.
// Autocovariances come from the hand closed forms plus the lag recursion,
// not from the library.
double dense_exact_objective(const std::vector<double>& y,
                             const ArCoefficients& c)
{
    const int n = static_cast<int>(y.size());
    std::vector<double> g(static_cast<std::size_t>(n));
    if (c.order == 1) {
        g[0] = 1.0 / (1.0 - c.phi[0] * c.phi[0]);
        for (int k = 1; k < n; ++k)
            g[static_cast<std::size_t>(k)] =
                c.phi[0] * g[static_cast<std::size_t>(k - 1)];
    } else {
        const double p1 = c.phi[0], p2 = c.phi[1];
        const double den = (1.0 + p2) * ((1.0 - p2) * (1.0 - p2) - p1 * p1);
        g[0] = (1.0 - p2) / den;
        g[1] = p1 / (1.0 - p2) * g[0];
        for (int k = 2; k < n; ++k)
            g[static_cast<std::size_t>(k)] =
                p1 * g[static_cast<std::size_t>(k - 1)]
                + p2 * g[static_cast<std::size_t>(k - 2)];
    }
    Eigen::MatrixXd G(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            G(i, j) = g[static_cast<std::size_t>(std::abs(i - j))];
    const Eigen::LLT<Eigen::MatrixXd> llt(G);
    REQUIRE(llt.info() == Eigen::Success);

    const double mu = testutil::mean(y);
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i)
        r(i) = y[static_cast<std::size_t>(i)] - mu;
    const double quad = r.dot(llt.solve(r));
    double logdet = 0.0;
    for (int i = 0; i < n; ++i)
        logdet += 2.0 * std::log(llt.matrixL()(i, i));
    return n * std::log(quad) + logdet;
}

} // namespace

TEST_CASE("yule-walker hand oracle on the fixed series")
{
    // x = (1,2,3,2,1): demeaned sum of squares 2.8, lag-1 cross sum 0.16,
    // so the autocovariance ratio is 0.16/2.8 = 2/35.
    const auto x = series_of({1, 2, 3, 2, 1});
    const auto e = yule_walker(x, 1);
    CHECK(e.phi[0] == doctest::Approx(2.0 / 35.0).epsilon(1e-12));
    CHECK(e.phi[0] == doctest::Approx(autocov(x.values, 1) / autocov(x.values, 0))
                          .epsilon(1e-13));
    CHECK_FALSE(e.clamped);
    CHECK(e.order == 1);
    CHECK(e.method == EstimationMethod::yule_walker);
}

TEST_CASE("yule-walker order 2 matches the solved autocovariance system")
{
    const auto x = simulate(make_ar2(0.3, 0.4), 4000, 77);
    const double c0 = autocov(x.values, 0);
    const double c1 = autocov(x.values, 1);
    const double c2 = autocov(x.values, 2);
    // Solve the 2x2 Toeplitz system by hand.
    const double det = c0 * c0 - c1 * c1;
    const double p1 = (c1 * c0 - c2 * c1) / det;
    const double p2 = (c2 * c0 - c1 * c1) / det;
    const auto e = yule_walker(x, 2);
    CHECK(e.phi[0] == doctest::Approx(p1).epsilon(1e-10));
    CHECK(e.phi[1] == doctest::Approx(p2).epsilon(1e-10));
}

TEST_CASE("conditional mle closed-form oracle")
{
    // Same fixed series: lag cross sum 0.16 over the first four squared
    // deviations 2.16, i.e. 2/27.
    const auto x = series_of({1, 2, 3, 2, 1});
    const auto e = conditional_mle(x, 1);
    CHECK(e.phi[0] == doctest::Approx(2.0 / 27.0).epsilon(1e-12));
    CHECK_FALSE(e.clamped);
}

TEST_CASE("burg hand oracle and lattice reference")
{
    // x = (2,4,5,3,1): demeaned lag cross sum 1, forward+backward energy
    // 15, reflection coefficient 2/15.  Distinct from both the
    // Yule-Walker value 1/10 and the conditional-MLE value 1/6.
    const auto x = series_of({2, 4, 5, 3, 1});
    CHECK(burg(x, 1).phi[0] == doctest::Approx(2.0 / 15.0).epsilon(1e-12));
    CHECK(yule_walker(x, 1).phi[0] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(conditional_mle(x, 1).phi[0]
          == doctest::Approx(1.0 / 6.0).epsilon(1e-12));

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> y(12);
        for (auto& v : y)
            v = u(rng);
        const auto ref1 = burg_reference(y, 1);
        CHECK(burg(TimeSeries{y}, 1).phi[0]
              == doctest::Approx(ref1[0]).epsilon(1e-12));

        const auto ref2 = burg_reference(y, 2);
        const auto e2 = burg(TimeSeries{y}, 2);
        const auto psi = estimate_partial(e2);
        CHECK(psi.psi[0] == doctest::Approx(ref2[0]).epsilon(1e-10));
        CHECK(psi.psi[1] == doctest::Approx(ref2[1]).epsilon(1e-10));
        // Levinson assembly of the coefficients.
        CHECK(e2.phi[1] == doctest::Approx(ref2[1]).epsilon(1e-10));
        CHECK(e2.phi[0]
              == doctest::Approx(ref2[0] * (1.0 - ref2[1])).epsilon(1e-10));
    }
}

TEST_CASE("burg and yule-walker are always interior")
{
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> psi(-0.98, 0.98);
    for (int rep = 0; rep < 200; ++rep) {
        const PartialAutocorrelations p{2, {psi(rng), psi(rng)}};
        const auto x = simulate(from_partial(p), 10, 90000 + rep);
        for (int order : {1, 2}) {
            for (auto e : {yule_walker(x, order), burg(x, order)}) {
                const auto ph = estimate_partial(e);
                for (int k = 0; k < order; ++k) {
                    CHECK(std::abs(ph.psi[static_cast<std::size_t>(k)]) < 1.0);
                }
                CHECK_FALSE(e.clamped);
                CHECK(is_stationary(from_partial(ph)));
            }
        }
    }
}

TEST_CASE("conditional mle clamps explosive solutions")
{
    const auto x = series_of({1, 2, 4, 8, 16, 32});
    const auto e = conditional_mle(x, 1);
    CHECK(e.clamped);
    CHECK(std::abs(e.phi[0]) < 1.0);
    CHECK(e.phi[0] == doctest::Approx(1.0 - 1e-6).epsilon(1e-12));
}

TEST_CASE("white noise estimates are near zero for every method")
{
    const auto x = simulate(make_ar1(0.0), 100000, 21);
    for (auto m : all_methods()) {
        const auto e1 = estimate(m, x, 1);
        CHECK(std::abs(e1.phi[0]) < 0.02);
        const auto e2 = estimate(m, x, 2);
        CHECK(std::abs(e2.phi[0]) < 0.02);
        CHECK(std::abs(e2.phi[1]) < 0.02);
    }
}

TEST_CASE("consistency on long series")
{
    const auto x1 = simulate(make_ar1(0.9), 1000000, 31);
    for (auto m : all_methods())
        CHECK(std::abs(estimate(m, x1, 1).phi[0] - 0.9) < 0.01);

    const auto x2 = simulate(make_ar2(0.3, 0.4), 1000000, 32);
    for (auto m : all_methods()) {
        const auto e = estimate(m, x2, 2);
        CHECK(std::abs(e.phi[0] - 0.3) < 0.02);
        CHECK(std::abs(e.phi[1] - 0.4) < 0.02);
    }

    // Exact and conditional MLE nearly coincide at n = 1e5.
    const auto x3 = simulate(make_ar1(0.6), 100000, 33);
    CHECK(std::abs(exact_mle(x3, 1).phi[0] - conditional_mle(x3, 1).phi[0])
          < 1e-3);
}

TEST_CASE("all four estimators agree at n = 1e5 on random truths")
{
    std::mt19937 rng(555);
    std::uniform_real_distribution<double> u(-0.95, 0.95);
    for (int rep = 0; rep < 10; ++rep) {
        const auto x = simulate(make_ar1(u(rng)), 100000, 7000 + rep);
        double lo = 1.0, hi = -1.0;
        for (auto m : all_methods()) {
            const double v = estimate(m, x, 1).phi[0];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(hi - lo < 0.01);
    }
    for (int rep = 0; rep < 10; ++rep) {
        const PartialAutocorrelations p{2, {u(rng), u(rng)}};
        const auto x = simulate(from_partial(p), 100000, 8000 + rep);
        for (int k = 0; k < 2; ++k) {
            double lo = 1.0, hi = -1.0;
            for (auto m : all_methods()) {
                const double v =
                    estimate(m, x, 2).phi[static_cast<std::size_t>(k)];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            CHECK(hi - lo < 0.01);
        }
    }
}

TEST_CASE("exact mle matches a dense-likelihood scan, order 1")
{
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    for (int rep = 0; rep < 3; ++rep) {
        const auto x = simulate(make_ar1(u(rng)), 30, 4000 + rep);
        const auto e = exact_mle(x, 1);

        // Coarse scan plus golden refinement of the dense objective.
        auto obj = [&](double phi) {
            return dense_exact_objective(x.values, make_ar1(phi));
        };
        double best = 0.0, bestv = 1e300;
        for (int i = -980; i <= 980; ++i) {
            const double v = obj(i / 1000.0);
            if (v < bestv) {
                bestv = v;
                best = i / 1000.0;
            }
        }
        double a = best - 1e-3, b = best + 1e-3;
        const double gold = 0.381966011250105;
        for (int it = 0; it < 60; ++it) {
            const double c1 = a + gold * (b - a);
            const double c2 = b - gold * (b - a);
            if (obj(c1) < obj(c2))
                b = c2;
            else
                a = c1;
        }
        CHECK(std::abs(e.phi[0] - 0.5 * (a + b)) < 1e-5);
    }
}

TEST_CASE("exact mle matches a dense-likelihood scan, order 2")
{
    std::mt19937 rng(18);
    std::uniform_real_distribution<double> u(-0.85, 0.85);
    for (int rep = 0; rep < 3; ++rep) {
        const PartialAutocorrelations truth{2, {u(rng), u(rng)}};
        const auto x = simulate(from_partial(truth), 30, 4100 + rep);
        const auto e = exact_mle(x, 2);

        auto obj = [&](double s1, double s2) {
            return dense_exact_objective(
                x.values, from_partial(PartialAutocorrelations{2, {s1, s2}}));
        };
        double b1 = 0.0, b2 = 0.0, bestv = 1e300;
        for (int i = -49; i <= 49; ++i) {
            for (int j = -49; j <= 49; ++j) {
                const double v = obj(i / 50.0, j / 50.0);
                if (v < bestv) {
                    bestv = v;
                    b1 = i / 50.0;
                    b2 = j / 50.0;
                }
            }
        }
        double step = 0.02;
        for (int round = 0; round < 4; ++round) {
            step /= 5.0;
            double n1 = b1, n2 = b2;
            for (int i = -5; i <= 5; ++i) {
                for (int j = -5; j <= 5; ++j) {
                    const double s1 = b1 + i * step, s2 = b2 + j * step;
                    if (std::abs(s1) >= 0.999 || std::abs(s2) >= 0.999)
                        continue;
                    const double v = obj(s1, s2);
                    if (v < bestv) {
                        bestv = v;
                        n1 = s1;
                        n2 = s2;
                    }
                }
            }
            b1 = n1;
            b2 = n2;
        }
        const auto psi = estimate_partial(e);
        CHECK(std::abs(psi.psi[0] - b1) < 2e-3);
        CHECK(std::abs(psi.psi[1] - b2) < 2e-3);
    }
}

TEST_CASE("degenerate and too-short input")
{
    const auto flat = series_of({3, 3, 3, 3, 3, 3});
    CHECK_THROWS_AS(yule_walker(flat, 1), FitError);
    CHECK_THROWS_AS(burg(flat, 1), FitError);
    CHECK_THROWS_AS(conditional_mle(flat, 1), FitError);
    CHECK_THROWS_AS(exact_mle(flat, 1), FitError);

    const auto tiny = series_of({1, 2});
    for (auto m : all_methods())
        CHECK_THROWS_AS(estimate(m, tiny, 1), DomainError);
    const auto tiny2 = series_of({1, 2, 3});
    for (auto m : all_methods())
        CHECK_THROWS_AS(estimate(m, tiny2, 2), DomainError);
}

TEST_CASE("method codes and labels")
{
    CHECK(method_code(EstimationMethod::exact_mle) == "mle");
    CHECK(method_code(EstimationMethod::conditional_mle) == "cmle");
    CHECK(method_code(EstimationMethod::burg) == "burg");
    CHECK(method_code(EstimationMethod::yule_walker) == "yw");
    for (auto m : all_methods())
        CHECK(method_from_code(method_code(m)) == m);
    CHECK_THROWS_AS(method_from_code("ols"), DomainError);
}

TEST_CASE("asymptotic bias comparator")
{
    CHECK(asymptotic_bias_ar1(0.0, 10) == doctest::Approx(-0.1).epsilon(1e-15));
    CHECK(asymptotic_bias_ar1(-1.0 / 3.0, 25)
          == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(asymptotic_bias_ar1(0.5, 20)
          == doctest::Approx(-0.125).epsilon(1e-15));
}

TEST_CASE("estimate dispatcher matches the direct calls")
{
    const auto x = simulate(make_ar2(0.5, -0.3), 40, 64);
    CHECK(estimate(EstimationMethod::yule_walker, x, 2).phi[0]
          == yule_walker(x, 2).phi[0]);
    CHECK(estimate(EstimationMethod::burg, x, 2).phi[1] == burg(x, 2).phi[1]);
    CHECK(estimate(EstimationMethod::conditional_mle, x, 1).phi[0]
          == conditional_mle(x, 1).phi[0]);
    CHECK(estimate(EstimationMethod::exact_mle, x, 1).phi[0]
          == exact_mle(x, 1).phi[0]);
}
