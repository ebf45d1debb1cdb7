// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "arbc/errors.hpp"
#include "arbc/hermite.hpp"

using namespace arbc;

namespace {

// Gauss quadrature for the standard normal weight by Golub-Welsch: the
// Jacobi matrix of the probabilists' Hermite family is tridiagonal with
// zero diagonal and off-diagonals sqrt(k).  Nodes are its eigenvalues and
// the weight of node i is the squared first eigenvector component.  With
// 16 nodes the rule integrates polynomials up to degree 31 exactly, which
// covers every product He_j He_k with j, k <= 7.
struct GaussRule {
    std::vector<double> node, weight;
};

GaussRule normal_weight_rule(int m)
{
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
    for (int k = 1; k < m; ++k) {
        J(k, k - 1) = std::sqrt(static_cast<double>(k));
        J(k - 1, k) = J(k, k - 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    GaussRule r;
    for (int i = 0; i < m; ++i) {
        r.node.push_back(es.eigenvalues()(i));
        const double v0 = es.eigenvectors()(0, i);
        r.weight.push_back(v0 * v0); // total mass normalized to 1
    }
    return r;
}

double factorial(int k)
{
    double f = 1.0;
    for (int i = 2; i <= k; ++i)
        f *= i;
    return f;
}

} // namespace

TEST_CASE("recurrence base cases and spot values")
{
    for (double x : {-3.0, -0.5, 0.0, 1.7, 9.0})
        CHECK(hermite(0, x) == 1.0);
    CHECK(hermite(1, 2.5) == 2.5);
    CHECK(hermite(2, 2.0) == 3.0);  // x^2 - 1
    CHECK(hermite(3, 1.0) == -2.0); // x^3 - 3x
    CHECK_THROWS_AS(hermite(-1, 0.0), DomainError);
}

TEST_CASE("recurrence matches explicit polynomials at random points")
{
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (int i = 0; i < 100; ++i) {
        const double x = u(rng);
        CHECK(hermite(1, x) == doctest::Approx(x).epsilon(1e-12));
        CHECK(hermite(2, x) == doctest::Approx(x * x - 1.0).epsilon(1e-12));
        CHECK(hermite(3, x)
              == doctest::Approx(x * x * x - 3.0 * x).epsilon(1e-12));
        CHECK(hermite(4, x)
              == doctest::Approx(x * x * x * x - 6.0 * x * x + 3.0)
                     .epsilon(1e-12));
    }
}

TEST_CASE("orthogonality under the normal weight")
{
    const GaussRule rule = normal_weight_rule(16);
    for (int j = 0; j <= 7; ++j) {
        for (int k = 0; k <= 7; ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i < rule.node.size(); ++i)
                acc += rule.weight[i] * hermite(j, rule.node[i])
                     * hermite(k, rule.node[i]);
            const double expect = j == k ? factorial(k) : 0.0;
            CHECK(std::abs(acc - expect)
                  <= 1e-8 * std::max(1.0, std::abs(expect)));
        }
    }
}

TEST_CASE("basis sizes")
{
    CHECK(basis_size_1d(3) == 4);
    CHECK(basis_size_1d(7) == 8);
    CHECK(basis_size_2d(1) == 3);
    CHECK(basis_size_2d(3) == 10);
    CHECK(basis_size_2d(5) == 21);
    CHECK(basis_size_2d(7) == 36);
}

TEST_CASE("one-dimensional rows")
{
    const auto row = basis_row_1d(3, 0.0);
    REQUIRE(row.size() == 4);
    CHECK(row[0] == 1.0);
    CHECK(row[1] == 0.0);
    CHECK(row[2] == -1.0);
    CHECK(row[3] == 0.0);

    const double x = 0.37;
    const auto r2 = basis_row_1d(5, x);
    for (int k = 0; k <= 5; ++k)
        CHECK(r2[static_cast<std::size_t>(k)] == hermite(k, x));
}

TEST_CASE("two-dimensional enumeration is lexicographic in (k, q)")
{
    // Degree-1 case: (0,0), (0,1), (1,0) gives (1, z2, z1).
    const double a = 0.37, b = -1.21;
    const auto row1 = basis_row_2d(1, a, b);
    REQUIRE(row1.size() == 3);
    CHECK(row1[0] == 1.0);
    CHECK(row1[1] == b);
    CHECK(row1[2] == a);

    const auto exps = basis_exponents_2d(3);
    REQUIRE(exps.size() == 10);
    // Lexicographic order, k major.
    const std::vector<std::pair<int, int>> want{
        {0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 0},
        {1, 1}, {1, 2}, {2, 0}, {2, 1}, {3, 0}};
    for (std::size_t i = 0; i < want.size(); ++i) {
        CHECK(exps[i].first == want[i].first);
        CHECK(exps[i].second == want[i].second);
    }

    // Every row entry is the product dictated by its exponent pair.
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int K : {1, 3, 5, 7}) {
        const auto e = basis_exponents_2d(K);
        for (int rep = 0; rep < 20; ++rep) {
            const double z1 = u(rng), z2 = u(rng);
            const auto row = basis_row_2d(K, z1, z2);
            REQUIRE(static_cast<int>(row.size()) == basis_size_2d(K));
            for (std::size_t i = 0; i < e.size(); ++i)
                CHECK(row[i]
                      == doctest::Approx(hermite(e[i].first, z1)
                                         * hermite(e[i].second, z2))
                             .epsilon(1e-14));
        }
    }

    // The linear term of each coordinate sits at a frozen index: models
    // persist coefficient vectors against this layout.
    const auto e3 = basis_exponents_2d(3);
    CHECK(e3[1] == std::pair<int, int>{0, 1});
    CHECK(e3[4] == std::pair<int, int>{1, 0}); // index K + 1
}

TEST_CASE("basis identifiers are frozen")
{
    CHECK(basis_id(1, 3) == "hermite.prob.1d.K3.lex");
    CHECK(basis_id(2, 3) == "hermite.prob.2d.K3.lex");
    CHECK(basis_id(2, 7) == "hermite.prob.2d.K7.lex");
}

TEST_CASE("hermite_all agrees with single evaluations")
{
    double buf[9];
    hermite_all(8, 1.3, buf);
    for (int k = 0; k <= 8; ++k)
        CHECK(buf[k] == hermite(k, 1.3));
}
