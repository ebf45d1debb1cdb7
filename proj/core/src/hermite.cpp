// SPDX-License-Identifier: Apache-2.0
#include "arbc/hermite.hpp"

#include "arbc/errors.hpp"

namespace arbc {

namespace {

void check_degree(int K, const char* who)
{
    if (K < 0)
        throw DomainError(std::string(who) + ": degree must be non-negative");
}

} // namespace

double hermite(int k, double x)
{
    check_degree(k, "hermite");
    if (k == 0)
        return 1.0;
    double hm = 1.0; // He_{j-1}
    double h = x;    // He_j
    for (int j = 1; j < k; ++j) {
        const double hn = x * h - static_cast<double>(j) * hm;
        hm = h;
        h = hn;
    }
    return h;
}

void hermite_all(int kmax, double x, std::span<double> out)
{
    check_degree(kmax, "hermite_all");
    if (out.size() < static_cast<std::size_t>(kmax + 1))
        throw DomainError("hermite_all: output span too small");
    out[0] = 1.0;
    if (kmax == 0)
        return;
    out[1] = x;
    for (int j = 1; j < kmax; ++j)
        out[j + 1] = x * out[j] - static_cast<double>(j) * out[j - 1];
}

int basis_size_1d(int K)
{
    check_degree(K, "basis_size_1d");
    return K + 1;
}

int basis_size_2d(int K)
{
    check_degree(K, "basis_size_2d");
    return (K + 1) * (K + 2) / 2;
}

void basis_row_1d(int K, double z, std::span<double> out)
{
    if (out.size() < static_cast<std::size_t>(basis_size_1d(K)))
        throw DomainError("basis_row_1d: output span too small");
    hermite_all(K, z, out);
}

std::vector<double> basis_row_1d(int K, double z)
{
    std::vector<double> row(static_cast<std::size_t>(basis_size_1d(K)));
    basis_row_1d(K, z, row);
    return row;
}

void basis_row_2d(int K, double z1, double z2, std::span<double> out)
{
    const int size = basis_size_2d(K);
    if (out.size() < static_cast<std::size_t>(size))
        throw DomainError("basis_row_2d: output span too small");
    // He values for each coordinate once, then the lexicographic products.
    double buf1[16];
    double buf2[16];
    std::span<double> h1(buf1, 16);
    std::span<double> h2(buf2, 16);
    std::vector<double> big1, big2;
    if (K + 1 > 16) {
        big1.resize(static_cast<std::size_t>(K + 1));
        big2.resize(static_cast<std::size_t>(K + 1));
        h1 = big1;
        h2 = big2;
    }
    hermite_all(K, z1, h1);
    hermite_all(K, z2, h2);
    int i = 0;
    for (int k = 0; k <= K; ++k)
        for (int q = 0; q + k <= K; ++q)
            out[i++] = h1[k] * h2[q];
}

std::vector<double> basis_row_2d(int K, double z1, double z2)
{
    std::vector<double> row(static_cast<std::size_t>(basis_size_2d(K)));
    basis_row_2d(K, z1, z2, row);
    return row;
}

std::vector<std::pair<int, int>> basis_exponents_2d(int K)
{
    check_degree(K, "basis_exponents_2d");
    std::vector<std::pair<int, int>> e;
    e.reserve(static_cast<std::size_t>(basis_size_2d(K)));
    for (int k = 0; k <= K; ++k)
        for (int q = 0; q + k <= K; ++q)
            e.emplace_back(k, q);
    return e;
}

std::string basis_id(int order, int K)
{
    if (order != 1 && order != 2)
        throw DomainError("basis_id: order must be 1 or 2");
    check_degree(K, "basis_id");
    return "hermite.prob." + std::to_string(order) + "d.K" + std::to_string(K)
         + ".lex";
}

} // namespace arbc
