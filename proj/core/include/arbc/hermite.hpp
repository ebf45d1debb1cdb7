// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace arbc {

/// Probabilists' Hermite polynomial He_k(x):
///   He_0 = 1, He_1 = x, He_{k+1} = x He_k - k He_{k-1}.
/// Orthogonal under the standard normal weight with norm k!.
double hermite(int k, double x);

/// Fill out[0..kmax] with He_0(x) .. He_kmax(x).
void hermite_all(int kmax, double x, std::span<double> out);

/// Number of basis functions of total degree <= K.
int basis_size_1d(int K); // K + 1
int basis_size_2d(int K); // (K+1)(K+2)/2

/// One-dimensional design row (He_0(z), ..., He_K(z)).
void basis_row_1d(int K, double z, std::span<double> out);
std::vector<double> basis_row_1d(int K, double z);

/// Two-dimensional row He_k(z1) He_q(z2) over all k+q <= K, enumerated
/// lexicographically in (k, q).  The enumeration is frozen: persisted
/// coefficient vectors index into it.
void basis_row_2d(int K, double z1, double z2, std::span<double> out);
std::vector<double> basis_row_2d(int K, double z1, double z2);

/// The (k, q) exponent pairs in enumeration order.
std::vector<std::pair<int, int>> basis_exponents_2d(int K);

/// Identifier persisted alongside fitted coefficients, e.g.
/// "hermite.prob.2d.K3.lex".  Changes only if the enumeration does.
std::string basis_id(int order, int K);

} // namespace arbc
