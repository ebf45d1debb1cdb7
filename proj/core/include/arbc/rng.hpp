// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "arbc/normal.hpp"

namespace arbc {

/// splitmix64 finalizer.  Used as a mixing function for seed derivation;
/// the full-period increment is folded in by the caller.
inline std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministically derive a child seed from a master seed and a list of
/// integer coordinates (stream id, cell index, replicate, attempt, ...).
/// Independent of evaluation order and thread count by construction.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> coords)
{
    std::uint64_t s = mix64(master);
    for (std::uint64_t c : coords)
        s = mix64(s ^ c);
    return s;
}

/// Stream identifiers, one per independent consumer of randomness.
/// Values are frozen: they take part in seed derivation, so renumbering
/// them would silently change every simulated series.
enum class SeedStream : std::uint64_t {
    grid_series = 0x01,
    coverage_truth = 0x02,
    coverage_series = 0x03,
    interval_draws = 0x04,
    cli_simulate = 0x05,
};

inline std::uint64_t derive_seed(std::uint64_t master, SeedStream stream,
                                 std::initializer_list<std::uint64_t> coords)
{
    std::uint64_t s = mix64(master ^ static_cast<std::uint64_t>(stream));
    for (std::uint64_t c : coords)
        s = mix64(s ^ c);
    return s;
}

/// Uniform and Gaussian variates from a seeded mt19937_64.  Gaussians go
/// through the inverse distribution function rather than std::normal_
/// distribution, whose algorithm the standard leaves unspecified; this
/// keeps byte-identical output across toolchains.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : eng_(seed) {}

    /// Uniform on the open interval (0,1); never returns an endpoint.
    double uniform()
    {
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() { return normal_quantile(uniform()); }

private:
    std::mt19937_64 eng_;
};

} // namespace arbc
