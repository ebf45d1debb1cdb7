// SPDX-License-Identifier: Apache-2.0
#include "arbc/surfaces.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "arbc/errors.hpp"
#include "arbc/hermite.hpp"
#include "arbc/parallel.hpp"

namespace arbc {

CellDistributions fit_cell_distributions(const GridSample& sample,
                                         EstimationMethod method,
                                         unsigned threads)
{
    const int mi = sample.method_index(method);
    if (mi < 0)
        throw DomainError("fit_cell_distributions: method not present in the sample");

    const int cells = sample.cell_count();
    const int m = sample.m;

    CellDistributions out;
    out.order = sample.order;
    out.marginal1.resize(static_cast<std::size_t>(cells));
    if (sample.order == 2) {
        out.marginal2.resize(static_cast<std::size_t>(cells));
        out.rho.resize(static_cast<std::size_t>(cells));
    }

    parallel_for(static_cast<std::size_t>(cells), threads, [&](std::size_t ci) {
        const int cell = static_cast<int>(ci);
        std::vector<double> z1(static_cast<std::size_t>(m));
        std::vector<double> z2;
        if (sample.order == 2)
            z2.resize(static_cast<std::size_t>(m));
        for (int rep = 0; rep < m; ++rep) {
            z1[static_cast<std::size_t>(rep)] =
                logit_transform(sample.hat_psi(mi, cell, rep, 0));
            if (sample.order == 2)
                z2[static_cast<std::size_t>(rep)] =
                    logit_transform(sample.hat_psi(mi, cell, rep, 1));
        }
        out.marginal1[ci] = sn_fit(z1);
        if (sample.order == 2) {
            out.marginal2[ci] = sn_fit(z2);
            double m1 = 0.0, m2 = 0.0;
            for (int rep = 0; rep < m; ++rep) {
                m1 += z1[static_cast<std::size_t>(rep)];
                m2 += z2[static_cast<std::size_t>(rep)];
            }
            m1 /= m;
            m2 /= m;
            double s11 = 0.0, s22 = 0.0, s12 = 0.0;
            for (int rep = 0; rep < m; ++rep) {
                const double d1 = z1[static_cast<std::size_t>(rep)] - m1;
                const double d2 = z2[static_cast<std::size_t>(rep)] - m2;
                s11 += d1 * d1;
                s22 += d2 * d2;
                s12 += d1 * d2;
            }
            if (!(s11 > 0.0) || !(s22 > 0.0))
                throw FitError("fit_cell_distributions: degenerate logit spread");
            out.rho[ci] = std::clamp(s12 / std::sqrt(s11 * s22), -0.999, 0.999);
        }
    });

    return out;
}

namespace {

// Basis row at the logit of the true partial autocorrelations.
std::vector<double> row_at(int order, int K, const double* psi)
{
    if (order == 1)
        return basis_row_1d(K, logit_transform(psi[0]));
    return basis_row_2d(K, logit_transform(psi[0]), logit_transform(psi[1]));
}

std::vector<double> solve_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const char* what)
{
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < X.cols())
        throw FitError(std::string("fit_parameter_surfaces: rank-deficient design for ")
                       + what);
    const Eigen::VectorXd b = qr.solve(y);
    return {b.data(), b.data() + b.size()};
}

} // namespace

SurfaceSet fit_parameter_surfaces(const GridSample& sample,
                                  const CellDistributions& cells, int K)
{
    if (cells.order != sample.order)
        throw DomainError("fit_parameter_surfaces: order mismatch");
    const int ncells = sample.cell_count();
    if (static_cast<int>(cells.marginal1.size()) != ncells)
        throw DomainError("fit_parameter_surfaces: cell count mismatch");

    const int nb = sample.order == 1 ? basis_size_1d(K) : basis_size_2d(K);
    if (ncells < nb)
        throw FitError("fit_parameter_surfaces: fewer cells than basis functions");

    Eigen::MatrixXd X(ncells, nb);
    for (int cell = 0; cell < ncells; ++cell) {
        const auto row = row_at(sample.order, K,
                                &sample.psi_true[static_cast<std::size_t>(cell)
                                                 * sample.order]);
        for (int t = 0; t < nb; ++t)
            X(cell, t) = row[static_cast<std::size_t>(t)];
    }

    auto fit = [&](auto&& value, const char* what) {
        Eigen::VectorXd y(ncells);
        for (int cell = 0; cell < ncells; ++cell)
            y(cell) = value(static_cast<std::size_t>(cell));
        return solve_ols(X, y, what);
    };

    SurfaceSet s;
    s.order = sample.order;
    s.K = K;
    s.mu1 = fit([&](std::size_t c) { return cells.marginal1[c].mu; }, "mu1");
    s.log_sigma1 = fit([&](std::size_t c) { return std::log(cells.marginal1[c].sigma); },
                       "log sigma1");
    s.log_xi1 = fit([&](std::size_t c) { return std::log(cells.marginal1[c].xi); },
                    "log xi1");
    if (sample.order == 2) {
        s.mu2 = fit([&](std::size_t c) { return cells.marginal2[c].mu; }, "mu2");
        s.log_sigma2 = fit([&](std::size_t c) { return std::log(cells.marginal2[c].sigma); },
                           "log sigma2");
        s.log_xi2 = fit([&](std::size_t c) { return std::log(cells.marginal2[c].xi); },
                        "log xi2");
        s.rho = fit([&](std::size_t c) { return cells.rho[c]; }, "rho");
    }
    return s;
}

SurfacePrediction predict_surfaces(const SurfaceSet& surfaces,
                                   const PartialAutocorrelations& at)
{
    if (at.order != surfaces.order)
        throw DomainError("predict_surfaces: order mismatch");
    if (!in_open_region(at))
        throw DomainError("predict_surfaces: point outside the open region");

    const auto row = row_at(surfaces.order, surfaces.K, at.psi.data());
    auto dot = [&](const std::vector<double>& b) {
        double v = 0.0;
        for (std::size_t t = 0; t < b.size(); ++t)
            v += b[t] * row[t];
        return v;
    };

    SurfacePrediction p;
    p.marginal1.mu = dot(surfaces.mu1);
    p.marginal1.sigma = std::exp(dot(surfaces.log_sigma1));
    p.marginal1.xi = std::exp(dot(surfaces.log_xi1));
    if (surfaces.order == 2) {
        p.marginal2.mu = dot(surfaces.mu2);
        p.marginal2.sigma = std::exp(dot(surfaces.log_sigma2));
        p.marginal2.xi = std::exp(dot(surfaces.log_xi2));
        p.rho = std::clamp(dot(surfaces.rho), -0.999, 0.999);
    }
    return p;
}

} // namespace arbc
