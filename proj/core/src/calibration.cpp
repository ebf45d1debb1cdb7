// SPDX-License-Identifier: Apache-2.0
#include "arbc/calibration.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "arbc/errors.hpp"
#include "arbc/hermite.hpp"
#include "arbc/optim.hpp"
#include "arbc/parallel.hpp"
#include "arbc/rng.hpp"

namespace arbc {

std::vector<double> grid_points(const GridSpec& g)
{
    if (g.count < 2 || !(g.step > 0.0))
        throw DomainError("grid_points: need step > 0 and at least 2 points");
    std::vector<double> pts(static_cast<std::size_t>(g.count));
    for (int i = 0; i < g.count; ++i)
        pts[static_cast<std::size_t>(i)] = g.point(i);
    return pts;
}

void CalibrationConfig::validate() const
{
    if (order != 1 && order != 2)
        throw DomainError("CalibrationConfig: order must be 1 or 2");
    if (n < 10 || n > 50)
        throw DomainError("CalibrationConfig: n must lie in [10,50]");
    if (m < 100)
        throw DomainError("CalibrationConfig: need at least 100 replicates per cell");
    if (K != 3 && K != 5 && K != 7)
        throw DomainError("CalibrationConfig: basis degree must be 3, 5 or 7");
    if (methods.empty())
        throw DomainError("CalibrationConfig: no estimation methods selected");
    for (std::size_t i = 0; i < methods.size(); ++i)
        for (std::size_t j = i + 1; j < methods.size(); ++j)
            if (methods[i] == methods[j])
                throw DomainError("CalibrationConfig: duplicate estimation method");
    if (grid.count < 2 || !(grid.step > 0.0))
        throw DomainError("CalibrationConfig: bad grid");
    if (!(grid.start > -1.0) || !(grid.last() < 1.0))
        throw DomainError("CalibrationConfig: grid must stay inside (-1,1)");
    if (!(max_cell_failure_rate >= 0.0 && max_cell_failure_rate < 1.0))
        throw DomainError("CalibrationConfig: bad failure budget");
}

CalibrationConfig CalibrationConfig::desk_scale(int order, int n)
{
    CalibrationConfig c;
    c.order = order;
    c.n = n;
    if (order == 1) {
        c.grid = GridSpec{-0.95, 0.05, 39};
        c.m = 2000;
    } else {
        c.grid = GridSpec{-0.95, 0.10, 20};
        c.m = 1000;
    }
    c.validate();
    return c;
}

CalibrationConfig CalibrationConfig::paper_scale(int order, int n)
{
    CalibrationConfig c;
    c.order = order;
    c.n = n;
    c.m = 10000;
    if (order == 1)
        c.grid = GridSpec{-0.95, 0.01, 191};
    else
        c.grid = GridSpec{-0.95, 0.025, 77};
    c.validate();
    return c;
}

int GridSample::method_index(EstimationMethod m_) const
{
    for (std::size_t i = 0; i < methods.size(); ++i)
        if (methods[i] == m_)
            return static_cast<int>(i);
    return -1;
}

long GridSample::total_resimulations() const
{
    long total = 0;
    for (int r : resimulations)
        total += r;
    return total;
}

GridSample run_grid_simulation(
    const CalibrationConfig& config,
    const std::function<void(int done, int total)>& progress)
{
    config.validate();

    GridSample out;
    out.order = config.order;
    out.n = config.n;
    out.m = config.m;
    out.K = config.K;
    out.seed = config.seed;
    out.grid = config.grid;
    out.methods = config.methods;

    const int cells = out.cell_count();
    const int order = config.order;
    const int m = config.m;
    const std::size_t per_cell = static_cast<std::size_t>(m) * order;

    out.psi_true.resize(static_cast<std::size_t>(cells) * order);
    out.resimulations.assign(static_cast<std::size_t>(cells), 0);
    out.psi_hat.assign(config.methods.size(),
                       std::vector<double>(static_cast<std::size_t>(cells) * per_cell));

    for (int cell = 0; cell < cells; ++cell) {
        if (order == 1) {
            out.psi_true[static_cast<std::size_t>(cell)] = config.grid.point(cell);
        } else {
            out.psi_true[static_cast<std::size_t>(cell) * 2] =
                config.grid.point(cell / config.grid.count);
            out.psi_true[static_cast<std::size_t>(cell) * 2 + 1] =
                config.grid.point(cell % config.grid.count);
        }
    }

    const long budget = static_cast<long>(config.max_cell_failure_rate * m);
    std::atomic<int> done{0};

    parallel_for(static_cast<std::size_t>(cells), config.threads, [&](std::size_t ci) {
        const int cell = static_cast<int>(ci);
        PartialAutocorrelations truth;
        truth.order = order;
        truth.psi = {out.true_psi(cell, 0),
                     order == 2 ? out.true_psi(cell, 1) : 0.0};
        const ArCoefficients coeff = from_partial(truth);

        std::vector<PartialAutocorrelations> fits(config.methods.size());
        long failures = 0;
        std::uint64_t attempt = 0;

        for (int rep = 0; rep < m; ++rep) {
            for (;;) {
                const std::uint64_t s = derive_seed(
                    config.seed, SeedStream::grid_series,
                    {static_cast<std::uint64_t>(order),
                     static_cast<std::uint64_t>(config.n),
                     static_cast<std::uint64_t>(cell),
                     static_cast<std::uint64_t>(rep), attempt});
                const TimeSeries series = simulate(coeff, config.n, s);
                bool ok = true;
                for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
                    try {
                        fits[mi] = estimate_partial(
                            estimate(config.methods[mi], series, order));
                    } catch (const FitError&) {
                        ok = false;
                    } catch (const ConvergenceError&) {
                        ok = false;
                    }
                    if (!ok)
                        break;
                }
                if (ok)
                    break;
                ++failures;
                ++attempt;
                if (failures > budget)
                    throw FitError("grid cell " + std::to_string(cell)
                                   + ": estimator failure budget exceeded");
            }
            const std::size_t base =
                (static_cast<std::size_t>(cell) * m + rep) * order;
            for (std::size_t mi = 0; mi < config.methods.size(); ++mi)
                for (int k = 0; k < order; ++k)
                    out.psi_hat[mi][base + k] = fits[mi].psi[static_cast<std::size_t>(k)];
        }
        out.resimulations[static_cast<std::size_t>(cell)] =
            static_cast<int>(failures);
        const int d = done.fetch_add(1, std::memory_order_relaxed) + 1;
        if (progress)
            progress(d, cells);
    });

    return out;
}

CorrectionModel CorrectionModel::identity(int order, int K, int n,
                                          EstimationMethod method)
{
    CorrectionModel model;
    model.order = order;
    model.K = K;
    model.n = n;
    model.method = method;
    if (order == 1) {
        model.beta1.assign(static_cast<std::size_t>(basis_size_1d(K)), 0.0);
        model.beta1[1] = 1.0; // coefficient of He_1(z1) = z1
    } else if (order == 2) {
        const auto nb = static_cast<std::size_t>(basis_size_2d(K));
        model.beta1.assign(nb, 0.0);
        model.beta2.assign(nb, 0.0);
        model.beta1[static_cast<std::size_t>(K) + 1] = 1.0; // (k,q) = (1,0)
        model.beta2[1] = 1.0;                               // (k,q) = (0,1)
    } else {
        throw DomainError("CorrectionModel: order must be 1 or 2");
    }
    return model;
}

CorrectionObjective::CorrectionObjective(const GridSample& sample,
                                         EstimationMethod method, int K)
    : order_(sample.order), K_(K), cells_(sample.cell_count()), m_(sample.m)
{
    if (K != 3 && K != 5 && K != 7)
        throw DomainError("CorrectionObjective: basis degree must be 3, 5 or 7");
    const int mi = sample.method_index(method);
    if (mi < 0)
        throw DomainError("CorrectionObjective: method not present in the sample");
    nb_ = order_ == 1 ? basis_size_1d(K) : basis_size_2d(K);
    beta_dim_ = static_cast<std::size_t>(order_) * nb_;

    const auto& hat = sample.psi_hat[static_cast<std::size_t>(mi)];
    z_.resize(hat.size());
    for (std::size_t i = 0; i < hat.size(); ++i)
        z_[i] = logit_transform(hat[i]);

    target_.resize(static_cast<std::size_t>(cells_) * order_);
    weight_.resize(target_.size());
    for (int cell = 0; cell < cells_; ++cell) {
        for (int k = 0; k < order_; ++k) {
            const std::size_t ti = static_cast<std::size_t>(cell) * order_ + k;
            target_[ti] = sample.true_psi(cell, k);
            double mean = 0.0;
            for (int rep = 0; rep < m_; ++rep)
                mean += sample.hat_psi(mi, cell, rep, k);
            mean /= m_;
            double var = 0.0;
            for (int rep = 0; rep < m_; ++rep) {
                const double d = sample.hat_psi(mi, cell, rep, k) - mean;
                var += d * d;
            }
            var /= m_;
            weight_[ti] = 1.0 / std::max(var, 1e-6);
        }
    }
}

std::vector<double> CorrectionObjective::identity_start() const
{
    const CorrectionModel id = CorrectionModel::identity(
        order_, K_, 0, EstimationMethod::exact_mle);
    std::vector<double> beta(beta_dim_, 0.0);
    std::copy(id.beta1.begin(), id.beta1.end(), beta.begin());
    if (order_ == 2)
        std::copy(id.beta2.begin(), id.beta2.end(),
                  beta.begin() + static_cast<std::ptrdiff_t>(nb_));
    return beta;
}

std::vector<double> CorrectionObjective::linear_start() const
{
    const std::size_t nb = static_cast<std::size_t>(nb_);
    Eigen::MatrixXd X(cells_, nb_);
    std::vector<double> row(nb);
    std::vector<double> zbar(static_cast<std::size_t>(order_));
    for (int cell = 0; cell < cells_; ++cell) {
        std::fill(zbar.begin(), zbar.end(), 0.0);
        for (int rep = 0; rep < m_; ++rep) {
            const std::size_t base =
                (static_cast<std::size_t>(cell) * m_ + rep) * order_;
            for (int k = 0; k < order_; ++k)
                zbar[static_cast<std::size_t>(k)] += z_[base + k];
        }
        for (int k = 0; k < order_; ++k)
            zbar[static_cast<std::size_t>(k)] /= m_;
        if (order_ == 1)
            basis_row_1d(K_, zbar[0], row);
        else
            basis_row_2d(K_, zbar[0], zbar[1], row);
        for (std::size_t t = 0; t < nb; ++t)
            X(cell, static_cast<Eigen::Index>(t)) = row[t];
    }

    std::vector<double> beta(beta_dim_);
    Eigen::VectorXd y(cells_), sw(cells_);
    for (int k = 0; k < order_; ++k) {
        for (int cell = 0; cell < cells_; ++cell) {
            const std::size_t ti = static_cast<std::size_t>(cell) * order_ + k;
            y(cell) = logit_transform(target_[ti]);
            sw(cell) = std::sqrt(weight_[ti]);
        }
        const Eigen::VectorXd b =
            (sw.asDiagonal() * X)
                .colPivHouseholderQr()
                .solve((sw.asDiagonal() * y).eval());
        for (std::size_t t = 0; t < nb; ++t)
            beta[static_cast<std::size_t>(k) * nb + t] =
                b(static_cast<Eigen::Index>(t));
    }
    return beta;
}

double CorrectionObjective::value(std::span<const double> beta) const
{
    return value_and_gradient(beta, {});
}

double CorrectionObjective::value_and_gradient(std::span<const double> beta,
                                               std::span<double> grad) const
{
    if (beta.size() != beta_dim_)
        throw DomainError("CorrectionObjective: wrong coefficient length");
    const bool want_grad = !grad.empty();
    if (want_grad && grad.size() != beta_dim_)
        throw DomainError("CorrectionObjective: wrong gradient length");
    if (want_grad)
        std::fill(grad.begin(), grad.end(), 0.0);

    const std::size_t nb = static_cast<std::size_t>(nb_);
    std::vector<double> row(nb);
    // Mean of the corrected estimates and mean of basis rows scaled by the
    // chain factor, accumulated per cell and coefficient.
    std::vector<double> mean_f(static_cast<std::size_t>(order_));
    std::vector<double> mean_rows(static_cast<std::size_t>(order_) * nb);

    double total = 0.0;
    for (int cell = 0; cell < cells_; ++cell) {
        std::fill(mean_f.begin(), mean_f.end(), 0.0);
        if (want_grad)
            std::fill(mean_rows.begin(), mean_rows.end(), 0.0);

        for (int rep = 0; rep < m_; ++rep) {
            const std::size_t zbase =
                (static_cast<std::size_t>(cell) * m_ + rep) * order_;
            if (order_ == 1)
                basis_row_1d(K_, z_[zbase], row);
            else
                basis_row_2d(K_, z_[zbase], z_[zbase + 1], row);
            for (int k = 0; k < order_; ++k) {
                const double* bk = beta.data() + static_cast<std::size_t>(k) * nb;
                double p = 0.0;
                for (std::size_t t = 0; t < nb; ++t)
                    p += bk[t] * row[t];
                const double f = std::tanh(0.5 * p);
                mean_f[static_cast<std::size_t>(k)] += f;
                if (want_grad) {
                    const double chain = 0.5 * (1.0 - f * f);
                    double* mr = mean_rows.data() + static_cast<std::size_t>(k) * nb;
                    for (std::size_t t = 0; t < nb; ++t)
                        mr[t] += chain * row[t];
                }
            }
        }

        for (int k = 0; k < order_; ++k) {
            const std::size_t ti = static_cast<std::size_t>(cell) * order_ + k;
            const double err = mean_f[static_cast<std::size_t>(k)] / m_ - target_[ti];
            total += weight_[ti] * err * err;
            if (want_grad) {
                const double scale = 2.0 * weight_[ti] * err / m_;
                const double* mr =
                    mean_rows.data() + static_cast<std::size_t>(k) * nb;
                double* gk = grad.data() + static_cast<std::size_t>(k) * nb;
                for (std::size_t t = 0; t < nb; ++t)
                    gk[t] += scale * mr[t];
            }
        }
    }
    return total;
}

namespace {

// Quasi-Newton with up to three restarts from the best iterate seen.  The
// returned convergence flag is the last attempt's.
BfgsResult descend(
    const std::function<double(std::span<const double>, std::span<double>)>& fg,
    std::vector<double> start)
{
    BfgsResult best{};
    best.value = 1e301;
    bool converged = false;
    for (int attempt = 0; attempt < 3 && !converged; ++attempt) {
        BfgsResult r = bfgs(fg, start, 1e-9, 1e-10, 800);
        converged = r.converged;
        if (r.value < best.value)
            best = std::move(r);
        start = best.x;
    }
    best.converged = converged;
    return best;
}

CorrectionModel assemble_model(const GridSample& sample, EstimationMethod method,
                               int K, const std::vector<double>& x)
{
    CorrectionModel model;
    model.order = sample.order;
    model.K = K;
    model.n = sample.n;
    model.method = method;
    const int nb = sample.order == 1 ? basis_size_1d(K) : basis_size_2d(K);
    model.beta1.assign(x.begin(), x.begin() + nb);
    if (sample.order == 2)
        model.beta2.assign(x.begin() + nb, x.begin() + 2 * nb);
    return model;
}

// Monotonicity checks compare consecutive values of the inner polynomial
// on the logit scale; probing tanh output instead would hide violations
// where it saturates to 1.0 in double.  AR(1): 200 points uniform over
// (-0.999, 0.999) on the partial scale.  AR(2): strict increase of each
// block along its own coordinate, 60 points uniform on the logit scale
// per axis over the same region.
constexpr int kCheckPoints = 200;
constexpr int kCheckAxis2 = 60;
constexpr double kDiffMargin = 1e-3;  // required mean slope across a gap

double check_point(int i)
{
    return -0.999 + 1.998 * i / (kCheckPoints - 1.0);
}

struct CheckGrid1d {
    std::size_t nb;
    std::vector<double> z;    // kCheckPoints
    std::vector<double> val;  // kCheckPoints x nb
};

CheckGrid1d make_check_grid_1d(int K)
{
    CheckGrid1d g;
    g.nb = static_cast<std::size_t>(basis_size_1d(K));
    g.z.resize(kCheckPoints);
    g.val.resize(kCheckPoints * g.nb);
    for (int i = 0; i < kCheckPoints; ++i) {
        g.z[static_cast<std::size_t>(i)] = logit_transform(check_point(i));
        basis_row_1d(K, g.z[static_cast<std::size_t>(i)],
                     std::span<double>(g.val).subspan(
                         static_cast<std::size_t>(i) * g.nb, g.nb));
    }
    return g;
}

bool increasing_1d(const CheckGrid1d& g, std::span<const double> beta1)
{
    double prev = -HUGE_VAL;
    for (int i = 0; i < kCheckPoints; ++i) {
        const double* v = g.val.data() + static_cast<std::size_t>(i) * g.nb;
        double p = 0.0;
        for (std::size_t t = 0; t < g.nb; ++t)
            p += beta1[t] * v[t];
        if (!(p > prev))
            return false;
        prev = p;
    }
    return true;
}

struct CheckGrid2d {
    std::size_t nb;
    std::vector<double> z;    // kCheckAxis2 axis values
    std::vector<double> val;  // (i * kCheckAxis2 + j) x nb
};

CheckGrid2d make_check_grid_2d(int K)
{
    CheckGrid2d g;
    g.nb = static_cast<std::size_t>(basis_size_2d(K));
    const auto expo = basis_exponents_2d(K);
    const double edge = logit_transform(0.999);
    g.z.resize(kCheckAxis2);
    std::vector<std::vector<double>> he(kCheckAxis2);
    for (int i = 0; i < kCheckAxis2; ++i) {
        g.z[static_cast<std::size_t>(i)] =
            -edge + 2.0 * edge * i / (kCheckAxis2 - 1.0);
        he[static_cast<std::size_t>(i)] =
            basis_row_1d(K, g.z[static_cast<std::size_t>(i)]);
    }
    g.val.resize(static_cast<std::size_t>(kCheckAxis2) * kCheckAxis2 * g.nb);
    for (int i = 0; i < kCheckAxis2; ++i)
        for (int j = 0; j < kCheckAxis2; ++j) {
            double* out = g.val.data()
                + (static_cast<std::size_t>(i) * kCheckAxis2 + j) * g.nb;
            for (std::size_t t = 0; t < g.nb; ++t)
                out[t] = he[static_cast<std::size_t>(i)]
                           [static_cast<std::size_t>(expo[t].first)]
                    * he[static_cast<std::size_t>(j)]
                        [static_cast<std::size_t>(expo[t].second)];
        }
    return g;
}

const double* grid2d_row(const CheckGrid2d& g, int i, int j)
{
    return g.val.data()
        + (static_cast<std::size_t>(i) * kCheckAxis2 + j) * g.nb;
}

// Strict increase of block k's polynomial along coordinate k with the
// other coordinate held fixed, for both blocks.
bool increasing_2d(const CheckGrid2d& g, std::span<const double> beta)
{
    auto p = [&](const double* bk, int i, int j) {
        const double* v = grid2d_row(g, i, j);
        double acc = 0.0;
        for (std::size_t t = 0; t < g.nb; ++t)
            acc += bk[t] * v[t];
        return acc;
    };
    for (int blk = 0; blk < 2; ++blk) {
        const double* bk = beta.data() + static_cast<std::size_t>(blk) * g.nb;
        for (int outer = 0; outer < kCheckAxis2; ++outer) {
            double prev = -HUGE_VAL;
            for (int inner = 0; inner < kCheckAxis2; ++inner) {
                const double cur = blk == 0 ? p(bk, inner, outer)
                                            : p(bk, outer, inner);
                if (!(cur > prev))
                    return false;
                prev = cur;
            }
        }
    }
    return true;
}

CorrectionModel fit_correction_impl(const GridSample& sample,
                                    EstimationMethod method, int K)
{
    const CorrectionObjective obj(sample, method, K);
    auto fg = [&](std::span<const double> beta, std::span<double> grad) {
        return obj.value_and_gradient(beta, grad);
    };
    const BfgsResult best = descend(fg, obj.identity_start());
    if (!best.converged)
        throw ConvergenceError("fit_correction: quasi-Newton failed to converge",
                               best.x, best.value);
    return assemble_model(sample, method, K, best.x);
}

} // namespace

CorrectionModel fit_correction_ar1(const GridSample& sample,
                                   EstimationMethod method, int K)
{
    if (sample.order != 1)
        throw DomainError("fit_correction_ar1: sample has order != 1");

    // The inference module inverts this map, so a fit that is not strictly
    // increasing over (-0.999, 0.999) is a fitting failure.
    CorrectionModel model = fit_correction_impl(sample, method, K);
    const CheckGrid1d grid = make_check_grid_1d(K);
    if (increasing_1d(grid, model.beta1))
        return model;

    // On heavily biased configurations (Yule-Walker at the smallest n) the
    // unconstrained minimum degenerates: the logit link saturates and the
    // map collapses to a step that matches the cell means through their
    // empirical distribution.  Refit from the linear initializer with a
    // quadratic penalty on the checked differences, keeping the weakest
    // penalty that restores strict increase.
    const CorrectionObjective obj(sample, method, K);
    const std::size_t nb = grid.nb;
    const std::vector<double> start = obj.linear_start();
    for (const double lambda : {1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6}) {
        auto fg = [&](std::span<const double> beta, std::span<double> grad) {
            double v = obj.value_and_gradient(beta, grad);
            for (int i = 0; i + 1 < kCheckPoints; ++i) {
                const double* a =
                    grid.val.data() + static_cast<std::size_t>(i) * nb;
                const double* b = a + nb;
                double diff = 0.0;
                for (std::size_t t = 0; t < nb; ++t)
                    diff += beta[t] * (b[t] - a[t]);
                const double gap = grid.z[static_cast<std::size_t>(i) + 1]
                                 - grid.z[static_cast<std::size_t>(i)];
                const double viol = kDiffMargin * gap - diff;
                if (viol > 0.0) {
                    v += lambda * viol * viol;
                    if (!grad.empty())
                        for (std::size_t t = 0; t < nb; ++t)
                            grad[t] -= 2.0 * lambda * viol * (b[t] - a[t]);
                }
            }
            return v;
        };
        const BfgsResult r = descend(fg, start);
        if (r.converged && increasing_1d(grid, r.x))
            return assemble_model(sample, method, K, r.x);
    }
    throw FitError(
        "fit_correction_ar1: fitted map is not increasing over "
        "(-0.999, 0.999)");
}

CorrectionModel fit_correction_ar2(const GridSample& sample,
                                   EstimationMethod method, int K)
{
    if (sample.order != 2)
        throw DomainError("fit_correction_ar2: sample has order != 2");

    // Nothing inverts the AR(2) map, but the same degeneracy arises: at
    // the smallest n the unconstrained fit can saturate a block into a
    // step in its own coordinate.  Gate and refit exactly as for AR(1),
    // requiring each block to increase along its own coordinate.
    CorrectionModel model = fit_correction_impl(sample, method, K);
    const CheckGrid2d grid = make_check_grid_2d(K);
    std::vector<double> packed = model.beta1;
    packed.insert(packed.end(), model.beta2.begin(), model.beta2.end());
    if (increasing_2d(grid, packed))
        return model;

    const CorrectionObjective obj(sample, method, K);
    const std::size_t nb = grid.nb;
    const double gap = grid.z[1] - grid.z[0];
    const std::vector<double> start = obj.linear_start();
    for (const double lambda : {1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6}) {
        auto fg = [&](std::span<const double> beta, std::span<double> grad) {
            double v = obj.value_and_gradient(beta, grad);
            for (int blk = 0; blk < 2; ++blk) {
                const std::size_t off = static_cast<std::size_t>(blk) * nb;
                for (int outer = 0; outer < kCheckAxis2; ++outer) {
                    for (int inner = 0; inner + 1 < kCheckAxis2; ++inner) {
                        const double* a = blk == 0
                            ? grid2d_row(grid, inner, outer)
                            : grid2d_row(grid, outer, inner);
                        const double* b = blk == 0
                            ? grid2d_row(grid, inner + 1, outer)
                            : grid2d_row(grid, outer, inner + 1);
                        double diff = 0.0;
                        for (std::size_t t = 0; t < nb; ++t)
                            diff += beta[off + t] * (b[t] - a[t]);
                        const double viol = kDiffMargin * gap - diff;
                        if (viol > 0.0) {
                            v += lambda * viol * viol;
                            if (!grad.empty())
                                for (std::size_t t = 0; t < nb; ++t)
                                    grad[off + t] -=
                                        2.0 * lambda * viol * (b[t] - a[t]);
                        }
                    }
                }
            }
            return v;
        };
        const BfgsResult r = descend(fg, start);
        if (r.converged && increasing_2d(grid, r.x))
            return assemble_model(sample, method, K, r.x);
    }
    throw FitError(
        "fit_correction_ar2: fitted maps are not increasing along their "
        "own coordinates over (-0.999, 0.999)");
}

CorrectionModel fit_correction(const GridSample& sample,
                               EstimationMethod method, int K)
{
    return sample.order == 1 ? fit_correction_ar1(sample, method, K)
                             : fit_correction_ar2(sample, method, K);
}

PartialAutocorrelations correct_partial(const CorrectionModel& model,
                                        const PartialAutocorrelations& est)
{
    if (est.order != model.order)
        throw DomainError("correct_partial: order mismatch");
    if (!in_open_region(est))
        throw DomainError("correct_partial: estimate outside the open region");

    PartialAutocorrelations out;
    out.order = model.order;
    if (model.order == 1) {
        const auto row = basis_row_1d(model.K, logit_transform(est.psi[0]));
        double p = 0.0;
        for (std::size_t t = 0; t < row.size(); ++t)
            p += model.beta1[t] * row[t];
        out.psi[0] = inverse_logit_transform(p);
        return out;
    }
    const auto row = basis_row_2d(model.K, logit_transform(est.psi[0]),
                                  logit_transform(est.psi[1]));
    double p1 = 0.0, p2 = 0.0;
    for (std::size_t t = 0; t < row.size(); ++t) {
        p1 += model.beta1[t] * row[t];
        p2 += model.beta2[t] * row[t];
    }
    out.psi[0] = inverse_logit_transform(p1);
    out.psi[1] = inverse_logit_transform(p2);
    return out;
}

ArCoefficients evaluate_correction(const CorrectionModel& model,
                                   const PartialAutocorrelations& est)
{
    return from_partial(correct_partial(model, est));
}

GridSummary summarize_grid(const GridSample& sample, EstimationMethod method,
                           const CorrectionModel* model)
{
    const int mi = sample.method_index(method);
    if (mi < 0)
        throw DomainError("summarize_grid: method not present in the sample");
    if (model && (model->order != sample.order))
        throw DomainError("summarize_grid: correction model order mismatch");

    const int cells = sample.cell_count();
    const int order = sample.order;
    const int m = sample.m;

    GridSummary s;
    s.has_corrected = model != nullptr;
    s.true_phi.resize(static_cast<std::size_t>(cells) * order);
    s.mean_phi.resize(s.true_phi.size());
    if (model)
        s.mean_phi_corrected.resize(s.true_phi.size());

    double bias = 0.0, var = 0.0, mse = 0.0;
    double bias_c = 0.0, var_c = 0.0, mse_c = 0.0;

    std::vector<double> phis(static_cast<std::size_t>(m) * order);
    std::vector<double> phis_c;
    if (model)
        phis_c.resize(phis.size());

    for (int cell = 0; cell < cells; ++cell) {
        PartialAutocorrelations truth;
        truth.order = order;
        truth.psi = {sample.true_psi(cell, 0),
                     order == 2 ? sample.true_psi(cell, 1) : 0.0};
        const ArCoefficients tc = from_partial(truth);

        for (int rep = 0; rep < m; ++rep) {
            PartialAutocorrelations est;
            est.order = order;
            est.psi = {sample.hat_psi(mi, cell, rep, 0),
                       order == 2 ? sample.hat_psi(mi, cell, rep, 1) : 0.0};
            const ArCoefficients ec = from_partial(est);
            for (int k = 0; k < order; ++k)
                phis[static_cast<std::size_t>(rep) * order + k] = ec.phi[static_cast<std::size_t>(k)];
            if (model) {
                const ArCoefficients cc = evaluate_correction(*model, est);
                for (int k = 0; k < order; ++k)
                    phis_c[static_cast<std::size_t>(rep) * order + k] =
                        cc.phi[static_cast<std::size_t>(k)];
            }
        }

        for (int k = 0; k < order; ++k) {
            const std::size_t ti = static_cast<std::size_t>(cell) * order + k;
            s.true_phi[ti] = tc.phi[static_cast<std::size_t>(k)];

            double mean = 0.0;
            for (int rep = 0; rep < m; ++rep)
                mean += phis[static_cast<std::size_t>(rep) * order + k];
            mean /= m;
            double v = 0.0, q = 0.0;
            for (int rep = 0; rep < m; ++rep) {
                const double x = phis[static_cast<std::size_t>(rep) * order + k];
                v += (x - mean) * (x - mean);
                const double e = x - s.true_phi[ti];
                q += e * e;
            }
            v /= m;
            q /= m;
            s.mean_phi[ti] = mean;
            bias += mean - s.true_phi[ti];
            var += v;
            mse += q;

            if (model) {
                double mean_c = 0.0;
                for (int rep = 0; rep < m; ++rep)
                    mean_c += phis_c[static_cast<std::size_t>(rep) * order + k];
                mean_c /= m;
                double vc = 0.0, qc = 0.0;
                for (int rep = 0; rep < m; ++rep) {
                    const double x = phis_c[static_cast<std::size_t>(rep) * order + k];
                    vc += (x - mean_c) * (x - mean_c);
                    const double e = x - s.true_phi[ti];
                    qc += e * e;
                }
                vc /= m;
                qc /= m;
                s.mean_phi_corrected[ti] = mean_c;
                bias_c += mean_c - s.true_phi[ti];
                var_c += vc;
                mse_c += qc;
            }
        }
    }

    const double denom = static_cast<double>(cells) * order;
    s.bias = bias / denom;
    s.variance = var / denom;
    s.rmse = std::sqrt(mse / denom);
    if (model) {
        s.bias_corrected = bias_c / denom;
        s.variance_corrected = var_c / denom;
        s.rmse_corrected = std::sqrt(mse_c / denom);
    }
    return s;
}

} // namespace arbc
