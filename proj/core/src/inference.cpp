// SPDX-License-Identifier: Apache-2.0
#include "arbc/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "arbc/errors.hpp"
#include "arbc/hermite.hpp"
#include "arbc/normal.hpp"
#include "arbc/parallel.hpp"
#include "arbc/rng.hpp"

namespace arbc {

Interval equi_tailed_interval(std::vector<double>& draws, double level)
{
    const auto n = static_cast<long>(draws.size());
    if (n < 4)
        throw DomainError("equi_tailed_interval: too few draws");
    if (!(level > 0.5 && level < 1.0))
        throw DomainError("equi_tailed_interval: level must lie in (0.5, 1)");
    // ceil with a guard: 0.025 * 1000 lands a few ulps above 25 and must
    // still give k = 25, not 26.
    const double raw = 0.5 * (1.0 - level) * static_cast<double>(n);
    long k = static_cast<long>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
    k = std::clamp(k, 1L, n / 2);

    auto kth = draws.begin() + (k - 1);
    std::nth_element(draws.begin(), kth, draws.end());
    const double lo = *kth;
    auto kth_hi = draws.begin() + (n - k);
    std::nth_element(draws.begin(), kth_hi, draws.end());
    const double hi = *kth_hi;
    return {lo, hi};
}

namespace {

void check_mc_args(double level, int draws, const char* who)
{
    if (!(level > 0.5 && level < 1.0))
        throw DomainError(std::string(who) + ": level must lie in (0.5, 1)");
    if (draws < 100)
        throw DomainError(std::string(who) + ": need at least 100 draws");
}

double polyval(const std::vector<double>& beta, std::span<const double> row)
{
    double p = 0.0;
    for (std::size_t t = 0; t < beta.size(); ++t)
        p += beta[t] * row[t];
    return p;
}

} // namespace

IntervalsAr1 mc_interval_ar1(const CalibrationTable& table, double psi_plugin,
                             double level, int draws, std::uint64_t seed)
{
    if (table.order != 1)
        throw DomainError("mc_interval_ar1: table has order != 1");
    check_mc_args(level, draws, "mc_interval_ar1");

    const SurfacePrediction pred =
        predict_surfaces(table.surfaces, {1, {psi_plugin, 0.0}});

    NormalSampler rng(seed);
    std::vector<double> orig(static_cast<std::size_t>(draws));
    std::vector<double> corr(static_cast<std::size_t>(draws));
    std::vector<double> row(static_cast<std::size_t>(basis_size_1d(table.K)));
    for (int i = 0; i < draws; ++i) {
        const double z = sn_quantile(pred.marginal1, rng.uniform());
        const double phi = inverse_logit_transform(z);
        orig[static_cast<std::size_t>(i)] = phi;
        basis_row_1d(table.K, logit_transform(phi), row);
        corr[static_cast<std::size_t>(i)] =
            inverse_logit_transform(polyval(table.correction.beta1, row));
    }
    return {equi_tailed_interval(orig, level), equi_tailed_interval(corr, level)};
}

IntervalsAr2 mc_interval_ar2(const CalibrationTable& table,
                             const PartialAutocorrelations& plugin,
                             double level, int draws, std::uint64_t seed)
{
    if (table.order != 2)
        throw DomainError("mc_interval_ar2: table has order != 2");
    if (plugin.order != 2)
        throw DomainError("mc_interval_ar2: plug-in point has order != 2");
    check_mc_args(level, draws, "mc_interval_ar2");

    const SurfacePrediction pred = predict_surfaces(table.surfaces, plugin);
    const double rho = pred.rho;
    const double rres = std::sqrt(1.0 - rho * rho);

    NormalSampler rng(seed);
    std::vector<double> o1(static_cast<std::size_t>(draws)), o2(o1), c1(o1), c2(o1);
    std::vector<double> row(static_cast<std::size_t>(basis_size_2d(table.K)));
    for (int i = 0; i < draws; ++i) {
        const double a = rng.normal();
        const double b = rng.normal();
        const double x1 = sn_quantile(pred.marginal1, normal_cdf(a));
        const double x2 =
            sn_quantile(pred.marginal2, normal_cdf(rho * a + rres * b));

        PartialAutocorrelations psi{2, {inverse_logit_transform(x1),
                                        inverse_logit_transform(x2)}};
        const ArCoefficients oc = from_partial(psi);
        o1[static_cast<std::size_t>(i)] = oc.phi[0];
        o2[static_cast<std::size_t>(i)] = oc.phi[1];

        basis_row_2d(table.K, x1, x2, row);
        PartialAutocorrelations psic{
            2,
            {inverse_logit_transform(polyval(table.correction.beta1, row)),
             inverse_logit_transform(polyval(table.correction.beta2, row))}};
        const ArCoefficients cc = from_partial(psic);
        c1[static_cast<std::size_t>(i)] = cc.phi[0];
        c2[static_cast<std::size_t>(i)] = cc.phi[1];
    }

    IntervalsAr2 out;
    out.original[0] = equi_tailed_interval(o1, level);
    out.original[1] = equi_tailed_interval(o2, level);
    out.corrected[0] = equi_tailed_interval(c1, level);
    out.corrected[1] = equi_tailed_interval(c2, level);
    return out;
}

CorrectionReport correct_estimate(const CalibrationTable& table,
                                  const EstimateRecord& est, double level,
                                  int draws, std::uint64_t seed, PlugInMode mode)
{
    if (est.order != table.order)
        throw DomainError("correct_estimate: estimate order does not match the table");
    if (est.method != table.method)
        throw DomainError("correct_estimate: estimate method does not match the table");
    check_mc_args(level, draws, "correct_estimate");

    const PartialAutocorrelations psi_hat = estimate_partial(est);
    const PartialAutocorrelations psi_c =
        correct_partial(table.correction, psi_hat);

    CorrectionReport rep;
    rep.order = table.order;
    rep.method = table.method;
    rep.original = est;
    rep.corrected = from_partial(psi_c);
    rep.level = level;
    rep.draws = draws;
    rep.plugin = mode;

    const PartialAutocorrelations& plug =
        mode == PlugInMode::original ? psi_hat : psi_c;
    if (table.order == 1) {
        const IntervalsAr1 iv =
            mc_interval_ar1(table, plug.psi[0], level, draws, seed);
        rep.ci_original[0] = iv.original;
        rep.ci_corrected[0] = iv.corrected;
    } else {
        const IntervalsAr2 iv = mc_interval_ar2(table, plug, level, draws, seed);
        rep.ci_original = iv.original;
        rep.ci_corrected = iv.corrected;
    }
    return rep;
}

double original_sampling_density(const CalibrationTable& table,
                                 double phi_plugin, double at)
{
    if (table.order != 1)
        throw DomainError("original_sampling_density: table has order != 1");
    if (!(std::fabs(at) < 1.0))
        throw DomainError("original_sampling_density: evaluation point outside (-1,1)");
    const SurfacePrediction pred =
        predict_surfaces(table.surfaces, {1, {phi_plugin, 0.0}});
    return sn_pdf(pred.marginal1, logit_transform(at)) * logit_jacobian(at);
}

CorrectedDensity::CorrectedDensity(const CalibrationTable& table,
                                   double phi_plugin)
{
    if (table.order != 1)
        throw DomainError("CorrectedDensity: table has order != 1");
    const SurfacePrediction pred =
        predict_surfaces(table.surfaces, {1, {phi_plugin, 0.0}});
    theta_ = pred.marginal1;

    // Logit-scale grid covering all but 1e-6 of the plug-in mass.
    constexpr double kTailMass = 5e-7;
    constexpr int kNodes = 1024;
    const double z_lo = sn_quantile(theta_, kTailMass);
    const double z_hi = sn_quantile(theta_, 1.0 - kTailMass);

    const int K = table.K;
    const auto& beta = table.correction.beta1;
    std::vector<double> he(static_cast<std::size_t>(K + 1));

    t_.resize(kNodes);
    z_.resize(kNodes);
    dzdt_.resize(kNodes);
    const double h = (z_hi - z_lo) / (kNodes - 1);
    for (int i = 0; i < kNodes; ++i) {
        const double z = z_lo + h * i;
        hermite_all(K, z, he);
        double p = 0.0, dp = 0.0;
        for (int k = 0; k <= K; ++k) {
            p += beta[static_cast<std::size_t>(k)] * he[static_cast<std::size_t>(k)];
            if (k >= 1) // He_k' = k He_{k-1}
                dp += beta[static_cast<std::size_t>(k)] * k
                    * he[static_cast<std::size_t>(k - 1)];
        }
        const double f = std::tanh(0.5 * p);
        const double dtdz = dp * 0.5 * (1.0 - f * f);
        if (!(dtdz > 0.0))
            throw NumericalError(
                "corrected density: correction map is not increasing over the "
                "plug-in sampling region");
        t_[static_cast<std::size_t>(i)] = f;
        z_[static_cast<std::size_t>(i)] = z;
        dzdt_[static_cast<std::size_t>(i)] = 1.0 / dtdz;
    }
    for (int i = 1; i < kNodes; ++i)
        if (!(t_[static_cast<std::size_t>(i)] > t_[static_cast<std::size_t>(i - 1)]))
            throw NumericalError(
                "corrected density: correction map is not monotone over the "
                "plug-in sampling region");

    // Fritsch-Carlson guard keeps each cubic segment monotone even where
    // the exact derivatives are large relative to the secant.
    for (int i = 0; i + 1 < kNodes; ++i) {
        const double secant = (z_[static_cast<std::size_t>(i + 1)]
                               - z_[static_cast<std::size_t>(i)])
                            / (t_[static_cast<std::size_t>(i + 1)]
                               - t_[static_cast<std::size_t>(i)]);
        const double a = dzdt_[static_cast<std::size_t>(i)] / secant;
        const double b = dzdt_[static_cast<std::size_t>(i + 1)] / secant;
        const double s = a * a + b * b;
        if (s > 9.0) {
            const double tau = 3.0 / std::sqrt(s);
            dzdt_[static_cast<std::size_t>(i)] = tau * a * secant;
            dzdt_[static_cast<std::size_t>(i + 1)] = tau * b * secant;
        }
    }
}

double CorrectedDensity::operator()(double t) const
{
    if (!(t > t_.front() && t < t_.back()))
        return 0.0;
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    const auto i = static_cast<std::size_t>(it - t_.begin()) - 1;
    const double h = t_[i + 1] - t_[i];
    const double u = (t - t_[i]) / h;
    const double u2 = u * u;
    const double u3 = u2 * u;

    const double h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    const double h10 = u3 - 2.0 * u2 + u;
    const double h01 = -2.0 * u3 + 3.0 * u2;
    const double h11 = u3 - u2;
    const double z = z_[i] * h00 + h * dzdt_[i] * h10 + z_[i + 1] * h01
                   + h * dzdt_[i + 1] * h11;

    const double d00 = 6.0 * u2 - 6.0 * u;
    const double d10 = 3.0 * u2 - 4.0 * u + 1.0;
    const double d01 = -d00;
    const double d11 = 3.0 * u2 - 2.0 * u;
    const double dzdt = (z_[i] * d00 + z_[i + 1] * d01) / h + dzdt_[i] * d10
                      + dzdt_[i + 1] * d11;

    return sn_pdf(theta_, z) * std::max(dzdt, 0.0);
}

double corrected_sampling_density(const CalibrationTable& table,
                                  double phi_plugin, double at)
{
    return CorrectedDensity(table, phi_plugin)(at);
}

CoverageResult run_coverage(const std::vector<CalibrationTable>& tables,
                            const CoverageConfig& config)
{
    if (tables.empty())
        throw DomainError("run_coverage: no tables given");
    const int order = tables.front().order;
    const int n = tables.front().n;
    for (const auto& t : tables) {
        if (t.order != order || t.n != n)
            throw DomainError("run_coverage: tables disagree on order or n");
        for (const auto& u : tables)
            if (&t != &u && t.method == u.method)
                throw DomainError("run_coverage: duplicate method");
    }
    if (config.reps < 10)
        throw DomainError("run_coverage: need at least 10 replicates");
    check_mc_args(config.level, config.draws, "run_coverage");

    const std::size_t nm = tables.size();
    const std::size_t reps = static_cast<std::size_t>(config.reps);
    // Per-replicate slots; reduced after the parallel section so the
    // result cannot depend on scheduling.
    std::vector<unsigned char> hit_o(reps * nm * 2), hit_c(reps * nm * 2);
    std::vector<double> w_o(reps * nm * 2), w_c(reps * nm * 2);
    std::vector<int> resims(reps);

    parallel_for(reps, config.threads, [&](std::size_t rep) {
        NormalSampler truth_rng(derive_seed(config.seed, SeedStream::coverage_truth,
                                            {static_cast<std::uint64_t>(order),
                                             static_cast<std::uint64_t>(n),
                                             rep}));
        PartialAutocorrelations truth;
        truth.order = order;
        truth.psi = {2.0 * truth_rng.uniform() - 1.0,
                     order == 2 ? 2.0 * truth_rng.uniform() - 1.0 : 0.0};
        const ArCoefficients coeff = from_partial(truth);

        std::vector<EstimateRecord> ests(nm);
        std::uint64_t attempt = 0;
        int failures = 0;
        for (;;) {
            const TimeSeries series =
                simulate(coeff, n,
                         derive_seed(config.seed, SeedStream::coverage_series,
                                     {static_cast<std::uint64_t>(order),
                                      static_cast<std::uint64_t>(n), rep,
                                      attempt}));
            bool ok = true;
            for (std::size_t mi = 0; mi < nm && ok; ++mi) {
                try {
                    ests[mi] = estimate(tables[mi].method, series, order);
                } catch (const FitError&) {
                    ok = false;
                } catch (const ConvergenceError&) {
                    ok = false;
                }
            }
            if (ok)
                break;
            ++failures;
            ++attempt;
            if (failures > 50)
                throw FitError("run_coverage: replicate " + std::to_string(rep)
                               + " keeps failing");
        }
        resims[rep] = failures;

        for (std::size_t mi = 0; mi < nm; ++mi) {
            const CorrectionReport cr = correct_estimate(
                tables[mi], ests[mi], config.level, config.draws,
                derive_seed(config.seed, SeedStream::interval_draws,
                            {static_cast<std::uint64_t>(order),
                             static_cast<std::uint64_t>(n), rep, mi}),
                config.plugin);
            for (int k = 0; k < order; ++k) {
                const std::size_t slot = (rep * nm + mi) * 2 + static_cast<std::size_t>(k);
                const double target = coeff.phi[static_cast<std::size_t>(k)];
                hit_o[slot] = cr.ci_original[static_cast<std::size_t>(k)].contains(target);
                hit_c[slot] = cr.ci_corrected[static_cast<std::size_t>(k)].contains(target);
                w_o[slot] = cr.ci_original[static_cast<std::size_t>(k)].width();
                w_c[slot] = cr.ci_corrected[static_cast<std::size_t>(k)].width();
            }
        }
    });

    CoverageResult out;
    out.order = order;
    out.n = n;
    out.reps = config.reps;
    out.draws = config.draws;
    out.level = config.level;
    out.rows.resize(nm);
    long total_resims = 0;
    for (std::size_t rep = 0; rep < reps; ++rep)
        total_resims += resims[rep];
    for (std::size_t mi = 0; mi < nm; ++mi) {
        MethodCoverage& row = out.rows[mi];
        row.method = tables[mi].method;
        row.resimulations = total_resims;
        for (int k = 0; k < order; ++k) {
            long hits_o = 0, hits_c = 0;
            double sw_o = 0.0, sw_c = 0.0;
            for (std::size_t rep = 0; rep < reps; ++rep) {
                const std::size_t slot = (rep * nm + mi) * 2 + static_cast<std::size_t>(k);
                hits_o += hit_o[slot];
                hits_c += hit_c[slot];
                sw_o += w_o[slot];
                sw_c += w_c[slot];
            }
            row.original[static_cast<std::size_t>(k)] =
                static_cast<double>(hits_o) / static_cast<double>(reps);
            row.corrected[static_cast<std::size_t>(k)] =
                static_cast<double>(hits_c) / static_cast<double>(reps);
            row.width_original[static_cast<std::size_t>(k)] =
                sw_o / static_cast<double>(reps);
            row.width_corrected[static_cast<std::size_t>(k)] =
                sw_c / static_cast<double>(reps);
        }
    }
    return out;
}

} // namespace arbc
