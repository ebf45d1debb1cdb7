// SPDX-License-Identifier: Apache-2.0
#include "arbc/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "arbc/errors.hpp"

namespace arbc {

namespace {

constexpr double kGolden = 1.618033988749895;

struct Bracket {
    double a, b, c;    // a < b < c (or reversed), f(b) below both ends
    double fa, fb, fc;
};

Bracket bracket_minimum(const std::function<double(double)>& f, double x0,
                        double step, int& evals)
{
    double a = x0;
    double b = x0 + step;
    double fa = f(a);
    double fb = f(b);
    evals += 2;
    if (fb > fa) {
        std::swap(a, b);
        std::swap(fa, fb);
    }
    double c = b + kGolden * (b - a);
    double fc = f(c);
    ++evals;
    int guard = 0;
    while (fc <= fb) {
        const double d = c + kGolden * (c - b);
        a = b; fa = fb;
        b = c; fb = fc;
        c = d; fc = f(c);
        ++evals;
        if (++guard > 200 || !std::isfinite(fc))
            throw NumericalError("minimize_scalar: failed to bracket a minimum");
    }
    return {a, b, c, fa, fb, fc};
}

} // namespace

ScalarMinimum minimize_scalar(const std::function<double(double)>& f,
                              double x0, double step, double xtol, int max_iter)
{
    if (!(step > 0.0))
        throw DomainError("minimize_scalar: step must be positive");
    int evals = 0;
    Bracket br = bracket_minimum(f, x0, step, evals);

    double a = std::min(br.a, br.c);
    double b = std::max(br.a, br.c);
    double x = br.b, w = br.b, v = br.b;
    double fx = br.fb, fw = br.fb, fv = br.fb;
    double d = 0.0, e = 0.0;

    for (int iter = 0; iter < max_iter; ++iter) {
        const double m = 0.5 * (a + b);
        const double tol1 = xtol * std::fabs(x) + 1e-12;
        const double tol2 = 2.0 * tol1;
        if (std::fabs(x - m) <= tol2 - 0.5 * (b - a))
            break;
        bool golden = true;
        if (std::fabs(e) > tol1) {
            // Parabola through (v, w, x).
            const double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0)
                p = -p;
            q = std::fabs(q);
            const double e_old = e;
            e = d;
            if (std::fabs(p) < std::fabs(0.5 * q * e_old) && p > q * (a - x)
                && p < q * (b - x)) {
                d = p / q;
                const double u = x + d;
                if (u - a < tol2 || b - u < tol2)
                    d = x < m ? tol1 : -tol1;
                golden = false;
            }
        }
        if (golden) {
            e = (x < m ? b : a) - x;
            d = 0.3819660112501051 * e;
        }
        const double u = x + (std::fabs(d) >= tol1 ? d
                                                   : (d > 0.0 ? tol1 : -tol1));
        const double fu = f(u);
        ++evals;
        if (fu <= fx) {
            if (u < x) b = x; else a = x;
            v = w; fv = fw;
            w = x; fw = fx;
            x = u; fx = fu;
        } else {
            if (u < x) a = u; else b = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }
    return {x, fx, evals};
}

SimplexResult nelder_mead(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x0, double step, double ftol, int max_iter)
{
    const int d = static_cast<int>(x0.size());
    if (d < 1)
        throw DomainError("nelder_mead: empty starting point");
    if (!(step > 0.0))
        throw DomainError("nelder_mead: step must be positive");

    const int nv = d + 1;
    std::vector<std::vector<double>> pts(nv, std::vector<double>(x0.begin(), x0.end()));
    for (int i = 1; i < nv; ++i)
        pts[i][i - 1] += step;
    std::vector<double> vals(nv);
    int evals = 0;
    for (int i = 0; i < nv; ++i) {
        vals[i] = f(pts[i]);
        ++evals;
    }

    std::vector<int> idx(nv);
    std::vector<double> centroid(d), xr(d), xe(d), xc(d);
    bool converged = false;

    for (int iter = 0; iter < max_iter; ++iter) {
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(),
                  [&](int i, int j) { return vals[i] < vals[j]; });
        const int best = idx[0];
        const int worst = idx[nv - 1];
        const int second = idx[nv - 2];

        if (std::fabs(vals[worst] - vals[best])
            <= ftol * (1.0 + std::fabs(vals[best]))) {
            converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (int i = 0; i < nv; ++i) {
            if (i == worst)
                continue;
            for (int k = 0; k < d; ++k)
                centroid[k] += pts[i][k];
        }
        for (int k = 0; k < d; ++k)
            centroid[k] /= d;

        for (int k = 0; k < d; ++k)
            xr[k] = centroid[k] + (centroid[k] - pts[worst][k]);
        const double fr = f(xr);
        ++evals;

        if (fr < vals[best]) {
            for (int k = 0; k < d; ++k)
                xe[k] = centroid[k] + 2.0 * (centroid[k] - pts[worst][k]);
            const double fe = f(xe);
            ++evals;
            if (fe < fr) {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
        } else if (fr < vals[second]) {
            pts[worst] = xr;
            vals[worst] = fr;
        } else {
            const bool outside = fr < vals[worst];
            const auto& base = outside ? xr : pts[worst];
            for (int k = 0; k < d; ++k)
                xc[k] = centroid[k] + 0.5 * (base[k] - centroid[k]);
            const double fc = f(xc);
            ++evals;
            if (fc < (outside ? fr : vals[worst])) {
                pts[worst] = xc;
                vals[worst] = fc;
            } else {
                // Shrink toward the best vertex.
                for (int i = 0; i < nv; ++i) {
                    if (i == best)
                        continue;
                    for (int k = 0; k < d; ++k)
                        pts[i][k] = pts[best][k]
                                  + 0.5 * (pts[i][k] - pts[best][k]);
                    vals[i] = f(pts[i]);
                    ++evals;
                }
            }
        }
    }

    const auto bi = static_cast<std::size_t>(
        std::min_element(vals.begin(), vals.end()) - vals.begin());
    return {pts[bi], vals[bi], evals, converged};
}

BfgsResult bfgs(
    const std::function<double(std::span<const double>, std::span<double>)>& fg,
    std::span<const double> x0, double ftol, double gtol, int max_iter)
{
    using Eigen::MatrixXd;
    using Eigen::VectorXd;

    const int d = static_cast<int>(x0.size());
    if (d < 1)
        throw DomainError("bfgs: empty starting point");

    VectorXd x = Eigen::Map<const VectorXd>(x0.data(), d);
    VectorXd g(d), gnew(d), xnew(d);
    std::vector<double> gbuf(static_cast<std::size_t>(d));
    int evals = 0;

    auto eval = [&](const VectorXd& p, VectorXd& grad) {
        const double v = fg(std::span<const double>(p.data(),
                                                    static_cast<std::size_t>(d)),
                            std::span<double>(gbuf));
        grad = Eigen::Map<const VectorXd>(gbuf.data(), d);
        ++evals;
        return v;
    };

    double fx = eval(x, g);
    MatrixXd H = MatrixXd::Identity(d, d);

    BfgsResult out;
    for (int iter = 0; iter < max_iter; ++iter) {
        if (g.lpNorm<Eigen::Infinity>() <= gtol) {
            out.converged = true;
            break;
        }
        VectorXd dir = -(H * g);
        double slope = g.dot(dir);
        if (!(slope < 0.0)) {
            // Curvature information went bad; fall back to steepest descent.
            H.setIdentity();
            dir = -g;
            slope = g.dot(dir);
            if (!(slope < 0.0)) {
                out.converged = true;
                break;
            }
        }

        // Armijo backtracking with a parabolic first retry.
        double alpha = 1.0;
        double fnew = 0.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            xnew = x + alpha * dir;
            fnew = eval(xnew, gnew);
            if (std::isfinite(fnew) && fnew <= fx + 1e-4 * alpha * slope) {
                accepted = true;
                break;
            }
            double shrink = 0.5;
            if (std::isfinite(fnew)) {
                const double denom = 2.0 * (fnew - fx - alpha * slope);
                if (denom > 0.0) {
                    const double cand = -slope * alpha * alpha / denom;
                    shrink = std::clamp(cand / alpha, 0.1, 0.5);
                }
            }
            alpha *= shrink;
            if (alpha < 1e-14)
                break;
        }
        if (!accepted) {
            out.converged = g.lpNorm<Eigen::Infinity>() <= 1e3 * gtol;
            break;
        }

        const VectorXd s = xnew - x;
        const VectorXd y = gnew - g;
        const double sty = s.dot(y);
        const bool stalled =
            std::fabs(fx - fnew) <= ftol * (1.0 + std::fabs(fx));
        x = xnew;
        fx = fnew;
        g = gnew;
        out.iterations = iter + 1;
        if (stalled) {
            out.converged = true;
            break;
        }
        if (sty > 1e-12 * s.norm() * y.norm()) {
            const double rho = 1.0 / sty;
            const VectorXd Hy = H * y;
            // Sherman-Morrison form of the BFGS inverse update.
            H -= rho * (Hy * s.transpose() + s * Hy.transpose());
            H += rho * rho * (y.dot(Hy) + sty) * (s * s.transpose());
        }
    }

    out.x.assign(x.data(), x.data() + d);
    out.value = fx;
    out.gradient.assign(g.data(), g.data() + d);
    out.evals = evals;
    return out;
}

} // namespace arbc
