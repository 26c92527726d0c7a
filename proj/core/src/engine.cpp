#include "dyncs/engine.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace dyncs {

const char* to_string(SolverStatus s) {
    switch (s) {
        case SolverStatus::Converged: return "converged";
        case SolverStatus::MaxIter: return "max-iter";
        case SolverStatus::Infeasible: return "infeasible";
    }
    return "?";
}

namespace {

double shrink(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

double dual_scale(const MeasurementOperator& a, const Vec& y, const Vec& w) {
    const double aty = a.adjoint(y).lpNorm<Eigen::Infinity>();
    const double wmax = w.size() > 0 ? w.maxCoeff() : 0.0;
    return std::max({1.0, aty, wmax});
}

// max_i violation of: b_i != 0 -> s_i + w_i sgn(b_i) = 0 ; b_i = 0 -> |s_i| <= w_i
double stationarity_residual(const Vec& s, const Vec& w, const Vec& b) {
    double r = 0.0;
    for (Index i = 0; i < b.size(); ++i) {
        if (b[i] != 0.0) {
            r = std::max(r, std::abs(s[i] + w[i] * (b[i] > 0 ? 1.0 : -1.0)));
        } else {
            r = std::max(r, std::max(0.0, std::abs(s[i]) - w[i]));
        }
    }
    return r;
}

double l1_objective(const Vec& w, const Vec& b) {
    double o = 0.0;
    for (Index i = 0; i < b.size(); ++i) o += w[i] * std::abs(b[i]);
    return o;
}

// Support-identification refinement: least-squares refit on the detected
// support, accepted when feasible and no worse in objective. The comparison
// carries a slack because the current iterate may sit slightly outside the
// data set, where the raw l1 value undercuts every feasible objective.
bool try_polish(const MeasurementOperator& a, const Vec& y, const Vec& w, double eps, Vec& b,
                double slack) {
    const double bmax = b.cwiseAbs().maxCoeff();
    if (bmax <= 0.0) return false;
    SupportSet s = SupportSet::from_nonzeros(b, 1e-5 * bmax);
    if (s.empty() || s.size() > a.rows()) return false;
    const Mat as = a.extract_columns(s);
    Eigen::ColPivHouseholderQR<Mat> qr(as);
    const Vec bs = qr.solve(y);
    const double resid = (as * bs - y).norm();
    const bool feasible = eps == 0.0 ? resid <= 1e-10 * (1.0 + y.norm())
                                     : resid <= eps * (1.0 + 1e-12) + 1e-12;
    if (!feasible) return false;
    Vec cand = scatter(bs, s, a.cols());
    const double obj_new = l1_objective(w, cand);
    const double obj_old = l1_objective(w, b);
    if (obj_new > obj_old + slack + 1e-10 * (1.0 + obj_old)) return false;
    b = std::move(cand);
    return true;
}

} // namespace

double kkt_residual_lagrangian(const MeasurementOperator& a, const Vec& y,
                               const LagrangianSpec& spec, const Vec& b) {
    Vec g = a.adjoint(a.apply(b) - y);
    if (spec.lambda > 0.0 && spec.prior_set != nullptr) {
        for (Index i : *spec.prior_set) {
            const double mu_i = spec.mu != nullptr ? (*spec.mu)[i] : 0.0;
            g[i] += spec.lambda * (b[i] - mu_i);
        }
    }
    return stationarity_residual(g, spec.weights, b) / dual_scale(a, y, spec.weights);
}

SolverResult solve_lagrangian_l1(const MeasurementOperator& a, const Vec& y,
                                 const LagrangianSpec& spec, const SolverOptions& opts) {
    const Index m = a.cols();
    if (spec.weights.size() != m) throw std::invalid_argument("solve_lagrangian_l1: weights length");
    if (spec.weights.minCoeff() < 0.0) throw std::invalid_argument("solve_lagrangian_l1: negative weight");

    const double lnorm = a.op_norm();
    const double step_l = lnorm * lnorm + spec.lambda;
    const double scale = dual_scale(a, y, spec.weights);

    Vec x = opts.warm_start != nullptr ? *opts.warm_start : Vec::Zero(m);
    Vec z = x;
    double t = 1.0;

    auto grad_at = [&](const Vec& v) {
        Vec g = a.adjoint(a.apply(v) - y);
        if (spec.lambda > 0.0 && spec.prior_set != nullptr) {
            for (Index i : *spec.prior_set) {
                const double mu_i = spec.mu != nullptr ? (*spec.mu)[i] : 0.0;
                g[i] += spec.lambda * (v[i] - mu_i);
            }
        }
        return g;
    };

    SolverResult res;
    res.status = SolverStatus::MaxIter;
    int it = 0;
    for (; it < opts.max_iter; ++it) {
        const Vec g = grad_at(z);
        Vec xn(m);
        for (Index i = 0; i < m; ++i) xn[i] = shrink(z[i] - g[i] / step_l, spec.weights[i] / step_l);
        // gradient restart
        if ((z - xn).dot(xn - x) > 0.0) {
            t = 1.0;
            z = xn;
        } else {
            const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            z = xn + ((t - 1.0) / tn) * (xn - x);
            t = tn;
        }
        x = xn;
        if (it % 10 == 9 || it == opts.max_iter - 1) {
            const Vec gx = grad_at(x);
            const double kkt = stationarity_residual(gx, spec.weights, x) / scale;
            if (kkt < opts.tol) {
                res.status = SolverStatus::Converged;
                res.kkt_residual = kkt;
                ++it;
                break;
            }
            res.kkt_residual = kkt;
        }
    }
    res.xhat = std::move(x);
    res.iterations = it;
    const Vec r = y - a.apply(res.xhat);
    res.objective = l1_objective(spec.weights, res.xhat) + 0.5 * r.squaredNorm();
    if (spec.lambda > 0.0 && spec.prior_set != nullptr) {
        for (Index i : *spec.prior_set) {
            const double mu_i = spec.mu != nullptr ? (*spec.mu)[i] : 0.0;
            const double d = res.xhat[i] - mu_i;
            res.objective += 0.5 * spec.lambda * d * d;
        }
    }
    return res;
}

Vec min_norm_feasible(const MeasurementOperator& a, const Vec& y, double eps) {
    if (y.norm() <= eps) return Vec::Zero(a.cols());
    const Mat& ad = a.to_dense();
    Eigen::BDCSVD<Mat> svd(ad, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec uy = svd.matrixU().transpose() * y;
    const Vec& sv = svd.singularValues();
    auto solution = [&](double beta) {
        Vec c(sv.size());
        for (Index i = 0; i < sv.size(); ++i)
            c[i] = sv[i] > 1e-14 * sv[0] ? sv[i] * uy[i] / (sv[i] * sv[i] + beta) : 0.0;
        return Vec(svd.matrixV() * c);
    };
    auto resid = [&](double beta) { return (ad * solution(beta) - y).norm(); };
    const double r0 = resid(0.0);
    if (r0 > eps + 1e-9 * (1.0 + y.norm()))
        throw std::runtime_error("min_norm_feasible: data set is empty at this eps");
    if (eps == 0.0 || r0 >= eps) return solution(0.0);
    double lo = 0.0, hi = 1.0;
    while (resid(hi) < eps) hi *= 4.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (resid(mid) < eps ? lo : hi) = mid;
    }
    return solution(lo);
}

SolverResult solve_constrained_l1(const MeasurementOperator& a, const Vec& y, const Vec& weights,
                                  double eps, const SolverOptions& opts) {
    const Index m = a.cols();
    const Index n = a.rows();
    if (weights.size() != m) throw std::invalid_argument("solve_constrained_l1: weights length");
    if (weights.minCoeff() < 0.0) throw std::invalid_argument("solve_constrained_l1: negative weight");
    if (eps < 0.0) throw std::invalid_argument("solve_constrained_l1: eps < 0");

    SolverResult res;
    if (y.norm() <= eps) {
        res.xhat = Vec::Zero(m);
        res.status = SolverStatus::Converged;
        return res;
    }
    if (weights.maxCoeff() == 0.0) {
        // objective identically zero: return the minimum-norm feasible point
        res.xhat = min_norm_feasible(a, y, eps);
        res.status = SolverStatus::Converged;
        res.degenerate = true;
        return res;
    }
    if (eps == 0.0 && n >= m) {
        // at most one feasible point when the columns are independent
        const Mat& ad = a.to_dense();
        Eigen::ColPivHouseholderQR<Mat> qr(ad);
        if (qr.rank() == m) {
            const Vec sol = qr.solve(y);
            if ((ad * sol - y).norm() <= 1e-9 * (1.0 + y.norm())) {
                res.xhat = sol;
                res.status = SolverStatus::Converged;
                res.objective = l1_objective(weights, sol);
                return res;
            }
            res.status = SolverStatus::Infeasible;
            res.xhat = Vec::Zero(m);
            return res;
        }
    }

    const double lnorm = std::max(a.op_norm(), 1e-12);
    const double scale = dual_scale(a, y, weights);
    const double yscale = 1.0 + y.norm();

    double ratio = 1.0; // tau/sigma balance
    double tau = std::sqrt(0.95) * ratio / lnorm;
    double sigma = std::sqrt(0.95) / (ratio * lnorm);

    Vec b = opts.warm_start != nullptr ? *opts.warm_start : Vec::Zero(m);
    Vec p = opts.warm_dual != nullptr ? *opts.warm_dual : Vec::Zero(n);
    Vec bbar = b;

    auto project_data = [&](const Vec& v) -> Vec {
        if (eps == 0.0) return y;
        Vec d = v - y;
        const double nd = d.norm();
        if (nd <= eps) return v;
        return y + d * (eps / nd);
    };

    res.status = SolverStatus::MaxIter;
    bool feasibility_checked = false;
    double primal_rel = 1.0, dual_rel = 1.0;
    int it = 0;
    int checks = 0;
    for (; it < opts.max_iter; ++it) {
        const Vec q = p + sigma * a.apply(bbar);
        p = q - sigma * project_data(q / sigma);
        const Vec s = a.adjoint(p);
        Vec bn(m);
        for (Index i = 0; i < m; ++i) bn[i] = shrink(b[i] - tau * s[i], tau * weights[i]);
        bbar = 2.0 * bn - b;
        b = std::move(bn);

        if (it % 25 == 24 || it == opts.max_iter - 1) {
            const Vec r = a.apply(b) - y;
            primal_rel = std::max(0.0, r.norm() - eps) / yscale;
            const Vec sd = a.adjoint(p);
            dual_rel = stationarity_residual(sd, weights, b) / scale;
            double compl_rel = 0.0;
            if (eps > 0.0 && p.norm() > 1e-9 * scale)
                compl_rel = (r - (eps / p.norm()) * p).norm() / (1.0 + eps);
            double kkt = std::max({primal_rel, dual_rel, compl_rel});

            ++checks;
            // Lagrangian correction of the iterate's objective; for the ball
            // form the refit point is generally interior (not the minimizer),
            // so it must win outright
            const double slack = eps == 0.0 ? std::abs(p.dot(r)) + scale * primal_rel : 0.0;
            if (opts.polish && (kkt < 1e-2 || checks % 10 == 0) &&
                try_polish(a, y, weights, eps, b, slack)) {
                bbar = b;
                const Vec rp = a.apply(b) - y;
                const double pr = std::max(0.0, rp.norm() - eps) / yscale;
                const double dr = stationarity_residual(a.adjoint(p), weights, b) / scale;
                double cr = 0.0;
                if (eps > 0.0 && p.norm() > 1e-9 * scale)
                    cr = (rp - (eps / p.norm()) * p).norm() / (1.0 + eps);
                kkt = std::max({pr, dr, cr});
            }
            res.kkt_residual = kkt;
            if (kkt < opts.tol) {
                res.status = SolverStatus::Converged;
                ++it;
                break;
            }
            // residual balancing: push whichever side lags
            if (primal_rel > 10.0 * dual_rel && primal_rel > opts.tol) {
                ratio *= 0.7;
            } else if (dual_rel > 10.0 * primal_rel && dual_rel > opts.tol) {
                ratio *= 1.4;
            }
            ratio = std::clamp(ratio, 1e-4, 1e4);
            tau = std::sqrt(0.95) * ratio / lnorm;
            sigma = std::sqrt(0.95) / (ratio * lnorm);

            if (!feasibility_checked && eps == 0.0 && it > opts.max_iter / 4 && primal_rel > 1e-4) {
                feasibility_checked = true;
                const Mat& ad = a.to_dense();
                const Vec bls = ad.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(y);
                if ((ad * bls - y).norm() > 1e-8 * yscale) {
                    res.status = SolverStatus::Infeasible;
                    res.xhat = Vec::Zero(m);
                    res.iterations = it + 1;
                    return res;
                }
            }
        }
    }
    if (opts.polish && res.status != SolverStatus::Converged) {
        const Vec r_end = a.apply(b) - y;
        try_polish(a, y, weights, eps, b, eps == 0.0 ? std::abs(p.dot(r_end)) : 0.0);
    }
    res.xhat = std::move(b);
    res.iterations = it;
    res.objective = l1_objective(weights, res.xhat);
    return res;
}

} // namespace dyncs
