#include "dyncs/weak_threshold.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace dyncs {

namespace {

constexpr double kLn2 = 0.6931471805599453;

double entropy_nat(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0; // limit convention at {0, 1}
    return -x * std::log(x) - (1.0 - x) * std::log(1.0 - x);
}

double g_fn(double x) { return 2.0 / std::sqrt(M_PI) * std::exp(-x * x); }
double big_g(double x) { return std::erf(x); }

double log_erfc(double z) {
    if (z < 8.0) return std::log(std::erfc(z));
    // asymptotic expansion for large z
    const double z2 = z * z;
    const double series = 1.0 - 0.5 / z2 + 0.75 / (z2 * z2);
    return -z2 - std::log(z * std::sqrt(M_PI)) + std::log(series);
}

double log_2phi(double s) { return log_erfc(-s / std::sqrt(2.0)); } // log(2 Phi(s))

double normal_pdf(double s) { return std::exp(-0.5 * s * s) / std::sqrt(2.0 * M_PI); }

// phi(s)/Phi(s), stable for very negative s
double hazard(double s) {
    if (s > -8.0) return normal_pdf(s) / (0.5 * std::erfc(-s / std::sqrt(2.0)));
    const double t = -s;
    const double t2 = t * t;
    return t / (1.0 - 1.0 / t2 + 3.0 / (t2 * t2) - 15.0 / (t2 * t2 * t2));
}

struct ExponentParams {
    double gamma1, gamma2, p1, p2, omega;
    int grid;
    double root_tol;
};

double psi_com(const ExponentParams& q, double tau1, double tau2) {
    double v = (tau1 + tau2) * kLn2;
    const double a1 = q.gamma1 * (1.0 - q.p1);
    const double a2 = q.gamma2 * (1.0 - q.p2);
    if (a1 > 0.0) v += a1 * entropy_nat(tau1 / a1);
    if (a2 > 0.0) v += a2 * entropy_nat(tau2 / a2);
    return v;
}

double psi_ext(const ExponentParams& q, double tau1, double tau2, int i1, int i2) {
    const double c = (tau1 + q.gamma1 * q.p1) + q.omega * q.omega * (tau2 + q.gamma2 * q.p2);
    const double alpha1 = q.gamma1 * (1.0 - q.p1) - tau1;
    const double alpha2 = q.gamma2 * (1.0 - q.p2) - tau2;
    if (alpha1 + alpha2 <= 1e-15) return 0.0;
    auto f = [&](double x) {
        double v = 2.0 * c;
        if (alpha1 > 0.0) v -= g_fn(x) * alpha1 / (x * big_g(x));
        if (alpha2 > 0.0) v -= q.omega * g_fn(q.omega * x) * alpha2 / (x * big_g(q.omega * x));
        return v;
    };
    double lo = 1e-9;
    while (f(lo) > 0.0 && lo > 1e-300) lo *= 0.25;
    double hi = std::max(1.0, 2.0 * lo);
    int grow = 0;
    while (f(hi) < 0.0 && grow++ < 2000) hi *= 2.0;
    if (f(lo) > 0.0 || f(hi) < 0.0)
        throw std::runtime_error("weak_threshold: external-angle root bracketing failed at grid (" +
                                 std::to_string(i1) + ", " + std::to_string(i2) + ")");
    for (int it = 0; it < 200 && hi - lo > q.root_tol * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    const double x0 = 0.5 * (lo + hi);
    double v = c * x0 * x0;
    if (alpha1 > 0.0) v -= alpha1 * std::log(big_g(x0));
    if (alpha2 > 0.0) v -= alpha2 * std::log(big_g(q.omega * x0));
    return v;
}

double psi_int(const ExponentParams& q, double tau1, double tau2, int i1, int i2) {
    const double tsum = tau1 + tau2;
    if (tsum <= 1e-15) return 0.0;
    const double om = q.omega;
    const double b = (tau1 + om * om * tau2) / tsum;
    const double omega_prime = q.gamma1 * q.p1 + om * om * q.gamma2 * q.p2;
    if (omega_prime <= 1e-300) return 1e12; // nothing nonzero: face counting degenerates
    const double target = tsum / (tsum * b + omega_prime);
    auto m_hat = [&](double s) {
        const double qs = (tau1 * hazard(s) + om * tau2 * hazard(om * s)) / tsum;
        return -s / qs; // positive for s < 0
    };
    double lo = -1e-8, hi = -1.0;
    while (m_hat(lo) > target && lo > -1e300) lo *= 0.5; // shrink toward 0
    int grow = 0;
    while (m_hat(hi) < target && grow++ < 4000) hi *= 1.5;
    if (m_hat(lo) > target || m_hat(hi) < target)
        throw std::runtime_error("weak_threshold: internal-angle root bracketing failed at grid (" +
                                 std::to_string(i1) + ", " + std::to_string(i2) + ")");
    for (int it = 0; it < 300 && std::abs(hi - lo) > q.root_tol * std::abs(hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (m_hat(mid) < target ? lo : hi) = mid;
    }
    const double s_star = 0.5 * (lo + hi);
    const double y = s_star * (b - 1.0 / m_hat(s_star));
    auto lambda1 = [&](double s) { return 0.5 * s * s + log_2phi(s); };
    const double rate = s_star * y - (tau1 / tsum) * lambda1(s_star) - (tau2 / tsum) * lambda1(om * s_star);
    return (rate + tsum / (2.0 * omega_prime) * y * y + kLn2) * tsum;
}

} // namespace

double weak_threshold(const WeakThresholdQuery& query) {
    ExponentParams q{query.gamma1, query.gamma2, query.p1, query.p2, query.omega, query.grid,
                     query.root_tol};
    if (std::abs(query.gamma1 + query.gamma2 - 1.0) > 1e-9)
        throw std::invalid_argument("weak_threshold: gamma1 + gamma2 must equal 1");
    if (query.p1 < 0.0 || query.p1 > 1.0 || query.p2 < 0.0 || query.p2 > 1.0)
        throw std::invalid_argument("weak_threshold: sparsity fractions outside [0, 1]");
    if (std::isinf(q.omega)) q.omega = 1e4; // numerically saturated zero-weight limit

    const double a1 = q.gamma1 * (1.0 - q.p1);
    const double a2 = q.gamma2 * (1.0 - q.p2);
    const int g1 = a1 > 0.0 ? q.grid : 0;
    const int g2 = a2 > 0.0 ? q.grid : 0;

    // net exponent over the (tau1, tau2) grid; delta enters only through the
    // admissibility constraint, so this is computed once
    std::vector<double> tau1s(static_cast<std::size_t>(g1) + 1), tau2s(static_cast<std::size_t>(g2) + 1);
    for (int i = 0; i <= g1; ++i)
        tau1s[static_cast<std::size_t>(i)] = g1 > 0 ? a1 * static_cast<double>(i) / g1 : 0.0;
    for (int i = 0; i <= g2; ++i)
        tau2s[static_cast<std::size_t>(i)] = g2 > 0 ? a2 * static_cast<double>(i) / g2 : 0.0;

    std::vector<std::vector<double>> net(tau1s.size(), std::vector<double>(tau2s.size()));
    for (std::size_t i = 0; i < tau1s.size(); ++i) {
        for (std::size_t j = 0; j < tau2s.size(); ++j) {
            const double t1 = tau1s[i], t2 = tau2s[j];
            net[i][j] = psi_com(q, t1, t2) - psi_int(q, t1, t2, static_cast<int>(i), static_cast<int>(j)) -
                        psi_ext(q, t1, t2, static_cast<int>(i), static_cast<int>(j));
        }
    }

    const double offset = q.gamma1 * q.p1 + q.gamma2 * q.p2;
    for (int d = 1; d <= query.delta_grid; ++d) {
        const double delta = static_cast<double>(d) / static_cast<double>(query.delta_grid);
        bool ok = true;
        for (std::size_t i = 0; i < tau1s.size() && ok; ++i) {
            for (std::size_t j = 0; j < tau2s.size() && ok; ++j) {
                if (tau1s[i] + tau2s[j] > delta - offset &&
                    net[i][j] >= -query.margin * (tau1s[i] + tau2s[j])) ok = false;
            }
        }
        if (ok) return delta;
    }
    return 1.0;
}

} // namespace dyncs
