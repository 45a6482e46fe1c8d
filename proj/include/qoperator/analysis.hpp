#pragma once

// Error analysis in polynomially weighted spaces. The ambient space holds f
// with |f(x)| <= M_f rho(x, gamma), rho(x, gamma) = 1 + x^(gamma+2), and the
// smoothness scale is the weighted modulus
//
//   Omega(f; delta) = sup_{x >= 0, 0 < h <= delta}
//                     |f(x+h) - f(x)| / (1 + (x+h)^(gamma+2)).
//
// Two error estimates are computed for the integral operator:
//   pointwise:  |L*f(x) - f(x)| <= sqrt(L*(mu_x^2; x))
//                                  (1 + sqrt(L*((t-x)^2; x)) / delta)
//                                  Omega(f; delta),
//               mu_x(t) = 1 + (x + |t-x|)^(gamma+2),
//   global:     ||L*f - f||_(gamma+1) <= K Omega(f; delta_n),
//               delta_n = sqrt(([n] eta_n + 1) / (q_n ([n] + beta))),
//               K = 24 (1+beta) lambda(gamma, q0),  q0 = min_n q_n,
// both stated for non-decreasing f in the space. Suprema are estimated on
// declared finite grids; every estimate here is a grid maximum and therefore
// a lower bound of the true supremum. Experiment rows are pure and
// independent; they are computed serially and merged by row index.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "moments.hpp"
#include "operators.hpp"

namespace qop {

inline double rho(double x, int gamma) {
    if (gamma < 0) throw std::invalid_argument("rho: gamma must be >= 0");
    return 1.0 + std::pow(x, gamma + 2);
}

struct WeightedSpaceParams {
    int gamma = 0;
    double x_max = 10.0; // sup-estimation horizon
    int x_steps = 2000;  // grid resolution for norm and modulus estimates
    int h_steps = 200;   // depth of the dyadic h-lattice
};

namespace detail {

inline void check_space(const WeightedSpaceParams& sp) {
    if (sp.gamma < 0 || !(sp.x_max > 0.0) || !std::isfinite(sp.x_max)
        || sp.x_steps < 1 || sp.h_steps < 1)
        throw std::invalid_argument("WeightedSpaceParams: gamma >= 0, x_max > 0, nonempty grids");
}

} // namespace detail

// Grid estimate of sup_x |f(x)| / rho(x, gamma) over [0, x_max].
template <class F>
double weighted_norm(F&& f, const WeightedSpaceParams& sp) {
    detail::check_space(sp);
    double best = 0.0;
    for (int i = 0; i <= sp.x_steps; ++i) {
        const double x = sp.x_max * i / sp.x_steps;
        best = std::fmax(best, std::fabs(f(x)) / rho(x, sp.gamma));
    }
    return best;
}

// Grid estimate of the weighted modulus. h runs over the fixed master
// lattice {x_max 2^-j : j = 0..h_steps} restricted to (0, delta], so the
// h-sets for nested delta are nested and the estimate is nondecreasing in
// delta by construction. delta itself is sampled exactly when it lies on
// the lattice; elsewhere the estimate leans low, which only tightens any
// upper bound built from it.
template <class F>
double weighted_modulus(F&& f, double delta, const WeightedSpaceParams& sp) {
    detail::check_space(sp);
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw std::invalid_argument("weighted_modulus: delta must be positive");
    double best = 0.0;
    double h = sp.x_max;
    for (int j = 0; j <= sp.h_steps; ++j, h *= 0.5) {
        if (h > delta) continue;
        if (h == 0.0) break;
        for (int i = 0; i <= sp.x_steps; ++i) {
            const double x = sp.x_max * i / sp.x_steps;
            best = std::fmax(best,
                             std::fabs(f(x + h) - f(x)) / rho(x + h, sp.gamma));
        }
    }
    return best;
}

// Rate scale of the global estimate.
inline double delta_n(int n, double q_n, double beta, double eta_n = 0.0) {
    if (n < 1) throw std::invalid_argument("delta_n: n must be >= 1");
    if (!(q_n > 0.0) || q_n > 1.0)
        throw std::invalid_argument("delta_n: q_n must lie in (0, 1]");
    if (!(eta_n >= 0.0)) throw std::invalid_argument("delta_n: eta_n must be >= 0");
    const double bn = q_integer(n, QParam(q_n));
    return std::sqrt((bn * eta_n + 1.0) / (q_n * (bn + beta)));
}

// Perturbation size of a plug-in family: the grid sup of the three
// first/second order alpha-terms entering delta_n. Identically zero for the
// default family.
inline double eta_sup(const GeneratingFamily& fam, int n, const WeightedSpaceParams& sp) {
    detail::check_space(sp);
    if (n < 1) throw std::invalid_argument("eta_sup: n must be >= 1");
    const int mn = fam.m_of_n(n);
    double best = 0.0;
    for (int i = 0; i <= sp.x_steps; ++i) {
        const double x = sp.x_max * i / sp.x_steps;
        best = std::fmax(best, fam.alpha_kn(1, n, x));
        best = std::fmax(best, fam.alpha_kn(2, n, x));
        best = std::fmax(best, fam.alpha_kn(1, mn, x));
    }
    return std::fmax(best, 0.0);
}

// lambda(gamma, q)^2 = 2^(5+2 gamma) (2^(4+2 gamma) + A_{4+2 gamma, q}).
inline double envelope_constant_lambda(int gamma, double q, double alpha) {
    if (gamma < 0) throw std::invalid_argument("envelope_constant_lambda: gamma must be >= 0");
    const double a = bound_constant_A(4 + 2 * gamma, q, alpha);
    const double v = std::sqrt(std::pow(2.0, 5 + 2 * gamma)
                               * (std::pow(2.0, 4 + 2 * gamma) + a));
    if (!std::isfinite(v))
        throw std::overflow_error("envelope_constant_lambda: value exceeds double range");
    return v;
}

// K = 24 (1+beta) lambda(gamma, q0), the constant of the global estimate;
// q0 is the minimum of the q-schedule actually run.
inline double rate_bound_constant(int gamma, double q0, double alpha, double beta) {
    return 24.0 * (1.0 + beta) * envelope_constant_lambda(gamma, q0, alpha);
}

// Right-hand side of the pointwise estimate at one (x, delta). The first
// factor is evaluated through the operator itself (growth hint 2 gamma + 2,
// since mu^2 grows like t^(4+2 gamma)); the psi^2 factor has a closed form.
template <class F>
double pointwise_bound(F&& f, double x, double delta, const OperatorParams& p,
                       const WeightedSpaceParams& sp) {
    detail::check_space(sp);
    if (!(delta > 0.0)) throw std::invalid_argument("pointwise_bound: delta must be positive");
    const int g = sp.gamma;
    auto mu_sq = [x, g](double t) {
        const double m = 1.0 + std::pow(x + std::fabs(t - x), g + 2);
        return m * m;
    };
    const double mu2 = apply_kantorovich(mu_sq, x, p, 2 * g + 2).value;
    const double psi2 = second_central_moment_kantorovich(x, p);
    const double omega = weighted_modulus(f, delta, sp);
    return std::sqrt(std::fmax(mu2, 0.0))
         * (1.0 + std::sqrt(std::fmax(psi2, 0.0)) / delta) * omega;
}

// One row of a rate experiment. sup_error_0b is the plain sup of
// |L*f - f| on [0, b]; weighted_error the grid norm of the same difference
// against rho(., gamma+1) on [0, x_max]. bound_holds records
// weighted_error <= bound_rhs together with the pointwise estimate at the
// probe points.
struct RateRow {
    int n = 0;
    double q_n = 0.0;
    double sup_error_0b = 0.0;
    double weighted_error = 0.0;
    double delta_n = 0.0;
    double modulus_at_delta = 0.0;
    double bound_rhs = 0.0;
    double pointwise_rhs_max = 0.0;
    bool bound_holds = true;
};

using RateTable = std::vector<RateRow>;
using Schedule = std::vector<std::pair<int, double>>; // (n, q_n)

enum class QScheduleKind { fixed_q, one_minus_inv_n, n_over_n_plus_1 };

inline Schedule make_schedule(const std::vector<int>& ns, QScheduleKind kind,
                              double fixed_value = 0.0) {
    Schedule s;
    s.reserve(ns.size());
    for (int n : ns) {
        double q = 0.0;
        switch (kind) {
            case QScheduleKind::fixed_q: q = fixed_value; break;
            case QScheduleKind::one_minus_inv_n: q = 1.0 - 1.0 / n; break;
            case QScheduleKind::n_over_n_plus_1: q = static_cast<double>(n) / (n + 1); break;
        }
        s.emplace_back(n, q);
    }
    return s;
}

// Everything needed to build the operator at a given (n, q) row.
struct OperatorTemplate {
    double alpha = 0.0;
    double beta = 0.0;
    double series_tol = 1e-14;
    int max_terms = 200000; // legs near q = 1 walk ~ln(a/tol)/(1-q) terms
    double x_max = 10.0;
    std::function<GeneratingFamily(const QParam&)> family_factory;

    OperatorParams instantiate(int n, double q) const {
        QParam qp(q, series_tol, max_terms);
        GeneratingFamily fam = family_factory ? family_factory(qp)
                                              : q_baskakov_family(qp);
        return OperatorParams(n, qp, alpha, beta, std::move(fam), x_max);
    }
};

// Plain convergence experiment: sup |L*f - f| on a [0, b] grid per schedule
// row. Only the sup-error columns are meaningful here; the weighted-bound
// fields stay zero (use weighted_bound_experiment for those).
template <class F>
RateTable convergence_experiment(F&& f, double b, const Schedule& schedule,
                                 const OperatorTemplate& tmpl,
                                 const WeightedSpaceParams& sp, int b_steps = 80) {
    detail::check_space(sp);
    if (!(b > 0.0) || !std::isfinite(b))
        throw std::invalid_argument("convergence_experiment: b must be positive");
    if (b_steps < 1) throw std::invalid_argument("convergence_experiment: b_steps must be >= 1");
    RateTable table;
    table.reserve(schedule.size());
    for (const auto& [n, qn] : schedule) {
        OperatorParams p = tmpl.instantiate(n, qn);
        if (b > p.x_max)
            throw std::invalid_argument("convergence_experiment: b exceeds the operator's x_max");
        RateRow row;
        row.n = n;
        row.q_n = qn;
        row.delta_n = delta_n(n, qn, tmpl.beta, eta_sup(p.family, n, sp));
        for (int i = 0; i <= b_steps; ++i) {
            const double x = b * i / b_steps;
            const double lx = apply_kantorovich(f, x, p, sp.gamma).value;
            row.sup_error_0b = std::fmax(row.sup_error_0b, std::fabs(lx - f(x)));
        }
        table.push_back(row);
    }
    return table;
}

// Full rate experiment against the global and pointwise estimates. Per row:
// one operator pass over the [0, x_max] norm grid feeds both error columns
// (sup_error_0b reads the subset x <= b), then the modulus at delta_n, the
// constant K at q0 = min q_n, and the pointwise right-hand side at the probe
// points {b/2, 3b/4, b}. Stated for non-decreasing f; callers probing other
// f should treat bound_holds as a report, not a verdict.
template <class F>
RateTable weighted_bound_experiment(F&& f, const Schedule& schedule,
                                    const OperatorTemplate& tmpl,
                                    const WeightedSpaceParams& sp, double b = 2.0,
                                    int norm_steps = 50) {
    detail::check_space(sp);
    if (schedule.empty())
        throw std::invalid_argument("weighted_bound_experiment: schedule must be nonempty");
    if (!(b > 0.0) || b > sp.x_max)
        throw std::invalid_argument("weighted_bound_experiment: need 0 < b <= x_max");
    if (norm_steps < 1)
        throw std::invalid_argument("weighted_bound_experiment: norm_steps must be >= 1");
    double q0 = 1.0;
    for (const auto& [n, qn] : schedule) {
        if (!(qn > 0.0) || !(qn < 1.0))
            throw std::invalid_argument("weighted_bound_experiment: schedule needs q_n in (0, 1)");
        q0 = std::fmin(q0, qn);
    }
    const double k_const = rate_bound_constant(sp.gamma, q0, tmpl.alpha, tmpl.beta);
    const std::array<double, 3> probes = {0.5 * b, 0.75 * b, b};

    RateTable table;
    table.reserve(schedule.size());
    for (const auto& [n, qn] : schedule) {
        OperatorParams p = tmpl.instantiate(n, qn);
        if (sp.x_max > p.x_max)
            throw std::invalid_argument("weighted_bound_experiment: x_max exceeds the operator's x_max");
        RateRow row;
        row.n = n;
        row.q_n = qn;
        row.delta_n = delta_n(n, qn, tmpl.beta, eta_sup(p.family, n, sp));
        row.modulus_at_delta = weighted_modulus(f, row.delta_n, sp);
        row.bound_rhs = k_const * row.modulus_at_delta;
        for (int i = 0; i <= norm_steps; ++i) {
            const double x = sp.x_max * i / norm_steps;
            const double err = std::fabs(apply_kantorovich(f, x, p, sp.gamma).value - f(x));
            row.weighted_error = std::fmax(row.weighted_error, err / rho(x, sp.gamma + 1));
            if (x <= b) row.sup_error_0b = std::fmax(row.sup_error_0b, err);
        }
        row.bound_holds = row.weighted_error <= row.bound_rhs;
        for (double x : probes) {
            const double rhs = pointwise_bound(f, x, row.delta_n, p, sp);
            const double lhs = std::fabs(apply_kantorovich(f, x, p, sp.gamma).value - f(x));
            row.pointwise_rhs_max = std::fmax(row.pointwise_rhs_max, rhs);
            if (lhs > rhs) row.bound_holds = false;
        }
        table.push_back(row);
    }
    return table;
}

} // namespace qop
