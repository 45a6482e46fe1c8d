#pragma once

// The positive linear operators built from a generating family, with Stancu
// shift parameters 0 <= alpha <= beta:
//
//   point form:        L(f; x)  = sum_k w_k(x) f(t_k)
//   integral form:     L*(f; x) = D sum_k w_k(x) int_{cell_k} f(q^{1-k} t) d_q t
//
// where D = [n]_q + beta,
//   w_k(x)  = q^{k(k-1)/2} D_q^k(phi_n)(x) (-x)^k / [k]_q!
//   t_k     = ([k]_q + q^{k-1} alpha) / (q^{k-1} D)
//   cell_k  = [ q([k]_q + q^{k-1} alpha)/D , ([k+1]_q + q^k alpha)/D ].
//
// Substituting u = q^{1-k} t maps cell_k onto [q t_k, q t_{k+1}], so the
// transformed cells tile [q t_0, q t_K) and consecutive cells share a Jackson
// leg: the evaluator computes one new integral-from-zero per cell and reuses
// the previous one. The weights are walked by the ratio recurrence when the
// family provides one (the default family does); the direct factorial form
// overflows long before the series is exhausted at q near 1.
//
// Truncation: weights are nonnegative and sum to 1, so the series stops once
// the accumulated weight reaches 1 - series_tol (or has hit its floating
// point ceiling, see weight_series_walk) and the rho-weighted guard
// w_k (1 + t^(gamma+2)) stays below series_tol for two consecutive k. The
// guard, not f itself, controls stopping, which keeps evaluation linear in f
// up to the tolerance and honest for any |f| <= M (1 + t^(gamma+2)). The
// Jackson legs judge their own tails against the same growth envelope.

#include <algorithm>
#include <array>
#include <cstddef>
#include <limits>
#include <utility>

#include "basis.hpp"
#include "qcalc.hpp"

namespace qop {

struct OperatorParams {
    int n;
    QParam qp;
    double alpha;
    double beta;
    GeneratingFamily family;
    double x_max;

    OperatorParams(int n_, const QParam& qp_, double alpha_, double beta_,
                   GeneratingFamily family_, double x_max_ = 10.0)
        : n(n_), qp(qp_), alpha(alpha_), beta(beta_),
          family(std::move(family_)), x_max(x_max_) {
        if (n < 1) throw std::invalid_argument("OperatorParams: n must be >= 1");
        if (!(alpha >= 0.0) || !(alpha <= beta) || !std::isfinite(beta))
            throw std::invalid_argument("OperatorParams: need 0 <= alpha <= beta, finite");
        if (family.q != qp.q)
            throw std::invalid_argument("OperatorParams: family was built for a different q");
        if (!(x_max > 0.0) || !std::isfinite(x_max))
            throw std::invalid_argument("OperatorParams: x_max must be positive and finite");
        if (!family.phi || !family.dq_phi || !family.m_of_n || !family.alpha_kn)
            throw std::invalid_argument("OperatorParams: family callbacks must all be set");
    }
};

// Default-family parameter bundle.
inline OperatorParams baskakov_params(int n, const QParam& qp, double alpha = 0.0,
                                      double beta = 0.0, double x_max = 10.0) {
    return OperatorParams(n, qp, alpha, beta, q_baskakov_family(qp), x_max);
}

// Direct weight formula. Fine for moderate k; the evaluator itself prefers
// the family's ratio recurrence.
inline double weight(int k, double x, const OperatorParams& p) {
    if (k < 0) throw std::invalid_argument("weight: k must be >= 0");
    const double q = p.qp.q;
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    return std::pow(q, 0.5 * k * (k - 1)) * p.family.dq_phi(p.n, k, x)
         * sign * std::pow(x, k) / q_factorial(k, p.qp);
}

inline double sample_point(int k, const OperatorParams& p) {
    if (k < 0) throw std::invalid_argument("sample_point: k must be >= 0");
    const double q = p.qp.q;
    const double qk = std::pow(q, k);
    const double D = q_integer(p.n, p.qp) + p.beta;
    // ([k] + q^{k-1} alpha) / (q^{k-1} D), with numerator and denominator
    // both scaled by q to avoid the loose q^{-1} at k = 0.
    return (q * q_integer(k, p.qp) + qk * p.alpha) / (qk * D);
}

// Integration cell of the k-th term. Width is 1/([n]_q + beta) up to
// rounding, via [k+1]_q = 1 + q [k]_q; the endpoints share the subexpression
// s = q [k]_q + q^k alpha so that identity survives in floating point.
inline Interval kantorovich_cell(int k, const OperatorParams& p) {
    if (k < 0) throw std::invalid_argument("kantorovich_cell: k must be >= 0");
    const double q = p.qp.q;
    const double s = q * q_integer(k, p.qp) + std::pow(q, k) * p.alpha;
    const double D = q_integer(p.n, p.qp) + p.beta;
    return Interval(s / D, (1.0 + s) / D);
}

struct EvalDiagnostics {
    int terms_used = 0;     // weight terms (cells) consumed
    double weight_sum = 0.0;
    double tail_bound = 0.0; // heuristic upper estimate of the dropped mass
    bool truncated = false;
};

struct EvalResult {
    double value = 0.0;
    EvalDiagnostics diag;
};

template <std::size_t M>
struct EvalResultN {
    std::array<double, M> values{};
    EvalDiagnostics diag;
};

enum class CellRoute {
    change_of_variable, // tiled legs on [q t_k, q t_{k+1}], one new leg per cell
    direct              // two fresh legs per cell on the original cell
};

namespace detail {

inline void check_eval_point(double x, const OperatorParams& p) {
    if (!(x >= 0.0) || !(x <= p.x_max) || !std::isfinite(x))
        throw std::domain_error("operator evaluation: x must lie in [0, x_max]");
}

// Shared weight-series walk. Body(k, w, t_k, t_next) accumulates the k-th
// term; the walk handles weight stepping, the cumulative-weight stopping
// rule, and diagnostics.
//
// The running weight is carried in long double. For large n and x the
// leading weight phi_n(x) sits far below double range (around 1e-977 at
// n = 512, x = 6) even though the weights near the peak index are O(1),
// so a double carry would flush to zero and the ratio recurrence could
// never recover. Seeded from the family's extended-precision phi when
// present. The body only ever sees the double view and skips terms that
// are still invisible at that precision.
template <class Body>
EvalDiagnostics weight_series_walk(double x, const OperatorParams& p, int growth_gamma,
                                   bool guard_at_next, Body&& body) {
    const double q = p.qp.q;
    const double tol = p.qp.series_tol;
    const double D = q_integer(p.n, p.qp) + p.beta;
    const bool have_ratio = static_cast<bool>(p.family.weight_ratio);

    Neumaier cum;
    long double w = p.family.phi_hp
        ? p.family.phi_hp(p.n, static_cast<long double>(x))
        : static_cast<long double>(p.family.phi(p.n, x)); // w_0
    double rk = 0.0;                 // [k]_q
    double P = 1.0;                  // q^k
    int below = 0;
    int k = 0;
    double guard_last = 0.0;
    double t_next = (q * rk + P * p.alpha) / (P * D); // t_0
    // The weight peak sits well before this many terms for any admissible
    // (n, x). A series with no representable mass by then never gets any;
    // bail out instead of spinning to max_terms on a dead recurrence.
    const int barren_cap = std::max(8192, 64 * (p.n + 1));
    for (; k < p.qp.max_terms; ++k) {
        if (k > 0 && (k & 511) == 0) P = std::pow(q, static_cast<double>(k));
        const double t_k = t_next;
        const double rk1 = 1.0 + q * rk; // [k+1]_q
        const double Pq = P * q;         // q^{k+1}
        t_next = (q * rk1 + Pq * p.alpha) / (Pq * D);

        const double wd = static_cast<double>(w);
        cum.add(wd);
        body(k, wd, t_k, t_next, P);

        const double t_guard = guard_at_next ? t_next : t_k;
        const double g = (wd == 0.0) ? 0.0 : wd * growth_weight(t_guard, growth_gamma);
        guard_last = g;
        // Mass test: the captured weight should reach 1 - tol. Rounding in
        // the ratio recurrence biases the computed weights by a few ulps
        // each, so for large n the floating-point limit of the sum can rest
        // a shade below that mark (about 1e-14 at n = 512). Accept the sum
        // once it can no longer advance: the next term is under one ulp of
        // the total, at least half the mass is in (so this cannot fire on
        // the climb), and the growth guard still certifies the true tail.
        // The shortfall stays visible in weight_sum and tail_bound.
        const double cv = cum.value();
        const bool mass_ok = cv >= 1.0 - tol
            || (cv >= 0.5 && wd <= cv * std::numeric_limits<double>::epsilon());
        if (mass_ok && g < tol) {
            if (++below >= 2) { ++k; break; }
        } else {
            below = 0;
        }
        if (cum.value() == 0.0 && k >= barren_cap)
            throw NonConvergenceError(
                "operator evaluation: weights underflow at this (n, x)");

        w = have_ratio ? w * static_cast<long double>(p.family.weight_ratio(p.n, k, x))
                       : static_cast<long double>(weight(k + 1, x, p));
        rk = rk1;
        P = Pq;
    }
    if (below < 2)
        throw NonConvergenceError("operator evaluation: weight series did not settle within max_terms");

    EvalDiagnostics diag;
    diag.terms_used = k;
    diag.weight_sum = cum.value();
    diag.tail_bound = guard_last + std::fmax(0.0, 1.0 - diag.weight_sum);
    diag.truncated = (static_cast<double>(w) != 0.0); // series cut while weights were still live
    return diag;
}

} // namespace detail

// Point operator, M integrands per pass. f maps double -> array<double, M>.
// growth_gamma is the caller's growth hint: truncation is controlled by
// w_k (1 + t^(gamma+2)), valid whenever |f| grows no faster than that.
template <std::size_t M, class FArr>
EvalResultN<M> apply_baskakov_stancu_n(FArr&& f, double x, const OperatorParams& p,
                                       int growth_gamma = 0) {
    detail::check_eval_point(x, p);
    std::array<detail::Neumaier, M> acc{};
    EvalResultN<M> out;
    out.diag = detail::weight_series_walk(
        x, p, growth_gamma, /*guard_at_next=*/false,
        [&](int, double w, double t_k, double, double) {
            if (w == 0.0) return;
            const std::array<double, M> fv = f(t_k);
            for (std::size_t m = 0; m < M; ++m) acc[m].add(w * fv[m]);
        });
    for (std::size_t m = 0; m < M; ++m) out.values[m] = acc[m].value();
    return out;
}

template <class F>
EvalResult apply_baskakov_stancu(F&& f, double x, const OperatorParams& p,
                                 int growth_gamma = 0) {
    auto r = apply_baskakov_stancu_n<1>(
        [&f](double t) { return std::array<double, 1>{f(t)}; }, x, p, growth_gamma);
    return EvalResult{r.values[0], r.diag};
}

// Integral of the k-th cell's integrand, int_{cell_k} f(q^{1-k} t) d_q t,
// by either route. The change-of-variable route is what the evaluator uses;
// the direct route exists to cross-check it.
template <class F>
double kantorovich_cell_integral(F&& f, int k, const OperatorParams& p,
                                 CellRoute route = CellRoute::change_of_variable,
                                 int growth_gamma = 0) {
    if (k < 0) throw std::invalid_argument("kantorovich_cell_integral: k must be >= 0");
    auto fa = [&f](double t) { return std::array<double, 1>{f(t)}; };
    if (route == CellRoute::change_of_variable) {
        const double q = p.qp.q;
        const double a = q * sample_point(k, p);
        const double b = q * sample_point(k + 1, p);
        const double pre = std::pow(q, k - 1);
        return pre * (detail::jackson_zero_array<1>(fa, b, p.qp, growth_gamma)[0]
                    - detail::jackson_zero_array<1>(fa, a, p.qp, growth_gamma)[0]);
    }
    const Interval cell = kantorovich_cell(k, p);
    const double scale = std::pow(p.qp.q, 1 - k);
    auto g = [&f, scale](double t) { return std::array<double, 1>{f(scale * t)}; };
    return detail::jackson_zero_array<1>(g, cell.upper, p.qp, growth_gamma)[0]
         - detail::jackson_zero_array<1>(g, cell.lower, p.qp, growth_gamma)[0];
}

// Integral (Kantorovich) operator, M integrands per pass. One Jackson leg
// per cell in the default route: leg(q t_{k+1}) is computed fresh and
// leg(q t_k) is carried over from the previous cell.
template <std::size_t M, class FArr>
EvalResultN<M> apply_kantorovich_n(FArr&& f, double x, const OperatorParams& p,
                                   int growth_gamma = 0,
                                   CellRoute route = CellRoute::change_of_variable) {
    detail::check_eval_point(x, p);
    const double q = p.qp.q;
    const double D = q_integer(p.n, p.qp) + p.beta;
    std::array<detail::Neumaier, M> acc{};
    EvalResultN<M> out;

    if (route == CellRoute::change_of_variable) {
        std::array<double, M> leg_prev{};
        bool have_prev = false;
        out.diag = detail::weight_series_walk(
            x, p, growth_gamma, /*guard_at_next=*/true,
            [&](int, double w, double t_k, double t_next, double P) {
                if (w == 0.0) { have_prev = false; return; } // node may be far out; never touch it
                if (!have_prev) {
                    leg_prev = detail::jackson_zero_array<M>(f, q * t_k, p.qp, growth_gamma);
                    have_prev = true;
                }
                const std::array<double, M> leg_next =
                    detail::jackson_zero_array<M>(f, q * t_next, p.qp, growth_gamma);
                const double c = D * w * (P / q); // D w_k q^{k-1}
                for (std::size_t m = 0; m < M; ++m)
                    acc[m].add(c * (leg_next[m] - leg_prev[m]));
                leg_prev = leg_next;
            });
    } else {
        out.diag = detail::weight_series_walk(
            x, p, growth_gamma, /*guard_at_next=*/true,
            [&](int k, double w, double, double, double P) {
                if (w == 0.0) return;
                const Interval cell = kantorovich_cell(k, p);
                const double scale = q / P; // q^{1-k}
                auto g = [&f, scale](double t) { return f(scale * t); };
                const std::array<double, M> hi =
                    detail::jackson_zero_array<M>(g, cell.upper, p.qp, growth_gamma);
                const std::array<double, M> lo =
                    detail::jackson_zero_array<M>(g, cell.lower, p.qp, growth_gamma);
                for (std::size_t m = 0; m < M; ++m)
                    acc[m].add(D * w * (hi[m] - lo[m]));
            });
    }
    for (std::size_t m = 0; m < M; ++m) out.values[m] = acc[m].value();
    return out;
}

template <class F>
EvalResult apply_kantorovich(F&& f, double x, const OperatorParams& p, int growth_gamma = 0,
                             CellRoute route = CellRoute::change_of_variable) {
    auto r = apply_kantorovich_n<1>(
        [&f](double t) { return std::array<double, 1>{f(t)}; }, x, p, growth_gamma, route);
    return EvalResult{r.values[0], r.diag};
}

} // namespace qop
