#pragma once

// Closed-form moments of both operators on the monomials e_m(t) = t^m, the
// per-cell integrals of e_0, e_1, e_2, central second moments, and the
// growth-bound constants used by the weighted-space analysis. With
// D = [n]_q + beta, m* = m_of_n(n), and a_{k,n}(x) the family's perturbation
// terms (identically 0 for the default family):
//
//   point operator
//     L(e_0) = 1
//     L(e_1) = [n] x (1 + a_{1,n}(x)) / D + alpha / D
//     L(e_2) = [n][m*] x^2 (1 + a_{1,m*}(x))(1 + a_{2,n}(x)) / (q D^2)
//            + [n] x (1 + a_{1,n}(x)) (2 alpha + 1) / D^2 + alpha^2 / D^2
//
//   cell integrals (I_m = int_{cell_k} t^m d_q t)
//     I_0 = 1 / D
//     I_1 = ([2][k] + q^k (1 + 2 alpha)) / ([2] D^2)
//     I_2 = ([3][k]^2 + q^k [k]((1+3 alpha)[2] + 1) + (1+3 alpha+3 alpha^2) q^{2k})
//           / ([3] D^3)
//
//   integral operator
//     L*(e_0) = 1
//     L*(e_1) = [n] x (1 + a_{1,n}(x)) / D + q (1 + 2 alpha) / ([2] D)
//     L*(e_2) = [n][m*] x^2 (1 + a_{1,m*}(x))(1 + a_{2,n}(x)) / (q D^2)
//            + [n] x (1 + a_{1,n}(x)) ([3] + q((1+3 alpha)[2] + 1)) / ([3] D^2)
//            + q^2 (1 + 3 alpha + 3 alpha^2) / ([3] D^2)
//
// All of these were frozen only after checking against 50-digit arithmetic;
// the unit and acceptance suites re-derive them against the numeric
// evaluators at double precision.

#include <array>
#include <cmath>

#include "operators.hpp"

namespace qop {

struct CellIntegrals {
    double i0 = 0.0;
    double i1 = 0.0;
    double i2 = 0.0;
};

inline CellIntegrals kantorovich_cell_integrals(int k, const OperatorParams& p) {
    if (k < 0) throw std::invalid_argument("kantorovich_cell_integrals: k must be >= 0");
    const double q = p.qp.q;
    const double D = q_integer(p.n, p.qp) + p.beta;
    const double bk = q_integer(k, p.qp);
    const double b2 = q_integer(2, p.qp);
    const double b3 = q_integer(3, p.qp);
    const double qk = std::pow(q, k);
    const double a = p.alpha;
    CellIntegrals out;
    out.i0 = 1.0 / D;
    out.i1 = (b2 * bk + qk * (1.0 + 2.0 * a)) / (b2 * D * D);
    out.i2 = (b3 * bk * bk + qk * bk * ((1.0 + 3.0 * a) * b2 + 1.0)
              + (1.0 + 3.0 * a + 3.0 * a * a) * qk * qk)
           / (b3 * D * D * D);
    return out;
}

struct Moments {
    double e0 = 0.0;
    double e1 = 0.0;
    double e2 = 0.0;
};

inline Moments moments_point_operator(double x, const OperatorParams& p) {
    const double q = p.qp.q;
    const double D = q_integer(p.n, p.qp) + p.beta;
    const double bn = q_integer(p.n, p.qp);
    const int ms = p.family.m_of_n(p.n);
    const double bm = q_integer(ms, p.qp);
    const double a = p.alpha;
    const double a1n = p.family.alpha_kn(1, p.n, x);
    const double a1m = p.family.alpha_kn(1, ms, x);
    const double a2n = p.family.alpha_kn(2, p.n, x);
    Moments out;
    out.e0 = 1.0;
    out.e1 = bn * x * (1.0 + a1n) / D + a / D;
    out.e2 = bn * bm * x * x * (1.0 + a1m) * (1.0 + a2n) / (q * D * D)
           + bn * x * (1.0 + a1n) * (2.0 * a + 1.0) / (D * D) + a * a / (D * D);
    return out;
}

inline Moments moments_kantorovich(double x, const OperatorParams& p) {
    const double q = p.qp.q;
    const double D = q_integer(p.n, p.qp) + p.beta;
    const double bn = q_integer(p.n, p.qp);
    const int ms = p.family.m_of_n(p.n);
    const double bm = q_integer(ms, p.qp);
    const double b2 = q_integer(2, p.qp);
    const double b3 = q_integer(3, p.qp);
    const double a = p.alpha;
    const double a1n = p.family.alpha_kn(1, p.n, x);
    const double a1m = p.family.alpha_kn(1, ms, x);
    const double a2n = p.family.alpha_kn(2, p.n, x);
    Moments out;
    out.e0 = 1.0;
    out.e1 = bn * x * (1.0 + a1n) / D + q * (1.0 + 2.0 * a) / (b2 * D);
    out.e2 = bn * bm * x * x * (1.0 + a1m) * (1.0 + a2n) / (q * D * D)
           + bn * x * (1.0 + a1n) * (b3 + q * ((1.0 + 3.0 * a) * b2 + 1.0)) / (b3 * D * D)
           + q * q * (1.0 + 3.0 * a + 3.0 * a * a) / (b3 * D * D);
    return out;
}

// Closed-form second central moment L*((t-x)^2; x).
inline double second_central_moment_kantorovich(double x, const OperatorParams& p) {
    const Moments m = moments_kantorovich(x, p);
    return m.e2 - 2.0 * x * m.e1 + x * x * m.e0;
}

// Coarse upper bound for the second central moment in terms of the
// perturbation size eta_n (0 for the default family):
//   L*((t-x)^2; x) <= 9 (1+beta)^2 (1+x^2) ([n] eta_n + 1) / (q ([n]+beta)).
inline double second_central_moment_bound(double x, const OperatorParams& p,
                                          double eta_n = 0.0) {
    const double bn = q_integer(p.n, p.qp);
    return 9.0 * (1.0 + p.beta) * (1.0 + p.beta) * (1.0 + x * x)
         * (bn * eta_n + 1.0) / (p.qp.q * (bn + p.beta));
}

// Growth constants: B bounds the point operator on e_m, A the integral
// operator, in the sense  L(e_m; x) <= B_m (1 + x^m)  and
// L*(e_m; x) <= A_m (1 + x^m)  for x >= 0.
inline double bound_constant_B(int m, double q, double alpha) {
    if (m < 1) throw std::invalid_argument("bound_constant_B: m must be >= 1");
    if (!(q > 0.0) || q > 1.0)
        throw std::invalid_argument("bound_constant_B: q must lie in (0, 1]");
    if (!(alpha >= 0.0)) throw std::invalid_argument("bound_constant_B: alpha must be >= 0");
    const double e = 0.5 * m * (m - 1);
    const double v = 2.0 * m * std::pow(2.0 / q, e)
                   * (1.0 + std::pow(alpha, m) * std::pow(q, e));
    if (!std::isfinite(v)) throw std::overflow_error("bound_constant_B: value exceeds double range");
    return v;
}

inline double bound_constant_A(int m, double q, double alpha) {
    const double bm1 = q_integer(m + 1, QParam(q));
    const double v = (m + 1) * std::pow(1.0 + alpha, m) * std::pow(q, m) / bm1
                   + std::pow(2.0, m) * (m + 1) * bound_constant_B(m, q, alpha) / bm1;
    if (!std::isfinite(v)) throw std::overflow_error("bound_constant_A: value exceeds double range");
    return v;
}

// Side-by-side closed-form and numeric moments at one x, with the largest
// relative discrepancy across e_0, e_1, e_2. The central pair is reported
// too, but kept out of max_rel_residual: near its zeros a relative measure
// there is noise, not signal.
struct MomentReport {
    int n = 0;
    double q = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double x = 0.0;
    double closed_e0 = 0.0, closed_e1 = 0.0, closed_e2 = 0.0;
    double numeric_e0 = 0.0, numeric_e1 = 0.0, numeric_e2 = 0.0;
    double central2_closed = 0.0;
    double central2_numeric = 0.0;
    double max_rel_residual = 0.0;
};

inline MomentReport make_moment_report(double x, const OperatorParams& p) {
    MomentReport rep;
    rep.n = p.n;
    rep.q = p.qp.q;
    rep.alpha = p.alpha;
    rep.beta = p.beta;
    rep.x = x;
    const Moments closed = moments_kantorovich(x, p);
    rep.closed_e0 = closed.e0;
    rep.closed_e1 = closed.e1;
    rep.closed_e2 = closed.e2;
    rep.central2_closed = second_central_moment_kantorovich(x, p);
    const auto num = apply_kantorovich_n<4>(
        [x](double t) {
            return std::array<double, 4>{1.0, t, t * t, (t - x) * (t - x)};
        },
        x, p, /*growth_gamma=*/0);
    rep.numeric_e0 = num.values[0];
    rep.numeric_e1 = num.values[1];
    rep.numeric_e2 = num.values[2];
    rep.central2_numeric = num.values[3];
    const std::array<std::array<double, 2>, 3> pairs = {{
        {rep.closed_e0, rep.numeric_e0},
        {rep.closed_e1, rep.numeric_e1},
        {rep.closed_e2, rep.numeric_e2},
    }};
    for (const auto& pr : pairs) {
        const double scale = std::fmax(std::fabs(pr[0]), 1e-300);
        rep.max_rel_residual = std::fmax(rep.max_rel_residual,
                                         std::fabs(pr[0] - pr[1]) / scale);
    }
    return rep;
}

} // namespace qop
