#pragma once

// Generating families for the operator weights. A family supplies the basis
// function phi_n, its k-fold Jackson derivatives, the shifted index m(n), and
// the perturbation terms alpha_{k,n}(x). The default family is
//
//   phi_n(x) = prod_{j=0}^{n-1} (1 + q^j x)^{-1},   m(n) = n + 1,
//   alpha_{k,n} = 0,
//
// whose k-fold Jackson derivative has the closed form
//
//   D_q^k phi_n(x) = (-1)^k [n]_q [n+1]_q ... [n+k-1]_q phi_{n+k}(x).
//
// verify_conditions checks a family numerically: value 1 at x = 0, the
// alternating sign pattern of the derivatives, the derivative recursion that
// links phi_n to phi_{m(n)} (checked against nested numerical q-derivatives,
// not the family's own closed form), the [n]/[m(n)] ratio trace, and the
// normalization bound phi_n(x)(1 + alpha_{0,n}(x)) <= 1.

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qcalc.hpp"

namespace qop {

struct GeneratingFamily {
    std::string name;
    double q = 1.0;
    // phi(n, x)
    std::function<double(int, double)> phi;
    // dq_phi(n, k, x): k-fold Jackson derivative of phi_n at x
    std::function<double(int, int, double)> dq_phi;
    std::function<int(int)> m_of_n;
    // alpha_kn(k, n, x)
    std::function<double(int, int, double)> alpha_kn;
    // Optional fast path for the operator weight series: the ratio
    // w_{k+1}(x)/w_k(x). Leave empty to fall back to the direct weight
    // formula term by term.
    std::function<double(int, int, double)> weight_ratio; // (n, k, x)
    // Optional extended-precision phi for the verifier's derivative oracle.
    // Iterated q-quotients lose ~16 digits to cancellation by order 5 near
    // small x, so the audit evaluates its leaves in long double when a
    // family can supply them. Must compute the same function as phi;
    // replace or clear it whenever phi is replaced.
    std::function<long double(int, long double)> phi_hp;
};

inline GeneratingFamily q_baskakov_family(const QParam& qp) {
    GeneratingFamily fam;
    fam.name = "q-baskakov";
    fam.q = qp.q;
    const double q = qp.q;
    fam.phi = [q](int n, double x) {
        // Accumulate the denominator product first: one division total.
        double d = 1.0, p = 1.0;
        for (int j = 0; j < n; ++j) { d *= (1.0 + p * x); p *= q; }
        return 1.0 / d;
    };
    fam.m_of_n = [](int n) { return n + 1; };
    fam.alpha_kn = [](int, int, double) { return 0.0; };
    fam.dq_phi = [qp, phi = fam.phi](int n, int k, double x) {
        double pre = 1.0;
        double bracket = q_integer(n, qp);
        for (int i = 0; i < k; ++i) {
            pre *= bracket;
            bracket = 1.0 + qp.q * bracket; // [n+i+1] = 1 + q [n+i]
        }
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        return sign * pre * phi(n + k, x);
    };
    fam.weight_ratio = [qp](int n, int k, double x) {
        const double qk = std::pow(qp.q, k);
        const double qnk = std::pow(qp.q, n + k);
        return qk * q_integer(n + k, qp) * x
             / (q_integer(k + 1, qp) * (1.0 + qnk * x));
    };
    fam.phi_hp = [q](int n, long double x) {
        long double d = 1.0L, p = 1.0L;
        const long double ql = static_cast<long double>(q);
        for (int j = 0; j < n; ++j) { d *= (1.0L + p * x); p *= ql; }
        return 1.0L / d;
    };
    return fam;
}

namespace detail {

// k-fold iterated q-derivative at x via the triangular quotient table on
// the lattice {x, qx, ..., q^k x}, carried in extended precision. Row r of
// the table holds D_q^r f at the top k-r+1 lattice points; the denominators
// (1-q) q^i x are the ones the nested difference quotient produces, so this
// is the plain iterated derivative with shared subexpressions, not a
// different estimator.
template <class F>
long double dq_iterated_hp(F&& f, long double x, int k, long double q) {
    std::vector<long double> row(static_cast<std::size_t>(k) + 1);
    long double t = x;
    for (int j = 0; j <= k; ++j) {
        row[static_cast<std::size_t>(j)] = f(t);
        t *= q;
    }
    const long double step = (1.0L - q) * x;
    for (int r = 1; r <= k; ++r) {
        long double denom = step;
        for (int i = 0; i + r <= k; ++i) {
            row[i] = (row[i] - row[i + 1]) / denom;
            denom *= q;
        }
    }
    return row[0];
}

} // namespace detail

struct ConditionRow {
    int n = 0;
    double value_at_zero_residual = 0.0;   // |phi_n(0) - 1|
    long long sign_violations = 0;         // (-1)^k D_q^k phi_n(x) < 0 events
    double recursion_max_residual = 0.0;   // derivative recursion, numeric route
    double index_ratio = 0.0;              // [n]_q / [m(n)]_q
    long long normalization_violations = 0;
    bool passed = false;
};

struct ConditionReport {
    std::string family;
    std::vector<int> n_tested;
    std::vector<double> x_grid;
    int k_max = 0;
    double tol = 0.0;
    double value_at_zero_max_residual = 0.0;
    long long sign_violations = 0;
    double recursion_max_residual = 0.0;
    std::vector<double> index_ratio_trace;
    long long normalization_violations = 0;
    bool passed = false;
    std::vector<ConditionRow> rows;
};

// Numerical audit of a family against the structural conditions above.
// The derivative-recursion residual is computed with iterated numerical
// q-derivatives of phi on both sides, so it does not trust the family's own
// dq_phi closed form; the iteration runs in extended precision (see phi_hp)
// because the order-5 quotient table loses ~6 digits to cancellation even
// at moderate x. x = 0 is skipped there (the q-quotient is undefined);
// the sign and normalization checks use the full grid.
inline ConditionReport verify_conditions(const GeneratingFamily& fam,
                                         const std::vector<int>& n_set,
                                         const std::vector<double>& x_grid,
                                         int k_max, const QParam& qp, double tol) {
    if (fam.q != qp.q)
        throw std::invalid_argument("verify_conditions: family was built for a different q");
    if (k_max < 1) throw std::invalid_argument("verify_conditions: k_max must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("verify_conditions: tol must be positive");
    ConditionReport rep;
    rep.family = fam.name;
    rep.n_tested = n_set;
    rep.x_grid = x_grid;
    rep.k_max = k_max;
    rep.tol = tol;
    for (int n : n_set) {
        if (n < 1) throw std::invalid_argument("verify_conditions: n must be >= 1");
        ConditionRow row;
        row.n = n;
        row.value_at_zero_residual = std::fabs(fam.phi(n, 0.0) - 1.0);

        for (int k = 0; k <= k_max; ++k) {
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            for (double x : x_grid)
                if (sign * fam.dq_phi(n, k, x) < 0.0) ++row.sign_violations;
        }

        const int m = fam.m_of_n(n);
        const double bn = q_integer(n, qp);
        // leaves in long double when the family can supply them; plain phi
        // otherwise (then the residual carries double-precision cancellation
        // noise, which grows steeply with k)
        auto leaf = [&fam](int idx) {
            return fam.phi_hp
                       ? std::function<long double(long double)>(
                             [&fam, idx](long double t) { return fam.phi_hp(idx, t); })
                       : std::function<long double(long double)>([&fam, idx](long double t) {
                             return static_cast<long double>(
                                 fam.phi(idx, static_cast<double>(t)));
                         });
        };
        const auto phin = leaf(n);
        const auto phim = leaf(m);
        const long double ql = static_cast<long double>(qp.q);
        long double bn_hp = 0.0L;
        {
            long double p = 1.0L;
            for (int j = 0; j < n; ++j) { bn_hp += p; p *= ql; }
        }
        for (int k = 1; k <= k_max; ++k) {
            for (double x : x_grid) {
                if (x <= 0.0) continue;
                const long double xl = static_cast<long double>(x);
                const long double lhs = detail::dq_iterated_hp(phin, xl, k, ql);
                const long double rhs =
                    -bn_hp * detail::dq_iterated_hp(phim, xl, k - 1, ql)
                    * (1.0L + static_cast<long double>(fam.alpha_kn(k, n, x)));
                const long double scale = std::fmax(std::fabs(lhs), std::fabs(rhs));
                if (scale > 0.0L) {
                    const double res = static_cast<double>(std::fabs(lhs - rhs) / scale);
                    if (res > row.recursion_max_residual) row.recursion_max_residual = res;
                }
            }
        }

        row.index_ratio = bn / q_integer(m, qp);

        for (double x : x_grid)
            if (fam.phi(n, x) * (1.0 + fam.alpha_kn(0, n, x)) > 1.0 + tol)
                ++row.normalization_violations;

        row.passed = row.value_at_zero_residual <= tol && row.sign_violations == 0
                  && row.recursion_max_residual <= tol && row.normalization_violations == 0;

        rep.value_at_zero_max_residual =
            std::fmax(rep.value_at_zero_max_residual, row.value_at_zero_residual);
        rep.sign_violations += row.sign_violations;
        rep.recursion_max_residual =
            std::fmax(rep.recursion_max_residual, row.recursion_max_residual);
        rep.index_ratio_trace.push_back(row.index_ratio);
        rep.normalization_violations += row.normalization_violations;
        rep.rows.push_back(std::move(row));
    }
    rep.passed = rep.value_at_zero_max_residual <= tol && rep.sign_violations == 0
              && rep.recursion_max_residual <= tol && rep.normalization_violations == 0;
    return rep;
}

} // namespace qop
