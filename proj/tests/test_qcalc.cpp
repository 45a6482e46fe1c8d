#include <catch2/catch_amalgamated.hpp>

#include <qoperator/qcalc.hpp>

#include <array>
#include <cmath>
#include <vector>

using namespace qop;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const std::vector<double> kQGrid = {0.1, 0.3, 0.5, 0.9, 0.99};

// Independent expansion of the k-fold Jackson derivative as a single
// q-binomial sum over the lattice {q^{k-j} x}. Used as an oracle against the
// nested-definition implementation, which it matches in exact arithmetic:
//   D_q^k f(x) = q^{-k(k-1)/2} (q-1)^{-k} x^{-k}
//                  sum_{j=0}^k (-1)^j q^{j(j-1)/2} binom_q(k,j) f(q^{k-j} x)
template <class F>
double dq_iter_expansion(F&& f, double x, int k, const QParam& qp) {
    const double q = qp.q;
    double acc = 0.0;
    for (int j = 0; j <= k; ++j) {
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        acc += sign * std::pow(q, 0.5 * j * (j - 1)) * q_binomial(k, j, qp)
             * f(std::pow(q, k - j) * x);
    }
    return std::pow(q, -0.5 * k * (k - 1)) * std::pow(q - 1.0, -k) * std::pow(x, -k) * acc;
}

} // namespace

TEST_CASE("q_integer basic values and q=1 degeneration", "[qcalc]") {
    QParam half(0.5);
    REQUIRE_THAT(q_integer(3, half), WithinRel(1.0 + 0.5 + 0.25, 1e-15));
    REQUIRE(q_integer(0, half) == 0.0);
    REQUIRE(q_integer(1, half) == 1.0);
    REQUIRE(q_integer(5, QParam(1.0)) == 5.0);
}

TEST_CASE("q_integer recurrence [n] = [n-1] + q^(n-1)", "[qcalc]") {
    for (double q : kQGrid) {
        QParam qp(q);
        for (int n = 1; n <= 60; ++n) {
            const double lhs = q_integer(n, qp);
            const double rhs = q_integer(n - 1, qp) + std::pow(q, n - 1);
            REQUIRE_THAT(lhs, WithinRel(rhs, 1e-14));
        }
    }
}

TEST_CASE("q_integer bracket growth stays within doubling", "[qcalc]") {
    // [k+1]_q = 1 + q [k]_q gives 1 <= [k+1]_q <= 2 [k]_q for k >= 1.
    for (double q : {0.1, 0.3, 0.5, 0.9, 0.99, 0.999}) {
        QParam qp(q);
        double prev = q_integer(1, qp);
        for (int k = 1; k <= 200; ++k) {
            const double next = q_integer(k + 1, qp);
            REQUIRE(next >= 1.0);
            REQUIRE(next <= 2.0 * prev);
            prev = next;
        }
    }
}

TEST_CASE("q_integer approaches n monotonically as q -> 1-", "[qcalc]") {
    // [n]_q = n - (1-q) n(n-1)/2 + O((1-q)^2); the exact first-order gap
    // bounds the error for every n, and for n <= 5 the gap at q = 1 - 1e-6
    // is already below 1e-5.
    for (int n : {2, 3, 5, 10, 25, 50}) {
        double prev = -1.0;
        double final_gap = 0.0;
        for (int k = 1; k <= 6; ++k) {
            const double eps = std::pow(10.0, -k);
            const double v = q_integer(n, QParam(1.0 - eps));
            REQUIRE(v > prev);
            REQUIRE(v < static_cast<double>(n));
            final_gap = n - v;
            REQUIRE(final_gap <= eps * 0.5 * n * (n - 1) * (1.0 + 1e-9));
            prev = v;
        }
        if (n <= 5) REQUIRE(final_gap < 1e-5);
    }
}

TEST_CASE("q_factorial values and overflow signalling", "[qcalc]") {
    QParam half(0.5);
    REQUIRE_THAT(q_factorial(3, half), WithinRel(1.0 * 1.5 * 1.75, 1e-15));
    REQUIRE(q_factorial(0, half) == 1.0);
    REQUIRE_THROWS_AS(q_factorial(200, QParam(1.0)), std::overflow_error);
}

TEST_CASE("q_binomial values, symmetry, and domain checks", "[qcalc]") {
    QParam half(0.5);
    REQUIRE_THAT(q_binomial(4, 2, half), WithinRel(2.1875, 1e-15));
    REQUIRE(q_binomial(7, 0, half) == 1.0);
    REQUIRE(q_binomial(7, 7, half) == 1.0);
    for (double q : kQGrid) {
        QParam qp(q);
        for (int n = 0; n <= 12; ++n)
            for (int k = 0; k <= n; ++k)
                REQUIRE(q_binomial(n, k, qp) == q_binomial(n, n - k, qp));
    }
    REQUIRE_THROWS_AS(q_binomial(3, 4, half), std::domain_error);
    REQUIRE_THROWS_AS(q_binomial(3, -1, half), std::domain_error);
}

TEST_CASE("q_binomial q-Pascal identity", "[qcalc]") {
    // binom_q(n,k) = binom_q(n-1,k-1) + q^k binom_q(n-1,k)
    for (double q : kQGrid) {
        QParam qp(q);
        for (int n = 1; n <= 12; ++n)
            for (int k = 1; k < n; ++k) {
                const double lhs = q_binomial(n, k, qp);
                const double rhs = q_binomial(n - 1, k - 1, qp)
                                 + std::pow(q, k) * q_binomial(n - 1, k, qp);
                REQUIRE_THAT(lhs, WithinRel(rhs, 1e-13));
            }
    }
}

TEST_CASE("q_shifted_power telescoping product", "[qcalc]") {
    QParam half(0.5);
    REQUIRE_THAT(q_shifted_power(2.0, 1.0, 3, half), WithinRel(1.0 * 1.5 * 1.75, 1e-15));
    REQUIRE(q_shifted_power(2.0, 1.0, 0, half) == 1.0);
    REQUIRE_THAT(q_shifted_power(1.0, 2.0, 2, half), WithinRel((1.0 - 2.0) * (1.0 - 1.0), 1e-15));
}

TEST_CASE("jackson_derivative monomial rule", "[qcalc]") {
    // D_q(t^m)(x) = [m]_q x^{m-1}
    auto sq = [](double t) { return t * t; };
    QParam half(0.5);
    QCalcInfo info;
    REQUIRE_THAT(jackson_derivative(sq, 2.0, half, &info), WithinRel(3.0, 1e-14));
    REQUIRE_FALSE(info.used_fallback);
    for (double q : {0.3, 0.5, 0.9}) {
        QParam qp(q);
        for (int m = 1; m <= 10; ++m)
            for (double x : {0.5, 1.0, 2.0}) {
                auto mono = [m](double t) { return std::pow(t, m); };
                const double expect = q_integer(m, qp) * std::pow(x, m - 1);
                REQUIRE_THAT(jackson_derivative(mono, x, qp), WithinRel(expect, 1e-12));
            }
    }
}

TEST_CASE("jackson_derivative fallback at q=1 and x=0", "[qcalc]") {
    auto sq = [](double t) { return t * t; };
    QCalcInfo info;
    REQUIRE_THAT(jackson_derivative(sq, 2.0, QParam(1.0), &info), WithinAbs(4.0, 1e-9));
    REQUIRE(info.used_fallback);
    REQUIRE_THAT(jackson_derivative(sq, 0.0, QParam(0.5), &info), WithinAbs(0.0, 1e-9));
    REQUIRE(info.used_fallback);
    auto lin = [](double t) { return 3.0 * t; };
    REQUIRE_THAT(jackson_derivative(lin, 0.0, QParam(0.5)), WithinAbs(3.0, 1e-9));
}

TEST_CASE("jackson_derivative_iter matches product rule on monomials", "[qcalc]") {
    // D_q^2(t^3)(x) = [3]_q [2]_q x
    QParam half(0.5);
    auto cube = [](double t) { return t * t * t; };
    const double expect = q_integer(3, half) * q_integer(2, half) * 1.0;
    REQUIRE_THAT(jackson_derivative_iter(cube, 1.0, 2, half), WithinRel(expect, 1e-12));
    REQUIRE(jackson_derivative_iter(cube, 0.7, 0, half) == cube(0.7));
}

TEST_CASE("jackson_derivative_iter agrees with q-binomial expansion", "[qcalc]") {
    auto f1 = [](double t) { return std::exp(-t); };
    auto f2 = [](double t) { return t * t * t + 2.0 * t; };
    for (double q : {0.4, 0.8}) {
        QParam qp(q);
        for (int k = 1; k <= 4; ++k)
            for (double x : {0.7, 1.3}) {
                const double r1 = dq_iter_expansion(f1, x, k, qp);
                const double r2 = dq_iter_expansion(f2, x, k, qp);
                // the cubic's 4th derivative is 0, where only an absolute
                // comparison is meaningful
                REQUIRE_THAT(jackson_derivative_iter(f1, x, k, qp),
                             WithinRel(r1, 1e-10) || WithinAbs(r1, 1e-9));
                REQUIRE_THAT(jackson_derivative_iter(f2, x, k, qp),
                             WithinRel(r2, 1e-10) || WithinAbs(r2, 1e-9));
            }
    }
}

TEST_CASE("jackson_integral_zero of identity", "[qcalc]") {
    QParam half(0.5);
    QCalcInfo info;
    auto id = [](double t) { return t; };
    REQUIRE_THAT(jackson_integral_zero(id, 1.0, half, 0, &info), WithinRel(2.0 / 3.0, 1e-13));
    REQUIRE_FALSE(info.used_fallback);
    REQUIRE(info.terms > 0);
    REQUIRE(jackson_integral_zero(id, 0.0, half) == 0.0);
}

TEST_CASE("jackson_integral_zero polynomial closed form", "[qcalc]") {
    // int_0^a t^m d_q t = a^{m+1} / [m+1]_q, extended by linearity.
    const std::vector<std::vector<double>> polys = {
        {1.0}, {0.0, 1.0}, {2.0, -1.0, 3.0}, {1.0, 0.5, 0.0, -2.0, 0.25}};
    for (double q : {0.3, 0.5, 0.9, 0.99}) {
        QParam qp(q);
        for (double a : {0.5, 1.0, 2.0}) {
            for (const auto& c : polys) {
                auto f = [&c](double t) {
                    double v = 0.0;
                    for (std::size_t m = c.size(); m-- > 0;) v = v * t + c[m];
                    return v;
                };
                double expect = 0.0;
                for (std::size_t m = 0; m < c.size(); ++m)
                    expect += c[m] * std::pow(a, static_cast<double>(m + 1))
                            / q_integer(static_cast<int>(m + 1), qp);
                REQUIRE_THAT(jackson_integral(f, 0.0, a, qp), WithinRel(expect, 1e-12));
            }
        }
    }
}

TEST_CASE("jackson_integral on [a,b]", "[qcalc]") {
    QParam half(0.5);
    auto id = [](double t) { return t; };
    REQUIRE_THAT(jackson_integral(id, 0.5, 1.0, half), WithinRel(0.5, 1e-13));
    REQUIRE(jackson_integral(id, 0.7, 0.7, half) == 0.0);
    REQUIRE_THROWS_AS(jackson_integral(id, 1.0, 0.5, half), std::domain_error);
    REQUIRE_THROWS_AS(jackson_integral(id, -0.1, 0.5, half), std::domain_error);
}

TEST_CASE("jackson_integral q=1 fallback is flagged quadrature", "[qcalc]") {
    QParam one(1.0);
    QCalcInfo info;
    auto f = [](double t) { return std::exp(-t); };
    REQUIRE_THAT(jackson_integral_zero(f, 1.0, one, 0, &info),
                 WithinRel(1.0 - std::exp(-1.0), 1e-12));
    REQUIRE(info.used_fallback);
    auto id = [](double t) { return t; };
    REQUIRE_THAT(jackson_integral(id, 0.0, 1.0, one), WithinRel(0.5, 1e-12));
}

TEST_CASE("jackson_integral_zero reports non-convergence honestly", "[qcalc]") {
    QParam starved(0.99, 1e-14, 5);
    auto one = [](double) { return 1.0; };
    REQUIRE_THROWS_AS(jackson_integral_zero(one, 1.0, starved), NonConvergenceError);
}

TEST_CASE("parameter structs validate their invariants", "[qcalc]") {
    REQUIRE_THROWS_AS(QParam(0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(QParam(1.5), std::invalid_argument);
    REQUIRE_THROWS_AS(QParam(-0.5), std::invalid_argument);
    REQUIRE_THROWS_AS(QParam(0.5, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(QParam(0.5, 1e-14, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(Interval(2.0, 1.0), std::invalid_argument);
    REQUIRE_NOTHROW(Interval(1.0, 1.0));
    REQUIRE_THROWS_AS(q_integer(-1, QParam(0.5)), std::invalid_argument);
}
