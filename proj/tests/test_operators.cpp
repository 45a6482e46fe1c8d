#include <catch2/catch_amalgamated.hpp>

#include <qoperator/moments.hpp>
#include <qoperator/operators.hpp>

#include <cmath>
#include <functional>
#include <vector>

using namespace qop;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Oracle for the q = 1, alpha = beta = 0 degeneration: the classical
// operator with binomial weights b_{n,k}(x) = C(n+k-1,k) x^k (1+x)^{-n-k}
// and exact antiderivatives on the cells [k/n, (k+1)/n]. Shares no code with
// the library evaluator.
double classical_integral_form(const std::function<double(double, double)>& cell_int,
                               int n, double x) {
    if (x == 0.0) return static_cast<double>(n) * cell_int(0.0, 1.0 / n);
    double b = std::pow(1.0 + x, -n);
    double acc = 0.0, cum = 0.0;
    for (int k = 0; k < 4000; ++k) {
        acc += static_cast<double>(n) * b
             * cell_int(static_cast<double>(k) / n, static_cast<double>(k + 1) / n);
        cum += b;
        if (cum > 1.0 - 1e-15 && b < 1e-17) break;
        b *= (static_cast<double>(n + k) / (k + 1)) * (x / (1.0 + x));
    }
    return acc;
}

} // namespace

TEST_CASE("weight values for the default family", "[operators]") {
    auto p = baskakov_params(2, QParam(0.5));
    REQUIRE_THAT(weight(0, 1.0, p), WithinRel(1.0 / 3.0, 1e-14));
    REQUIRE_THAT(weight(1, 1.0, p), WithinRel(0.4, 1e-14));
    REQUIRE(weight(0, 0.0, p) == 1.0);
    REQUIRE(weight(3, 0.0, p) == 0.0);
}

TEST_CASE("sample points and cells", "[operators]") {
    auto p5 = baskakov_params(5, QParam(0.5), 1.0, 2.0);
    REQUIRE_THAT(sample_point(3, p5), WithinRel(2.0 / 0.984375, 1e-13));
    REQUIRE_THAT(sample_point(0, p5), WithinRel(1.0 / (q_integer(5, p5.qp) + 2.0), 1e-13));

    auto p3 = baskakov_params(3, QParam(0.5), 1.0, 1.0);
    const Interval cell = kantorovich_cell(2, p3);
    REQUIRE_THAT(cell.lower, WithinRel(1.0 / 2.75, 1e-13));
    REQUIRE_THAT(cell.upper, WithinRel(2.0 / 2.75, 1e-13));
}

TEST_CASE("cell width equals 1/([n]+beta) and cells abut", "[operators]") {
    for (double q : {0.3, 0.5, 0.9, 0.99})
        for (int n : {2, 5, 10})
            for (double ab : {0.0, 1.0}) {
                auto p = baskakov_params(n, QParam(q), ab, 2.0 * ab);
                const double D = q_integer(n, p.qp) + p.beta;
                for (int k = 0; k <= 20; ++k) {
                    const Interval c = kantorovich_cell(k, p);
                    const double scale = 1.0 + std::fabs(c.upper) * D;
                    REQUIRE_THAT((c.upper - c.lower) * D,
                                 WithinAbs(1.0, 64.0 * 1.1e-16 * scale));
                }
            }
}

TEST_CASE("transformed cells tile: q t_{k+1} continues the next cell", "[operators]") {
    // The change of variable u = q^{1-k} t maps cell_k to [q t_k, q t_{k+1}],
    // so consecutive transformed cells share an endpoint exactly.
    auto p = baskakov_params(4, QParam(0.7), 0.5, 1.5);
    for (int k = 0; k <= 12; ++k) {
        const Interval c = kantorovich_cell(k, p);
        const double scale = std::pow(p.qp.q, 1 - k);
        REQUIRE_THAT(scale * c.lower, WithinRel(p.qp.q * sample_point(k, p), 1e-12));
        REQUIRE_THAT(scale * c.upper, WithinRel(p.qp.q * sample_point(k + 1, p), 1e-12));
    }
}

TEST_CASE("weights are a partition of unity", "[operators]") {
    for (double q : {0.3, 0.5, 0.9})
        for (int n : {1, 2, 5, 10})
            for (double x : {0.0, 0.5, 1.0, 2.0}) {
                auto p = baskakov_params(n, QParam(q), 0.5, 1.0);
                auto r = apply_baskakov_stancu([](double) { return 1.0; }, x, p);
                REQUIRE_THAT(r.diag.weight_sum, WithinAbs(1.0, 1e-12));
                REQUIRE_THAT(r.value, WithinAbs(1.0, 1e-12));
                REQUIRE(r.diag.weight_sum <= 1.0 + 1e-9);
                REQUIRE(r.diag.tail_bound >= 0.0);
                REQUIRE(std::isfinite(r.diag.tail_bound));
            }
}

TEST_CASE("point operator reproduces its closed-form moments", "[operators]") {
    for (double q : {0.3, 0.5, 0.9})
        for (int n : {2, 5, 10})
            for (double x : {0.0, 0.7, 1.5}) {
                auto p = baskakov_params(n, QParam(q), 0.5, 1.0);
                auto r = apply_baskakov_stancu_n<3>(
                    [](double t) { return std::array<double, 3>{1.0, t, t * t}; }, x, p);
                const Moments m = moments_point_operator(x, p);
                REQUIRE_THAT(r.values[0], WithinAbs(m.e0, 1e-11));
                REQUIRE_THAT(r.values[1], WithinAbs(m.e1, 1e-10 * (1.0 + m.e1)));
                REQUIRE_THAT(r.values[2], WithinAbs(m.e2, 1e-10 * (1.0 + m.e2)));
            }
}

TEST_CASE("integral operator reproduces constants and its e1 moment", "[operators]") {
    for (double q : {0.5, 0.9})
        for (int n : {2, 6})
            for (double x : {0.0, 1.0, 2.0}) {
                auto p = baskakov_params(n, QParam(q), 1.0, 2.0);
                auto r = apply_kantorovich_n<2>(
                    [](double t) { return std::array<double, 2>{1.0, t}; }, x, p);
                const Moments m = moments_kantorovich(x, p);
                REQUIRE_THAT(r.values[0], WithinAbs(1.0, 1e-10));
                REQUIRE_THAT(r.values[1], WithinAbs(m.e1, 1e-10 * (1.0 + m.e1)));
            }
}

TEST_CASE("both cell-integral routes agree", "[operators]") {
    auto p = baskakov_params(5, QParam(0.7), 0.5, 1.0);
    std::vector<std::function<double(double)>> fs = {
        [](double) { return 1.0; },
        [](double t) { return t; },
        [](double t) { return t * t; },
    };
    for (const auto& f : fs)
        for (int k = 0; k <= 10; ++k) {
            const double cv = kantorovich_cell_integral(f, k, p, CellRoute::change_of_variable);
            const double dr = kantorovich_cell_integral(f, k, p, CellRoute::direct);
            REQUIRE_THAT(cv, WithinRel(dr, 1e-10));
        }
}

TEST_CASE("whole-operator values agree across routes", "[operators]") {
    auto p = baskakov_params(4, QParam(0.6), 0.25, 0.5);
    auto f = [](double t) { return t / (1.0 + t); };
    const double a = apply_kantorovich(f, 1.2, p, 0, CellRoute::change_of_variable).value;
    const double b = apply_kantorovich(f, 1.2, p, 0, CellRoute::direct).value;
    REQUIRE_THAT(a, WithinRel(b, 1e-10));
}

TEST_CASE("q=1 degeneration matches an independent classical implementation", "[operators]") {
    QParam one(1.0, 1e-13);
    for (int n : {5, 10, 20}) {
        auto p = baskakov_params(n, one);
        for (double x : {0.0, 0.5, 1.0, 2.0}) {
            // e1: closed classical value x + 1/(2n)
            auto re1 = apply_kantorovich([](double t) { return t; }, x, p);
            REQUIRE_THAT(re1.value, WithinAbs(x + 0.5 / n, 1e-9));
            // exp(-t): against exact cell antiderivatives
            auto rexp = apply_kantorovich([](double t) { return std::exp(-t); }, x, p);
            const double oracle = classical_integral_form(
                [](double a, double b) { return std::exp(-a) - std::exp(-b); }, n, x);
            REQUIRE_THAT(rexp.value, WithinAbs(oracle, 1e-8));
            // t^2: against exact cell antiderivatives
            auto rsq = apply_kantorovich([](double t) { return t * t; }, x, p);
            const double osq = classical_integral_form(
                [](double a, double b) { return (b * b * b - a * a * a) / 3.0; }, n, x);
            REQUIRE_THAT(rsq.value, WithinAbs(osq, 1e-8 * (1.0 + osq)));
        }
    }
}

TEST_CASE("point operator at q=1 interpolates scaled nodes", "[operators]") {
    auto p = baskakov_params(10, QParam(1.0));
    auto r = apply_baskakov_stancu([](double t) { return t; }, 1.5, p);
    REQUIRE_THAT(r.value, WithinAbs(1.5, 1e-10));
}

TEST_CASE("operators are linear in f", "[operators]") {
    auto p = baskakov_params(6, QParam(0.5), 0.5, 1.0);
    auto f = [](double t) { return t / (1.0 + t); };
    auto g = [](double t) { return std::exp(-t); };
    auto h = [&](double t) { return 2.0 * f(t) - 3.0 * g(t); };
    for (double x : {0.3, 1.0, 1.8}) {
        const double lp = apply_baskakov_stancu(h, x, p).value;
        const double rp = 2.0 * apply_baskakov_stancu(f, x, p).value
                        - 3.0 * apply_baskakov_stancu(g, x, p).value;
        REQUIRE_THAT(lp, WithinAbs(rp, 1e-12 * (1.0 + std::fabs(rp))));
        const double lk = apply_kantorovich(h, x, p).value;
        const double rk = 2.0 * apply_kantorovich(f, x, p).value
                        - 3.0 * apply_kantorovich(g, x, p).value;
        REQUIRE_THAT(lk, WithinAbs(rk, 1e-12 * (1.0 + std::fabs(rk))));
    }
}

TEST_CASE("operators preserve order and positivity", "[operators]") {
    auto p = baskakov_params(5, QParam(0.6), 0.0, 0.5);
    auto lo = [](double t) { return t / (1.0 + t); }; // <= 1 and <= t on t >= 0
    for (double x : {0.2, 1.0, 2.0}) {
        const double vlo = apply_kantorovich(lo, x, p).value;
        const double vone = apply_kantorovich([](double) { return 1.0; }, x, p).value;
        const double vid = apply_kantorovich([](double t) { return t; }, x, p).value;
        REQUIRE(vlo >= -1e-15);
        REQUIRE(vlo <= vone + 1e-12);
        REQUIRE(vlo <= vid + 1e-12);
    }
}

TEST_CASE("ratio fast path agrees with the direct weight formula", "[operators]") {
    QParam qp(0.5);
    auto fam = q_baskakov_family(qp);
    GeneratingFamily slow = fam;
    slow.weight_ratio = {};
    OperatorParams fast_p(4, qp, 0.5, 1.0, fam);
    OperatorParams slow_p(4, qp, 0.5, 1.0, slow);
    auto f = [](double t) { return std::exp(-t); };
    for (double x : {0.4, 1.3}) {
        REQUIRE_THAT(apply_baskakov_stancu(f, x, fast_p).value,
                     WithinRel(apply_baskakov_stancu(f, x, slow_p).value, 1e-12));
        REQUIRE_THAT(apply_kantorovich(f, x, fast_p).value,
                     WithinRel(apply_kantorovich(f, x, slow_p).value, 1e-12));
    }
}

TEST_CASE("growth hint does not change converged values", "[operators]") {
    auto p = baskakov_params(5, QParam(0.8), 0.0, 0.0);
    auto f = [](double t) { return t * t; };
    const double g0 = apply_kantorovich(f, 1.0, p, 0).value;
    const double g2 = apply_kantorovich(f, 1.0, p, 2).value;
    REQUIRE_THAT(g0, WithinRel(g2, 1e-12));
}

TEST_CASE("evaluation point is validated against [0, x_max]", "[operators]") {
    auto p = baskakov_params(3, QParam(0.5));
    auto f = [](double t) { return t; };
    REQUIRE_THROWS_AS(apply_baskakov_stancu(f, -0.1, p), std::domain_error);
    REQUIRE_THROWS_AS(apply_kantorovich(f, 10.5, p), std::domain_error);
    REQUIRE_NOTHROW(apply_kantorovich(f, 10.0, p));
    auto r0 = apply_baskakov_stancu(f, 0.0, p);
    REQUIRE_FALSE(r0.diag.truncated);
    auto r1 = apply_baskakov_stancu(f, 1.0, p);
    REQUIRE(r1.diag.truncated);
    REQUIRE(r1.diag.terms_used > 1);
}

TEST_CASE("evaluation at x=0 collapses to the first node and first cell", "[operators]") {
    auto p = baskakov_params(4, QParam(0.5), 1.0, 2.0);
    const double D = q_integer(4, p.qp) + 2.0;
    auto rpoint = apply_baskakov_stancu([](double t) { return 5.0 + t; }, 0.0, p);
    REQUIRE_THAT(rpoint.value, WithinRel(5.0 + 1.0 / D, 1e-13));
    auto rkant = apply_kantorovich([](double t) { return t; }, 0.0, p);
    const Moments m = moments_kantorovich(0.0, p);
    REQUIRE_THAT(rkant.value, WithinRel(m.e1, 1e-11));
}

TEST_CASE("starved series reports non-convergence", "[operators]") {
    auto p = baskakov_params(8, QParam(0.9, 1e-14, 4));
    REQUIRE_THROWS_AS(apply_baskakov_stancu([](double t) { return t; }, 2.0, p),
                      NonConvergenceError);
}

// At n = 512, x >= 6 the leading weight sits far below double range (about
// 1e-977 at x = 6) and only the extended-precision carry keeps the ratio
// recurrence alive until the peak. The sum also tops out a shade under
// 1 - series_tol here, exercising the floating-point-ceiling stop branch.
TEST_CASE("deep series survives leading-weight underflow", "[operators]") {
    const int n = 512;
    auto p = baskakov_params(n, QParam(1.0 - 1.0 / n, 1e-14, 200000));
    auto f3 = [](double t) { return std::array<double, 3>{1.0, t, t * t}; };
    for (double x : {6.0, 10.0}) {
        const Moments mp = moments_point_operator(x, p);
        auto rp = apply_baskakov_stancu_n<3>(f3, x, p, 2);
        REQUIRE_THAT(rp.values[0], WithinRel(mp.e0, 1e-12));
        REQUIRE_THAT(rp.values[1], WithinRel(mp.e1, 1e-12));
        REQUIRE_THAT(rp.values[2], WithinRel(mp.e2, 1e-11));
        REQUIRE_THAT(rp.diag.weight_sum, WithinAbs(1.0, 5e-14));

        const Moments mk = moments_kantorovich(x, p);
        auto rk = apply_kantorovich_n<3>(f3, x, p, 2);
        REQUIRE_THAT(rk.values[0], WithinRel(mk.e0, 1e-11));
        REQUIRE_THAT(rk.values[1], WithinRel(mk.e1, 1e-11));
        REQUIRE_THAT(rk.values[2], WithinRel(mk.e2, 1e-10));
    }
}

TEST_CASE("family without extended phi starves promptly when weights underflow",
          "[operators]") {
    const int n = 512;
    QParam qp(1.0 - 1.0 / n, 1e-14, 200000);
    auto fam = q_baskakov_family(qp);
    fam.phi_hp = {}; // plug-in families need not supply one
    OperatorParams p(n, qp, 0.0, 0.0, fam);
    REQUIRE(fam.phi(n, 6.0) == 0.0); // the regime under test
    REQUIRE_THROWS_AS(apply_baskakov_stancu([](double t) { return t; }, 6.0, p),
                      NonConvergenceError);
}

TEST_CASE("operator parameters validate their invariants", "[operators]") {
    QParam qp(0.5);
    auto fam = q_baskakov_family(qp);
    REQUIRE_THROWS_AS(OperatorParams(0, qp, 0.0, 0.0, fam), std::invalid_argument);
    REQUIRE_THROWS_AS(OperatorParams(2, qp, -0.5, 0.0, fam), std::invalid_argument);
    REQUIRE_THROWS_AS(OperatorParams(2, qp, 1.0, 0.5, fam), std::invalid_argument);
    REQUIRE_THROWS_AS(OperatorParams(2, qp, 0.0, 0.0, q_baskakov_family(QParam(0.7))),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(OperatorParams(2, qp, 0.0, 0.0, fam, -1.0), std::invalid_argument);
    REQUIRE_NOTHROW(OperatorParams(2, qp, 1.0, 1.0, fam));
}
