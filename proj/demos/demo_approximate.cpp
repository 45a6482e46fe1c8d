// Evaluates the integral operator against a few targets and shows how the
// pointwise error closes as n grows with q_n = 1 - 1/n. Also prints one
// moment report so the closed forms can be eyeballed against quadrature.

#include <qoperator/qoperator.hpp>

#include <array>
#include <cmath>
#include <cstdio>

using namespace qop;

int main() {
    auto f = [](double t) { return t / (1.0 + t); };

    std::printf("integral operator vs f(t) = t/(1+t) on [0, 2]\n\n");
    std::printf("%8s", "x");
    const std::array<int, 3> ns{16, 64, 256};
    for (int n : ns) std::printf("   n=%-3d error", n);
    std::printf("\n");

    for (int i = 0; i <= 8; ++i) {
        const double x = 0.25 * i;
        std::printf("%8.2f", x);
        for (int n : ns) {
            const OperatorParams p = baskakov_params(n, QParam(1.0 - 1.0 / n));
            const double lx = apply_kantorovich(f, x, p).value;
            std::printf("   %12.3e", std::fabs(lx - f(x)));
        }
        std::printf("\n");
    }

    // One detailed evaluation with diagnostics.
    {
        const int n = 256;
        const OperatorParams p = baskakov_params(n, QParam(1.0 - 1.0 / n));
        const EvalResult r = apply_kantorovich(f, 1.0, p);
        std::printf("\nat x = 1, n = 256: value %.12f (f = %.12f)\n", r.value, f(1.0));
        std::printf("terms used %d, weight sum %.15f, tail bound %.2e\n",
                    r.diag.terms_used, r.diag.weight_sum, r.diag.tail_bound);
    }

    // Closed-form moments against the numeric evaluator.
    {
        const OperatorParams p = baskakov_params(64, QParam(0.9), 0.5, 1.0);
        const MomentReport rep = make_moment_report(1.0, p);
        std::printf("\nmoments at n = 64, q = 0.9, alpha = 0.5, beta = 1, x = 1\n");
        std::printf("  e0: closed %.15f  numeric %.15f\n", rep.closed_e0, rep.numeric_e0);
        std::printf("  e1: closed %.15f  numeric %.15f\n", rep.closed_e1, rep.numeric_e1);
        std::printf("  e2: closed %.15f  numeric %.15f\n", rep.closed_e2, rep.numeric_e2);
        std::printf("  second central moment: %.15f\n", rep.central2_closed);
        std::printf("  worst relative residual: %.2e\n", rep.max_rel_residual);
    }
    return 0;
}
