// Runs the two stock experiments: plain sup-norm convergence on [0, 2]
// along q_n = 1 - 1/n, then the weighted-space error with its modulus
// based estimate. The last columns show the estimate holding row by row.

#include <qoperator/qoperator.hpp>

#include <cstdio>
#include <vector>

using namespace qop;

int main() {
    const std::vector<int> ns{8, 16, 32, 64, 128, 256};
    const Schedule sched = make_schedule(ns, QScheduleKind::one_minus_inv_n);
    const OperatorTemplate tmpl;
    const WeightedSpaceParams sp; // gamma = 0, grids on [0, 10]

    auto f = make_corpus_function("one-minus-exp");

    std::printf("sup-norm convergence of the integral operator, f(t) = 1 - exp(-t)\n\n");
    std::printf("%6s %10s %14s %12s\n", "n", "q_n", "sup err [0,2]", "delta_n");
    for (const RateRow& row : convergence_experiment(f.f, 2.0, sched, tmpl, sp)) {
        std::printf("%6d %10.6f %14.4e %12.4e\n",
                    row.n, row.q_n, row.sup_error_0b, row.delta_n);
    }

    std::printf("\nweighted-space error vs the modulus estimate (gamma = 0)\n\n");
    std::printf("%6s %12s %12s %12s %12s %6s\n",
                "n", "wtd error", "modulus", "estimate", "ptwise rhs", "holds");
    for (const RateRow& row : weighted_bound_experiment(f.f, sched, tmpl, sp)) {
        std::printf("%6d %12.4e %12.4e %12.4e %12.4e %6s\n",
                    row.n, row.weighted_error, row.modulus_at_delta, row.bound_rhs,
                    row.pointwise_rhs_max, row.bound_holds ? "yes" : "no");
    }
    return 0;
}
