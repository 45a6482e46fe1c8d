#pragma once

// Convenience umbrella for the numerical library. Pulls in the q-calculus
// kernel, the generating family, both operator forms, closed-form moments,
// the weighted-space analysis layer, and the stock test functions.
//
// The experiment-tool layer (cli.hpp) is not included here; it drags in
// JSON and filesystem machinery that library users rarely want.

#include "qcalc.hpp"
#include "basis.hpp"
#include "operators.hpp"
#include "moments.hpp"
#include "analysis.hpp"
#include "corpus.hpp"
