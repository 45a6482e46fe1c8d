#pragma once

// Built-in test functions addressable by a short id. Each entry carries the
// growth exponent needed to evaluate it safely through the operator (the
// smallest gamma with |f(t)| = O(1 + t^(gamma+2))) and whether it is
// non-decreasing on [0, inf), which the bound experiments require as a
// hypothesis.
//
// Ids: e0..e4 (monomials), exp-neg (e^-t), rational (t/(1+t)),
// one-minus-exp (1 - e^-t), and poly:<c0,c1,...> for arbitrary
// polynomials c0 + c1 t + ... in ascending coefficient order.

#include <charconv>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qop {

struct CorpusFunction {
    std::string id;
    std::function<double(double)> f;
    int growth_hint = 0;
    bool non_decreasing = false;
};

namespace detail {

inline std::vector<double> parse_coefficients(const std::string& text) {
    std::vector<double> cs;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const char* first = text.data() + pos;
        const char* last = text.data() + comma;
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last || first == last)
            throw std::invalid_argument("poly: bad coefficient '"
                                        + std::string(first, last) + "'");
        cs.push_back(v);
        if (comma == text.size()) break;
        pos = comma + 1;
    }
    if (cs.empty()) throw std::invalid_argument("poly: needs at least one coefficient");
    return cs;
}

} // namespace detail

inline const char* corpus_ids() {
    return "e0, e1, e2, e3, e4, exp-neg, rational, one-minus-exp, poly:<c0,c1,...>";
}

inline CorpusFunction make_corpus_function(const std::string& id) {
    CorpusFunction cf;
    cf.id = id;
    if (id == "e0") {
        cf.f = [](double) { return 1.0; };
        cf.growth_hint = 0;
        cf.non_decreasing = true;
    } else if (id == "e1") {
        cf.f = [](double t) { return t; };
        cf.growth_hint = 0;
        cf.non_decreasing = true;
    } else if (id == "e2") {
        cf.f = [](double t) { return t * t; };
        cf.growth_hint = 0;
        cf.non_decreasing = true;
    } else if (id == "e3") {
        cf.f = [](double t) { return t * t * t; };
        cf.growth_hint = 1;
        cf.non_decreasing = true;
    } else if (id == "e4") {
        cf.f = [](double t) { return (t * t) * (t * t); };
        cf.growth_hint = 2;
        cf.non_decreasing = true;
    } else if (id == "exp-neg") {
        cf.f = [](double t) { return std::exp(-t); };
        cf.growth_hint = 0;
        cf.non_decreasing = false;
    } else if (id == "rational") {
        cf.f = [](double t) { return t / (1.0 + t); };
        cf.growth_hint = 0;
        cf.non_decreasing = true;
    } else if (id == "one-minus-exp") {
        cf.f = [](double t) { return 1.0 - std::exp(-t); };
        cf.growth_hint = 0;
        cf.non_decreasing = true;
    } else if (id.rfind("poly:", 0) == 0) {
        const std::vector<double> cs = detail::parse_coefficients(id.substr(5));
        const int deg = static_cast<int>(cs.size()) - 1;
        cf.f = [cs](double t) {
            double acc = 0.0;
            for (std::size_t i = cs.size(); i-- > 0;) acc = acc * t + cs[i];
            return acc;
        };
        cf.growth_hint = std::max(0, deg - 2);
        // nonnegative slope coefficients are a sufficient (not necessary)
        // certificate of monotonicity on [0, inf)
        cf.non_decreasing = true;
        for (std::size_t i = 1; i < cs.size(); ++i)
            if (cs[i] < 0.0) cf.non_decreasing = false;
    } else {
        throw std::invalid_argument("unknown function '" + id + "'; expected one of "
                                    + corpus_ids());
    }
    return cf;
}

} // namespace qop
