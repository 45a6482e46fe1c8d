#pragma once

// Experiment front end: configuration parsing (JSON or key=value, auto
// detected), orchestration of the five commands, and deterministic output.
// Data CSVs are a pure function of the validated config: grid points are
// recomputed from the same expressions every run and numbers are printed as
// shortest round-trip decimals, so identical configs give byte-identical
// files. Run info that can vary (wall time) goes to a sidecar JSON instead.
//
// Exit-code contract: 0 success, 2 for assertion-style failures (a bound
// row violated, a structural condition failed, a convergence run that did
// not converge), 1 for hard errors (bad config, I/O, non-convergence).

#include <array>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "analysis.hpp"
#include "basis.hpp"
#include "corpus.hpp"
#include "moments.hpp"
#include "operators.hpp"

namespace qop {

inline constexpr const char* tool_version = "1.0.0";

enum class Command { approximate, moments, verify_conditions, converge, bound_check };

inline const char* command_name(Command c) {
    switch (c) {
        case Command::approximate: return "approximate";
        case Command::moments: return "moments";
        case Command::verify_conditions: return "verify-conditions";
        case Command::converge: return "converge";
        case Command::bound_check: return "bound-check";
    }
    return "?";
}

struct ExperimentConfig {
    Command command = Command::moments;
    std::string function = "e1";
    std::vector<int> n_list = {8, 16, 32, 64};
    QScheduleKind q_kind = QScheduleKind::one_minus_inv_n;
    double q_fixed = 0.0; // only read when q_kind == fixed_q
    double alpha = 0.0;
    double beta = 0.0;
    int gamma = 0;
    double b = 2.0;       // horizon of the plain sup-error grids
    double x_max = 10.0;  // horizon of the weighted-space grids
    int x_steps = 2000;   // plain-function grids (norm, modulus)
    int h_steps = 200;    // dyadic h-lattice depth
    int b_steps = 80;     // operator grid on [0, b]
    int norm_steps = 50;  // operator grid on [0, x_max]
    double series_tol = 1e-14;
    int max_terms = 200000;
    std::string out;      // default: "<command>.csv"
    long long seed = 0;   // reserved for future randomized grids
    bool wide = false;        // sensitivity run: doubles x_max
    bool exploratory = false; // let bound-check report on non-monotone f

    std::string q_schedule_text() const {
        switch (q_kind) {
            case QScheduleKind::fixed_q: {
                char buf[40] = "fixed:";
                auto [p, ec] = std::to_chars(buf + 6, buf + 40, q_fixed);
                (void)ec;
                return std::string(buf, p);
            }
            case QScheduleKind::one_minus_inv_n: return "one-minus-inv-n";
            case QScheduleKind::n_over_n_plus_1: return "n-over-n-plus-1";
        }
        return "?";
    }
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations)
        : std::runtime_error(join(violations)), violations_(std::move(violations)) {}
    const std::vector<std::string>& violations() const { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "config:";
        for (const std::string& e : v) s += "\n  - " + e;
        return s;
    }
    std::vector<std::string> violations_;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline bool parse_double(const std::string& s, double& out) {
    const char* last = s.data() + s.size();
    const auto [p, ec] = std::from_chars(s.data(), last, out);
    return ec == std::errc{} && p == last && !s.empty();
}

inline bool parse_int(const std::string& s, long long& out) {
    const char* last = s.data() + s.size();
    const auto [p, ec] = std::from_chars(s.data(), last, out);
    return ec == std::errc{} && p == last && !s.empty();
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const std::size_t c = std::min(s.find(sep, pos), s.size());
        parts.push_back(s.substr(pos, c - pos));
        if (c == s.size()) break;
        pos = c + 1;
    }
    return parts;
}

// One setter shared by both config formats; every violation is recorded,
// none aborts the walk.
inline void apply_config_key(ExperimentConfig& cfg, const std::string& key,
                             const std::string& val, std::vector<std::string>& errs) {
    auto want_double = [&](double& slot) {
        double v;
        if (parse_double(val, v)) slot = v;
        else errs.push_back(key + ": not a number: '" + val + "'");
    };
    auto want_int = [&](int& slot, long long lo, long long hi) {
        long long v;
        if (parse_int(val, v) && v >= lo && v <= hi) slot = static_cast<int>(v);
        else errs.push_back(key + ": not an integer in [" + std::to_string(lo) + ", "
                            + std::to_string(hi) + "]: '" + val + "'");
    };
    auto want_bool = [&](bool& slot) {
        if (val == "true" || val == "1") slot = true;
        else if (val == "false" || val == "0") slot = false;
        else errs.push_back(key + ": expected true/false: '" + val + "'");
    };

    if (key == "command") {
        if (val == "approximate") cfg.command = Command::approximate;
        else if (val == "moments") cfg.command = Command::moments;
        else if (val == "verify-conditions") cfg.command = Command::verify_conditions;
        else if (val == "converge") cfg.command = Command::converge;
        else if (val == "bound-check") cfg.command = Command::bound_check;
        else errs.push_back("command: unknown '" + val + "' (approximate, moments, "
                            "verify-conditions, converge, bound-check)");
    } else if (key == "function") {
        cfg.function = val;
    } else if (key == "n_list") {
        std::vector<int> ns;
        bool ok = !val.empty();
        for (const std::string& tok : split(val, ',')) {
            long long v;
            if (parse_int(trim(tok), v) && v >= 1 && v <= 1000000) {
                ns.push_back(static_cast<int>(v));
            } else {
                errs.push_back("n_list: bad entry '" + trim(tok) + "'");
                ok = false;
            }
        }
        if (ok) cfg.n_list = std::move(ns);
    } else if (key == "q_schedule") {
        if (val == "one-minus-inv-n") cfg.q_kind = QScheduleKind::one_minus_inv_n;
        else if (val == "n-over-n-plus-1") cfg.q_kind = QScheduleKind::n_over_n_plus_1;
        else if (val.rfind("fixed:", 0) == 0) {
            double q;
            if (parse_double(val.substr(6), q)) {
                cfg.q_kind = QScheduleKind::fixed_q;
                cfg.q_fixed = q;
            } else {
                errs.push_back("q_schedule: bad fixed value '" + val.substr(6) + "'");
            }
        } else {
            errs.push_back("q_schedule: unknown '" + val
                           + "' (fixed:<q>, one-minus-inv-n, n-over-n-plus-1)");
        }
    } else if (key == "alpha") want_double(cfg.alpha);
    else if (key == "beta") want_double(cfg.beta);
    else if (key == "gamma") want_int(cfg.gamma, 0, 8);
    else if (key == "b") want_double(cfg.b);
    else if (key == "x_max") want_double(cfg.x_max);
    else if (key == "x_steps") want_int(cfg.x_steps, 1, 10000000);
    else if (key == "h_steps") want_int(cfg.h_steps, 1, 100000);
    else if (key == "b_steps") want_int(cfg.b_steps, 1, 10000000);
    else if (key == "norm_steps") want_int(cfg.norm_steps, 1, 10000000);
    else if (key == "series_tol") want_double(cfg.series_tol);
    else if (key == "max_terms") want_int(cfg.max_terms, 1, 2000000000);
    else if (key == "out") cfg.out = val;
    else if (key == "seed") {
        long long v;
        if (parse_int(val, v)) cfg.seed = v;
        else errs.push_back("seed: not an integer: '" + val + "'");
    } else if (key == "wide") want_bool(cfg.wide);
    else if (key == "exploratory") want_bool(cfg.exploratory);
    else errs.push_back("unknown key '" + key + "'");
}

inline void validate_config(const ExperimentConfig& cfg, std::vector<std::string>& errs) {
    if (!(cfg.alpha >= 0.0)) errs.push_back("alpha must be >= 0");
    if (cfg.alpha > cfg.beta) errs.push_back("alpha exceeds beta");
    if (cfg.q_kind == QScheduleKind::fixed_q
        && (!(cfg.q_fixed > 0.0) || cfg.q_fixed > 1.0))
        errs.push_back("q out of (0,1]");
    if (cfg.n_list.empty()) errs.push_back("n_list must be nonempty");
    for (std::size_t i = 0; i + 1 < cfg.n_list.size(); ++i)
        if (cfg.n_list[i] > cfg.n_list[i + 1]) {
            errs.push_back("n_list must be sorted ascending");
            break;
        }
    if (!(cfg.b > 0.0) || cfg.b > cfg.x_max)
        errs.push_back("b must lie in (0, x_max]");
    if (!(cfg.x_max > 0.0)) errs.push_back("x_max must be > 0");
    if (!(cfg.series_tol > 0.0)) errs.push_back("series_tol must be positive");

    CorpusFunction fn;
    bool have_fn = false;
    try {
        fn = make_corpus_function(cfg.function);
        have_fn = true;
    } catch (const std::invalid_argument& e) {
        errs.push_back(e.what());
    }
    if (have_fn && cfg.command == Command::bound_check) {
        if (fn.growth_hint > cfg.gamma)
            errs.push_back("function '" + cfg.function + "' needs gamma >= "
                           + std::to_string(fn.growth_hint) + " for the weighted space");
        if (!fn.non_decreasing && !cfg.exploratory)
            errs.push_back("function '" + cfg.function + "' is not non-decreasing; "
                           "set exploratory=true to run bound-check anyway");
        if (cfg.q_kind == QScheduleKind::fixed_q && cfg.q_fixed == 1.0)
            errs.push_back("bound-check needs q in (0,1)");
    }
}

} // namespace detail

// Accepts a JSON object or line-based key=value text; the format is chosen
// by the first non-space byte. All violations are collected and reported
// together, not just the first. Overrides (from command-line flags) are
// applied after the source and before validation.
inline ExperimentConfig parse_config(
    const std::string& source,
    const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
    std::vector<std::string> errs;
    ExperimentConfig cfg;

    const std::size_t first = source.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) throw ConfigError({"empty config"});

    if (source[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(source);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError({std::string("parse error: ") + e.what()});
        }
        for (const auto& [key, value] : j.items()) {
            std::string text;
            if (value.is_string()) {
                text = value.get<std::string>();
            } else if (value.is_array()) {
                for (std::size_t i = 0; i < value.size(); ++i) {
                    if (i) text += ',';
                    text += value[i].is_string() ? value[i].get<std::string>()
                                                 : value[i].dump();
                }
            } else {
                text = value.dump();
            }
            detail::apply_config_key(cfg, key, text, errs);
        }
    } else {
        std::istringstream in(source);
        std::string line;
        for (int lineno = 1; std::getline(in, line); ++lineno) {
            const std::string t = detail::trim(line);
            if (t.empty() || t[0] == '#') continue;
            const std::size_t eq = t.find('=');
            if (eq == std::string::npos) {
                errs.push_back("line " + std::to_string(lineno) + ": expected key=value");
                continue;
            }
            detail::apply_config_key(cfg, detail::trim(t.substr(0, eq)),
                                     detail::trim(t.substr(eq + 1)), errs);
        }
    }

    for (const auto& [key, value] : overrides)
        detail::apply_config_key(cfg, key, value, errs);

    detail::validate_config(cfg, errs);
    if (!errs.empty()) throw ConfigError(std::move(errs));
    return cfg;
}

namespace detail {

inline std::string csv_num(double v) {
    char buf[40];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, p);
}

inline std::string csv_num(long long v) { return std::to_string(v); }
inline std::string csv_num(int v) { return std::to_string(v); }
inline std::string csv_num(bool v) { return v ? "1" : "0"; }

template <class... Ts>
void csv_row(std::string& out, const Ts&... vs) {
    int i = 0;
    ((out += (i++ ? "," : "") + csv_num(vs)), ...);
    out += '\n';
}

} // namespace detail

struct RunResult {
    int exit_code = 0;
    std::string csv_path;
    std::string meta_path;
    std::string note; // one-line outcome summary, also echoed into the metadata
};

inline RunResult run_experiment(ExperimentConfig cfg) {
    if (const char* env = std::getenv("QOPERATOR_MAX_TERMS")) {
        long long v;
        if (!detail::parse_int(env, v) || v < 1 || v > 2000000000)
            throw ConfigError({"QOPERATOR_MAX_TERMS must be a positive integer"});
        cfg.max_terms = static_cast<int>(v);
    }
    const double x_max_eff = cfg.wide ? 2.0 * cfg.x_max : cfg.x_max;
    const CorpusFunction fn = make_corpus_function(cfg.function);
    const Schedule schedule = make_schedule(cfg.n_list, cfg.q_kind, cfg.q_fixed);

    OperatorTemplate tmpl;
    tmpl.alpha = cfg.alpha;
    tmpl.beta = cfg.beta;
    tmpl.series_tol = cfg.series_tol;
    tmpl.max_terms = cfg.max_terms;
    tmpl.x_max = x_max_eff;

    WeightedSpaceParams sp;
    sp.gamma = cfg.gamma;
    sp.x_max = x_max_eff;
    sp.x_steps = cfg.x_steps;
    sp.h_steps = cfg.h_steps;

    RunResult res;
    res.csv_path = cfg.out.empty() ? std::string(command_name(cfg.command)) + ".csv"
                                   : cfg.out;
    res.meta_path = res.csv_path + ".meta.json";

    const auto t0 = std::chrono::steady_clock::now();
    std::string data;

    switch (cfg.command) {
        case Command::approximate: {
            data = "n,q_n,x,f_value,operator_value,abs_error\n";
            for (const auto& [n, qn] : schedule) {
                const OperatorParams p = tmpl.instantiate(n, qn);
                for (int i = 0; i <= cfg.b_steps; ++i) {
                    const double x = cfg.b * i / cfg.b_steps;
                    const double fx = fn.f(x);
                    const double lx = apply_kantorovich(fn.f, x, p, fn.growth_hint).value;
                    detail::csv_row(data, n, qn, x, fx, lx, std::fabs(lx - fx));
                }
            }
            res.note = "wrote " + std::to_string(schedule.size()) + " schedule rows";
            break;
        }
        case Command::moments: {
            data = "n,q,alpha,beta,x,closed_e0,closed_e1,closed_e2,"
                   "numeric_e0,numeric_e1,numeric_e2,"
                   "central2_closed,central2_numeric,max_rel_residual\n";
            double worst = 0.0;
            for (const auto& [n, qn] : schedule) {
                const OperatorParams p = tmpl.instantiate(n, qn);
                for (int i = 0; i <= cfg.b_steps; ++i) {
                    const double x = cfg.b * i / cfg.b_steps;
                    const MomentReport r = make_moment_report(x, p);
                    worst = std::fmax(worst, r.max_rel_residual);
                    detail::csv_row(data, r.n, r.q, r.alpha, r.beta, r.x,
                                    r.closed_e0, r.closed_e1, r.closed_e2,
                                    r.numeric_e0, r.numeric_e1, r.numeric_e2,
                                    r.central2_closed, r.central2_numeric,
                                    r.max_rel_residual);
                }
            }
            res.note = "max relative residual " + detail::csv_num(worst);
            break;
        }
        case Command::verify_conditions: {
            // the nested numeric-derivative route is best conditioned away
            // from q -> 1, so a non-fixed schedule audits at q = 1/2
            const double q = cfg.q_kind == QScheduleKind::fixed_q ? cfg.q_fixed : 0.5;
            const QParam qp(q, cfg.series_tol, cfg.max_terms);
            std::vector<double> grid;
            for (int i = 0; i <= 8; ++i) grid.push_back(cfg.b * i / 8);
            const ConditionReport rep =
                verify_conditions(q_baskakov_family(qp), cfg.n_list, grid, 4, qp, 1e-9);
            data = "n,value_at_zero_residual,sign_violations,recursion_max_residual,"
                   "index_ratio,normalization_violations,passed\n";
            for (const ConditionRow& r : rep.rows)
                detail::csv_row(data, r.n, r.value_at_zero_residual, r.sign_violations,
                                r.recursion_max_residual, r.index_ratio,
                                r.normalization_violations, r.passed);
            res.exit_code = rep.passed ? 0 : 2;
            res.note = rep.passed ? "all structural conditions hold"
                                  : "structural condition violated";
            break;
        }
        case Command::converge: {
            sp.gamma = std::max(cfg.gamma, fn.growth_hint);
            const RateTable t =
                convergence_experiment(fn.f, cfg.b, schedule, tmpl, sp, cfg.b_steps);
            data = "n,q_n,sup_error_0b,delta_n\n";
            for (const RateRow& r : t)
                detail::csv_row(data, r.n, r.q_n, r.sup_error_0b, r.delta_n);
            if (t.size() >= 2 && t.back().sup_error_0b >= t.front().sup_error_0b) {
                res.exit_code = 2;
                res.note = "no convergence: last sup error >= first";
            } else {
                res.note = "sup error fell from " + detail::csv_num(t.front().sup_error_0b)
                         + " to " + detail::csv_num(t.back().sup_error_0b);
            }
            break;
        }
        case Command::bound_check: {
            const RateTable t = weighted_bound_experiment(fn.f, schedule, tmpl, sp,
                                                          cfg.b, cfg.norm_steps);
            data = "n,q_n,sup_error_0b,weighted_error,delta_n,modulus_at_delta,"
                   "bound_rhs,pointwise_rhs_max,bound_holds\n";
            int violations = 0;
            for (const RateRow& r : t) {
                if (!r.bound_holds) ++violations;
                detail::csv_row(data, r.n, r.q_n, r.sup_error_0b, r.weighted_error,
                                r.delta_n, r.modulus_at_delta, r.bound_rhs,
                                r.pointwise_rhs_max, r.bound_holds);
            }
            if (violations == 0) {
                res.note = "all rows satisfy the estimates";
            } else {
                res.note = std::to_string(violations) + " row(s) violate the estimates";
                if (!cfg.exploratory) res.exit_code = 2;
            }
            break;
        }
    }

    const double wall = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - t0).count();

    {
        std::ofstream f(res.csv_path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open output file " + res.csv_path);
        f << data;
        if (!f.good()) throw std::runtime_error("write failed for " + res.csv_path);
    }

    nlohmann::json meta;
    meta["tool_version"] = tool_version;
    meta["command"] = command_name(cfg.command);
    meta["note"] = res.note;
    meta["exit_code"] = res.exit_code;
    meta["wall_time_seconds"] = wall;
    nlohmann::json echo;
    echo["function"] = cfg.function;
    echo["n_list"] = cfg.n_list;
    echo["q_schedule"] = cfg.q_schedule_text();
    echo["alpha"] = cfg.alpha;
    echo["beta"] = cfg.beta;
    echo["gamma"] = cfg.gamma;
    echo["b"] = cfg.b;
    echo["x_max"] = cfg.x_max;
    echo["x_steps"] = cfg.x_steps;
    echo["h_steps"] = cfg.h_steps;
    echo["b_steps"] = cfg.b_steps;
    echo["norm_steps"] = cfg.norm_steps;
    echo["series_tol"] = cfg.series_tol;
    echo["max_terms"] = cfg.max_terms;
    echo["seed"] = cfg.seed;
    echo["wide"] = cfg.wide;
    echo["exploratory"] = cfg.exploratory;
    meta["config"] = echo;
    {
        std::ofstream f(res.meta_path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open output file " + res.meta_path);
        f << meta.dump(2) << '\n';
    }
    return res;
}

} // namespace qop
