#include "martapprox/commands.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "martapprox/bernoulli_shift.hpp"
#include "martapprox/error.hpp"
#include "martapprox/frac_poisson.hpp"

namespace martapprox::cmd {
namespace {

using io::number;
using io::to_json;

// ---------------------------------------------------------------- knobs

const Json& defaults_for(const std::string& command) {
    static const Json table = {
        {"chain-diagnose", {{"grid", "dyadic:1:10"}, {"margin", 0.1}}},
        {"linear",
         {{"n_max", 16384}, {"grid", "auto"}, {"tol_cauchy", 1e-3}, {"margin", 0.1}, {"k", 100000}}},
        {"superlinear",
         {{"n_max", 1000000},
          {"grid", "auto"},
          {"tol_cauchy", 1e-3},
          {"margin", 0.1},
          {"stream_horizon", 0}}},
        {"frac-poisson", {{"tol", 1e-10}, {"k_max", 100000}, {"j_max", 1000}, {"k", 100000}}},
        {"simulate",
         {{"n_max", 2000},
          {"paths", 100000},
          {"seed", nullptr},
          {"distance", "kolmogorov"},
          {"noise", "gaussian"},
          {"kappa_sq", nullptr},
          {"warmup", nullptr},
          {"grid", "none"},
          {"threads", 1}}},
        {"paper-examples", {{"which", "all"}, {"seed", 1}, {"paths", 100000}, {"threads", 1}}},
    };
    const auto it = table.find(command);
    if (it == table.end()) {
        throw Error(ErrorCode::UsageError,
                    "unknown command '" + command +
                        "' (chain-diagnose, linear, superlinear, frac-poisson, simulate, paper-examples)",
                    "command");
    }
    return *it;
}

[[noreturn]] void usage(const std::string& message, const std::string& path) {
    throw Error(ErrorCode::UsageError, message, path);
}

std::size_t knob_size(const RunConfig& c, const char* name) {
    const auto& v = c.knobs.at(name);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        usage(std::string(name) + " must be a nonnegative integer", name);
    }
    return v.get<std::size_t>();
}

std::optional<std::size_t> knob_opt_size(const RunConfig& c, const char* name) {
    if (c.knobs.at(name).is_null()) return std::nullopt;
    return knob_size(c, name);
}

double knob_double(const RunConfig& c, const char* name) {
    const auto& v = c.knobs.at(name);
    if (!v.is_number()) usage(std::string(name) + " must be a number", name);
    return v.get<double>();
}

std::string knob_str(const RunConfig& c, const char* name) {
    const auto& v = c.knobs.at(name);
    if (!v.is_string()) usage(std::string(name) + " must be a string", name);
    return v.get<std::string>();
}

std::vector<std::size_t> parse_grid(const std::string& text) {
    // dyadic:A:B -> 2^A, ..., 2^B
    const auto bad = [&] { usage("grid must look like dyadic:A:B with 0 <= A < B <= 40, got '" + text + "'", "grid"); };
    if (!text.starts_with("dyadic:")) bad();
    const auto rest = text.substr(7);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) bad();
    unsigned lo = 0, hi = 0;
    try {
        std::size_t u1 = 0, u2 = 0;
        const std::string a = rest.substr(0, colon), b = rest.substr(colon + 1);
        lo = static_cast<unsigned>(std::stoul(a, &u1));
        hi = static_cast<unsigned>(std::stoul(b, &u2));
        if (u1 != a.size() || u2 != b.size()) bad();
    } catch (const std::logic_error&) {
        bad();
    }
    if (lo >= hi || hi > 40) bad();
    return dyadic_grid(lo, hi);
}

seq::VerdictOptions verdict_options(const RunConfig& c) {
    seq::VerdictOptions opts;
    const auto grid = knob_str(c, "grid");
    if (grid != "auto") opts.grid = parse_grid(grid);
    opts.tol_cauchy = knob_double(c, "tol_cauchy");
    opts.margin = knob_double(c, "margin");
    return opts;
}

// ---------------------------------------------------------------- inputs

std::string input_label(const RunConfig& c, const char* key) {
    if (c.input_paths.contains(key) && c.input_paths[key].is_string()) return c.input_paths[key].get<std::string>();
    return key;
}

template <typename F>
auto with_input(const RunConfig& c, const char* key, F&& f) {
    if (!c.inputs.contains(key)) usage(std::string("missing input '") + key + "'", key);
    try {
        return f(c.inputs[key]);
    } catch (const Error& e) {
        throw e.with_path_prefix(input_label(c, key));
    }
}

markov::StationaryChain load_chain(const RunConfig& c) {
    return with_input(c, "chain", [](const Json& d) { return io::parse_chain(d); });
}

markov::Observable load_observable(const RunConfig& c, const markov::StationaryChain& chain) {
    return with_input(c, "g", [&](const Json& d) { return io::parse_observable(d, chain); });
}

bool is_generator(const Json& doc, const char* name) {
    return doc.is_object() && doc.contains("generator") && doc["generator"] == name;
}

// ---------------------------------------------------------------- helpers

std::vector<std::size_t> dyadic_upto(std::size_t first, std::size_t n_max) {
    std::vector<std::size_t> out;
    for (std::size_t n = first; n <= n_max; n *= 2) out.push_back(n);
    if (out.empty() || out.back() != n_max) out.push_back(n_max);
    return out;
}

Json claim(const std::string& name, const std::string& expected, Json observed, bool pass) {
    return {{"claim", name}, {"expected", expected}, {"observed", std::move(observed)}, {"pass", pass}};
}

Json bundle(Json claims) {
    bool all = true;
    for (const auto& c : claims) all = all && c["pass"].get<bool>();
    return {{"claims", std::move(claims)}, {"pass", all}};
}

Json verdict_trace(const seq::SuperlinearBars& bars) {
    Json trace = Json::array();
    for (std::size_t n : dyadic_upto(1, bars.n_max())) {
        Json bbar = Json::object(), b = Json::object();
        for (std::size_t j = 0; j < bars.keys.size(); ++j) {
            bbar[bars.keys[j]] = number(bars.columns[j].bbar[n]);
            b[bars.keys[j]] = number(bars.columns[j].b[n]);
        }
        trace.push_back({{"n", n},
                         {"b", b},
                         {"bbar", bbar},
                         {"b_norm_sq", number(bars.b_norm_sq[n])},
                         {"bbar_norm_sq", number(bars.bbar_norm_sq[n])}});
    }
    return trace;
}

Json example5_json(const seq::Example5Report& r) {
    return {{"j_max", r.j_max},
            {"order", r.sqrt.order},
            {"beta_tail", number(r.sqrt.beta_tail)},
            {"trunc_error_bound", number(r.sqrt.trunc_error_bound)},
            {"lower_bound_certified", r.sqrt.lower_bound_certified},
            {"j0", r.j0 ? Json(*r.j0) : Json(nullptr)},
            {"min_ratio_after_j0", number(r.min_ratio_after_j0)},
            {"n0", r.n0 ? Json(*r.n0) : Json(nullptr)},
            {"b_grid", r.b_grid},
            {"b_values", r.b_values},
            {"b_100", number(r.b_100)},
            {"b_final", number(r.b_final)},
            {"majorant_ratio", number(r.majorant_ratio)}};
}

Json example6_json(const seq::Example6Report& r) {
    Json trace = Json::array();
    for (std::size_t i = 0; i < r.trace_grid.size(); ++i) {
        trace.push_back({{"n", r.trace_grid[i]},
                         {"bbar_minus_b0", number(r.bbar_minus_b0[i])},
                         {"bbar_minus_b1", number(r.bbar_minus_b1[i])},
                         {"bbar_norm_sq", number(r.bbar_norm_sq[i])}});
    }
    return {{"convention", r.convention_note},
            {"trace", trace},
            {"stream_horizon", r.stream_horizon},
            {"bbar0_range", {number(r.bbar0_min), number(r.bbar0_max)}},
            {"bbar0_argmin", r.bbar0_argmin},
            {"bbar0_argmax", r.bbar0_argmax},
            {"max_abs_c_scaled", number(r.max_abs_c_scaled)}};
}

Json vector_head(const std::vector<double>& v, std::size_t count) {
    Json out = Json::array();
    for (std::size_t i = 0; i < std::min(count, v.size()); ++i) out.push_back(number(v[i]));
    return out;
}

Verdict combine(Verdict a, Verdict b) {
    if (a == Verdict::Fails || b == Verdict::Fails) return Verdict::Fails;
    if (a == Verdict::Holds && b == Verdict::Holds) return Verdict::Holds;
    return Verdict::Inconclusive;
}

std::string existence(Verdict v) {
    return v == Verdict::Holds ? "yes" : v == Verdict::Fails ? "no" : "inconclusive";
}

// Reference variance for superlinear simulations: ||bbar_N||^2 at a large N.
double superlinear_kappa_sq(const seq::CoeffArray& arr, std::size_t n) {
    std::size_t horizon = std::max<std::size_t>(n, std::size_t{1} << 20);
    for (const auto& col : arr) {
        if (const auto h = col.source.horizon(); h && !col.source.zero_tail()) horizon = std::min(horizon, *h - 1);
    }
    const auto bars = seq::superlinear_bars(arr, horizon);
    return bars.bbar_norm_sq[horizon];
}

}  // namespace

// ---------------------------------------------------------------- config

Json RunConfig::to_json() const {
    return {{"command", command}, {"knobs", knobs}, {"inputs", inputs}, {"input_paths", input_paths}};
}

RunConfig RunConfig::from_json(const Json& doc) {
    if (!doc.is_object() || !doc.contains("command") || !doc["command"].is_string()) {
        throw Error(ErrorCode::InvalidInput, "config must hold a command", "config.command");
    }
    RunConfig c;
    c.command = doc["command"].get<std::string>();
    if (doc.contains("knobs")) c.knobs = doc["knobs"];
    if (doc.contains("inputs")) c.inputs = doc["inputs"];
    if (doc.contains("input_paths")) c.input_paths = doc["input_paths"];
    return c;
}

RunConfig resolve_defaults(RunConfig config) {
    const Json& defaults = defaults_for(config.command);
    if (!config.knobs.is_object()) usage("knobs must be an object", "knobs");
    for (const auto& [key, value] : config.knobs.items()) {
        if (!defaults.contains(key)) usage("option '" + key + "' does not apply to " + config.command, key);
    }
    Json merged = Json::object();
    for (const auto& [key, value] : defaults.items()) {
        merged[key] = config.knobs.contains(key) ? config.knobs[key] : value;
    }
    config.knobs = std::move(merged);

    if (config.command == "simulate" && config.knobs["seed"].is_null()) {
        usage("simulate requires --seed", "seed");
    }
    if (config.knobs.contains("seed") && !config.knobs["seed"].is_null() && !config.knobs["seed"].is_number_unsigned() &&
        !(config.knobs["seed"].is_number_integer() && config.knobs["seed"].get<long long>() >= 0)) {
        usage("seed must be a nonnegative integer", "seed");
    }
    if (config.knobs.contains("n_max") && knob_size(config, "n_max") < (config.command == "simulate" ? 1u : 4u)) {
        usage("n_max is too small", "n_max");
    }
    if (config.knobs.contains("paths") && knob_size(config, "paths") < 2) usage("paths must be >= 2", "paths");
    if (config.knobs.contains("tol") && !(knob_double(config, "tol") > 0.0)) usage("tol must be > 0", "tol");
    if (config.knobs.contains("tol_cauchy") && !(knob_double(config, "tol_cauchy") > 0.0)) {
        usage("tol must be > 0", "tol_cauchy");
    }
    if (config.knobs.contains("k") && knob_size(config, "k") < 1) usage("k must be >= 1", "k");
    const auto as_usage = [&](const char* key, auto&& parse) {
        if (!config.knobs.contains(key)) return;
        try {
            parse(knob_str(config, key));
        } catch (const Error& e) {
            if (e.code() == ErrorCode::UsageError) throw;
            usage(e.what(), key);
        }
    };
    as_usage("distance", [](const std::string& t) { sim::parse_distance(t); });
    as_usage("noise", [](const std::string& t) { sim::NoiseSpec::parse(t); });
    if (config.knobs.contains("grid")) {
        const auto g = knob_str(config, "grid");
        if (g != "auto" && g != "none") parse_grid(g);
    }
    if (config.command == "paper-examples") {
        static const std::set<std::string> which{"1", "4", "5", "6", "ar1", "all"};
        if (!which.contains(knob_str(config, "which"))) usage("which must be one of 1, 4, 5, 6, ar1, all", "which");
    }
    return config;
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

Json run(const RunConfig& raw) {
    const RunConfig config = resolve_defaults(raw);
    Json result;
    if (config.command == "chain-diagnose") {
        result = cmd_chain_diagnose(config);
    } else if (config.command == "linear") {
        result = cmd_linear(config);
    } else if (config.command == "superlinear") {
        result = cmd_superlinear(config);
    } else if (config.command == "frac-poisson") {
        result = cmd_frac_poisson(config);
    } else if (config.command == "simulate") {
        result = cmd_simulate(config);
    } else {
        result = cmd_paper_examples(config);
    }
    return {{"format_version", io::kFormatVersion},
            {"tool", "martapprox"},
            {"tool_version", MARTAPPROX_VERSION},
            {"command", config.command},
            {"config", config.to_json()},
            {"result", std::move(result)}};
}

Json rerun(const Json& report) {
    if (!report.is_object() || !report.contains("config") || !report.contains("result")) {
        throw Error(ErrorCode::InvalidInput, "not a martapprox report", "config");
    }
    if (!report.contains("format_version") || report["format_version"] != io::kFormatVersion) {
        throw Error(ErrorCode::InvalidInput, "unsupported report format_version", "format_version");
    }
    Json fresh = run(RunConfig::from_json(report["config"]));
    const bool same = fresh["result"] == report["result"];
    return {{"reproduced", same}, {"report", std::move(fresh)}};
}

// ---------------------------------------------------------------- commands

Json cmd_chain_diagnose(const RunConfig& config) {
    const auto chain = load_chain(config);
    const auto g = load_observable(config, chain);
    const auto grid = parse_grid(knob_str(config, "grid"));
    const double margin = knob_double(config, "margin");

    const auto adj = markov::adjoint(chain);
    const auto pn = markov::plus_norm_sq(chain, g);
    const auto mk = markov::martingale_kernel(chain, g);
    const auto crit = markov::criteria_diagnostic(chain, g, grid, grid, margin);

    Json diag = Json::array();
    for (std::size_t n : grid) {
        const auto vs = markov::v_sums(chain, g, n);
        const auto res = markov::residual_second_moment(chain, g, n, n);
        markov::PairKernel diff = markov::hbar_kernel(chain, g, n);
        diff.values -= mk.h.values;
        const auto dn = static_cast<double>(n);
        diag.push_back({{"n", n},
                        {"sn_second_moment_over_n", number(markov::sn_second_moment(chain, g, n) / dn)},
                        {"vn_norm", number(std::sqrt(chain.norm_sq(vs.v.values())))},
                        {"residual_nn", number(res.value)},
                        {"residual_nn_over_n", number(res.value / dn)},
                        {"residual_bound", number(res.bound)},
                        {"martingale_residual", number(markov::martingale_residual_second_moment(chain, g, n))},
                        {"hbar_minus_h_norm", number(std::sqrt(diff.norm_sq(chain)))}});
    }
    const Verdict v = combine(crit.cond2.verdict, crit.cond16.verdict);
    return {{"verdict", existence(v)},
            {"kappa_sq", number(mk.kappa_sq)},
            {"plus_norm_sq", number(pn.value)},
            {"chain",
             {{"n_states", chain.n_states()},
              {"pi", to_json(chain.pi())},
              {"reversible", adj.reversible},
              {"normal", adj.normal},
              {"doubly_stochastic", adj.doubly_stochastic},
              {"reversibility_gap", number(adj.reversibility_gap)},
              {"normality_gap", number(adj.normality_gap)},
              {"note", adj.note}}},
            {"poisson_u", to_json(pn.solution.u.values())},
            {"poisson_residual", number(pn.solution.residual)},
            {"H", to_json(mk.h)},
            {"cond2", to_json(crit.cond2)},
            {"cond16", to_json(crit.cond16)},
            {"plus_norms_of_powers", vector_head(crit.plus_norms_of_powers, 64)},
            {"diagnostics", diag}};
}

Json cmd_linear(const RunConfig& config) {
    const std::size_t n_max = knob_size(config, "n_max");
    const auto opts = verdict_options(config);
    Json extra = nullptr;
    seq::CoeffSource source = with_input(config, "coeffs", [&](const Json& doc) {
        if (is_generator(doc, "example5")) {
            const auto ex = seq::example5_build(n_max, knob_size(config, "k"));
            extra = example5_json(ex);
            return ex.c;
        }
        const auto arr = io::parse_coeff_array(doc);
        if (arr.size() != 1) usage("linear takes a single column; use superlinear for arrays", "coeffs");
        return arr.front().source;
    });
    const auto verdict = seq::corollary2_verdict(source, n_max, opts);
    const auto seq = seq::partial_sums(source, n_max);
    const auto v1 = seq::vn_norm_sq_linear_raw(seq, 1, n_max - 1);

    Json trace = Json::array();
    for (std::size_t n : dyadic_upto(1, n_max)) {
        trace.push_back({{"n", n}, {"b", number(seq.b[n])}, {"bbar", number(seq.bbar[n])}});
    }
    Json out = {{"verdict", to_json(verdict)},
                {"source", {{"name", source.name()}, {"params", source.params()}}},
                {"sum_a_sq", number(v1.value)},
                {"sum_a_sq_tail_bound", number(v1.tail_bound)},
                {"max_b_over_sqrt_n", number(seq.max_b_over_sqrt_n)},
                {"trace", trace}};
    if (!extra.is_null()) out["example5"] = extra;
    return out;
}

Json cmd_superlinear(const RunConfig& config) {
    const std::size_t n_max = knob_size(config, "n_max");
    const auto opts = verdict_options(config);
    Json out = Json::object();
    seq::SuperlinearBars bars;
    if (config.inputs.contains("fourier")) {
        const auto g = with_input(config, "fourier", [](const Json& d) { return io::parse_fourier(d); });
        const auto fa = shift::to_coeff_array(g);
        bars = seq::superlinear_bars(fa.realified(), n_max);
        Json cols = Json::array();
        for (const auto& [j, col] : fa.columns) cols.push_back(j);
        out["fourier"] = {{"odd_columns", cols}, {"norm_sq", number(fa.norm_sq)}, {"max_level", g.max_level()}};
    } else {
        const Json& doc = config.inputs.contains("coeffs") ? config.inputs["coeffs"] : Json(nullptr);
        if (is_generator(doc, "example6") && !doc.contains("column")) {
            const auto ex = seq::example6_build(n_max, knob_size(config, "stream_horizon"));
            out["example6"] = example6_json(ex);
            bars = ex.bars;
        } else {
            bars = with_input(config, "coeffs",
                              [&](const Json& d) { return seq::superlinear_bars(io::parse_coeff_array(d), n_max); });
        }
    }
    const auto verdict = seq::theorem1_verdict(bars, opts);
    out["verdict"] = to_json(verdict);
    out["columns"] = bars.keys;
    out["trace"] = verdict_trace(bars);
    return out;
}

Json cmd_frac_poisson(const RunConfig& config) {
    if (config.inputs.contains("chain")) {
        const auto chain = load_chain(config);
        const auto h = load_observable(config, chain);
        frac::SqrtApplyOptions opts;
        opts.tol = knob_double(config, "tol");
        opts.k_max = knob_size(config, "k_max");
        const auto res = frac::sqrt_apply_chain(chain, h, opts);
        const double dev = frac::verify_square(chain, h, opts);
        const auto adj = markov::adjoint(chain);
        Json out = {{"mode", "chain"},
                    {"g", to_json(res.g.values())},
                    {"k_used", res.k_used},
                    {"err_bound", number(res.err_bound)},
                    {"contraction_ratio", number(res.contraction_ratio)},
                    {"power_norms_head", vector_head(res.power_norms, 64)},
                    {"verify_square", number(dev)},
                    {"verify_square_ok", dev <= 10.0 * opts.tol},
                    {"plus_norm_sq_g", number(markov::plus_norm_sq(chain, res.g).value)}};
        if (adj.reversible) {
            const markov::Vector& hv = h.values();
            out["reversible_identity_rhs"] = number(chain.inner(hv + chain.q() * hv, hv));
        }
        return out;
    }
    const std::size_t j_max = knob_size(config, "j_max");
    const std::size_t order = knob_size(config, "k");
    return with_input(config, "coeffs", [&](const Json& doc) -> Json {
        if (is_generator(doc, "example5")) {
            const auto ex = seq::example5_build(j_max, order);
            Json out = {{"mode", "sequence"}, {"c", ex.sqrt.c}, {"example5", example5_json(ex)}};
            out["a_head"] = ex.a.take(std::min<std::size_t>(j_max + 1, 64));
            return out;
        }
        const auto source = io::parse_coeff_source(doc);
        const std::size_t needed = j_max + order + 1;
        const auto a = source.take(needed);
        double sup = 0.0;
        if (!(source.zero_tail() && source.horizon() && *source.horizon() <= needed)) {
            const auto tail = source.tail_sq(needed - 1);
            if (!tail || !std::isfinite(*tail)) {
                throw Error(ErrorCode::TailNotCertified, "no bound on the coefficients beyond the horizon",
                            "generator");
            }
            sup = std::sqrt(*tail);
        }
        const auto res = frac::sqrt_apply_sequence(a, j_max, order, sup);
        return {{"mode", "sequence"},
                {"c", res.c},
                {"order", res.order},
                {"beta_tail", number(res.beta_tail)},
                {"trunc_error_bound", number(res.trunc_error_bound)},
                {"lower_bound_certified", res.lower_bound_certified}};
    });
}

Json cmd_simulate(const RunConfig& config) {
    const std::size_t n = knob_size(config, "n_max");
    const std::size_t paths = knob_size(config, "paths");
    const auto seed = config.knobs["seed"].get<std::uint64_t>();
    const auto kind = sim::parse_distance(knob_str(config, "distance"));
    sim::RunOptions run;
    run.threads = static_cast<unsigned>(std::max<std::size_t>(1, knob_size(config, "threads")));
    const bool kappa_given = !config.knobs["kappa_sq"].is_null();

    if (config.inputs.contains("chain")) {
        const auto chain = load_chain(config);
        const auto g = load_observable(config, chain);
        const double kappa_sq = kappa_given ? knob_double(config, "kappa_sq") : markov::plus_norm_sq(chain, g).value;
        const auto samples = sim::simulate_chain(chain, g, n, paths, seed, run);
        const auto rep = sim::cclt_check(samples, chain.pi(), kappa_sq, kind);
        Json out = {{"mode", "chain"},
                    {"kappa_sq_source", kappa_given ? "option" : "plus_norm_sq"},
                    {"exact_sn_second_moment_over_n",
                     number(markov::sn_second_moment(chain, g, n) / static_cast<double>(n))},
                    {"cclt", to_json(rep)}};
        const auto grid = knob_str(config, "grid");
        if (grid != "none" && grid != "auto") {
            Json res = Json::array();
            for (const auto& e : sim::empirical_residual(chain, g, parse_grid(grid), paths, seed, run)) {
                const auto dn = static_cast<double>(e.n);
                res.push_back({{"n", e.n},
                               {"rnn_mean", number(e.rnn_mean)},
                               {"rnn_se", number(e.rnn_se)},
                               {"rnn_exact", number(e.rnn_exact)},
                               {"rnn_over_n", number(e.rnn_mean / dn)},
                               {"rn_mean", number(e.rn_mean)},
                               {"rn_se", number(e.rn_se)},
                               {"rn_exact", number(e.rn_exact)}});
            }
            out["empirical_residual"] = res;
        }
        return out;
    }

    const auto arr = with_input(config, "coeffs", [](const Json& d) { return io::parse_coeff_array(d); });
    const double kappa_sq = kappa_given ? knob_double(config, "kappa_sq") : superlinear_kappa_sq(arr, n);
    const auto noise = sim::NoiseSpec::parse(knob_str(config, "noise"));
    const auto samples = sim::simulate_superlinear(arr, {noise}, n, paths, seed, knob_opt_size(config, "warmup"), run);
    const auto rep = sim::cclt_check(samples.s_over_sqrt_n, n, kappa_sq, kind);
    return {{"mode", "superlinear"},
            {"kappa_sq_source", kappa_given ? "option" : "bbar_norm_sq"},
            {"warmup", samples.warmup},
            {"truncation_var_bound", number(samples.truncation_var_bound)},
            {"noise", samples.noise},
            {"cclt", to_json(rep)}};
}

// ---------------------------------------------------------------- worked examples

namespace {

Json example_bernoulli(std::uint64_t seed) {
    Json claims = Json::array();
    auto rng = sim::substream(seed, 1);
    std::uniform_int_distribution<std::int64_t> freq(-4096, 4096);
    std::normal_distribution<double> coef;
    bool qqstar = true, projection = true;
    for (int t = 0; t < 1000; ++t) {
        std::map<std::int64_t, shift::Complex> m;
        for (int k = 0; k < 8; ++k) {
            const auto r = freq(rng);
            if (r != 0) m[r] = {coef(rng), coef(rng)};
        }
        const auto g = shift::FourierObservable::make(m);
        qqstar = qqstar && shift::apply_q_fourier(shift::apply_qstar_fourier(g)) == g;
        const auto p = shift::apply_qstar_fourier(shift::apply_q_fourier(g));
        projection = projection && shift::apply_qstar_fourier(shift::apply_q_fourier(p)) == p;
    }
    claims.push_back(claim("QQ* = I", "exact on 1000 random observables", qqstar, qqstar));
    claims.push_back(claim("Q*Q is a projection", "exact idempotence", projection, projection));

    // Fourier action against the pointwise operator on a 2^12 grid.
    std::map<std::int64_t, shift::Complex> m;
    for (std::int64_t r = -256; r <= 256; ++r) {
        if (r != 0) m[r] = {coef(rng), coef(rng)};
    }
    const auto g = shift::FourierObservable::make(m);
    const auto pointwise = shift::apply_q_pointwise(shift::sample(g, 4096));
    const auto fourier = shift::sample(shift::apply_q_fourier(g), 2048);
    double err = 0.0;
    for (std::size_t i = 0; i < pointwise.size(); ++i) err = std::max(err, std::abs(pointwise[i] - fourier[i]));
    claims.push_back(claim("Fourier vs pointwise Q", "max deviation <= 1e-10", number(err), err <= 1e-10));

    std::map<std::int64_t, shift::Complex> geo;
    for (unsigned i = 0; i <= 59; ++i) geo[std::int64_t{3} << i] = std::ldexp(1.0, -static_cast<int>(i));
    const auto v = shift::ma_verdict_bernoulli(shift::FourierObservable::make(geo), 4096);
    const double k = v.kappa_sq.value_or(std::nan(""));
    claims.push_back(claim("geometric column: martingale approximation", "yes, kappa^2 = 4",
                           {{"exists", std::string(seq::to_string(v.exists))}, {"kappa_sq", number(k)}},
                           v.exists == seq::Exists::Yes && std::abs(k - 4.0) <= 1e-9));
    const auto cob = shift::ma_verdict_bernoulli(shift::FourierObservable::make({{3, 1.0}, {6, -1.0}}), 4096);
    const double kc = cob.kappa_sq.value_or(std::nan(""));
    claims.push_back(claim("e_3 - e_6 coboundary", "yes, kappa^2 = 0",
                           {{"exists", std::string(seq::to_string(cob.exists))}, {"kappa_sq", number(kc)}},
                           cob.exists == seq::Exists::Yes && std::abs(kc) <= 1e-12));
    return bundle(std::move(claims));
}

Json example_plus_norm() {
    Json claims = Json::array();
    // E[S_n^2] = n ||bbar_n||^2 + o(n): the gap must shrink along the grid.
    const auto check = [&](const std::string& name, const seq::CoeffArray& arr, std::optional<double> limit) {
        const std::size_t n_max = std::size_t{1} << 16;
        const std::size_t p_max = std::size_t{1} << 20;
        const auto bars = seq::superlinear_bars(arr, n_max + p_max);
        Json trace = Json::array();
        std::vector<double> gaps;
        double last_ratio = 0.0;
        for (std::size_t n = 16; n <= n_max; n *= 4) {
            double es = 0.0;
            for (const auto& col : bars.columns) es += seq::sn_second_moment_linear(col, n, p_max).value;
            last_ratio = es / static_cast<double>(n);
            gaps.push_back(std::abs(last_ratio - bars.bbar_norm_sq[n]));
            trace.push_back({{"n", n}, {"sn_second_moment_over_n", number(last_ratio)},
                             {"bbar_norm_sq", number(bars.bbar_norm_sq[n])}});
        }
        bool shrinking = gaps.back() <= 0.5 * gaps.front();
        for (std::size_t i = 1; i < gaps.size(); ++i) shrinking = shrinking && gaps[i] < gaps[i - 1];
        claims.push_back(claim(name + ": |E[S_n^2]/n - ||bbar_n||^2| -> 0",
                               "strictly decreasing on n = 16, 64, ..., 65536 and at least halved",
                               {{"gaps", gaps}, {"trace", trace}}, shrinking));
        if (limit) {
            claims.push_back(claim(name + ": plus norm", "E[S_n^2]/n within 0.1% of " + std::to_string(*limit),
                                   number(last_ratio), std::abs(last_ratio - *limit) <= 1e-3 * *limit));
        }
    };
    check("geometric 0.5", {{"0", seq::CoeffSource::geometric(0.5)}}, 4.0);
    check("two-column cos/sin array",
          {{"0", seq::CoeffSource::example6_column(0)}, {"1", seq::CoeffSource::example6_column(1)}}, std::nullopt);
    return bundle(std::move(claims));
}

Json example_five() {
    Json claims = Json::array();
    const std::size_t j_max = 10000;
    const auto ex = seq::example5_build(j_max, 100000);
    claims.push_back(claim("a_0 = 1/log 2", "1.4426950408889634", number(ex.a.at(0)),
                           std::abs(ex.a.at(0) - 1.0 / std::numbers::ln2) <= 1e-15));
    claims.push_back(claim("c_j >= a_j / (9 sqrt j) eventually", "holds from some j0",
                           ex.j0 ? Json(*ex.j0) : Json(nullptr), ex.j0.has_value()));
    claims.push_back(claim("b_n increasing over the horizon", "strictly increasing from some n0",
                           {{"n0", ex.n0 ? Json(*ex.n0) : Json(nullptr)},
                            {"b_100", number(ex.b_100)},
                            {"b_final", number(ex.b_final)}},
                           ex.n0.has_value() && ex.b_final > ex.b_100));
    const auto v = seq::corollary2_verdict(ex.c, j_max);
    claims.push_back(claim("norm condition", "holds", to_json(v.norm_condition.verdict),
                           v.norm_condition.verdict.verdict == Verdict::Holds));
    claims.push_back(claim("bbar_n divergent", "Cauchy test fails", to_json(v.bbar_cauchy),
                           v.bbar_cauchy.verdict == Verdict::Fails));
    claims.push_back(claim("martingale approximation", "no", std::string(seq::to_string(v.exists)),
                           v.exists == seq::Exists::No));
    Json out = bundle(std::move(claims));
    out["report"] = example5_json(ex);
    return out;
}

Json example_six(std::uint64_t seed, std::size_t paths, unsigned threads) {
    Json claims = Json::array();
    const std::size_t n_max = 1000000;
    const auto ex = seq::example6_build(n_max);
    const auto v = seq::theorem1_verdict(ex.bars);
    claims.push_back(claim("norm condition", "holds", to_json(v.norm_condition.verdict),
                           v.norm_condition.verdict.verdict == Verdict::Holds));
    const double norm_gap = std::abs(ex.bars.bbar_norm_sq[n_max] - 1.0);
    claims.push_back(claim("||bbar_n||^2 -> 1", "|.-1| <= 0.05 at n = 1e6", number(ex.bars.bbar_norm_sq[n_max]),
                           norm_gap <= 0.05));
    claims.push_back(claim("bbar_n Cauchy", "fails", to_json(v.bbar_cauchy), v.bbar_cauchy.verdict == Verdict::Fails));
    claims.push_back(claim("martingale approximation", "no", std::string(seq::to_string(v.exists)),
                           v.exists == seq::Exists::No));
    claims.push_back(claim("c_n = O(1/(n sqrt(log n)))", "sup |c_n| n sqrt(log n) bounded (<= 1)",
                           number(ex.max_abs_c_scaled), ex.max_abs_c_scaled <= 1.0));

    const seq::CoeffArray arr = ex.arr;
    sim::RunOptions run;
    run.threads = threads;
    const auto samples = sim::simulate_superlinear(arr, {sim::NoiseSpec{sim::NoiseSpec::Kind::Rademacher, 1.0}}, 2000,
                                                   paths, seed, std::nullopt, run);
    const auto rep = sim::cclt_check(samples.s_over_sqrt_n, 2000, 1.0);
    claims.push_back(claim("CCLT (unconditional surrogate)", "Kolmogorov distance <= 0.08 at n = 2000",
                           to_json(rep), rep.distance <= 0.08));
    Json out = bundle(std::move(claims));
    out["report"] = example6_json(ex);
    return out;
}

Json example_ar1(std::uint64_t seed, std::size_t paths, unsigned threads) {
    Json claims = Json::array();
    const auto src = seq::CoeffSource::geometric(0.5);
    const auto v = seq::corollary2_verdict(src, 1 << 14);
    const double k = v.kappa_sq.value_or(std::nan(""));
    claims.push_back(claim("martingale approximation", "yes", std::string(seq::to_string(v.exists)),
                           v.exists == seq::Exists::Yes));
    claims.push_back(claim("kappa^2", "4", number(k), std::abs(k - 4.0) <= 1e-9));
    sim::RunOptions run;
    run.threads = threads;
    const auto samples = sim::simulate_superlinear({{"0", src}}, {sim::NoiseSpec{}}, 2000, paths, seed, std::nullopt, run);
    const auto rep = sim::cclt_check(samples.s_over_sqrt_n, 2000, 4.0);
    claims.push_back(claim("E[S_n^2]/n at n = 2000", "within 5% of 4", number(rep.kappa_sq_hat),
                           std::abs(rep.kappa_sq_hat - 4.0) <= 0.2));
    return bundle(std::move(claims));
}

}  // namespace

Json cmd_paper_examples(const RunConfig& config) {
    const auto which = knob_str(config, "which");
    const auto seed = config.knobs["seed"].get<std::uint64_t>();
    const std::size_t paths = knob_size(config, "paths");
    const auto threads = static_cast<unsigned>(std::max<std::size_t>(1, knob_size(config, "threads")));
    Json out = Json::object();
    const bool all = which == "all";
    if (all || which == "1") out["1"] = example_bernoulli(seed);
    if (all || which == "4") out["4"] = example_plus_norm();
    if (all || which == "5") out["5"] = example_five();
    if (all || which == "6") out["6"] = example_six(seed, paths, threads);
    if (all || which == "ar1") out["ar1"] = example_ar1(seed, paths, threads);
    bool pass = true;
    for (const auto& [key, value] : out.items()) pass = pass && value["pass"].get<bool>();
    return {{"examples", out}, {"pass", pass}};
}

}  // namespace martapprox::cmd
