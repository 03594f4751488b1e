#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "martapprox/commands.hpp"
#include "martapprox/error.hpp"

namespace {

using martapprox::Error;
using martapprox::ErrorCode;
using martapprox::cmd::Json;
using martapprox::cmd::RunConfig;
namespace io = martapprox::io;

int report_error(const Error& e) {
    std::cerr << io::to_json(e).dump() << "\n";
    return e.code() == ErrorCode::UsageError ? 2 : 1;
}

template <typename T>
void knob(CLI::App* sub, const std::string& flag, const std::string& key, Json& knobs, const std::string& help) {
    sub->add_option_function<T>(flag, [&knobs, key](const T& v) { knobs[key] = v; }, help);
}

struct Inputs {
    std::string chain, g, coeffs, generator, fourier;
};

void add_chain_inputs(CLI::App* sub, Inputs& in, bool required) {
    auto* c = sub->add_option("--chain", in.chain, "chain document (n_states, Q, optional pi)");
    auto* g = sub->add_option("--g", in.g, "observable document (values, optional center)");
    if (required) {
        c->required();
        g->required();
    } else {
        c->needs(g);
        g->needs(c);
    }
}

void add_coeff_inputs(CLI::App* sub, Inputs& in) {
    auto* f = sub->add_option("--coeffs", in.coeffs, "coefficient file (JSON or whitespace-separated numbers)");
    auto* g = sub->add_option("--generator", in.generator,
                              "named generator: geometric:R, power:P, example5, example6, custom_array:v1,v2,...");
    f->excludes(g);
}

void load_inputs(const Inputs& in, RunConfig& config) {
    const auto load = [&](const char* key, const std::string& path, auto reader) {
        if (path.empty()) return;
        try {
            config.inputs[key] = reader(path);
        } catch (const Error& e) {
            throw e.path().empty() || e.path() == path ? Error(e.code(), e.what(), path) : e.with_path_prefix(path);
        }
        config.input_paths[key] = path;
    };
    load("chain", in.chain, io::read_json_file);
    load("g", in.g, io::read_json_file);
    load("coeffs", in.coeffs, io::read_coeff_file);
    load("fourier", in.fourier, io::read_json_file);
    if (!in.generator.empty()) {
        config.inputs["coeffs"] = io::generator_doc(in.generator);
        config.input_paths["coeffs"] = "generator:" + in.generator;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Martingale approximation diagnostics for additive functionals of Markov chains"};
    app.set_version_flag("--version", std::string(MARTAPPROX_VERSION));
    app.require_subcommand(1);

    RunConfig config;
    Inputs in;
    std::string out_path;
    std::string report_path;
    Json& k = config.knobs;

    const auto common = [&](CLI::App* sub) {
        sub->add_option("--out", out_path, "write the report here instead of stdout");
    };

    auto* diag = app.add_subcommand("chain-diagnose", "criteria, kernel and residual diagnostics for a finite chain");
    add_chain_inputs(diag, in, true);
    knob<std::string>(diag, "--grid", "grid", k, "n grid, dyadic:A:B (default dyadic:1:10)");
    knob<double>(diag, "--margin", "margin", k, "slope verdict margin (default 0.1)");

    auto* linear = app.add_subcommand("linear", "verdict for a linear process sum a_i xi_{k-i}");
    add_coeff_inputs(linear, in);
    knob<std::size_t>(linear, "--n-max", "n_max", k, "horizon (default 16384)");
    knob<std::string>(linear, "--grid", "grid", k, "n grid, dyadic:A:B or auto");
    knob<double>(linear, "--tol", "tol_cauchy", k, "Cauchy tolerance (default 1e-3)");
    knob<double>(linear, "--margin", "margin", k, "slope verdict margin (default 0.1)");
    knob<std::size_t>(linear, "--k", "k", k, "series order for example5 (default 100000)");

    auto* super = app.add_subcommand("superlinear", "verdict for a superlinear process");
    add_coeff_inputs(super, in);
    super->add_option("--fourier", in.fourier, "Bernoulli-shift observable as Fourier coefficients")
        ->excludes("--coeffs")
        ->excludes("--generator");
    knob<std::size_t>(super, "--n-max", "n_max", k, "horizon (default 1000000)");
    knob<std::string>(super, "--grid", "grid", k, "n grid, dyadic:A:B or auto");
    knob<double>(super, "--tol", "tol_cauchy", k, "Cauchy tolerance (default 1e-3)");
    knob<double>(super, "--margin", "margin", k, "slope verdict margin (default 0.1)");
    knob<std::size_t>(super, "--stream-horizon", "stream_horizon", k,
                      "example6: stream the running bbar up to this n (default n-max)");

    auto* frac = app.add_subcommand("frac-poisson", "solve g = sqrt(I - Q) h");
    add_chain_inputs(frac, in, false);
    add_coeff_inputs(frac, in);
    knob<double>(frac, "--tol", "tol", k, "chain mode tolerance (default 1e-10)");
    knob<std::size_t>(frac, "--k-max", "k_max", k, "chain mode series cap (default 100000)");
    knob<std::size_t>(frac, "--j-max", "j_max", k, "sequence mode output length (default 1000)");
    knob<std::size_t>(frac, "--k", "k", k, "sequence mode series order (default 100000)");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo check of the conditional CLT");
    add_chain_inputs(simulate, in, false);
    add_coeff_inputs(simulate, in);
    knob<std::size_t>(simulate, "--n-max", "n_max", k, "n (default 2000)");
    knob<std::size_t>(simulate, "--paths", "paths", k, "number of paths (default 100000)");
    knob<std::uint64_t>(simulate, "--seed", "seed", k, "RNG seed (required)");
    knob<std::string>(simulate, "--distance", "distance", k, "kolmogorov or levy");
    knob<std::string>(simulate, "--noise", "noise", k, "gaussian, rademacher, centered_uniform, two_point:P");
    knob<double>(simulate, "--kappa-sq", "kappa_sq", k, "reference variance (default: computed)");
    knob<std::size_t>(simulate, "--warmup", "warmup", k, "superlinear warmup length (default: automatic)");
    knob<std::string>(simulate, "--grid", "grid", k, "chain mode: residual grid dyadic:A:B");
    knob<std::size_t>(simulate, "--threads", "threads", k, "worker threads (results do not depend on it)");

    auto* paper = app.add_subcommand("paper-examples", "reproduce the worked examples with pass/fail per claim");
    knob<std::string>(paper, "--which", "which", k, "1, 4, 5, 6, ar1 or all");
    knob<std::uint64_t>(paper, "--seed", "seed", k, "RNG seed (default 1)");
    knob<std::size_t>(paper, "--paths", "paths", k, "simulation paths (default 100000)");
    knob<std::size_t>(paper, "--threads", "threads", k, "worker threads");

    auto* rerun = app.add_subcommand("rerun", "re-execute the configuration embedded in a report");
    rerun->add_option("report", report_path, "report JSON")->required();

    for (auto* sub : {diag, linear, super, frac, simulate, paper, rerun}) common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error(Error(ErrorCode::UsageError, e.what(), ""));
    }

    try {
        Json doc;
        if (rerun->parsed()) {
            doc = martapprox::cmd::rerun(io::read_json_file(report_path));
        } else {
            config.command = app.get_subcommands().front()->get_name();
            load_inputs(in, config);
            doc = martapprox::cmd::run(config);
        }
        const std::string text = martapprox::cmd::dump(doc);
        if (out_path.empty()) {
            std::cout << text;
        } else {
            io::write_text_file(out_path, text);
        }
        return 0;
    } catch (const Error& e) {
        return report_error(e);
    } catch (const std::exception& e) {
        return report_error(Error(ErrorCode::InvalidInput, e.what(), ""));
    }
}
