#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "martapprox/commands.hpp"
#include "martapprox/error.hpp"
#include "martapprox/frac_poisson.hpp"

namespace py = pybind11;
using martapprox::cmd::Json;
namespace io = martapprox::io;

namespace {

Json parse(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw martapprox::Error(martapprox::ErrorCode::InvalidInput, e.what());
    }
}

// Poisson solution, plus norm and martingale kernel for a chain/observable pair.
std::string analyze_chain(const std::string& chain_json, const std::string& g_json) {
    const auto chain = io::parse_chain(parse(chain_json));
    const auto g = io::parse_observable(parse(g_json), chain);
    const auto pn = martapprox::markov::plus_norm_sq(chain, g);
    const auto mk = martapprox::markov::martingale_kernel(chain, g);
    const Json out = {{"pi", io::to_json(chain.pi())},
                      {"u", io::to_json(pn.solution.u.values())},
                      {"plus_norm_sq", io::number(pn.value)},
                      {"kappa_sq", io::number(mk.kappa_sq)},
                      {"H", io::to_json(mk.h)}};
    return out.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "martapprox native core";
    m.attr("__version__") = MARTAPPROX_VERSION;

    static py::exception<martapprox::Error> error(m, "MartapproxError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const martapprox::Error& e) {
            error(io::to_json(e).dump().c_str());
        }
    });

    m.def(
        "run",
        [](const std::string& config_json) {
            return martapprox::cmd::run(martapprox::cmd::RunConfig::from_json(parse(config_json))).dump();
        },
        py::arg("config_json"), "Run a command from a RunConfig JSON document; returns the report JSON.");
    m.def(
        "rerun", [](const std::string& report_json) { return martapprox::cmd::rerun(parse(report_json)).dump(); },
        py::arg("report_json"));
    m.def("analyze_chain", &analyze_chain, py::arg("chain_json"), py::arg("g_json"));
    m.def(
        "beta_coefficients", [](std::size_t order) { return martapprox::frac::beta_coefficients(order).beta; },
        py::arg("order"));
    m.def("beta_tail", &martapprox::frac::beta_tail, py::arg("order"));
}
