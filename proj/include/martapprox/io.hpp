#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "martapprox/bernoulli_shift.hpp"
#include "martapprox/error.hpp"
#include "martapprox/markov_core.hpp"
#include "martapprox/sequence_models.hpp"
#include "martapprox/simulate.hpp"

/**
 * Input documents and report serialization.
 *
 * Inputs are JSON documents; parse errors carry the offending field as a
 * path such as "Q[1][2]" or "columns.0[4]". Coefficient files may also be
 * plain text with one number per line.
 */
namespace martapprox::io {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Reads a coefficient file: JSON document or whitespace-separated numbers.
/// Plain text becomes {"generator": "custom_array", "values": [...]}.
Json read_coeff_file(const std::filesystem::path& path);

/// {"n_states": n, "Q": [[...], ...], "pi": [...] (optional)}
markov::StationaryChain parse_chain(const Json& doc);
/// {"values": [...], "center": false}; with center = true the pi-mean is removed.
markov::Observable parse_observable(const Json& doc, const markov::StationaryChain& chain);

/// Generator spec text: "geometric:0.5", "example5", "example6", "power:0.75",
/// "custom_array:1,-1". Returns the equivalent coefficient document.
Json generator_doc(std::string_view spec);

/// Single-column coefficient document -> source. Accepted forms:
///   {"generator": "geometric", "rho": r}     {"generator": "example5"}
///   {"generator": "power", "exponent": p}    {"generator": "custom_array", "values": [...]}
///   {"generator": "data", "values": [...]}   (no tail bound: TailNotCertified where one is needed)
seq::CoeffSource parse_coeff_source(const Json& doc);

/// Multi-column document: {"columns": {"key": [...], ...}} or
/// {"columns": {"key": {generator doc}, ...}}, or {"generator": "example6"}, or
/// any single-column document (one column with key "0").
seq::CoeffArray parse_coeff_array(const Json& doc);

/// {"real": bool, "coeffs": {"r": [re, im], ...}}
shift::FourierObservable parse_fourier(const Json& doc);
Json to_json(const shift::FourierObservable& g);

Json to_json(const SlopeVerdict& v);
Json to_json(const seq::CauchyCheck& c);
Json to_json(const seq::NormCondition& c);
Json to_json(const seq::MAVerdict& v);
Json to_json(const sim::CcltReport& r);
Json to_json(const markov::PairKernel& k);
Json to_json(const Eigen::VectorXd& v);
Json to_json(const Eigen::MatrixXd& m);
Json to_json(const Error& e);

/// NaN and infinities become the strings "nan", "inf", "-inf".
Json number(double x);

}  // namespace martapprox::io
