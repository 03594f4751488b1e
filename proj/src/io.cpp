#include "martapprox/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "martapprox/error.hpp"

namespace martapprox::io {
namespace {

[[noreturn]] void bad(const std::string& message, const std::string& path) {
    throw Error(ErrorCode::InvalidInput, message, path);
}

const Json& field(const Json& doc, const char* name, const std::string& path) {
    if (!doc.is_object()) bad("expected an object", path);
    const auto it = doc.find(name);
    if (it == doc.end()) bad(std::string("missing field '") + name + "'", path.empty() ? name : path + "." + name);
    return *it;
}

double to_double(const Json& v, const std::string& path) {
    if (!v.is_number()) bad("expected a number", path);
    const double x = v.get<double>();
    if (!std::isfinite(x)) bad("expected a finite number", path);
    return x;
}

std::vector<double> to_doubles(const Json& v, const std::string& path) {
    if (!v.is_array()) bad("expected an array of numbers", path);
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(to_double(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::string generator_name(const Json& doc) {
    const auto& g = field(doc, "generator", "");
    if (!g.is_string()) bad("expected a string", "generator");
    return g.get<std::string>();
}

double parse_number(std::string_view text, const std::string& path) {
    const std::string s(text);
    try {
        std::size_t used = 0;
        const double x = std::stod(s, &used);
        if (used == s.size() && std::isfinite(x)) return x;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::UsageError, "cannot parse number '" + s + "'", path);
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string(), path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::InvalidInput, std::string("malformed JSON: ") + e.what(), path.string());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string(), path.string());
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string(), path.string());
}

Json read_coeff_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string(), path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
        try {
            Json doc = Json::parse(text);
            if (doc.is_array()) doc = Json{{"generator", "custom_array"}, {"values", doc}};
            return doc;
        } catch (const Json::parse_error& e) {
            throw Error(ErrorCode::InvalidInput, std::string("malformed JSON: ") + e.what(), path.string());
        }
    }
    Json values = Json::array();
    std::istringstream lines(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        std::istringstream words(line);
        std::string w;
        while (words >> w) {
            if (w.starts_with("#")) break;
            try {
                values.push_back(parse_number(w, ""));
            } catch (const Error&) {
                throw Error(ErrorCode::InvalidInput, "not a number: '" + w + "'",
                            path.string() + ":" + std::to_string(lineno));
            }
        }
    }
    return Json{{"generator", "custom_array"}, {"values", values}};
}

markov::StationaryChain parse_chain(const Json& doc) {
    const auto& q = field(doc, "Q", "");
    if (!q.is_array() || q.empty()) bad("Q must be a non-empty array of rows", "Q");
    const std::size_t n = q.size();
    if (doc.contains("n_states")) {
        const auto& ns = doc["n_states"];
        if (!ns.is_number_integer() || ns.get<long long>() != static_cast<long long>(n)) {
            bad("n_states does not match the number of rows of Q", "n_states");
        }
    }
    markov::Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::string row_path = "Q[" + std::to_string(i) + "]";
        const auto row = to_doubles(q[i], row_path);
        if (row.size() != n) bad("row length differs from the number of states", row_path);
        for (std::size_t j = 0; j < n; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
    std::optional<markov::Vector> pi;
    if (doc.contains("pi") && !doc["pi"].is_null()) {
        const auto p = to_doubles(doc["pi"], "pi");
        if (p.size() != n) bad("pi length differs from the number of states", "pi");
        pi = Eigen::Map<const markov::Vector>(p.data(), static_cast<Eigen::Index>(n));
    }
    return markov::StationaryChain::validate(m, pi);
}

markov::Observable parse_observable(const Json& doc, const markov::StationaryChain& chain) {
    const auto v = to_doubles(field(doc, "values", ""), "values");
    if (v.size() != chain.n_states()) bad("values length differs from the number of states", "values");
    markov::Vector g = Eigen::Map<const markov::Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
    const bool center = doc.contains("center") && doc["center"].is_boolean() && doc["center"].get<bool>();
    return center ? markov::Observable::centered(chain, std::move(g))
                  : markov::Observable::from_values(chain, std::move(g));
}

Json generator_doc(std::string_view spec) {
    const auto colon = spec.find(':');
    const std::string name(spec.substr(0, colon));
    const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
    const auto need_arg = [&](const char* what) {
        if (arg.empty()) throw Error(ErrorCode::UsageError, "generator '" + name + "' needs " + what, "generator");
    };
    if (name == "geometric") {
        need_arg("a ratio, e.g. geometric:0.5");
        return {{"generator", "geometric"}, {"rho", parse_number(arg, "generator")}};
    }
    if (name == "power") {
        need_arg("an exponent, e.g. power:0.75");
        return {{"generator", "power"}, {"exponent", parse_number(arg, "generator")}};
    }
    if (name == "example5" || name == "example6") {
        if (!arg.empty()) throw Error(ErrorCode::UsageError, "generator '" + name + "' takes no parameters", "generator");
        return {{"generator", name}};
    }
    if (name == "custom_array") {
        need_arg("values, e.g. custom_array:1,-1");
        Json values = Json::array();
        std::string_view rest = arg;
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            values.push_back(parse_number(rest.substr(0, comma), "generator"));
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
        return {{"generator", "custom_array"}, {"values", values}};
    }
    throw Error(ErrorCode::UsageError,
                "unknown generator '" + name + "' (geometric:RHO, example5, example6, power:P, custom_array:V1,V2,...)",
                "generator");
}

seq::CoeffSource parse_coeff_source(const Json& doc) {
    const std::string name = generator_name(doc);
    if (name == "geometric") return seq::CoeffSource::geometric(to_double(field(doc, "rho", ""), "rho"));
    if (name == "example5") return seq::CoeffSource::example5();
    if (name == "power") return seq::CoeffSource::power_partial_sums(to_double(field(doc, "exponent", ""), "exponent"));
    if (name == "custom_array") return seq::CoeffSource::finite(to_doubles(field(doc, "values", ""), "values"));
    if (name == "data") return seq::CoeffSource::data(to_doubles(field(doc, "values", ""), "values"));
    if (name == "example6") {
        int column = 0;
        if (doc.contains("column")) {
            const auto& c = doc["column"];
            if (!c.is_number_integer() || (c.get<int>() != 0 && c.get<int>() != 1)) bad("column must be 0 or 1", "column");
            column = c.get<int>();
        }
        return seq::CoeffSource::example6_column(column);
    }
    bad("unknown generator '" + name + "'", "generator");
}

seq::CoeffArray parse_coeff_array(const Json& doc) {
    if (doc.is_object() && doc.contains("columns")) {
        const auto& cols = doc["columns"];
        if (!cols.is_object() || cols.empty()) bad("columns must be a non-empty object", "columns");
        seq::CoeffArray arr;
        for (const auto& [key, value] : cols.items()) {
            const std::string path = "columns." + key;
            try {
                if (value.is_array()) {
                    arr.push_back({key, seq::CoeffSource::finite(to_doubles(value, path), "custom_array")});
                } else {
                    arr.push_back({key, parse_coeff_source(value)});
                }
            } catch (const Error& e) {
                throw e.with_path_prefix(path);
            }
        }
        return arr;
    }
    if (generator_name(doc) == "example6" && !doc.contains("column")) {
        return {{"0", seq::CoeffSource::example6_column(0)}, {"1", seq::CoeffSource::example6_column(1)}};
    }
    return {{"0", parse_coeff_source(doc)}};
}

shift::FourierObservable parse_fourier(const Json& doc) {
    const auto& coeffs = field(doc, "coeffs", "");
    if (!coeffs.is_object()) bad("coeffs must map integer frequencies to [re, im]", "coeffs");
    std::map<std::int64_t, shift::Complex> m;
    for (const auto& [key, value] : coeffs.items()) {
        const std::string path = "coeffs." + key;
        std::int64_t r = 0;
        try {
            std::size_t used = 0;
            r = std::stoll(key, &used);
            if (used != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
            bad("frequency keys must be integers", path);
        }
        shift::Complex c;
        if (value.is_number()) {
            c = {to_double(value, path), 0.0};
        } else {
            const auto pair = to_doubles(value, path);
            if (pair.size() != 2) bad("expected [re, im]", path);
            c = {pair[0], pair[1]};
        }
        m[r] += c;
    }
    const bool real = doc.contains("real") && doc["real"].is_boolean() && doc["real"].get<bool>();
    return shift::FourierObservable::make(std::move(m), real);
}

Json to_json(const shift::FourierObservable& g) {
    Json coeffs = Json::object();
    for (const auto& [r, c] : g.coeffs()) coeffs[std::to_string(r)] = {number(c.real()), number(c.imag())};
    return {{"real", g.real()}, {"coeffs", coeffs}};
}

Json number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

namespace {
Json numbers(const std::vector<double>& v) {
    Json out = Json::array();
    for (double x : v) out.push_back(number(x));
    return out;
}
}  // namespace

Json to_json(const SlopeVerdict& v) {
    return {{"verdict", std::string(to_string(v.verdict))},
            {"slope", number(v.slope)},
            {"threshold", number(v.threshold)},
            {"margin", number(v.margin)},
            {"all_zero", v.all_zero},
            {"grid", numbers(v.grid)},
            {"values", numbers(v.values)}};
}

Json to_json(const seq::CauchyCheck& c) {
    return {{"verdict", std::string(to_string(c.verdict))},
            {"window", {c.window_lo, c.window_hi}},
            {"oscillation_lower", number(c.oscillation_lower)},
            {"oscillation_upper", number(c.oscillation_upper)},
            {"tol", number(c.tol)}};
}

Json to_json(const seq::NormCondition& c) {
    Json j = to_json(c.verdict);
    j["i_max"] = c.i_max;
    j["tail_bounds"] = numbers(c.tail_bounds);
    return j;
}

Json to_json(const seq::MAVerdict& v) {
    return {{"exists", std::string(to_string(v.exists))},
            {"kappa_sq", v.kappa_sq ? number(*v.kappa_sq) : Json(nullptr)},
            {"kappa_source", v.kappa_source},
            {"n_max", v.n_max},
            {"bbar_norm_sq_final", number(v.bbar_norm_sq_final)},
            {"norm_condition", to_json(v.norm_condition)},
            {"bbar_cauchy", to_json(v.bbar_cauchy)},
            {"b_cauchy", to_json(v.b_cauchy)}};
}

Json to_json(const sim::CcltReport& r) {
    Json per_state = Json::array();
    for (const auto& s : r.per_state) {
        per_state.push_back(
            {{"state", s.state}, {"count", s.count}, {"pi", number(s.pi)}, {"distance", number(s.distance)}});
    }
    return {{"n", r.n},
            {"paths", r.paths},
            {"kappa_sq", number(r.kappa_sq)},
            {"kappa_sq_hat", number(r.kappa_sq_hat)},
            {"kappa_sq_hat_se", number(r.kappa_sq_hat_se)},
            {"distance", number(r.distance)},
            {"distance_kind", std::string(to_string(r.distance_kind))},
            {"unconditional_surrogate", r.unconditional_surrogate},
            {"degenerate_kappa", r.degenerate_kappa},
            {"per_state", per_state}};
}

Json to_json(const Eigen::VectorXd& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v[i]));
    return out;
}

Json to_json(const Eigen::MatrixXd& m) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(to_json(Eigen::VectorXd(m.row(i).transpose())));
    return out;
}

Json to_json(const markov::PairKernel& k) { return to_json(k.values); }

Json to_json(const Error& e) {
    return {{"error", {{"code", std::string(to_string(e.code()))}, {"message", e.what()}, {"path", e.path()}}}};
}

}  // namespace martapprox::io
