#include "martapprox/coeff_source.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "martapprox/error.hpp"

namespace martapprox::seq {
namespace {

std::vector<double> suffix_squares(const std::vector<double>& v) {
    std::vector<double> s(v.size() + 1, 0.0);
    for (std::size_t i = v.size(); i-- > 0;) s[i] = s[i + 1] + v[i] * v[i];
    return s;
}

// Increment of sqrt(log t) between t-1 and t, without cancellation.
double sqrt_log_step(std::size_t t) {
    const double x = std::sqrt(std::log(static_cast<double>(t)));
    const double y = std::sqrt(std::log(static_cast<double>(t - 1)));
    return std::log1p(1.0 / static_cast<double>(t - 1)) / (x + y);
}

double example6_increment(int column, std::size_t t) {
    if (t < 2) return 0.0;
    if (t == 2) return example6_partial_sum(column, 2);
    const double x = std::sqrt(std::log(static_cast<double>(t)));
    const double y = std::sqrt(std::log(static_cast<double>(t - 1)));
    const double half_step = 0.5 * sqrt_log_step(t);
    const double mid = 0.5 * (x + y);
    // cos x - cos y = -2 sin(mid) sin(half); sin x - sin y = 2 cos(mid) sin(half)
    return column == 0 ? -2.0 * std::sin(mid) * std::sin(half_step) : 2.0 * std::cos(mid) * std::sin(half_step);
}

}  // namespace

double example6_partial_sum(int column, std::size_t n) {
    if (n < 2) return 0.0;
    const double theta = std::sqrt(std::log(static_cast<double>(n)));
    return column == 0 ? std::cos(theta) : std::sin(theta);
}

CoeffSource CoeffSource::finite(std::vector<double> values, std::string name) {
    CoeffSource s;
    s.kind_ = Kind::Finite;
    s.name_ = std::move(name);
    s.suffix_sq_ = suffix_squares(values);
    s.values_ = std::make_shared<const std::vector<double>>(std::move(values));
    return s;
}

CoeffSource CoeffSource::data(std::vector<double> values, Rule tail_sq, std::string name) {
    CoeffSource s;
    s.kind_ = Kind::Data;
    s.name_ = std::move(name);
    s.suffix_sq_ = suffix_squares(values);
    s.values_ = std::make_shared<const std::vector<double>>(std::move(values));
    s.tail_sq_ = std::move(tail_sq);
    return s;
}

CoeffSource CoeffSource::generator(std::string name, Rule rule, Rule tail_sq, std::map<std::string, double> params) {
    CoeffSource s;
    s.kind_ = Kind::Generator;
    s.name_ = std::move(name);
    s.rule_ = std::move(rule);
    s.tail_sq_ = std::move(tail_sq);
    s.params_ = std::move(params);
    return s;
}

CoeffSource CoeffSource::geometric(double rho) {
    if (!(std::abs(rho) < 1.0)) {
        throw Error(ErrorCode::InvalidInput, "geometric generator requires |rho| < 1", "rho");
    }
    return generator(
        "geometric", [rho](std::size_t i) { return std::pow(rho, static_cast<double>(i)); },
        [rho](std::size_t n) { return std::pow(rho, 2.0 * static_cast<double>(n + 1)) / (1.0 - rho * rho); },
        {{"rho", rho}});
}

CoeffSource CoeffSource::example5() {
    auto rule = [](std::size_t j) {
        const auto x = static_cast<double>(j);
        return 1.0 / (std::sqrt(x + 1.0) * std::log(x + 2.0));
    };
    // a_i^2 <= 1/((i+1) log^2(i+1)) is decreasing in i, so the tail after N >= 1
    // is at most the integral from N+1 to infinity, 1/log(N+1).
    auto tail = [rule](std::size_t n) {
        if (n == 0) return rule(1) * rule(1) + 1.0 / std::log(2.0);
        return 1.0 / std::log(static_cast<double>(n) + 1.0);
    };
    return generator("example5", rule, tail);
}

CoeffSource CoeffSource::example6_column(int column) {
    if (column != 0 && column != 1) {
        throw Error(ErrorCode::InvalidInput, "example6 has columns 0 and 1 only");
    }
    auto rule = [column](std::size_t t) { return example6_increment(column, t); };
    // |c_t| <= 1 / (2 (t-1) sqrt(log(t-1))) for t >= 3, so
    // sum_{t>N} c_t^2 <= 1 / (4 log(N) (N-1)) for N >= 2.
    auto tail = [rule](std::size_t n) {
        if (n >= 2) {
            const auto dn = static_cast<double>(n);
            return 1.0 / (4.0 * std::log(dn) * (dn - 1.0));
        }
        const double c2 = rule(2);
        return c2 * c2 + 1.0 / (4.0 * std::log(2.0));
    };
    return generator("example6", rule, tail, {{"column", static_cast<double>(column)}});
}

CoeffSource CoeffSource::power_partial_sums(double exponent) {
    auto rule = [exponent](std::size_t n) {
        if (n == 0) return 0.0;
        const auto dn = static_cast<double>(n);
        return std::pow(dn, exponent) - std::pow(dn - 1.0, exponent);
    };
    auto tail = [exponent](std::size_t n) {
        if (exponent >= 0.5) return std::numeric_limits<double>::infinity();
        // a_t <= p (t-1)^{p-1} for 0 < p < 1/2, t >= 2.
        const double m = std::max<double>(1.0, static_cast<double>(n));
        const double p = std::abs(exponent);
        return p * p * std::pow(m, 2.0 * exponent - 1.0) / (1.0 - 2.0 * exponent) + (n == 0 ? 1.0 : 0.0);
    };
    return generator("power_partial_sums", rule, tail, {{"exponent", exponent}});
}

double CoeffSource::at(std::size_t i) const {
    switch (kind_) {
        case Kind::Generator:
            return rule_(i);
        case Kind::Finite:
            return i < values_->size() ? (*values_)[i] : 0.0;
        case Kind::Data:
            if (i < values_->size()) return (*values_)[i];
            break;
    }
    std::ostringstream os;
    os << "coefficient index " << i << " is beyond the supplied horizon " << values_->size();
    throw Error(ErrorCode::HorizonExceeded, os.str(), name_);
}

std::vector<double> CoeffSource::take(std::size_t count) const {
    std::vector<double> out(count);
    if (kind_ != Kind::Generator && count > values_->size() && kind_ == Kind::Data) {
        at(count - 1);  // throws HorizonExceeded
    }
    for (std::size_t i = 0; i < count; ++i) out[i] = at(i);
    return out;
}

std::optional<std::size_t> CoeffSource::horizon() const noexcept {
    if (kind_ == Kind::Generator) return std::nullopt;
    return values_->size();
}

std::optional<double> CoeffSource::tail_sq(std::size_t n) const {
    switch (kind_) {
        case Kind::Generator:
            if (!tail_sq_) return std::nullopt;
            return tail_sq_(n);
        case Kind::Finite:
            return n + 1 < suffix_sq_.size() ? suffix_sq_[n + 1] : 0.0;
        case Kind::Data: {
            if (!tail_sq_) return std::nullopt;
            const std::size_t h = values_->size();
            if (h == 0) return tail_sq_(0);
            if (n + 1 >= h) return tail_sq_(n);
            return suffix_sq_[n + 1] + tail_sq_(h - 1);
        }
    }
    return std::nullopt;
}

}  // namespace martapprox::seq
