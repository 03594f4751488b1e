#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace martapprox::seq {

/**
 * @brief Supplier of a square-summable coefficient sequence a_0, a_1, ...
 *
 * Three kinds exist:
 *  - finite: explicit values, zero beyond the last one;
 *  - data: explicit values with nothing known beyond them, optionally
 *    carrying an analytic bound for the squared tail;
 *  - generator: a named closed-form rule with a certified tail bound.
 *
 * `tail_sq(N)` returns a certified upper bound on sum_{i>N} a_i^2, +inf when
 * the sequence is known not to be square summable, and nullopt when no bound
 * can be established.
 */
class CoeffSource {
public:
    using Rule = std::function<double(std::size_t)>;

    /// The empty finite sequence (all zeros).
    CoeffSource() = default;

    static CoeffSource finite(std::vector<double> values, std::string name = "custom_array");
    static CoeffSource data(std::vector<double> values, Rule tail_sq = {}, std::string name = "data");
    static CoeffSource generator(std::string name, Rule rule, Rule tail_sq,
                                 std::map<std::string, double> params = {});

    /// a_i = rho^i, |rho| < 1.
    static CoeffSource geometric(double rho);
    /// a_j = 1 / (sqrt(j+1) log(j+2)).
    static CoeffSource example5();
    /// Column `column` (0: cosine, 1: sine) of the two-column array with
    /// b_n = cos(sqrt(log n)) or sin(sqrt(log n)) for n >= 2 and b_0 = b_1 = 0.
    static CoeffSource example6_column(int column);
    /// a_0 = 0 and a_n = n^p - (n-1)^p, so b_n = n^p. Not square summable for p > 1/2.
    static CoeffSource power_partial_sums(double exponent);

    double at(std::size_t i) const;
    std::vector<double> take(std::size_t count) const;
    /// Number of explicit entries; nullopt for generators.
    std::optional<std::size_t> horizon() const noexcept;
    std::optional<double> tail_sq(std::size_t n) const;
    /// True when the explicit entries are followed by zeros.
    bool zero_tail() const noexcept { return kind_ == Kind::Finite; }

    const std::string& name() const noexcept { return name_; }
    const std::map<std::string, double>& params() const noexcept { return params_; }

private:
    enum class Kind { Finite, Data, Generator };

    Kind kind_ = Kind::Finite;
    std::string name_ = "zero";
    std::map<std::string, double> params_;
    std::shared_ptr<const std::vector<double>> values_ = std::make_shared<const std::vector<double>>();
    std::vector<double> suffix_sq_{0.0};  // finite/data: sum_{i>=n} a_i^2 over explicit entries
    Rule rule_;
    Rule tail_sq_;
};

/// Closed-form partial sums of the two-column cos/sin array: b_{n,column} for n >= 0.
double example6_partial_sum(int column, std::size_t n);

}  // namespace martapprox::seq
