#include "martapprox/simulate.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <thread>

#include "martapprox/detail/compensated.hpp"
#include "martapprox/error.hpp"

namespace martapprox::sim {
namespace {

using detail::CompensatedSum;

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

class PathSampler {
public:
    explicit PathSampler(const markov::StationaryChain& chain) {
        const auto& pi = chain.pi();
        initial_ = std::discrete_distribution<std::size_t>(pi.data(), pi.data() + pi.size());
        const markov::Matrix& q = chain.q();
        for (Eigen::Index r = 0; r < q.rows(); ++r) {
            const Eigen::VectorXd row = q.row(r).transpose();
            rows_.emplace_back(row.data(), row.data() + row.size());
        }
    }

    template <typename Visit>
    void run(std::size_t n, std::mt19937_64& rng, Visit&& visit) {
        std::size_t w = initial_(rng);
        visit(0, w);
        for (std::size_t k = 1; k <= n; ++k) {
            w = rows_[w](rng);
            visit(k, w);
        }
    }

private:
    std::discrete_distribution<std::size_t> initial_;
    std::vector<std::discrete_distribution<std::size_t>> rows_;
};

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& x) {
    CompensatedSum s, s2;
    for (double v : x) {
        s.add(v);
        s2.add(v * v);
    }
    const auto m = static_cast<double>(x.size());
    MeanSe out;
    out.mean = s.value() / m;
    if (x.size() > 1) {
        const double var = std::max(0.0, (s2.value() - m * out.mean * out.mean) / (m - 1.0));
        out.se = std::sqrt(var / m);
    }
    return out;
}

/// Levy distance between the empirical law of sorted `x` and a reference CDF
/// `f` with left limits `f_left`.
double levy_sorted(const std::vector<double>& x, const std::function<double(double)>& f,
                   const std::function<double(double)>& f_left) {
    const auto m = static_cast<double>(x.size());
    auto ok = [&](double eps) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            const auto di = static_cast<double>(i);
            if ((di + 1.0) / m > f(x[i] + eps) + eps) return false;
            if (di / m < f_left(x[i] - eps) - eps) return false;
        }
        return true;
    };
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

double distance_to_normal(std::vector<double>& values, double kappa_sq, DistanceKind kind) {
    const double sigma = std::sqrt(kappa_sq);
    return kind == DistanceKind::Kolmogorov ? kolmogorov_distance(values, sigma) : levy_distance(values, sigma);
}

void resolve_degenerate(double kappa_sq, DistanceKind& kind, CcltReport& rep, const CcltOptions& opts) {
    if (!(kappa_sq >= 0.0) || !std::isfinite(kappa_sq)) {
        throw Error(ErrorCode::InvalidInput, "kappa_sq must be finite and >= 0", "kappa_sq");
    }
    if (kappa_sq == 0.0 && kind == DistanceKind::Kolmogorov) {
        if (!opts.allow_degenerate) {
            throw Error(ErrorCode::DegenerateKappa,
                        "kappa_sq = 0 has no continuous reference law; use the Levy distance to the point mass at 0",
                        "kappa_sq");
        }
        kind = DistanceKind::Levy;
    }
    rep.degenerate_kappa = kappa_sq == 0.0;
    rep.distance_kind = kind;
}

void fill_moments(const std::vector<double>& values, CcltReport& rep) {
    std::vector<double> sq(values.size());
    std::transform(values.begin(), values.end(), sq.begin(), [](double v) { return v * v; });
    const auto ms = mean_se(sq);
    rep.kappa_sq_hat = ms.mean;
    rep.kappa_sq_hat_se = ms.se;
}

}  // namespace

NoiseSpec NoiseSpec::parse(std::string_view text) {
    NoiseSpec s;
    if (text == "gaussian") {
        s.kind = Kind::Gaussian;
    } else if (text == "rademacher") {
        s.kind = Kind::Rademacher;
    } else if (text == "centered_uniform") {
        s.kind = Kind::CenteredUniform;
    } else if (text.starts_with("two_point:")) {
        s.kind = Kind::TwoPoint;
        const std::string num(text.substr(10));
        try {
            std::size_t used = 0;
            s.p = std::stod(num, &used);
            if (used != num.size()) throw std::invalid_argument(num);
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidInput, "two_point needs a probability, e.g. two_point:0.5", "noise");
        }
        if (!(s.p > 0.0 && s.p <= 1.0)) {
            throw Error(ErrorCode::InvalidInput, "two_point probability must lie in (0, 1]", "noise");
        }
    } else {
        throw Error(ErrorCode::InvalidInput,
                    "unknown noise '" + std::string(text) +
                        "' (gaussian, rademacher, centered_uniform, two_point:P)",
                    "noise");
    }
    return s;
}

std::string NoiseSpec::name() const {
    switch (kind) {
        case Kind::Gaussian: return "gaussian";
        case Kind::Rademacher: return "rademacher";
        case Kind::CenteredUniform: return "centered_uniform";
        case Kind::TwoPoint: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", p);
            return std::string("two_point:") + buf;
        }
    }
    return "gaussian";
}

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
    const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(seed), hi(seed), lo(a), hi(a), lo(b), hi(b)};
    return std::mt19937_64(seq);
}

std::vector<std::size_t> simulate_path(const markov::StationaryChain& chain, std::size_t n, std::uint64_t seed,
                                       std::uint64_t index) {
    PathSampler sampler(chain);
    auto rng = substream(seed, index);
    std::vector<std::size_t> path(n + 1);
    sampler.run(n, rng, [&](std::size_t k, std::size_t w) { path[k] = w; });
    return path;
}

ChainSamples simulate_chain(const markov::StationaryChain& chain, const markov::Observable& g, std::size_t n,
                            std::size_t paths, std::uint64_t seed, const RunOptions& run) {
    if (n < 1) throw Error(ErrorCode::InvalidInput, "n must be >= 1", "n");
    if (paths < 1) throw Error(ErrorCode::InvalidInput, "paths must be >= 1", "paths");
    ChainSamples out;
    out.n = n;
    out.w0.resize(paths);
    out.s_over_sqrt_n.resize(paths);
    const PathSampler proto(chain);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    const Eigen::VectorXd& gv = g.values();
    parallel_for(paths, run.threads, [&](std::size_t p) {
        PathSampler sampler = proto;
        auto rng = substream(seed, p);
        double s = 0.0;
        sampler.run(n, rng, [&](std::size_t k, std::size_t w) {
            if (k == 0) {
                out.w0[p] = w;
            } else {
                s += gv[static_cast<Eigen::Index>(w)];
            }
        });
        out.s_over_sqrt_n[p] = s * scale;
    });
    return out;
}

std::size_t choose_warmup(const seq::CoeffArray& arr, double budget) {
    const auto total_tail = [&](std::size_t w) {
        double t = 0.0;
        for (const auto& col : arr) {
            const auto tail = col.source.tail_sq(w);
            if (!tail || !std::isfinite(*tail)) {
                throw Error(ErrorCode::TailNotCertified,
                            "column '" + col.key + "' has no finite certified tail; cannot choose a warmup",
                            "columns." + col.key);
            }
            t += *tail;
        }
        return t;
    };
    constexpr std::size_t kMaxWarmup = std::size_t{1} << 30;
    std::size_t hi = 1;
    while (total_tail(hi) >= budget) {
        if (hi >= kMaxWarmup) {
            throw Error(ErrorCode::TailNotCertified, "coefficient tail decays too slowly for a finite warmup");
        }
        hi *= 2;
    }
    std::size_t lo = 0;  // invariant: tail(hi) < budget
    if (total_tail(0) < budget) return 0;
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        (total_tail(mid) < budget ? hi : lo) = mid;
    }
    return hi;
}

SuperlinearSamples simulate_superlinear(const seq::CoeffArray& arr, const std::vector<NoiseSpec>& noise,
                                        std::size_t n, std::size_t paths, std::uint64_t seed,
                                        std::optional<std::size_t> warmup, const RunOptions& run) {
    if (n < 1) throw Error(ErrorCode::InvalidInput, "n must be >= 1", "n");
    if (paths < 1) throw Error(ErrorCode::InvalidInput, "paths must be >= 1", "paths");
    if (noise.size() != 1 && noise.size() != arr.size()) {
        throw Error(ErrorCode::InvalidInput, "give one noise spec or one per column", "noise");
    }
    SuperlinearSamples out;
    out.n = n;
    out.warmup = warmup ? *warmup : choose_warmup(arr);
    const std::size_t w_len = out.warmup;
    for (const auto& col : arr) {
        const auto tail = col.source.tail_sq(w_len);
        out.truncation_var_bound += tail ? *tail : std::numeric_limits<double>::infinity();
    }

    // Weight of each innovation in S_n under the filter truncated at lag W:
    // xi_m, m = 1..n:   B(min(n - m, W));  xi_{-p}, p = 0..W-1:  B(min(p + n, W)) - B(p).
    std::vector<std::vector<double>> weights;
    std::vector<NoiseSpec> specs;
    for (std::size_t j = 0; j < arr.size(); ++j) {
        const auto seq = seq::partial_sums(arr[j].source, w_len);
        const auto& b = seq.b;
        std::vector<double> w(n + w_len);
        for (std::size_t m = 1; m <= n; ++m) w[m - 1] = b[std::min(n - m, w_len)];
        for (std::size_t p = 0; p < w_len; ++p) w[n + p] = b[std::min(p + n, w_len)] - b[p];
        weights.push_back(std::move(w));
        specs.push_back(noise.size() == 1 ? noise[0] : noise[j]);
        out.noise.push_back(specs.back().name());
    }

    out.s_over_sqrt_n.resize(paths);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    parallel_for(paths, run.threads, [&](std::size_t p) {
        double total = 0.0;
        for (std::size_t j = 0; j < weights.size(); ++j) {
            const auto& w = weights[j];
            auto rng = substream(seed, p, j + 1);
            double s = 0.0;
            switch (specs[j].kind) {
                case NoiseSpec::Kind::Gaussian: {
                    std::normal_distribution<double> d;
                    for (double wt : w) s += wt * d(rng);
                    break;
                }
                case NoiseSpec::Kind::Rademacher: {
                    std::size_t t = 0;
                    while (t < w.size()) {
                        std::uint64_t bits = rng();
                        const std::size_t stop = std::min(w.size(), t + 64);
                        for (; t < stop; ++t, bits >>= 1) {
                            s += (bits & 1u) ? w[t] : -w[t];
                        }
                    }
                    break;
                }
                case NoiseSpec::Kind::CenteredUniform: {
                    const double r3 = std::sqrt(3.0);
                    std::uniform_real_distribution<double> d(-r3, r3);
                    for (double wt : w) s += wt * d(rng);
                    break;
                }
                case NoiseSpec::Kind::TwoPoint: {
                    const double prob = specs[j].p;
                    const double amp = 1.0 / std::sqrt(prob);
                    std::uniform_real_distribution<double> d(0.0, 1.0);
                    for (double wt : w) {
                        const double u = d(rng);
                        if (u < 0.5 * prob) {
                            s += wt * amp;
                        } else if (u < prob) {
                            s -= wt * amp;
                        }
                    }
                    break;
                }
            }
            total += s;
        }
        out.s_over_sqrt_n[p] = total * scale;
    });
    return out;
}

std::string_view to_string(DistanceKind k) noexcept {
    return k == DistanceKind::Kolmogorov ? "kolmogorov" : "levy";
}

DistanceKind parse_distance(std::string_view text) {
    if (text == "kolmogorov") return DistanceKind::Kolmogorov;
    if (text == "levy") return DistanceKind::Levy;
    throw Error(ErrorCode::InvalidInput, "distance must be 'kolmogorov' or 'levy'", "distance");
}

double kolmogorov_distance(std::vector<double>& values, double sigma) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const auto m = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double f = sigma > 0.0 ? normal_cdf(values[i] / sigma) : (values[i] >= 0.0 ? 1.0 : 0.0);
        const auto di = static_cast<double>(i);
        d = std::max({d, f - di / m, (di + 1.0) / m - f});
    }
    return std::min(d, 1.0);
}

double levy_distance(std::vector<double>& values, double sigma) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    if (sigma > 0.0) {
        const auto f = [sigma](double x) { return normal_cdf(x / sigma); };
        return levy_sorted(values, f, f);
    }
    return levy_sorted(
        values, [](double x) { return x >= 0.0 ? 1.0 : 0.0; }, [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

CcltReport cclt_check(const ChainSamples& samples, const Eigen::VectorXd& pi, double kappa_sq, DistanceKind kind,
                      const CcltOptions& opts) {
    CcltReport rep;
    rep.n = samples.n;
    rep.paths = samples.s_over_sqrt_n.size();
    rep.kappa_sq = kappa_sq;
    resolve_degenerate(kappa_sq, kind, rep, opts);
    fill_moments(samples.s_over_sqrt_n, rep);

    const auto n_states = static_cast<std::size_t>(pi.size());
    std::vector<std::vector<double>> by_state(n_states);
    for (std::size_t p = 0; p < samples.w0.size(); ++p) {
        const std::size_t w = samples.w0[p];
        if (w >= n_states) throw Error(ErrorCode::InvalidInput, "sample label out of range", "w0");
        by_state[w].push_back(samples.s_over_sqrt_n[p]);
    }
    for (std::size_t w = 0; w < n_states; ++w) {
        StateDistance sd;
        sd.state = w;
        sd.count = by_state[w].size();
        sd.pi = pi[static_cast<Eigen::Index>(w)];
        // An unvisited state contributes the metric's upper bound.
        sd.distance = sd.count == 0 ? 1.0 : distance_to_normal(by_state[w], kappa_sq, kind);
        rep.distance += sd.pi * sd.distance;
        rep.per_state.push_back(sd);
    }
    rep.distance = std::clamp(rep.distance, 0.0, 1.0);
    return rep;
}

CcltReport cclt_check(const std::vector<double>& s_over_sqrt_n, std::size_t n, double kappa_sq, DistanceKind kind,
                      const CcltOptions& opts) {
    CcltReport rep;
    rep.n = n;
    rep.paths = s_over_sqrt_n.size();
    rep.kappa_sq = kappa_sq;
    rep.unconditional_surrogate = true;
    resolve_degenerate(kappa_sq, kind, rep, opts);
    fill_moments(s_over_sqrt_n, rep);
    std::vector<double> v = s_over_sqrt_n;
    rep.distance = distance_to_normal(v, kappa_sq, kind);
    return rep;
}

std::vector<ResidualEstimate> empirical_residual(const markov::StationaryChain& chain, const markov::Observable& g,
                                                 const std::vector<std::size_t>& n_grid, std::size_t paths,
                                                 std::uint64_t seed, const RunOptions& run) {
    if (n_grid.empty()) throw Error(ErrorCode::InvalidInput, "empty grid", "grid");
    if (paths < 2) throw Error(ErrorCode::InvalidInput, "paths must be >= 2", "paths");
    const std::size_t n_max = *std::max_element(n_grid.begin(), n_grid.end());
    const auto limit = markov::martingale_kernel(chain, g);
    std::vector<markov::PairKernel> hbar;
    for (std::size_t n : n_grid) {
        if (n < 1) throw Error(ErrorCode::InvalidInput, "grid entries must be >= 1", "grid");
        hbar.push_back(markov::hbar_kernel(chain, g, n));
    }

    const std::size_t ng = n_grid.size();
    std::vector<double> rnn(paths * ng), rn(paths * ng);
    const PathSampler proto(chain);
    parallel_for(paths, run.threads, [&](std::size_t p) {
        PathSampler sampler = proto;
        auto rng = substream(seed, p);
        std::vector<std::size_t> path(n_max + 1);
        sampler.run(n_max, rng, [&](std::size_t k, std::size_t w) { path[k] = w; });
        for (std::size_t gi = 0; gi < ng; ++gi) {
            double s = 0.0, mbar = 0.0, m = 0.0;
            for (std::size_t k = 1; k <= n_grid[gi]; ++k) {
                s += g[path[k]];
                mbar += hbar[gi](path[k - 1], path[k]);
                m += limit.h(path[k - 1], path[k]);
            }
            rnn[p * ng + gi] = (s - mbar) * (s - mbar);
            rn[p * ng + gi] = (s - m) * (s - m);
        }
    });

    std::vector<ResidualEstimate> out;
    for (std::size_t gi = 0; gi < ng; ++gi) {
        std::vector<double> a(paths), b(paths);
        for (std::size_t p = 0; p < paths; ++p) {
            a[p] = rnn[p * ng + gi];
            b[p] = rn[p * ng + gi];
        }
        ResidualEstimate e;
        e.n = n_grid[gi];
        const auto ma = mean_se(a);
        const auto mb = mean_se(b);
        e.rnn_mean = ma.mean;
        e.rnn_se = ma.se;
        e.rn_mean = mb.mean;
        e.rn_se = mb.se;
        e.rnn_exact = markov::residual_second_moment(chain, g, e.n, e.n).value;
        e.rn_exact = markov::martingale_residual_second_moment(chain, g, e.n);
        out.push_back(e);
    }
    return out;
}

}  // namespace martapprox::sim
