#include "martapprox/markov_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include "martapprox/error.hpp"

namespace martapprox::markov {
namespace {

std::string index_path(const char* name, Eigen::Index i) {
    std::ostringstream os;
    os << name << "[" << i << "]";
    return os.str();
}

std::vector<int> bfs_levels(const Matrix& q, bool reverse) {
    const auto n = q.rows();
    std::vector<int> level(static_cast<std::size_t>(n), -1);
    std::queue<Eigen::Index> frontier;
    level[0] = 0;
    frontier.push(0);
    while (!frontier.empty()) {
        const auto u = frontier.front();
        frontier.pop();
        for (Eigen::Index v = 0; v < n; ++v) {
            const double w = reverse ? q(v, u) : q(u, v);
            if (w > 0.0 && level[static_cast<std::size_t>(v)] < 0) {
                level[static_cast<std::size_t>(v)] = level[static_cast<std::size_t>(u)] + 1;
                frontier.push(v);
            }
        }
    }
    return level;
}

// Strong connectivity plus gcd of cycle lengths on the support graph.
void check_ergodic(const Matrix& q) {
    const auto fwd = bfs_levels(q, false);
    const auto bwd = bfs_levels(q, true);
    for (std::size_t i = 0; i < fwd.size(); ++i) {
        if (fwd[i] < 0 || bwd[i] < 0) {
            throw Error(ErrorCode::NotErgodic, "transition graph is not strongly connected",
                        index_path("state", static_cast<Eigen::Index>(i)));
        }
    }
    // For an irreducible chain the period is gcd over edges u->v of
    // level(u) + 1 - level(v), with levels from a BFS tree.
    int period = 0;
    for (Eigen::Index u = 0; u < q.rows(); ++u) {
        for (Eigen::Index v = 0; v < q.cols(); ++v) {
            if (q(u, v) > 0.0) {
                const int d = fwd[static_cast<std::size_t>(u)] + 1 - fwd[static_cast<std::size_t>(v)];
                period = std::gcd(period, std::abs(d));
            }
        }
    }
    if (period != 1) {
        std::ostringstream os;
        os << "chain is periodic with period " << period;
        throw Error(ErrorCode::NotErgodic, os.str());
    }
}

Vector stationary_vector(const Matrix& q) {
    const auto n = q.rows();
    Matrix a = q.transpose() - Matrix::Identity(n, n);
    a.row(n - 1).setOnes();
    Vector rhs = Vector::Zero(n);
    rhs(n - 1) = 1.0;
    Eigen::FullPivLU<Matrix> lu(a);
    if (!lu.isInvertible()) {
        throw Error(ErrorCode::SingularSolve, "stationary system is singular");
    }
    return lu.solve(rhs);
}

double rel_scale(double a, double b, double floor) {
    return std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace

StationaryChain StationaryChain::validate(const Matrix& q_raw, const std::optional<Vector>& pi) {
    if (q_raw.rows() == 0 || q_raw.rows() != q_raw.cols()) {
        throw Error(ErrorCode::InvalidInput, "transition matrix must be square and non-empty", "Q");
    }
    Matrix q = q_raw;
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
        for (Eigen::Index j = 0; j < q.cols(); ++j) {
            if (!std::isfinite(q(i, j)) || q(i, j) < 0.0) {
                std::ostringstream os;
                os << "Q[" << i << "][" << j << "]";
                throw Error(ErrorCode::InvalidInput, "transition probabilities must be finite and nonnegative",
                            os.str());
            }
        }
        const double s = q.row(i).sum();
        if (std::abs(s - 1.0) > kRowSumTolerance) {
            std::ostringstream os;
            os << "row " << i << " sums to " << s;
            throw Error(ErrorCode::NonStochasticRow, os.str(), index_path("Q", i));
        }
        q.row(i) /= s;
    }
    check_ergodic(q);

    Vector p;
    if (pi) {
        p = *pi;
        if (p.size() != q.rows()) {
            throw Error(ErrorCode::BadPi, "pi has the wrong length", "pi");
        }
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            if (!(p(i) > 0.0)) {
                throw Error(ErrorCode::BadPi, "pi must be strictly positive", index_path("pi", i));
            }
        }
        if (std::abs(p.sum() - 1.0) > kPiTolerance) {
            throw Error(ErrorCode::BadPi, "pi does not sum to one", "pi");
        }
        const double gap = (p.transpose() * q - p.transpose()).cwiseAbs().maxCoeff();
        if (gap > kPiTolerance) {
            std::ostringstream os;
            os << "pi is not stationary: max |pi Q - pi| = " << gap;
            throw Error(ErrorCode::BadPi, os.str(), "pi");
        }
    } else {
        p = stationary_vector(q);
        if (p.minCoeff() <= 0.0) {
            throw Error(ErrorCode::NotErgodic, "stationary vector has a non-positive entry");
        }
    }
    return StationaryChain(std::move(q), std::move(p));
}

double StationaryChain::inner(const Vector& a, const Vector& b) const {
    return (pi_.array() * a.array() * b.array()).sum();
}

Observable Observable::from_values(const StationaryChain& chain, Vector values) {
    if (static_cast<std::size_t>(values.size()) != chain.n_states()) {
        throw Error(ErrorCode::InvalidInput, "observable length does not match the chain", "values");
    }
    const double m = chain.mean(values);
    if (std::abs(m) > kMeanZeroTolerance) {
        std::ostringstream os;
        os << "observable has pi-mean " << m << ", expected 0";
        throw Error(ErrorCode::NotMeanZero, os.str(), "values");
    }
    return Observable(std::move(values));
}

Observable Observable::centered(const StationaryChain& chain, Vector values) {
    if (static_cast<std::size_t>(values.size()) != chain.n_states()) {
        throw Error(ErrorCode::InvalidInput, "observable length does not match the chain", "values");
    }
    values.array() -= chain.mean(values);
    return Observable(std::move(values));
}

Observable Observable::zero(const StationaryChain& chain) {
    return Observable(Vector::Zero(static_cast<Eigen::Index>(chain.n_states())));
}

Observable unchecked_observable(Vector values) { return Observable(std::move(values)); }

double PairKernel::norm_sq(const StationaryChain& chain) const {
    const Matrix sq = values.array().square().matrix();
    return chain.pi().dot((chain.q().array() * sq.array()).rowwise().sum().matrix());
}

Vector PairKernel::conditional_mean(const StationaryChain& chain) const {
    return (chain.q().array() * values.array()).rowwise().sum();
}

PairKernel coboundary_kernel(const StationaryChain& chain, const Vector& f) {
    const Vector qf = chain.q() * f;
    const auto n = static_cast<Eigen::Index>(chain.n_states());
    PairKernel h{Matrix(n, n)};
    for (Eigen::Index w0 = 0; w0 < n; ++w0) {
        h.values.row(w0) = f.transpose().array() - qf(w0);
    }
    return h;
}

Observable apply_q(const StationaryChain& chain, const Observable& g, std::size_t k) {
    Vector v = g.values();
    for (std::size_t i = 0; i < k; ++i) {
        v = chain.q() * v;
    }
    return unchecked_observable(std::move(v));
}

AdjointReport adjoint(const StationaryChain& chain) {
    const Matrix& q = chain.q();
    const Vector& pi = chain.pi();
    const auto n = q.rows();
    AdjointReport r;
    r.qstar.resize(n, n);
    for (Eigen::Index w = 0; w < n; ++w) {
        for (Eigen::Index z = 0; z < n; ++z) {
            r.qstar(w, z) = pi(z) * q(z, w) / pi(w);
        }
    }
    r.reversibility_gap = (r.qstar - q).cwiseAbs().maxCoeff();
    r.normality_gap = (q * r.qstar - r.qstar * q).cwiseAbs().maxCoeff();
    r.reversible = r.reversibility_gap <= kPiTolerance;
    r.normal = r.normality_gap <= kPiTolerance;
    r.doubly_stochastic = (q.colwise().sum().array() - 1.0).abs().maxCoeff() <= kPiTolerance;
    r.note =
        "On a finite state space a co-isometry (QQ* = I on mean-zero functions) is unitary and hence "
        "normal; genuine co-isometries are handled by the sequence-model and Bernoulli-shift routines.";
    return r;
}

VSums v_sums(const StationaryChain& chain, const Observable& g, std::size_t n) {
    if (n == 0) {
        throw Error(ErrorCode::InvalidInput, "v_sums requires n >= 1");
    }
    const auto dn = static_cast<double>(n);
    Vector term = g.values();
    Vector v = Vector::Zero(term.size());
    Vector vbar = Vector::Zero(term.size());
    for (std::size_t k = 0; k < n; ++k) {
        v += term;
        vbar += (1.0 - static_cast<double>(k) / dn) * term;
        if (k + 1 < n) term = chain.q() * term;
    }
    return {unchecked_observable(std::move(v)), unchecked_observable(std::move(vbar))};
}

double sn_second_moment_autocovariance(const StationaryChain& chain, const Observable& g, std::size_t n) {
    if (n == 0) {
        throw Error(ErrorCode::InvalidInput, "sn_second_moment requires n >= 1");
    }
    const auto dn = static_cast<double>(n);
    Vector qk = g.values();
    double total = dn * chain.norm_sq(qk);
    for (std::size_t k = 1; k < n; ++k) {
        qk = chain.q() * qk;
        total += 2.0 * (dn - static_cast<double>(k)) * chain.inner(g.values(), qk);
    }
    return total;
}

double sn_second_moment(const StationaryChain& chain, const Observable& g, std::size_t n) {
    if (n == 0) {
        throw Error(ErrorCode::InvalidInput, "sn_second_moment requires n >= 1");
    }
    const auto dn = static_cast<double>(n);
    const auto sums = v_sums(chain, g, n);
    const double via_vbar = 2.0 * dn * chain.inner(g.values(), sums.vbar.values()) - dn * chain.norm_sq(g.values());
    const double via_gamma = sn_second_moment_autocovariance(chain, g, n);
    const double scale = rel_scale(via_vbar, via_gamma, chain.norm_sq(g.values()));
    if (scale > 0.0 && std::abs(via_vbar - via_gamma) > 1e-9 * scale) {
        std::ostringstream os;
        os << "E[S_n^2] evaluations disagree: " << via_vbar << " vs " << via_gamma;
        throw Error(ErrorCode::CrossCheckFailed, os.str());
    }
    return via_vbar;
}

PoissonSolution solve_poisson(const StationaryChain& chain, const Observable& g) {
    const Matrix& q = chain.q();
    const auto n = q.rows();
    // Deflation: I - Q + 1 pi^T is invertible for an ergodic chain and
    // its solution for mean-zero g is the mean-zero solution of (I - Q)u = g.
    Matrix a = Matrix::Identity(n, n) - q + Vector::Ones(n) * chain.pi().transpose();
    Eigen::FullPivLU<Matrix> lu(a);
    if (!lu.isInvertible()) {
        throw Error(ErrorCode::SingularSolve, "mean-zero restriction of I - Q is singular");
    }
    Vector u = lu.solve(g.values());
    u.array() -= chain.mean(u);
    PoissonSolution sol;
    sol.residual = (u - q * u - g.values()).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, g.values().cwiseAbs().maxCoeff());
    if (!(sol.residual <= 1e-9 * scale)) {
        std::ostringstream os;
        os << "Poisson residual " << sol.residual << " exceeds tolerance";
        throw Error(ErrorCode::SingularSolve, os.str());
    }
    sol.u = unchecked_observable(std::move(u));
    return sol;
}

PlusNorm plus_norm_sq(const StationaryChain& chain, const Observable& g) {
    PlusNorm out;
    out.solution = solve_poisson(chain, g);
    out.value = 2.0 * chain.inner(g.values(), out.solution.u.values()) - chain.norm_sq(g.values());
    return out;
}

MartingaleKernel martingale_kernel(const StationaryChain& chain, const Observable& g) {
    const auto pn = plus_norm_sq(chain, g);
    MartingaleKernel out;
    out.u = pn.solution.u;
    out.h = coboundary_kernel(chain, out.u.values());
    out.kappa_sq = out.h.norm_sq(chain);
    if (std::abs(out.kappa_sq - pn.value) > 1e-9 * std::max(1.0, std::abs(pn.value))) {
        std::ostringstream os;
        os << "||H||^2 = " << out.kappa_sq << " differs from plus norm " << pn.value;
        throw Error(ErrorCode::CrossCheckFailed, os.str());
    }
    return out;
}

PairKernel hbar_kernel(const StationaryChain& chain, const Observable& g, std::size_t n) {
    return coboundary_kernel(chain, v_sums(chain, g, n).vbar.values());
}

ResidualMoment residual_second_moment(const StationaryChain& chain, const Observable& g, std::size_t n,
                                      std::size_t k) {
    if (k < 1 || k > n) {
        throw Error(ErrorCode::InvalidInput, "residual_second_moment requires 1 <= k <= n");
    }
    const Matrix& q = chain.q();
    const auto dn = static_cast<double>(n);
    const auto dk = static_cast<double>(k);

    ResidualMoment out;
    // max_{m<=n} ||V_m g||^2 while building V_n g.
    Vector term = g.values();
    Vector vm = Vector::Zero(term.size());
    Vector vbar = Vector::Zero(term.size());
    double max_vm = 0.0;
    for (std::size_t m = 1; m <= n; ++m) {
        vm += term;
        vbar += (1.0 - static_cast<double>(m - 1) / dn) * term;
        max_vm = std::max(max_vm, chain.norm_sq(vm));
        term = q * term;
    }
    out.bound = 9.0 * max_vm;

    const Vector a = q * vbar;
    const Vector b = q * vm;

    // Q^j A for j = 0..k and Q^t B for t = 0..k.
    double cross_a_b = 0.0;  // sum_{t=1}^k <A, Q^t B>
    double cross_b_a = 0.0;  // sum_{t=1}^k <B, Q^{k-t} A> = sum_{j=0}^{k-1} <B, Q^j A>
    double bb = dk * chain.norm_sq(b);
    Vector qa = a;
    Vector qb = b;
    for (std::size_t j = 0; j < k; ++j) {
        cross_b_a += chain.inner(b, qa);
        qa = q * qa;
        qb = q * qb;
        cross_a_b += chain.inner(a, qb);
        if (j + 1 < k) {
            bb += 2.0 * (dk - static_cast<double>(j + 1)) * chain.inner(b, qb);
        }
    }
    const double a_qk_a = chain.inner(a, qa);

    out.value = 2.0 * chain.norm_sq(a) - 2.0 * a_qk_a + (2.0 / dn) * (cross_a_b - cross_b_a) + bb / (dn * dn);
    return out;
}

double martingale_residual_second_moment(const StationaryChain& chain, const Observable& g, std::size_t n) {
    const auto sol = solve_poisson(chain, g);
    const Vector qu = chain.q() * sol.u.values();
    Vector qn = qu;
    for (std::size_t i = 0; i < n; ++i) qn = chain.q() * qn;
    return 2.0 * chain.norm_sq(qu) - 2.0 * chain.inner(qu, qn);
}

CriteriaDiagnostic criteria_diagnostic(const StationaryChain& chain, const Observable& g,
                                       const std::vector<std::size_t>& n_grid,
                                       const std::vector<std::size_t>& m_grid, double margin) {
    if (!is_dyadic_increasing(n_grid) || !is_dyadic_increasing(m_grid) || n_grid.size() < 2 ||
        m_grid.size() < 2) {
        throw Error(ErrorCode::InvalidInput, "criteria grids must be dyadic, increasing, with >= 2 points");
    }
    CriteriaDiagnostic out;

    std::vector<double> grid_n, vn_norms;
    Vector term = g.values();
    Vector vn = Vector::Zero(term.size());
    std::size_t next = 0;
    for (std::size_t m = 1; m <= n_grid.back(); ++m) {
        vn += term;
        term = chain.q() * term;
        if (m == n_grid[next]) {
            grid_n.push_back(static_cast<double>(m));
            vn_norms.push_back(std::sqrt(chain.norm_sq(vn)));
            ++next;
        }
    }
    out.cond2 = fit_slope(grid_n, vn_norms, 0.5, margin);

    // ||Q^k g||_+^2 = 2<Q^k g, Q^k u> - ||Q^k g||^2, since Q^k u solves the
    // Poisson equation for Q^k g.
    const auto sol = solve_poisson(chain, g);
    Vector qg = g.values();
    Vector qu = sol.u.values();
    std::vector<double> grid_m, averages;
    double running = 0.0;
    next = 0;
    for (std::size_t k = 1; k <= m_grid.back(); ++k) {
        qg = chain.q() * qg;
        qu = chain.q() * qu;
        const double pk = std::max(0.0, 2.0 * chain.inner(qg, qu) - chain.norm_sq(qg));
        out.plus_norms_of_powers.push_back(pk);
        running += pk;
        if (k == m_grid[next]) {
            grid_m.push_back(static_cast<double>(k));
            averages.push_back(running / static_cast<double>(k));
            ++next;
        }
    }
    out.cond16 = fit_slope(grid_m, averages, 0.0, margin);
    return out;
}

}  // namespace martapprox::markov
