#ifndef GRAPHDIFF_NOISE_HPP
#define GRAPHDIFF_NOISE_HPP

#include <cmath>
#include <vector>

#include "graphdiff/errors.hpp"
#include "graphdiff/graph.hpp"
#include "graphdiff/rng.hpp"

namespace graphdiff {

/// Log-linear noise schedule: sigma_bar(t) = -log(1 - (1-eps) t), so
/// sigma_bar(0) = 0 and sigma_bar(1) = -log(eps).
struct NoiseSchedule {
    double eps = 1e-5;
    double t_min = 1e-3;

    NoiseSchedule() = default;
    NoiseSchedule(double eps_, double t_min_) : eps(eps_), t_min(t_min_) {
        if (!(eps > 0.0 && eps < 1.0)) throw DomainError("NoiseSchedule: eps out of (0,1)");
        if (!(t_min > 0.0 && t_min < 1.0)) throw DomainError("NoiseSchedule: t_min out of (0,1)");
    }

    static void check_time(double t) {
        if (!(t > 0.0 && t <= 1.0)) throw DomainError("NoiseSchedule: t outside (0,1]");
    }

    /// Cumulative noise coefficient.
    double sigma_bar(double t) const {
        check_time(t);
        return -std::log1p(-(1.0 - eps) * t);
    }

    /// Instantaneous rate d(sigma_bar)/dt.
    double sigma(double t) const {
        check_time(t);
        return (1.0 - eps) / (1.0 - (1.0 - eps) * t);
    }

    bool operator==(const NoiseSchedule&) const = default;
};

/// One token family's transition matrix variant.
struct TransitionModel {
    enum class Kind { Uniform, Absorb } kind = Kind::Uniform;
    int K = 2;

    TransitionModel() = default;
    TransitionModel(Kind kind_, int K_) : kind(kind_), K(K_) {
        if (K < 2) throw BoundsError("TransitionModel: K must be >= 2");
    }

    int mask_index() const { return K - 1; }  // meaningful only for Absorb

    bool operator==(const TransitionModel&) const = default;
};

/// Square matrix in row-major order; columns index the source state.
struct Matrix {
    int K = 0;
    std::vector<double> data;

    explicit Matrix(int K_) : K(K_), data(static_cast<std::size_t>(K_) * K_, 0.0) {}
    double& at(int row, int col) { return data[static_cast<std::size_t>(row) * K + col]; }
    double at(int row, int col) const { return data[static_cast<std::size_t>(row) * K + col]; }
};

/// Rate matrix Q. Columns sum to zero; off-diagonals are nonnegative.
inline Matrix rate_matrix(const TransitionModel& model) {
    Matrix q(model.K);
    if (model.kind == TransitionModel::Kind::Uniform) {
        const double off = 1.0 / model.K;
        for (int r = 0; r < model.K; ++r)
            for (int c = 0; c < model.K; ++c) q.at(r, c) = (r == c) ? off - 1.0 : off;
    } else {
        const int mask = model.mask_index();
        for (int c = 0; c < model.K; ++c) {
            if (c == mask) continue;
            q.at(c, c) = -1.0;
            q.at(mask, c) = 1.0;
        }
    }
    return q;
}

/// Entry (row, col) of exp(sigma_bar * Q) in closed form. Valid for any real
/// sigma_bar; negative arguments give the (signed) inverse kernel used by the
/// Tweedie reverse step.
inline double kernel_entry(const TransitionModel& model, double sigma_bar, int row, int col) {
    const double decay = std::exp(-sigma_bar);
    if (model.kind == TransitionModel::Kind::Uniform) {
        const double invk = 1.0 / model.K;
        return (row == col) ? invk + (1.0 - invk) * decay : invk * (1.0 - decay);
    }
    const int mask = model.mask_index();
    if (col == mask) return row == mask ? 1.0 : 0.0;
    if (row == col) return decay;
    if (row == mask) return 1.0 - decay;
    return 0.0;
}

/// Cumulative transition kernel exp(sigma_bar * Q); column x is p_{t|0}(.|x).
inline Matrix cumulative_kernel(const TransitionModel& model, double sigma_bar) {
    if (sigma_bar < 0.0) throw DomainError("cumulative_kernel: negative sigma_bar");
    Matrix k(model.K);
    for (int r = 0; r < model.K; ++r)
        for (int c = 0; c < model.K; ++c) k.at(r, c) = kernel_entry(model, sigma_bar, r, c);
    return k;
}

/// Forward transition ratio p_{t|0}(x_alt|x0) / p_{t|0}(x_cur|x0).
inline double forward_ratio(const TransitionModel& model, double sigma_bar, int x0, int x_cur,
                            int x_alt) {
    const double denom = kernel_entry(model, sigma_bar, x_cur, x0);
    if (!(denom > 0.0))
        throw ImpossibleTransitionError("forward_ratio: zero-probability current state");
    return kernel_entry(model, sigma_bar, x_alt, x0) / denom;
}

/// Draws one token from column x0 of the cumulative kernel.
inline int forward_sample_token(const TransitionModel& model, double sigma_bar, int x0, Rng& rng) {
    const double decay = std::exp(-sigma_bar);
    const double u = rng.next_double();
    if (model.kind == TransitionModel::Kind::Absorb) {
        if (x0 == model.mask_index()) return x0;
        return u < decay ? x0 : model.mask_index();
    }
    const double stay = 1.0 / model.K + (1.0 - 1.0 / model.K) * decay;
    if (u < stay) return x0;
    // remaining mass is split evenly over the other K-1 states
    const int other = static_cast<int>((u - stay) / ((1.0 - stay) / (model.K - 1)));
    const int idx = other >= model.K - 1 ? model.K - 2 : other;
    return idx >= x0 ? idx + 1 : idx;
}

/// Corrupts G0 to time t: every node and upper-triangle edge token drawn
/// independently from its kernel column, symmetry restored by construction.
inline Graph forward_sample(const Graph& g0, double t, const NoiseSchedule& schedule,
                            const TransitionModel& node_model, const TransitionModel& edge_model,
                            Rng& rng) {
    const double sb = schedule.sigma_bar(t);
    Graph g = g0;
    for (int i = 0; i < g.n; ++i)
        g.nodes[static_cast<std::size_t>(i)] =
            static_cast<std::uint8_t>(forward_sample_token(node_model, sb, g0.node(i), rng));
    for (auto& e : g.edges_upper)
        e = static_cast<std::uint8_t>(forward_sample_token(edge_model, sb, e, rng));
    return g;
}

/// Draws from p_base: i.i.d. uniform tokens (Uniform) or all-MASK (Absorb).
inline Graph base_sample(int n, const StateSpaces& spaces, const TransitionModel& node_model,
                         const TransitionModel& edge_model, Rng& rng) {
    Graph g(n);
    if (node_model.kind == TransitionModel::Kind::Absorb) {
        for (auto& x : g.nodes) x = static_cast<std::uint8_t>(node_model.mask_index());
        for (auto& e : g.edges_upper) e = static_cast<std::uint8_t>(edge_model.mask_index());
    } else {
        for (auto& x : g.nodes)
            x = static_cast<std::uint8_t>(rng.uniform_int(static_cast<std::uint64_t>(node_model.K)));
        for (auto& e : g.edges_upper)
            e = static_cast<std::uint8_t>(rng.uniform_int(static_cast<std::uint64_t>(edge_model.K)));
    }
    g.validate(spaces);
    return g;
}

/// Node/edge models for a run: one kind shared by both families.
struct TransitionModels {
    TransitionModel node;
    TransitionModel edge;

    static TransitionModels for_spaces(const StateSpaces& spaces) {
        const auto kind =
            spaces.absorbing ? TransitionModel::Kind::Absorb : TransitionModel::Kind::Uniform;
        return {TransitionModel(kind, spaces.node_card), TransitionModel(kind, spaces.edge_card)};
    }
};

}  // namespace graphdiff

#endif
