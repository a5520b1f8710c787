#ifndef GRAPHDIFF_SAMPLER_HPP
#define GRAPHDIFF_SAMPLER_HPP

#include <cmath>
#include <span>
#include <vector>

#include "graphdiff/calibration.hpp"
#include "graphdiff/dataset.hpp"
#include "graphdiff/guidance.hpp"
#include "graphdiff/noise.hpp"
#include "graphdiff/rng.hpp"
#include "graphdiff/score.hpp"

namespace graphdiff {

struct SamplerConfig {
    int steps = 1000;  // T
    int n = 3;
    int batch = 1;
    std::uint64_t seed = 0;

    void validate() const {
        if (steps < 1 || n < 1 || batch < 1) throw DomainError("SamplerConfig: bad steps/n/batch");
    }
};

/// Per-run diagnostics: how often a token's reverse distribution degenerated
/// (all mass clipped) and how often a zero-probability state was frozen.
struct SampleDiagnostics {
    long degenerate_tokens = 0;
    long frozen_states = 0;
};

/// Linear time grid t_k = t_min + (1 - t_min) k / T.
inline double time_grid(const NoiseSchedule& schedule, int k, int steps) {
    return schedule.t_min + (1.0 - schedule.t_min) * static_cast<double>(k) /
                                static_cast<double>(steps);
}

/// Raw (unnormalized, possibly negative) Tweedie tau-leaping transition
/// vector for one token: [exp(-sigma Q) exp(score_row)]_{x_s} *
/// exp(sigma Q)(x_t, x_s). -inf scores contribute zero mass.
inline std::vector<double> reverse_token_raw(std::span<const double> score_row, int cur,
                                             double sigma_leap, const TransitionModel& model) {
    if (sigma_leap < 0.0) throw DomainError("reverse_token_raw: negative sigma_leap");
    const int K = model.K;
    std::vector<double> ratios(static_cast<std::size_t>(K));
    for (int y = 0; y < K; ++y) {
        const double v = score_row[static_cast<std::size_t>(y)];
        ratios[static_cast<std::size_t>(y)] = v == kNegInf ? 0.0 : std::exp(v);
    }
    std::vector<double> raw(static_cast<std::size_t>(K), 0.0);
    for (int xs = 0; xs < K; ++xs) {
        double denoised = 0.0;
        for (int y = 0; y < K; ++y)
            denoised += kernel_entry(model, -sigma_leap, xs, y) * ratios[static_cast<std::size_t>(y)];
        raw[static_cast<std::size_t>(xs)] =
            denoised * kernel_entry(model, sigma_leap, cur, xs);
    }
    return raw;
}

struct TokenDistribution {
    std::vector<double> p;
    bool degenerate = false;
};

/// Normalized per-token reverse distribution: negatives clamped, then either
/// plain renormalization or Probability Calibration. An all-zero vector
/// degenerates to a point mass at the current state (no PC) or at the raw
/// argmax (PC's own fallback).
inline TokenDistribution reverse_token_distribution(std::span<const double> score_row, int cur,
                                                    double sigma_leap,
                                                    const TransitionModel& model,
                                                    const CalibrationParams* calibration =
                                                        nullptr) {
    std::vector<double> raw = reverse_token_raw(score_row, cur, sigma_leap, model);
    TokenDistribution out;
    if (calibration && calibration->enabled) {
        CalibrationResult cal = calibrate(raw, *calibration);
        out.p = std::move(cal.p);
        out.degenerate = cal.degenerate;
        return out;
    }
    double total = 0.0;
    for (auto& v : raw) {
        v = std::max(v, 0.0);
        total += v;
    }
    if (!(total > 0.0)) {
        out.degenerate = true;
        out.p.assign(raw.size(), 0.0);
        out.p[static_cast<std::size_t>(cur)] = 1.0;
        return out;
    }
    for (auto& v : raw) v /= total;
    out.p = std::move(raw);
    return out;
}

namespace detail {

/// Composed score with the lenient-freeze policy: a zero-probability current
/// state yields all -inf alternatives, freezing every token.
inline ScoreTensor guarded_score(const Scorer& scorer, const Graph& gt, double t,
                                 const GuidanceSpec& guidance,
                                 const ConditionAssignment& conditions,
                                 SampleDiagnostics* diag) {
    try {
        return composed_score(scorer, gt, t, guidance, conditions);
    } catch (const OracleDomainError&) {
        if (diag) ++diag->frozen_states;
        ScoreTensor s(gt.n, 0, 0);
        s.n = gt.n;
        return s;  // sentinel; caller checks for empty rows
    }
}

}  // namespace detail

/// One reverse trajectory (Tweedie tau-leaping over the linear grid).
inline Graph sample_one(const Scorer& scorer, const GuidanceSpec& guidance,
                        const CalibrationParams& calibration, const SamplerConfig& config,
                        const ConditionAssignment& conditions, const StateSpaces& spaces,
                        const NoiseSchedule& schedule, const TransitionModels& models, Rng& rng,
                        SampleDiagnostics* diag = nullptr) {
    Graph g = base_sample(config.n, spaces, models.node, models.edge, rng);
    for (int k = config.steps; k >= 1; --k) {
        const double t = time_grid(schedule, k, config.steps);
        const double s = time_grid(schedule, k - 1, config.steps);
        const double sigma_leap = schedule.sigma_bar(t) - schedule.sigma_bar(s);
        const ScoreTensor score = detail::guarded_score(scorer, g, t, guidance, conditions, diag);
        if (score.a == 0) continue;  // frozen state: all tokens stay
        Graph next = g;
        const CalibrationParams* cal = calibration.enabled ? &calibration : nullptr;
        for (int i = 0; i < g.n; ++i) {
            TokenDistribution d =
                reverse_token_distribution(score.node_row(i), g.node(i), sigma_leap, models.node,
                                           cal);
            if (d.degenerate && diag) ++diag->degenerate_tokens;
            next.nodes[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(rng.categorical(d.p));
        }
        for (int p = 0; p < pair_count(g.n); ++p) {
            TokenDistribution d = reverse_token_distribution(
                score.edge_row(p), g.edges_upper[static_cast<std::size_t>(p)], sigma_leap,
                models.edge, cal);
            if (d.degenerate && diag) ++diag->degenerate_tokens;
            next.edges_upper[static_cast<std::size_t>(p)] =
                static_cast<std::uint8_t>(rng.categorical(d.p));
        }
        g = next;
    }
    return g;
}

/// Batched sampling with one RNG stream per trajectory.
inline std::vector<Graph> sample(const Scorer& scorer, const GuidanceSpec& guidance,
                                 const CalibrationParams& calibration, const SamplerConfig& config,
                                 const ConditionAssignment& conditions, const StateSpaces& spaces,
                                 const NoiseSchedule& schedule, const TransitionModels& models,
                                 SampleDiagnostics* diag = nullptr) {
    config.validate();
    Rng root(config.seed);
    std::vector<Graph> out;
    out.reserve(static_cast<std::size_t>(config.batch));
    for (int b = 0; b < config.batch; ++b) {
        Rng rng = root.split();
        out.push_back(sample_one(scorer, guidance, calibration, config, conditions, spaces,
                                 schedule, models, rng, diag));
    }
    return out;
}

/// Exact base distribution vector over the enumerated graph space.
inline std::vector<double> base_distribution(int n, const StateSpaces& spaces,
                                             const TransitionModels& models) {
    const std::uint64_t total = graph_space_size(n, spaces);
    std::vector<double> p(total, 0.0);
    if (models.node.kind == TransitionModel::Kind::Absorb) {
        Graph mask(n);
        for (auto& x : mask.nodes) x = static_cast<std::uint8_t>(spaces.mask_node_index());
        for (auto& e : mask.edges_upper) e = static_cast<std::uint8_t>(spaces.mask_edge_index());
        p[canonical_index(mask, spaces)] = 1.0;
    } else {
        const double u = 1.0 / static_cast<double>(total);
        for (auto& v : p) v = u;
    }
    return p;
}

/// Propagates the full probability vector over the enumerated graph space
/// through the factorized per-token reverse kernels; returns the terminal
/// distribution. This is the trajectory-sum estimated distribution computed
/// exactly, and the brute-force oracle behind the fidelity and invariance
/// acceptance checks.
inline std::vector<double> exact_model_distribution(
    const Scorer& scorer, const GuidanceSpec& guidance, const CalibrationParams& calibration,
    const SamplerConfig& config, const ConditionAssignment& conditions, const StateSpaces& spaces,
    const NoiseSchedule& schedule, const TransitionModels& models,
    SampleDiagnostics* diag = nullptr) {
    config.validate();
    const int n = config.n;
    const std::uint64_t total = graph_space_size(n, spaces);
    const std::vector<Graph> graphs = enumerate_graphs(n, spaces);
    const int n_tokens = graphs.front().token_count();
    const CalibrationParams* cal = calibration.enabled ? &calibration : nullptr;

    std::vector<double> p = base_distribution(n, spaces, models);
    std::vector<double> p_next(total);
    std::vector<std::vector<double>> token_dists(static_cast<std::size_t>(n_tokens));

    for (int k = config.steps; k >= 1; --k) {
        const double t = time_grid(schedule, k, config.steps);
        const double s = time_grid(schedule, k - 1, config.steps);
        const double sigma_leap = schedule.sigma_bar(t) - schedule.sigma_bar(s);
        std::fill(p_next.begin(), p_next.end(), 0.0);
        for (std::uint64_t gid = 0; gid < total; ++gid) {
            const double mass = p[gid];
            if (mass <= 0.0) continue;
            const Graph& gt = graphs[gid];
            const ScoreTensor score =
                detail::guarded_score(scorer, gt, t, guidance, conditions, diag);
            if (score.a == 0) {  // frozen state
                p_next[gid] += mass;
                continue;
            }
            for (int i = 0; i < n; ++i) {
                TokenDistribution d = reverse_token_distribution(score.node_row(i), gt.node(i),
                                                                sigma_leap, models.node, cal);
                if (d.degenerate && diag) ++diag->degenerate_tokens;
                token_dists[static_cast<std::size_t>(i)] = std::move(d.p);
            }
            for (int pr = 0; pr < pair_count(n); ++pr) {
                TokenDistribution d = reverse_token_distribution(
                    score.edge_row(pr), gt.edges_upper[static_cast<std::size_t>(pr)], sigma_leap,
                    models.edge, cal);
                if (d.degenerate && diag) ++diag->degenerate_tokens;
                token_dists[static_cast<std::size_t>(n + pr)] = std::move(d.p);
            }
            for (std::uint64_t sid = 0; sid < total; ++sid) {
                double prob = mass;
                const Graph& gs = graphs[sid];
                for (int tok = 0; tok < n_tokens && prob > 0.0; ++tok)
                    prob *= token_dists[static_cast<std::size_t>(tok)]
                                       [static_cast<std::size_t>(gs.token(tok))];
                p_next[sid] += prob;
            }
        }
        std::swap(p, p_next);
    }
    return p;
}

/// Exact data distribution over the enumerated space (multiplicity-weighted).
inline std::vector<double> data_distribution(const Dataset& dataset) {
    const std::uint64_t total = graph_space_size(dataset.n, dataset.spaces);
    std::vector<double> p(total, 0.0);
    for (const auto& rec : dataset.records)
        p[canonical_index(rec.graph, dataset.spaces)] +=
            1.0 / static_cast<double>(dataset.records.size());
    return p;
}

}  // namespace graphdiff

#endif
