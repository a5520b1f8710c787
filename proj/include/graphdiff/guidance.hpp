#ifndef GRAPHDIFF_GUIDANCE_HPP
#define GRAPHDIFF_GUIDANCE_HPP

#include <cmath>
#include <vector>

#include "graphdiff/condition.hpp"
#include "graphdiff/errors.hpp"
#include "graphdiff/score.hpp"

namespace graphdiff {

/// Guidance mode and weights for one sampling run. Slots refer to condition
/// indices of the requested assignment.
struct GuidanceSpec {
    enum class Mode { Unconditional, Cfg, Cog, FastCog } mode = Mode::Unconditional;
    double w = 1.0;                                   // CFG / fast-CoG scale
    std::vector<std::pair<int, double>> slot_weights;  // CoG: (slot, w_m)
    std::vector<int> subset_slots;                     // fast-CoG subset

    static GuidanceSpec unconditional() { return {}; }
    static GuidanceSpec cfg(double w) { return {Mode::Cfg, w, {}, {}}; }
    static GuidanceSpec cog(std::vector<std::pair<int, double>> slots) {
        if (slots.empty()) throw SchemaError("GuidanceSpec: CoG slot list must be non-empty");
        return {Mode::Cog, 1.0, std::move(slots), {}};
    }
    static GuidanceSpec fast_cog(std::vector<int> subset, double w) {
        if (subset.empty()) throw SchemaError("GuidanceSpec: fast-CoG subset must be non-empty");
        return {Mode::FastCog, w, {}, std::move(subset)};
    }
};

namespace detail {

/// Entrywise s_null + sum_m w_m (s_m - s_null) in the log-score domain.
/// -inf in the unconditional entry, or in any active slot entry, stays -inf.
inline double compose_entry(double s_null, const double* slot_vals, const double* weights,
                            std::size_t count) {
    if (s_null == kNegInf) return kNegInf;
    double acc = s_null;
    for (std::size_t m = 0; m < count; ++m) {
        if (weights[m] == 0.0) continue;
        if (slot_vals[m] == kNegInf) return kNegInf;
        acc += weights[m] * (slot_vals[m] - s_null);
    }
    return acc;
}

}  // namespace detail

/// CoG score (per-slot affine combination of log-scores).
inline ScoreTensor compose_cog(const ScoreTensor& s_null,
                               const std::vector<std::pair<const ScoreTensor*, double>>& per_slot) {
    if (per_slot.empty()) throw SchemaError("compose_cog: empty slot list");
    for (const auto& [s, w] : per_slot) {
        (void)w;
        if (!s->same_shape(s_null)) throw BoundsError("compose_cog: shape mismatch");
    }
    // exact identities: single slot with w = 1 is the conditional tensor,
    // all-zero weights are the unconditional one
    bool all_zero = true;
    for (const auto& [s, w] : per_slot) {
        (void)s;
        if (w != 0.0) all_zero = false;
    }
    if (all_zero) return s_null;
    if (per_slot.size() == 1 && per_slot.front().second == 1.0) return *per_slot.front().first;

    ScoreTensor out = s_null;
    std::vector<double> vals(per_slot.size()), weights(per_slot.size());
    for (std::size_t m = 0; m < per_slot.size(); ++m) weights[m] = per_slot[m].second;
    for (std::size_t e = 0; e < out.node_log.size(); ++e) {
        for (std::size_t m = 0; m < per_slot.size(); ++m)
            vals[m] = per_slot[m].first->node_log[e];
        out.node_log[e] =
            detail::compose_entry(s_null.node_log[e], vals.data(), weights.data(), vals.size());
    }
    for (std::size_t e = 0; e < out.edge_log.size(); ++e) {
        for (std::size_t m = 0; m < per_slot.size(); ++m)
            vals[m] = per_slot[m].first->edge_log[e];
        out.edge_log[e] =
            detail::compose_entry(s_null.edge_log[e], vals.data(), weights.data(), vals.size());
    }
    return out;
}

/// CFG score s_null + w (s_cond - s_null); the single-slot case of CoG, so
/// both are bit-identical by construction.
inline ScoreTensor compose_cfg(const ScoreTensor& s_null, const ScoreTensor& s_cond, double w) {
    return compose_cog(s_null, {{&s_cond, w}});
}

/// fast-CoG: identical contract to CFG with the subset-keyed tensor.
inline ScoreTensor compose_fast_cog(const ScoreTensor& s_null, const ScoreTensor& s_subset,
                                    double w) {
    return compose_cfg(s_null, s_subset, w);
}

/// Number of scorer calls one step of this guidance mode needs.
inline int scorer_calls_per_step(const GuidanceSpec& g) {
    switch (g.mode) {
        case GuidanceSpec::Mode::Unconditional: return 1;
        case GuidanceSpec::Mode::Cfg: return 2;
        case GuidanceSpec::Mode::FastCog: return 2;
        case GuidanceSpec::Mode::Cog: return 1 + static_cast<int>(g.slot_weights.size());
    }
    return 1;
}

/// Resolves the composed score for one step: evaluates the scorer at the keys
/// the mode requires and applies the matching composition.
inline ScoreTensor composed_score(const Scorer& scorer, const Graph& gt, double t,
                                  const GuidanceSpec& guidance,
                                  const ConditionAssignment& conditions) {
    auto value_of = [&](int slot) -> const ConditionValue& {
        if (slot < 0 || slot >= conditions.size() ||
            !conditions.slots[static_cast<std::size_t>(slot)])
            throw SchemaError("composed_score: guidance slot has no requested condition value");
        return *conditions.slots[static_cast<std::size_t>(slot)];
    };
    switch (guidance.mode) {
        case GuidanceSpec::Mode::Unconditional:
            return scorer.score(gt, t, ConditionKey::null());
        case GuidanceSpec::Mode::Cfg: {
            const ScoreTensor s0 = scorer.score(gt, t, ConditionKey::null());
            const ScoreTensor sc = scorer.score(gt, t, ConditionKey::joint(conditions));
            return compose_cfg(s0, sc, guidance.w);
        }
        case GuidanceSpec::Mode::FastCog: {
            std::vector<std::pair<int, ConditionValue>> entries;
            for (int slot : guidance.subset_slots) entries.emplace_back(slot, value_of(slot));
            const ScoreTensor s0 = scorer.score(gt, t, ConditionKey::null());
            const ScoreTensor sc =
                scorer.score(gt, t, ConditionKey::subset(std::move(entries)));
            return compose_fast_cog(s0, sc, guidance.w);
        }
        case GuidanceSpec::Mode::Cog: {
            const ScoreTensor s0 = scorer.score(gt, t, ConditionKey::null());
            std::vector<ScoreTensor> tensors;
            tensors.reserve(guidance.slot_weights.size());
            for (const auto& [slot, w] : guidance.slot_weights) {
                (void)w;
                tensors.push_back(scorer.score(gt, t, ConditionKey::single(slot, value_of(slot))));
            }
            std::vector<std::pair<const ScoreTensor*, double>> per_slot;
            for (std::size_t m = 0; m < tensors.size(); ++m)
                per_slot.emplace_back(&tensors[m], guidance.slot_weights[m].second);
            return compose_cog(s0, per_slot);
        }
    }
    throw DomainError("composed_score: unknown guidance mode");
}

}  // namespace graphdiff

#endif
