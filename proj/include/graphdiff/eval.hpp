#ifndef GRAPHDIFF_EVAL_HPP
#define GRAPHDIFF_EVAL_HPP

#include <cmath>
#include <cstdlib>
#include <vector>

#include "graphdiff/condition.hpp"
#include "graphdiff/dataset.hpp"
#include "graphdiff/errors.hpp"
#include "graphdiff/graph.hpp"

namespace graphdiff {

/// Total variation distance between two distributions over the same support
/// ordering.
inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw SchemaError("total_variation: support mismatch");
    double sp = 0.0, sq = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        sp += p[i];
        sq += q[i];
        acc += std::abs(p[i] - q[i]);
    }
    if (std::abs(sp - 1.0) > 1e-6 || std::abs(sq - 1.0) > 1e-6)
        throw DomainError("total_variation: inputs must sum to 1");
    return 0.5 * acc;
}

/// Desk-scale valence analogue: per-node-state weighted degree bounds, where
/// edge state v contributes multiplicity v.
struct ValenceTable {
    std::vector<int> max_degree;  // one bound per node state

    bool valid(const Graph& g, const StateSpaces& spaces) const {
        if (static_cast<int>(max_degree.size()) != spaces.node_card)
            throw SchemaError("ValenceTable: bound count != node cardinality");
        if (spaces.absorbing) {
            for (auto x : g.nodes)
                if (x == spaces.mask_node_index()) return false;
            for (auto e : g.edges_upper)
                if (e == spaces.mask_edge_index()) return false;
        }
        for (int i = 0; i < g.n; ++i) {
            int degree = 0;
            for (int j = 0; j < g.n; ++j)
                if (j != i) degree += g.edge(i, j);
            if (degree > max_degree[static_cast<std::size_t>(g.node(i))]) return false;
        }
        return true;
    }
};

/// Fraction of samples passing the valence rule (MASK states always fail).
inline double validity_rate(const std::vector<Graph>& samples, const ValenceTable& table,
                            const StateSpaces& spaces) {
    if (samples.empty()) return 0.0;
    long ok = 0;
    for (const auto& g : samples)
        if (table.valid(g, spaces)) ++ok;
    return static_cast<double>(ok) / static_cast<double>(samples.size());
}

/// Deterministic ground-truth labeler standing in for an external property
/// oracle: slot 0 is the parity of the nonzero-edge count (categorical,
/// K = 2), slot 1 is the fraction of nodes in state 1 (numeric scalar).
/// MASK tokens count as neither an edge nor a state-1 node.
struct SyntheticLabeler {
    StateSpaces spaces;

    ConditionSchema schema() const {
        return {ConditionSlotSpec{ConditionSlotSpec::Kind::Categorical, 2, 1},
                ConditionSlotSpec{ConditionSlotSpec::Kind::Numeric, 2, 1}};
    }

    ConditionAssignment label(const Graph& g) const {
        int edges = 0;
        for (auto e : g.edges_upper)
            if (e != 0 && !(spaces.absorbing && e == spaces.mask_edge_index())) ++edges;
        int state1 = 0;
        for (auto x : g.nodes)
            if (x == 1) ++state1;
        ConditionAssignment out(2);
        out.slots[0] = ConditionValue::categorical(edges % 2);
        out.slots[1] = ConditionValue::numeric(static_cast<double>(state1) /
                                               static_cast<double>(g.n));
        return out;
    }
};

/// Controllability of a batch of samples against their requested conditions.
struct ControllabilityReport {
    std::vector<double> accuracy;  // per categorical slot (NaN if unrequested)
    std::vector<double> mae;       // per numeric slot (NaN if unrequested)
};

inline ControllabilityReport controllability(
    const std::vector<std::pair<Graph, ConditionAssignment>>& samples,
    const SyntheticLabeler& labeler) {
    if (samples.empty()) throw SchemaError("controllability: empty sample list");
    const ConditionSchema schema = labeler.schema();
    const std::size_t m_total = schema.size();
    std::vector<double> acc(m_total, 0.0), err(m_total, 0.0);
    std::vector<long> count(m_total, 0);
    for (const auto& [g, requested] : samples) {
        if (requested.slots.size() != m_total)
            throw SchemaError("controllability: slot count mismatch");
        const ConditionAssignment measured = labeler.label(g);
        for (std::size_t m = 0; m < m_total; ++m) {
            if (!requested.slots[m]) continue;
            validate_value(*requested.slots[m], schema[m]);
            ++count[m];
            if (schema[m].kind == ConditionSlotSpec::Kind::Categorical) {
                if (measured.slots[m]->category() == requested.slots[m]->category())
                    acc[m] += 1.0;
            } else {
                const auto& a = measured.slots[m]->vec();
                const auto& b = requested.slots[m]->vec();
                double d = 0.0;
                for (std::size_t k = 0; k < a.size(); ++k) d += std::abs(a[k] - b[k]);
                err[m] += d;
            }
        }
    }
    ControllabilityReport rep;
    const double nan = std::nan("");
    for (std::size_t m = 0; m < m_total; ++m) {
        const double denom = static_cast<double>(count[m]);
        rep.accuracy.push_back(
            schema[m].kind == ConditionSlotSpec::Kind::Categorical && count[m] > 0 ? acc[m] / denom
                                                                                   : nan);
        rep.mae.push_back(schema[m].kind == ConditionSlotSpec::Kind::Numeric && count[m] > 0
                              ? err[m] / denom
                              : nan);
    }
    return rep;
}

/// Exhaustive permutation-invariance deviation of a distribution over the
/// enumerated graph space: max over (G, pi) of |p(pi G) - p(G)|.
inline double invariance_check(const std::vector<double>& dist, int n,
                               const StateSpaces& spaces) {
    if (n > 3) throw SizeError("invariance_check: n must be <= 3");
    const std::uint64_t total = graph_space_size(n, spaces);
    if (dist.size() != total) throw SchemaError("invariance_check: distribution size mismatch");
    const auto graphs = enumerate_graphs(n, spaces);
    const auto perms = all_permutations(n);
    double worst = 0.0;
    for (std::uint64_t gid = 0; gid < total; ++gid) {
        for (const auto& pi : perms) {
            const std::uint64_t pid = canonical_index(apply_permutation(graphs[gid], pi), spaces);
            worst = std::max(worst, std::abs(dist[pid] - dist[gid]));
        }
    }
    return worst;
}

}  // namespace graphdiff

#endif
