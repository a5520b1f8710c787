#ifndef GRAPHDIFF_SCORE_HPP
#define GRAPHDIFF_SCORE_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "graphdiff/condition.hpp"
#include "graphdiff/dataset.hpp"
#include "graphdiff/errors.hpp"
#include "graphdiff/graph.hpp"
#include "graphdiff/noise.hpp"

namespace graphdiff {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Per-token log concrete scores: node rows are n x a, edge rows are
/// n(n-1)/2 x b (upper-triangle order). The entry at each token's current
/// state is 0; provably-impossible states carry -inf.
struct ScoreTensor {
    int n = 0, a = 0, b = 0;
    std::vector<double> node_log;  // n * a
    std::vector<double> edge_log;  // pair_count(n) * b

    ScoreTensor() = default;
    ScoreTensor(int n_, int a_, int b_)
        : n(n_),
          a(a_),
          b(b_),
          node_log(static_cast<std::size_t>(n_) * a_, 0.0),
          edge_log(static_cast<std::size_t>(pair_count(n_)) * b_, 0.0) {}

    std::span<double> node_row(int i) { return {node_log.data() + static_cast<std::size_t>(i) * a, static_cast<std::size_t>(a)}; }
    std::span<const double> node_row(int i) const { return {node_log.data() + static_cast<std::size_t>(i) * a, static_cast<std::size_t>(a)}; }
    std::span<double> edge_row(int p) { return {edge_log.data() + static_cast<std::size_t>(p) * b, static_cast<std::size_t>(b)}; }
    std::span<const double> edge_row(int p) const { return {edge_log.data() + static_cast<std::size_t>(p) * b, static_cast<std::size_t>(b)}; }

    bool same_shape(const ScoreTensor& o) const { return n == o.n && a == o.a && b == o.b; }

    /// Forces the current-state entry of every token row to exactly 0.
    void pin_current(const Graph& g) {
        for (int i = 0; i < n; ++i) node_row(i)[static_cast<std::size_t>(g.node(i))] = 0.0;
        for (int p = 0; p < pair_count(n); ++p)
            edge_row(p)[g.edges_upper[static_cast<std::size_t>(p)]] = 0.0;
    }
};

/// Dense gradient accumulator with touched-index tracking so sparse (tabular)
/// and dense (neural) scorers share one update path.
class GradBuffer {
public:
    explicit GradBuffer(std::size_t size) : values_(size, 0.0), curv_(size, 0.0), dirty_(size, 0) {}

    void add(std::size_t idx, double v) {
        if (!dirty_[idx]) {
            dirty_[idx] = 1;
            touched_.push_back(idx);
        }
        values_[idx] += v;
    }

    /// Optional per-entry diagonal curvature (d^2 loss / d theta^2); scorers
    /// with closed-form second derivatives supply it so the optimizer can use
    /// curvature-normalized steps.
    void add_curvature(std::size_t idx, double h) {
        if (!dirty_[idx]) {
            dirty_[idx] = 1;
            touched_.push_back(idx);
        }
        curv_[idx] += h;
    }

    double value(std::size_t idx) const { return values_[idx]; }
    double curvature(std::size_t idx) const { return curv_[idx]; }
    const std::vector<std::size_t>& touched() const { return touched_; }

    void scale(double f) {
        for (auto idx : touched_) {
            values_[idx] *= f;
            curv_[idx] *= f;
        }
    }

    double norm() const {
        double acc = 0.0;
        for (auto idx : touched_) acc += values_[idx] * values_[idx];
        return std::sqrt(acc);
    }

    void clear() {
        for (auto idx : touched_) {
            values_[idx] = 0.0;
            curv_[idx] = 0.0;
            dirty_[idx] = 0;
        }
        touched_.clear();
    }

private:
    std::vector<double> values_;
    std::vector<double> curv_;
    std::vector<char> dirty_;
    std::vector<std::size_t> touched_;
};

struct LossValue {
    double node_term = 0.0;
    double edge_term = 0.0;
};

/// Score-function abstraction shared by the oracle and learned scorers.
struct Scorer {
    virtual ~Scorer() = default;
    virtual ScoreTensor score(const Graph& gt, double t, const ConditionKey& key) const = 0;
};

/// Scorer with explicit parameters and hand-derived loss gradients.
struct TrainableScorer : Scorer {
    virtual std::size_t param_count() const = 0;
    virtual double* param_data() = 0;
    virtual const double* param_data() const = 0;

    /// Accumulates scale * d(loss)/d(theta) for one corrupted item and
    /// returns the unweighted node/edge loss terms.
    virtual LossValue add_loss_gradient(const Graph& g0, const Graph& gt, double t,
                                        const ConditionKey& key, double lambda_edge, double scale,
                                        GradBuffer& grad) const = 0;
};

// ---------------------------------------------------------------------------
// Exact enumeration oracle
// ---------------------------------------------------------------------------

/// Concrete scores computed from the definition: ratios of exact marginals
/// p_t under the (condition-restricted) data distribution. In lenient mode a
/// zero-probability current graph yields all -inf alternatives instead of an
/// error; the sampler uses that to freeze unreachable states.
class ExactScorer : public Scorer {
public:
    ExactScorer(const Dataset& dataset, NoiseSchedule schedule, TransitionModels models,
                bool lenient = false)
        : dataset_(&dataset), schedule_(schedule), models_(models), lenient_(lenient) {
        dataset.validate();
        graph_space_size(dataset.n, dataset.spaces);  // enumeration guard
    }

    /// Marginal probability of graph h at time t given the conditioning key.
    double marginal(const Graph& h, double t, const ConditionKey& key) const {
        const auto& matches = matched(key);
        const double sb = schedule_.sigma_bar(t);
        double total = 0.0;
        for (const auto* rec : matches) total += transition_product(h, rec->graph, sb);
        return total / static_cast<double>(matches.size());
    }

    ScoreTensor score(const Graph& gt, double t, const ConditionKey& key) const override {
        const auto& spaces = dataset_->spaces;
        gt.validate(spaces);
        ScoreTensor s(gt.n, spaces.node_card, spaces.edge_card);
        const double p_cur = marginal(gt, t, key);
        if (!(p_cur > 0.0)) {
            if (!lenient_)
                throw OracleDomainError("exact_score: zero-probability current state");
            for (auto& v : s.node_log) v = kNegInf;
            for (auto& v : s.edge_log) v = kNegInf;
            s.pin_current(gt);
            return s;
        }
        for (int i = 0; i < gt.n; ++i) {
            for (int v = 0; v < spaces.node_card; ++v) {
                if (v == gt.node(i)) continue;
                const double p = marginal(token_flip(gt, TokenSite::node(i), v, spaces), t, key);
                s.node_row(i)[static_cast<std::size_t>(v)] =
                    p > 0.0 ? std::log(p / p_cur) : kNegInf;
            }
        }
        for (int p = 0; p < pair_count(gt.n); ++p) {
            const auto [i, j] = pair_from_index(p, gt.n);
            for (int v = 0; v < spaces.edge_card; ++v) {
                if (v == gt.edge(i, j)) continue;
                const double pm = marginal(token_flip(gt, TokenSite::edge(i, j), v, spaces), t, key);
                s.edge_row(p)[static_cast<std::size_t>(v)] =
                    pm > 0.0 ? std::log(pm / p_cur) : kNegInf;
            }
        }
        return s;
    }

    const Dataset& dataset() const { return *dataset_; }
    const NoiseSchedule& schedule() const { return schedule_; }
    const TransitionModels& models() const { return models_; }

private:
    double transition_product(const Graph& h, const Graph& g0, double sb) const {
        double prod = 1.0;
        for (int i = 0; i < h.n; ++i) {
            prod *= kernel_entry(models_.node, sb, h.node(i), g0.node(i));
            if (prod == 0.0) return 0.0;
        }
        for (std::size_t p = 0; p < h.edges_upper.size(); ++p) {
            prod *= kernel_entry(models_.edge, sb, h.edges_upper[p], g0.edges_upper[p]);
            if (prod == 0.0) return 0.0;
        }
        return prod;
    }

    const std::vector<const DatasetRecord*>& matched(const ConditionKey& key) const {
        const std::string id = key.canonical();
        auto it = match_cache_.find(id);
        if (it == match_cache_.end()) {
            auto matches = dataset_->matching(key);
            if (matches.empty())
                throw OracleDomainError("exact_score: no records match the conditioning key");
            it = match_cache_.emplace(id, std::move(matches)).first;
        }
        return it->second;
    }

    const Dataset* dataset_;
    NoiseSchedule schedule_;
    TransitionModels models_;
    bool lenient_;
    mutable std::unordered_map<std::string, std::vector<const DatasetRecord*>> match_cache_;
};

// ---------------------------------------------------------------------------
// Tabular scorer
// ---------------------------------------------------------------------------

enum class TrainRegime { PerProperty, SubsetPooled };

/// Condition keys a scorer must cover for a dataset and training regime:
/// the null key plus every observed Single key (PerProperty) or every
/// observed non-empty subset key (SubsetPooled).
inline std::vector<ConditionKey> key_universe(const Dataset& dataset, TrainRegime regime) {
    std::vector<ConditionKey> keys;
    std::unordered_map<std::string, char> seen;
    auto push = [&](ConditionKey k) {
        if (seen.emplace(k.canonical(), 1).second) keys.push_back(std::move(k));
    };
    push(ConditionKey::null());
    const int m_total = static_cast<int>(dataset.schema.size());
    for (const auto& rec : dataset.records) {
        if (regime == TrainRegime::PerProperty) {
            for (int m = 0; m < m_total; ++m)
                if (rec.conditions.slots[static_cast<std::size_t>(m)])
                    push(ConditionKey::single(m, *rec.conditions.slots[static_cast<std::size_t>(m)]));
        } else {
            // all non-empty subsets of this record's assigned slots
            std::vector<int> assigned;
            for (int m = 0; m < m_total; ++m)
                if (rec.conditions.slots[static_cast<std::size_t>(m)]) assigned.push_back(m);
            const int count = static_cast<int>(assigned.size());
            for (int bits = 1; bits < (1 << count); ++bits) {
                std::vector<std::pair<int, ConditionValue>> entries;
                for (int k = 0; k < count; ++k)
                    if (bits & (1 << k))
                        entries.emplace_back(
                            assigned[static_cast<std::size_t>(k)],
                            *rec.conditions.slots[static_cast<std::size_t>(assigned[static_cast<std::size_t>(k)])]);
                push(ConditionKey::subset(std::move(entries)));
            }
        }
    }
    return keys;
}

/// Partition of [t_min, 1] into time bins: equal width in t, or equal ratio
/// in t (geometric). Geometric spacing tracks the cumulative noise level,
/// which varies fastest near t_min, so low-noise bins resolve score ratios
/// much better at the same bin count.
enum class BinSpacing { Linear, Geometric };

/// Exact-capacity scorer: one raw log-score tensor per (graph index,
/// condition key, time bin). Zero initialization means uniform ratios.
class TabularScorer : public TrainableScorer {
public:
    TabularScorer(StateSpaces spaces, int n, NoiseSchedule schedule, TransitionModels models,
                  std::vector<ConditionKey> keys, int time_bins = 32,
                  BinSpacing spacing = BinSpacing::Linear)
        : spaces_(spaces),
          n_(n),
          schedule_(schedule),
          models_(models),
          keys_(std::move(keys)),
          time_bins_(time_bins),
          spacing_(spacing) {
        if (time_bins_ < 1) throw BoundsError("TabularScorer: time_bins must be >= 1");
        graph_count_ = graph_space_size(n_, spaces_);
        entries_per_graph_ = static_cast<std::size_t>(n_) * spaces_.node_card +
                             static_cast<std::size_t>(pair_count(n_)) * spaces_.edge_card;
        for (std::size_t k = 0; k < keys_.size(); ++k) key_lookup_[keys_[k].canonical()] = k;
        if (key_lookup_.size() != keys_.size())
            throw SchemaError("TabularScorer: duplicate condition keys");
        if (key_lookup_.find("null") == key_lookup_.end())
            throw SchemaError("TabularScorer: key set must contain the null key");
        params_.assign(keys_.size() * static_cast<std::size_t>(time_bins_) * graph_count_ *
                           entries_per_graph_,
                       0.0);
    }

    static TabularScorer for_dataset(const Dataset& dataset, NoiseSchedule schedule,
                                     TransitionModels models, TrainRegime regime,
                                     int time_bins = 32, BinSpacing spacing = BinSpacing::Linear) {
        return TabularScorer(dataset.spaces, dataset.n, schedule, models,
                             key_universe(dataset, regime), time_bins, spacing);
    }

    int time_bin(double t) const {
        double u;
        if (spacing_ == BinSpacing::Linear) {
            u = (t - schedule_.t_min) / (1.0 - schedule_.t_min);
        } else {
            u = std::log(t / schedule_.t_min) / std::log(1.0 / schedule_.t_min);
        }
        const int bin = static_cast<int>(u * time_bins_);
        return std::min(std::max(bin, 0), time_bins_ - 1);
    }

    /// Representative time of a bin (its midpoint in the spacing coordinate).
    double bin_center(int bin) const {
        const double u = (static_cast<double>(bin) + 0.5) / static_cast<double>(time_bins_);
        if (spacing_ == BinSpacing::Linear) return schedule_.t_min + (1.0 - schedule_.t_min) * u;
        return schedule_.t_min * std::pow(1.0 / schedule_.t_min, u);
    }

    std::size_t key_index(const ConditionKey& key) const {
        auto it = key_lookup_.find(key.canonical());
        if (it == key_lookup_.end())
            throw UnseenKeyError("TabularScorer: unseen condition key '" + key.canonical() +
                                 "'; fall back to the null key");
        return it->second;
    }

    std::size_t cell_offset(std::size_t key_idx, int bin, std::uint64_t graph_key) const {
        return ((key_idx * static_cast<std::size_t>(time_bins_) + static_cast<std::size_t>(bin)) *
                    graph_count_ +
                graph_key) *
               entries_per_graph_;
    }

    std::size_t node_entry(std::size_t cell, int i, int v) const {
        return cell + static_cast<std::size_t>(i) * spaces_.node_card + static_cast<std::size_t>(v);
    }
    std::size_t edge_entry(std::size_t cell, int p, int v) const {
        return cell + static_cast<std::size_t>(n_) * spaces_.node_card +
               static_cast<std::size_t>(p) * spaces_.edge_card + static_cast<std::size_t>(v);
    }

    ScoreTensor score(const Graph& gt, double t, const ConditionKey& key) const override {
        const std::size_t cell =
            cell_offset(key_index(key), time_bin(t), canonical_index(gt, spaces_));
        ScoreTensor s(n_, spaces_.node_card, spaces_.edge_card);
        for (std::size_t e = 0; e < static_cast<std::size_t>(n_) * spaces_.node_card; ++e)
            s.node_log[e] = params_[cell + e];
        const std::size_t edge_base = static_cast<std::size_t>(n_) * spaces_.node_card;
        for (std::size_t e = 0; e < s.edge_log.size(); ++e)
            s.edge_log[e] = params_[cell + edge_base + e];
        s.pin_current(gt);
        return s;
    }

    std::size_t param_count() const override { return params_.size(); }
    double* param_data() override { return params_.data(); }
    const double* param_data() const override { return params_.data(); }

    LossValue add_loss_gradient(const Graph& g0, const Graph& gt, double t,
                                const ConditionKey& key, double lambda_edge, double scale,
                                GradBuffer& grad) const override {
        const double sb = schedule_.sigma_bar(t);
        const double sig = schedule_.sigma(t);
        const std::size_t cell =
            cell_offset(key_index(key), time_bin(t), canonical_index(gt, spaces_));
        LossValue loss;
        for (int i = 0; i < n_; ++i) {
            for (int v = 0; v < spaces_.node_card; ++v) {
                if (v == gt.node(i)) continue;
                const double r = forward_ratio(models_.node, sb, g0.node(i), gt.node(i), v);
                const double theta = params_[node_entry(cell, i, v)];
                const double s = std::exp(theta);
                loss.node_term += sig * (r > 0.0 ? s - r * theta : s);
                grad.add(node_entry(cell, i, v), scale * sig * (s - r));
                grad.add_curvature(node_entry(cell, i, v), scale * sig * s);
            }
        }
        for (int p = 0; p < pair_count(n_); ++p) {
            const int e_cur = gt.edges_upper[static_cast<std::size_t>(p)];
            const int e0 = g0.edges_upper[static_cast<std::size_t>(p)];
            for (int v = 0; v < spaces_.edge_card; ++v) {
                if (v == e_cur) continue;
                const double r = forward_ratio(models_.edge, sb, e0, e_cur, v);
                const double theta = params_[edge_entry(cell, p, v)];
                const double s = std::exp(theta);
                loss.edge_term += sig * (r > 0.0 ? s - r * theta : s);
                grad.add(edge_entry(cell, p, v), scale * lambda_edge * sig * (s - r));
                grad.add_curvature(edge_entry(cell, p, v), scale * lambda_edge * sig * s);
            }
        }
        return loss;
    }

    const std::vector<ConditionKey>& keys() const { return keys_; }
    const StateSpaces& spaces() const { return spaces_; }
    const NoiseSchedule& schedule() const { return schedule_; }
    const TransitionModels& models() const { return models_; }
    int n() const { return n_; }
    int time_bins() const { return time_bins_; }
    BinSpacing bin_spacing() const { return spacing_; }
    std::vector<double>& raw_params() { return params_; }
    const std::vector<double>& raw_params() const { return params_; }

private:
    StateSpaces spaces_;
    int n_;
    NoiseSchedule schedule_;
    TransitionModels models_;
    std::vector<ConditionKey> keys_;
    int time_bins_;
    BinSpacing spacing_ = BinSpacing::Linear;
    std::uint64_t graph_count_ = 0;
    std::size_t entries_per_graph_ = 0;
    std::unordered_map<std::string, std::size_t> key_lookup_;
    std::vector<double> params_;
};

/// Arithmetic mean of condition embeddings (subset pooling).
inline std::vector<double> pool_subset(const std::vector<std::vector<double>>& embeddings) {
    if (embeddings.empty()) throw BoundsError("pool_subset: empty input");
    std::vector<double> out(embeddings.front().size(), 0.0);
    for (const auto& e : embeddings) {
        if (e.size() != out.size()) throw SchemaError("pool_subset: dimension mismatch");
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += e[i];
    }
    for (auto& v : out) v /= static_cast<double>(embeddings.size());
    return out;
}

}  // namespace graphdiff

#endif
