#ifndef GRAPHDIFF_NEURAL_HPP
#define GRAPHDIFF_NEURAL_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "graphdiff/rng.hpp"
#include "graphdiff/score.hpp"

namespace graphdiff {

/// Sinusoidal time features shared by both token families.
inline constexpr int kTimeFeatureDim = 8;

inline void time_features(double t, double* out) {
    out[0] = t;
    out[1] = 1.0;
    for (int k = 0; k < 3; ++k) {
        const double w = 2.0 * M_PI * static_cast<double>(1 << k);
        out[2 + 2 * k] = std::sin(w * t);
        out[3 + 2 * k] = std::cos(w * t);
    }
}

/// Minimal denoiser: per-token featurizer (one-hot state, time features,
/// pooled condition embedding, normalized position), one tanh hidden layer and
/// a linear head per token family. Outputs are log concrete scores; the
/// exponential of the head output keeps scores positive, and current-state
/// entries are pinned to 0. All gradients are hand-derived.
class NeuralScorer : public TrainableScorer {
public:
    struct Config {
        int d_h = 16;        // condition embedding width
        int hidden = 32;     // per-family hidden width
        int cluster_hidden = 8;
        double init_scale = 0.05;
    };

    NeuralScorer(StateSpaces spaces, NoiseSchedule schedule, TransitionModels models,
                 ConditionSchema schema, Config cfg, std::uint64_t seed)
        : spaces_(spaces), schedule_(schedule), models_(models), schema_(std::move(schema)), cfg_(cfg) {
        layout();
        params_.assign(total_params_, 0.0);
        Rng rng(seed);
        // Gaussian-ish init everywhere except the output heads, which start
        // at zero so an untrained scorer predicts uniform ratios.
        auto randn = [&rng] {
            double acc = -6.0;
            for (int i = 0; i < 12; ++i) acc += rng.next_double();
            return acc;
        };
        for (std::size_t i = 0; i < total_params_; ++i) params_[i] = cfg_.init_scale * randn();
        zero_range(node_net_.w2, static_cast<std::size_t>(spaces_.node_card) * cfg_.hidden);
        zero_range(node_net_.b2, static_cast<std::size_t>(spaces_.node_card));
        zero_range(edge_net_.w2, static_cast<std::size_t>(spaces_.edge_card) * cfg_.hidden);
        zero_range(edge_net_.b2, static_cast<std::size_t>(spaces_.edge_card));
    }

    // -- condition encoders --------------------------------------------------

    /// Embedding of one slot's value; `dropped` selects the null row / e_null.
    std::vector<double> encode_condition(int slot, const ConditionValue& value,
                                         bool dropped) const {
        return encode_slot(params_.data(), slot, dropped ? nullptr : &value, nullptr, nullptr);
    }

    /// Pooled embedding for a condition key. The null key pools every slot's
    /// null embedding.
    std::vector<double> encode_key(const ConditionKey& key) const {
        std::vector<std::vector<double>> parts;
        if (key.is_null()) {
            for (int m = 0; m < static_cast<int>(schema_.size()); ++m)
                parts.push_back(encode_condition(m, ConditionValue::categorical(0), true));
        } else {
            for (const auto& [m, v] : key.slots) {
                validate_value(v, schema_[static_cast<std::size_t>(m)]);
                parts.push_back(encode_condition(m, v, false));
            }
        }
        return pool_subset(parts);
    }

    // -- forward -------------------------------------------------------------

    ScoreTensor score(const Graph& gt, double t, const ConditionKey& key) const override {
        for (double p : params_)
            if (!std::isfinite(p)) throw NumericError("NeuralScorer: non-finite parameter");
        gt.validate(spaces_);
        const std::vector<double> cond = encode_key(key);
        ScoreTensor s(gt.n, spaces_.node_card, spaces_.edge_card);
        std::vector<double> feat, hidden;
        for (int i = 0; i < gt.n; ++i) {
            node_features(gt, i, t, cond, feat);
            forward_family(node_net_, spaces_.node_card, feat, hidden, s.node_row(i).data());
        }
        for (int p = 0; p < pair_count(gt.n); ++p) {
            edge_features(gt, p, t, cond, feat);
            forward_family(edge_net_, spaces_.edge_card, feat, hidden, s.edge_row(p).data());
        }
        s.pin_current(gt);
        return s;
    }

    // -- training ------------------------------------------------------------

    std::size_t param_count() const override { return total_params_; }
    double* param_data() override { return params_.data(); }
    const double* param_data() const override { return params_.data(); }

    LossValue add_loss_gradient(const Graph& g0, const Graph& gt, double t,
                                const ConditionKey& key, double lambda_edge, double scale,
                                GradBuffer& grad) const override {
        const double sb = schedule_.sigma_bar(t);
        const double sig = schedule_.sigma(t);
        const std::vector<double> cond = encode_key(key);
        std::vector<double> cond_grad(static_cast<std::size_t>(cfg_.d_h), 0.0);
        LossValue loss;
        std::vector<double> feat, hidden, dlogit(0);

        auto token_pass = [&](const FamilyNet& net, int K, const TransitionModel& model,
                              int cur, int x0, double weight, double* loss_acc) {
            dlogit.assign(static_cast<std::size_t>(K), 0.0);
            std::vector<double> logits(static_cast<std::size_t>(K), 0.0);
            forward_family(net, K, feat, hidden, logits.data());
            for (int v = 0; v < K; ++v) {
                if (v == cur) continue;
                const double r = forward_ratio(model, sb, x0, cur, v);
                const double s = std::exp(logits[static_cast<std::size_t>(v)]);
                *loss_acc += sig * (s - r * logits[static_cast<std::size_t>(v)]);
                dlogit[static_cast<std::size_t>(v)] = scale * weight * sig * (s - r);
            }
            backward_family(net, K, feat, hidden, dlogit, grad, cond_grad);
        };

        for (int i = 0; i < gt.n; ++i) {
            node_features(gt, i, t, cond, feat);
            token_pass(node_net_, spaces_.node_card, models_.node, gt.node(i), g0.node(i), 1.0,
                       &loss.node_term);
        }
        for (int p = 0; p < pair_count(gt.n); ++p) {
            edge_features(gt, p, t, cond, feat);
            token_pass(edge_net_, spaces_.edge_card, models_.edge,
                       gt.edges_upper[static_cast<std::size_t>(p)],
                       g0.edges_upper[static_cast<std::size_t>(p)], lambda_edge, &loss.edge_term);
        }
        backward_condition(key, cond_grad, grad);
        return loss;
    }

    const ConditionSchema& schema() const { return schema_; }
    const Config& config() const { return cfg_; }
    const StateSpaces& spaces() const { return spaces_; }
    const NoiseSchedule& schedule() const { return schedule_; }
    const TransitionModels& models() const { return models_; }
    std::vector<double>& raw_params() { return params_; }
    const std::vector<double>& raw_params() const { return params_; }

private:
    struct FamilyNet {
        std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0;
        int feat_dim = 0;
    };
    struct SlotEnc {
        std::size_t base = 0;  // categorical: table (K+1) x d_h
        std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0, e_null = 0;  // cluster
    };

    void layout() {
        std::size_t off = 0;
        auto take = [&off](std::size_t count) {
            const std::size_t at = off;
            off += count;
            return at;
        };
        const auto dh = static_cast<std::size_t>(cfg_.d_h);
        const auto hc = static_cast<std::size_t>(cfg_.cluster_hidden);
        for (const auto& spec : schema_) {
            SlotEnc enc;
            if (spec.kind == ConditionSlotSpec::Kind::Categorical) {
                enc.base = take(static_cast<std::size_t>(spec.cardinality + 1) * dh);
            } else {
                enc.w1 = take(hc * static_cast<std::size_t>(spec.dim));
                enc.b1 = take(hc);
                enc.w2 = take(dh * hc);
                enc.b2 = take(dh);
                enc.e_null = take(dh);
            }
            encoders_.push_back(enc);
        }
        const auto h = static_cast<std::size_t>(cfg_.hidden);
        node_net_.feat_dim = spaces_.node_card + kTimeFeatureDim + cfg_.d_h + 2;
        node_net_.w1 = take(h * static_cast<std::size_t>(node_net_.feat_dim));
        node_net_.b1 = take(h);
        node_net_.w2 = take(static_cast<std::size_t>(spaces_.node_card) * h);
        node_net_.b2 = take(static_cast<std::size_t>(spaces_.node_card));
        edge_net_.feat_dim = spaces_.edge_card + kTimeFeatureDim + cfg_.d_h + 2;
        edge_net_.w1 = take(h * static_cast<std::size_t>(edge_net_.feat_dim));
        edge_net_.b1 = take(h);
        edge_net_.w2 = take(static_cast<std::size_t>(spaces_.edge_card) * h);
        edge_net_.b2 = take(static_cast<std::size_t>(spaces_.edge_card));
        total_params_ = off;
    }

    void zero_range(std::size_t base, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) params_[base + i] = 0.0;
    }

    void node_features(const Graph& g, int i, double t, const std::vector<double>& cond,
                       std::vector<double>& feat) const {
        feat.assign(static_cast<std::size_t>(node_net_.feat_dim), 0.0);
        feat[static_cast<std::size_t>(g.node(i))] = 1.0;
        time_features(t, feat.data() + spaces_.node_card);
        std::copy(cond.begin(), cond.end(), feat.begin() + spaces_.node_card + kTimeFeatureDim);
        const double denom = g.n > 1 ? static_cast<double>(g.n - 1) : 1.0;
        feat[feat.size() - 2] = static_cast<double>(i) / denom;
        feat[feat.size() - 1] = 0.0;
    }

    void edge_features(const Graph& g, int p, double t, const std::vector<double>& cond,
                       std::vector<double>& feat) const {
        feat.assign(static_cast<std::size_t>(edge_net_.feat_dim), 0.0);
        feat[g.edges_upper[static_cast<std::size_t>(p)]] = 1.0;
        time_features(t, feat.data() + spaces_.edge_card);
        std::copy(cond.begin(), cond.end(), feat.begin() + spaces_.edge_card + kTimeFeatureDim);
        const auto [i, j] = pair_from_index(p, g.n);
        const double denom = g.n > 1 ? static_cast<double>(g.n - 1) : 1.0;
        feat[feat.size() - 2] = static_cast<double>(i) / denom;
        feat[feat.size() - 1] = static_cast<double>(j) / denom;
    }

    void forward_family(const FamilyNet& net, int K, const std::vector<double>& feat,
                        std::vector<double>& hidden, double* logits) const {
        const auto h = static_cast<std::size_t>(cfg_.hidden);
        const auto f = static_cast<std::size_t>(net.feat_dim);
        hidden.assign(h, 0.0);
        const double* p = params_.data();
        for (std::size_t r = 0; r < h; ++r) {
            double acc = p[net.b1 + r];
            const double* w = p + net.w1 + r * f;
            for (std::size_t c = 0; c < f; ++c) acc += w[c] * feat[c];
            hidden[r] = std::tanh(acc);
        }
        for (std::size_t v = 0; v < static_cast<std::size_t>(K); ++v) {
            double acc = p[net.b2 + v];
            const double* w = p + net.w2 + v * h;
            for (std::size_t r = 0; r < h; ++r) acc += w[r] * hidden[r];
            logits[v] = acc;
        }
    }

    void backward_family(const FamilyNet& net, int K, const std::vector<double>& feat,
                         const std::vector<double>& hidden, const std::vector<double>& dlogit,
                         GradBuffer& grad, std::vector<double>& cond_grad) const {
        const auto h = static_cast<std::size_t>(cfg_.hidden);
        const auto f = static_cast<std::size_t>(net.feat_dim);
        const double* p = params_.data();
        std::vector<double> dh(h, 0.0);
        for (std::size_t v = 0; v < static_cast<std::size_t>(K); ++v) {
            const double d = dlogit[v];
            if (d == 0.0) continue;
            grad.add(net.b2 + v, d);
            const double* w = p + net.w2 + v * h;
            for (std::size_t r = 0; r < h; ++r) {
                grad.add(net.w2 + v * h + r, d * hidden[r]);
                dh[r] += d * w[r];
            }
        }
        const std::size_t cond_off = f - static_cast<std::size_t>(cfg_.d_h) - 2;
        for (std::size_t r = 0; r < h; ++r) {
            const double dpre = dh[r] * (1.0 - hidden[r] * hidden[r]);
            if (dpre == 0.0) continue;
            grad.add(net.b1 + r, dpre);
            const double* w = p + net.w1 + r * f;
            for (std::size_t c = 0; c < f; ++c) grad.add(net.w1 + r * f + c, dpre * feat[c]);
            for (std::size_t k = 0; k < static_cast<std::size_t>(cfg_.d_h); ++k)
                cond_grad[k] += dpre * w[cond_off + k];
        }
    }

    /// Forward pass of one slot encoder. When `sm_out`/`z_unused` are given the
    /// cluster softmax activations are stashed for the backward pass.
    std::vector<double> encode_slot(const double* p, int slot, const ConditionValue* value,
                                    std::vector<double>* sm_out, const void* z_unused) const {
        (void)z_unused;
        const auto& spec = schema_[static_cast<std::size_t>(slot)];
        const auto& enc = encoders_[static_cast<std::size_t>(slot)];
        const auto dh = static_cast<std::size_t>(cfg_.d_h);
        std::vector<double> out(dh, 0.0);
        if (spec.kind == ConditionSlotSpec::Kind::Categorical) {
            const int row = value ? value->category() : spec.cardinality;
            for (std::size_t k = 0; k < dh; ++k)
                out[k] = p[enc.base + static_cast<std::size_t>(row) * dh + k];
            return out;
        }
        if (!value) {
            for (std::size_t k = 0; k < dh; ++k) out[k] = p[enc.e_null + k];
            return out;
        }
        const auto hc = static_cast<std::size_t>(cfg_.cluster_hidden);
        const auto din = static_cast<std::size_t>(spec.dim);
        std::vector<double> z(hc, 0.0);
        double zmax = -1e300;
        for (std::size_t r = 0; r < hc; ++r) {
            double acc = p[enc.b1 + r];
            for (std::size_t c = 0; c < din; ++c) acc += p[enc.w1 + r * din + c] * value->vec()[c];
            z[r] = acc;
            zmax = std::max(zmax, acc);
        }
        double total = 0.0;
        for (auto& v : z) {
            v = std::exp(v - zmax);
            total += v;
        }
        for (auto& v : z) v /= total;  // softmax
        for (std::size_t k = 0; k < dh; ++k) {
            double acc = p[enc.b2 + k];
            for (std::size_t r = 0; r < hc; ++r) acc += p[enc.w2 + k * hc + r] * z[r];
            out[k] = acc;
        }
        if (sm_out) *sm_out = std::move(z);
        return out;
    }

    void backward_condition(const ConditionKey& key, const std::vector<double>& cond_grad,
                            GradBuffer& grad) const {
        const auto dh = static_cast<std::size_t>(cfg_.d_h);
        const std::size_t parts = key.is_null() ? schema_.size() : key.slots.size();
        const double inv = 1.0 / static_cast<double>(parts);
        auto slot_backward = [&](int m, const ConditionValue* value) {
            const auto& spec = schema_[static_cast<std::size_t>(m)];
            const auto& enc = encoders_[static_cast<std::size_t>(m)];
            if (spec.kind == ConditionSlotSpec::Kind::Categorical) {
                const int row = value ? value->category() : spec.cardinality;
                for (std::size_t k = 0; k < dh; ++k)
                    grad.add(enc.base + static_cast<std::size_t>(row) * dh + k, inv * cond_grad[k]);
                return;
            }
            if (!value) {
                for (std::size_t k = 0; k < dh; ++k) grad.add(enc.e_null + k, inv * cond_grad[k]);
                return;
            }
            std::vector<double> sm;
            encode_slot(params_.data(), m, value, &sm, nullptr);
            const auto hc = static_cast<std::size_t>(cfg_.cluster_hidden);
            const auto din = static_cast<std::size_t>(spec.dim);
            std::vector<double> dsm(hc, 0.0);
            for (std::size_t k = 0; k < dh; ++k) {
                const double d = inv * cond_grad[k];
                grad.add(enc.b2 + k, d);
                for (std::size_t r = 0; r < hc; ++r) {
                    grad.add(enc.w2 + k * hc + r, d * sm[r]);
                    dsm[r] += d * params_[enc.w2 + k * hc + r];
                }
            }
            double dot = 0.0;
            for (std::size_t r = 0; r < hc; ++r) dot += dsm[r] * sm[r];
            for (std::size_t r = 0; r < hc; ++r) {
                const double dz = sm[r] * (dsm[r] - dot);  // softmax Jacobian
                grad.add(enc.b1 + r, dz);
                for (std::size_t c = 0; c < din; ++c)
                    grad.add(enc.w1 + r * din + c, dz * value->vec()[c]);
            }
        };
        if (key.is_null()) {
            for (int m = 0; m < static_cast<int>(schema_.size()); ++m) slot_backward(m, nullptr);
        } else {
            for (const auto& [m, v] : key.slots) slot_backward(m, &v);
        }
    }

    StateSpaces spaces_;
    NoiseSchedule schedule_;
    TransitionModels models_;
    ConditionSchema schema_;
    Config cfg_;
    std::vector<SlotEnc> encoders_;
    FamilyNet node_net_, edge_net_;
    std::size_t total_params_ = 0;
    std::vector<double> params_;
};

}  // namespace graphdiff

#endif
