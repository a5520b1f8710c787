#ifndef GRAPHDIFF_TRAINING_HPP
#define GRAPHDIFF_TRAINING_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "graphdiff/dataset.hpp"
#include "graphdiff/errors.hpp"
#include "graphdiff/noise.hpp"
#include "graphdiff/rng.hpp"
#include "graphdiff/score.hpp"

namespace graphdiff {

struct TrainConfig {
    double learning_rate = 3e-4;
    int batch_size = 128;
    int steps = 10000;
    double lambda_edge = 1.0;
    double p_drop = 0.1;
    int warmup_steps = 1500;
    double grad_clip_norm = 1.0;
    TrainRegime regime = TrainRegime::PerProperty;
    std::uint64_t seed = 0;
    // Cosine decay of the learning rate to lr * decay_floor after warmup;
    // decay_floor = 1 disables decay.
    double decay_floor = 0.1;
    int time_bins = 32;
    // adam_beta2 = 1 switches entries that report diagonal curvature to
    // accumulated curvature-normalized steps (see AdamOptimizer); the ratio
    // targets are heavy-tailed, and tabular cells only reach their weighted-
    // mean optimum under that mode. The defaults are plain Adam.
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;

    void validate() const {
        if (!(learning_rate > 0.0)) throw DomainError("TrainConfig: learning_rate must be > 0");
        if (!(lambda_edge > 0.0)) throw DomainError("TrainConfig: lambda_edge must be > 0");
        if (!(p_drop >= 0.0 && p_drop < 1.0)) throw DomainError("TrainConfig: p_drop out of [0,1)");
        if (batch_size < 1 || steps < 1) throw DomainError("TrainConfig: bad batch/steps");
        if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 <= 1.0))
            throw DomainError("TrainConfig: adam_beta1 must be in [0,1), adam_beta2 in [0,1]");
    }
};

struct LossReport {
    double node_term = 0.0;
    double edge_term = 0.0;
    double total = 0.0;
    long token_count = 0;
};

/// Diffusion-weighted denoising score entropy of a prediction against the
/// forward ratios: sigma(t) * sum over alternative states of s - r log s,
/// edges weighted by lambda in the total. Zero-denominator (impossible) pairs
/// are skipped; r = 0 pairs contribute s.
inline LossReport score_entropy_loss(const ScoreTensor& pred, const Graph& g0, const Graph& gt,
                                     double t, const NoiseSchedule& schedule,
                                     const TransitionModels& models, double lambda_edge) {
    if (pred.n != gt.n || pred.n != g0.n) throw BoundsError("score_entropy_loss: shape mismatch");
    const double sb = schedule.sigma_bar(t);
    const double sig = schedule.sigma(t);
    LossReport rep;
    auto accumulate = [&](const TransitionModel& model, int cur, int x0,
                          std::span<const double> row, double* term) {
        for (int v = 0; v < model.K; ++v) {
            if (v == cur) continue;
            const double denom = kernel_entry(model, sb, cur, x0);
            if (!(denom > 0.0)) continue;  // impossible current state; skip pair
            const double r = kernel_entry(model, sb, v, x0) / denom;
            const double logs = row[static_cast<std::size_t>(v)];
            if (!std::isfinite(logs) && !(logs == kNegInf && r == 0.0))
                throw NumericError("score_entropy_loss: non-finite prediction");
            const double s = std::exp(logs);
            *term += sig * (r > 0.0 ? s - r * logs : s);
            ++rep.token_count;
        }
    };
    for (int i = 0; i < gt.n; ++i)
        accumulate(models.node, gt.node(i), g0.node(i), pred.node_row(i), &rep.node_term);
    for (int p = 0; p < pair_count(gt.n); ++p)
        accumulate(models.edge, gt.edges_upper[static_cast<std::size_t>(p)],
                   g0.edges_upper[static_cast<std::size_t>(p)], pred.edge_row(p), &rep.edge_term);
    rep.total = rep.node_term + lambda_edge * rep.edge_term;
    return rep;
}

/// Diagonal-adaptive first-order optimizer with lazy sparse updates; bias
/// correction uses per-entry visit counts so rarely-touched tabular cells are
/// not under-stepped.
///
/// beta2 < 1 is Adam's EMA second moment. beta2 = 1 switches entries that
/// report diagonal curvature to aggregated Gauss-Newton steps. Under the
/// exponential link s = exp(theta), the per-entry gradient g = w (s - rbar)
/// and curvature h = w s determine the batch sufficient statistics
///   w = h / s,   w * rbar = h - g,
/// which the optimizer accumulates across visits and then moves theta toward
/// log(sum w rbar / sum w) -- the running weighted mean of the per-item ratio
/// targets. The distinction from Adam matters because the ratio targets are
/// heavy-tailed: a cell's mean can be carried almost entirely by rare large-
/// ratio items, and any update that normalizes by a gradient-magnitude
/// statistic treats those items as bounded-influence outliers, which biases
/// the stationary point away from the loss minimizer. The running mean is
/// linear in the targets, so the rare items keep their full weight. Entries
/// without curvature (neural parameters) always take the Adam path.
class AdamOptimizer {
public:
    AdamOptimizer(std::size_t size, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : m_(size, 0.0), v_(size, 0.0), steps_(size, 0), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void update(double* params, const GradBuffer& grad, double lr) {
        for (auto idx : grad.touched()) {
            const double g = grad.value(idx);
            const double h = grad.curvature(idx);
            const int n = ++steps_[idx];
            if (beta2_ >= 1.0 && h > 0.0) {
                // v_ = accumulated weight, m_ = accumulated weighted targets.
                // The trust region widens as evidence accumulates; clamping
                // never biases the destination because the target is
                // recomputed from the sums, not from theta.
                const double s = std::exp(params[idx]);
                v_[idx] += h / s;
                m_[idx] += std::max(h - g, 0.0);
                const double cap = std::max(1.0, 0.1 * std::sqrt(static_cast<double>(n)));
                const double target =
                    m_[idx] > 0.0 ? std::log(m_[idx] / v_[idx]) : params[idx] - cap;
                params[idx] += std::min(lr, 1.0) * std::clamp(target - params[idx], -cap, cap);
                continue;
            }
            m_[idx] = beta1_ * m_[idx] + (1.0 - beta1_) * g;
            const double mh = m_[idx] / (1.0 - std::pow(beta1_, n));
            const double b2 = std::min(beta2_, 0.999);
            v_[idx] = b2 * v_[idx] + (1.0 - b2) * g * g;
            const double vh = v_[idx] / (1.0 - std::pow(b2, n));
            // Trust-region cap: a fresh outlier gradient can exceed sqrt(vh)
            // by a large factor, so bound the step magnitude to lr.
            params[idx] -= lr * std::clamp(mh / (std::sqrt(vh) + eps_), -1.0, 1.0);
        }
    }

private:
    std::vector<double> m_, v_;
    std::vector<int> steps_;
    double beta1_, beta2_, eps_;
};

/// Learning rate at a 0-based step: linear warmup then cosine decay to
/// learning_rate * decay_floor.
inline double lr_at_step(const TrainConfig& cfg, int step) {
    const double base = cfg.learning_rate;
    if (step < cfg.warmup_steps)
        return base * static_cast<double>(step + 1) / static_cast<double>(cfg.warmup_steps);
    if (cfg.decay_floor >= 1.0 || cfg.steps <= cfg.warmup_steps) return base;
    const double frac = static_cast<double>(step - cfg.warmup_steps) /
                        static_cast<double>(cfg.steps - cfg.warmup_steps);
    const double lo = base * cfg.decay_floor;
    return lo + 0.5 * (base - lo) * (1.0 + std::cos(M_PI * frac));
}

/// Draws the conditioning key for one training item per the configured
/// regime, applying condition dropout.
inline ConditionKey draw_training_key(const DatasetRecord& rec, TrainRegime regime, double p_drop,
                                      Rng& rng) {
    const int m_total = rec.conditions.size();
    if (m_total == 0) return ConditionKey::null();
    if (rng.next_double() < p_drop) return ConditionKey::null();
    if (regime == TrainRegime::PerProperty) {
        const int m = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(m_total)));
        const auto& slot = rec.conditions.slots[static_cast<std::size_t>(m)];
        if (!slot) return ConditionKey::null();
        return ConditionKey::single(m, *slot);
    }
    // uniform non-empty subset of the assigned slots
    std::vector<int> assigned;
    for (int m = 0; m < m_total; ++m)
        if (rec.conditions.slots[static_cast<std::size_t>(m)]) assigned.push_back(m);
    if (assigned.empty()) return ConditionKey::null();
    const auto count = static_cast<std::uint64_t>(assigned.size());
    const std::uint64_t bits = 1 + rng.uniform_int((1ull << count) - 1);
    std::vector<std::pair<int, ConditionValue>> entries;
    for (std::uint64_t k = 0; k < count; ++k)
        if (bits & (1ull << k))
            entries.emplace_back(assigned[static_cast<std::size_t>(k)],
                                 *rec.conditions.slots[static_cast<std::size_t>(
                                     assigned[static_cast<std::size_t>(k)])]);
    return ConditionKey::subset(std::move(entries));
}

/// One optimization step: corrupt a batch, accumulate mean gradients, clip by
/// global norm and apply the adaptive update.
inline LossReport train_step(TrainableScorer& scorer, const Dataset& dataset,
                             const TrainConfig& cfg, const NoiseSchedule& schedule,
                             const TransitionModels& models, AdamOptimizer& opt, GradBuffer& grad,
                             int step, Rng& rng) {
    grad.clear();
    LossReport rep;
    const double scale = 1.0 / static_cast<double>(cfg.batch_size);
    for (int b = 0; b < cfg.batch_size; ++b) {
        const auto& rec =
            dataset.records[rng.uniform_int(static_cast<std::uint64_t>(dataset.records.size()))];
        const double t = rng.uniform(schedule.t_min, 1.0);
        const ConditionKey key = draw_training_key(rec, cfg.regime, cfg.p_drop, rng);
        const Graph gt = forward_sample(rec.graph, t, schedule, models.node, models.edge, rng);
        const LossValue lv =
            scorer.add_loss_gradient(rec.graph, gt, t, key, cfg.lambda_edge, scale, grad);
        if (!std::isfinite(lv.node_term) || !std::isfinite(lv.edge_term))
            throw NumericError("train_step: non-finite loss at step " + std::to_string(step));
        rep.node_term += scale * lv.node_term;
        rep.edge_term += scale * lv.edge_term;
    }
    rep.total = rep.node_term + cfg.lambda_edge * rep.edge_term;
    const double norm = grad.norm();
    if (cfg.grad_clip_norm > 0.0 && norm > cfg.grad_clip_norm)
        grad.scale(cfg.grad_clip_norm / norm);
    opt.update(scorer.param_data(), grad, lr_at_step(cfg, step));
    return rep;
}

/// Full training loop; deterministic for a given seed. Returns the per-step
/// loss trace.
inline std::vector<LossReport> train(TrainableScorer& scorer, const Dataset& dataset,
                                     const TrainConfig& cfg, const NoiseSchedule& schedule,
                                     const TransitionModels& models) {
    cfg.validate();
    dataset.validate();
    Rng rng(cfg.seed);
    AdamOptimizer opt(scorer.param_count(), cfg.adam_beta1, cfg.adam_beta2);
    GradBuffer grad(scorer.param_count());
    std::vector<LossReport> trace;
    trace.reserve(static_cast<std::size_t>(cfg.steps));
    for (int step = 0; step < cfg.steps; ++step)
        trace.push_back(train_step(scorer, dataset, cfg, schedule, models, opt, grad, step, rng));
    return trace;
}

/// Loss trace as CSV: step,node_term,edge_term,total.
inline std::string loss_trace_csv(const std::vector<LossReport>& trace) {
    std::string out = "step,node_term,edge_term,total\n";
    char buf[128];
    for (std::size_t i = 0; i < trace.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", i, trace[i].node_term,
                      trace[i].edge_term, trace[i].total);
        out += buf;
    }
    return out;
}

}  // namespace graphdiff

#endif
