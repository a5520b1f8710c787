// Shared test oracles: series matrix exponential, finite differences, and
// Monte Carlo helpers. These are independent reimplementations used to check
// the closed forms in the library, so they must not call the code under test.
#ifndef GRAPHDIFF_TESTS_SUPPORT_HPP
#define GRAPHDIFF_TESTS_SUPPORT_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "graphdiff/noise.hpp"
#include "graphdiff/score.hpp"
#include "graphdiff/training.hpp"

namespace gdtest {

using graphdiff::Matrix;

inline Matrix mat_mul(const Matrix& a, const Matrix& b) {
    Matrix out(a.K);
    for (int r = 0; r < a.K; ++r)
        for (int c = 0; c < a.K; ++c) {
            double acc = 0.0;
            for (int k = 0; k < a.K; ++k) acc += a.at(r, k) * b.at(k, c);
            out.at(r, c) = acc;
        }
    return out;
}

inline Matrix mat_identity(int K) {
    Matrix out(K);
    for (int i = 0; i < K; ++i) out.at(i, i) = 1.0;
    return out;
}

/// 30-term Taylor series exp(sigma * Q) with scaling and squaring so large
/// sigma (up to ~12) still converges to 1e-10.
inline Matrix series_matrix_exp(const Matrix& q, double sigma) {
    int squarings = 0;
    double s = sigma;
    while (std::abs(s) > 0.5) {
        s *= 0.5;
        ++squarings;
    }
    Matrix scaled(q.K);
    for (std::size_t i = 0; i < scaled.data.size(); ++i) scaled.data[i] = q.data[i] * s;
    Matrix result = mat_identity(q.K);
    Matrix term = mat_identity(q.K);
    for (int k = 1; k <= 30; ++k) {
        term = mat_mul(term, scaled);
        for (auto& v : term.data) v /= static_cast<double>(k);
        for (std::size_t i = 0; i < result.data.size(); ++i) result.data[i] += term.data[i];
    }
    for (int i = 0; i < squarings; ++i) result = mat_mul(result, result);
    return result;
}

/// Central finite-difference derivative of a scalar function of one parameter.
inline double central_difference(const std::function<double(double)>& f, double x0,
                                 double h = 1e-6) {
    return (f(x0 + h) - f(x0 - h)) / (2.0 * h);
}

/// Loss of a trainable scorer on one corrupted item, recomputed from the
/// public score() path (independent of add_loss_gradient's internals).
inline double scorer_loss(const graphdiff::TrainableScorer& scorer, const graphdiff::Graph& g0,
                          const graphdiff::Graph& gt, double t, const graphdiff::ConditionKey& key,
                          const graphdiff::NoiseSchedule& schedule,
                          const graphdiff::TransitionModels& models, double lambda_edge) {
    const graphdiff::ScoreTensor pred = scorer.score(gt, t, key);
    const graphdiff::LossReport rep =
        graphdiff::score_entropy_loss(pred, g0, gt, t, schedule, models, lambda_edge);
    return rep.total;
}

/// Three-standard-error bound for a binomial proportion estimate.
inline double binomial_3se(double p, long n) {
    return 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace gdtest

#endif
