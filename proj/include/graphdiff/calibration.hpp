#ifndef GRAPHDIFF_CALIBRATION_HPP
#define GRAPHDIFF_CALIBRATION_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "graphdiff/errors.hpp"

namespace graphdiff {

/// Probability Calibration parameters: percentile thresholding (alpha, beta,
/// eps) followed by temperature scaling (tau).
struct CalibrationParams {
    double alpha = 1.0;   // lower percentile, in [0, 100)
    double beta = 99.0;   // upper percentile
    double tau = 1.0;     // temperature, > 0
    double eps_pc = 1e-6;
    bool enabled = false;

    void validate() const {
        if (!(alpha >= 0.0 && alpha < beta && beta <= 100.0))
            throw DomainError("CalibrationParams: need 0 <= alpha < beta <= 100");
        if (!(tau > 0.0)) throw DomainError("CalibrationParams: tau must be > 0");
        if (!(eps_pc > 0.0)) throw DomainError("CalibrationParams: eps must be > 0");
    }
};

/// Linear-interpolation percentile of a vector (p in [0, 100]).
inline double percentile(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    if (values.size() == 1) return values.front();
    const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

struct CalibrationResult {
    std::vector<double> p;   // sums to 1
    bool degenerate = false; // all mass clipped; fell back to a point mass
};

/// Dynamic thresholding + temperature scaling of one token's raw transition
/// vector. Negatives are clamped, percentiles are taken across the state
/// dimension, min-max scaling by (l, h), then a 1/tau power and renormalize.
/// If everything clips to zero the result is a point mass at the raw argmax.
inline CalibrationResult calibrate(const std::vector<double>& p_raw,
                                   const CalibrationParams& params) {
    params.validate();
    if (p_raw.empty()) throw BoundsError("calibrate: empty input");
    for (double v : p_raw)
        if (!std::isfinite(v)) throw NumericError("calibrate: non-finite entry");

    std::vector<double> clamped(p_raw.size());
    for (std::size_t i = 0; i < p_raw.size(); ++i) clamped[i] = std::max(p_raw[i], 0.0);

    const double l = percentile(clamped, params.alpha);
    const double h = std::max(percentile(clamped, params.beta), l + params.eps_pc);

    CalibrationResult out;
    out.p.resize(p_raw.size());
    double total = 0.0;
    for (std::size_t i = 0; i < clamped.size(); ++i) {
        const double clipped = std::max(clamped[i] - l, 0.0) / (h - l);
        const double scaled = clipped > 0.0 ? std::pow(clipped, 1.0 / params.tau) : 0.0;
        out.p[i] = scaled;
        total += scaled;
    }
    if (!(total > 0.0)) {
        out.degenerate = true;
        std::fill(out.p.begin(), out.p.end(), 0.0);
        const auto argmax = static_cast<std::size_t>(
            std::max_element(p_raw.begin(), p_raw.end()) - p_raw.begin());
        out.p[argmax] = 1.0;
        return out;
    }
    for (auto& v : out.p) v /= total;
    return out;
}

}  // namespace graphdiff

#endif
