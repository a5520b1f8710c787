#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "graphdiff/calibration.hpp"
#include "graphdiff/rng.hpp"

using namespace graphdiff;

TEST_CASE("worked example: percentile thresholding at tau = 1") {
    CalibrationParams p;
    p.alpha = 0.0;
    p.beta = 100.0;
    p.tau = 1.0;
    const CalibrationResult r = calibrate({0.5, 0.3, 0.2}, p);
    // l = 0.2, h = 0.5, clipped = [1, 1/3, 0] -> [0.75, 0.25, 0]
    REQUIRE_FALSE(r.degenerate);
    CHECK(r.p[0] == Catch::Approx(0.75).margin(1e-12));
    CHECK(r.p[1] == Catch::Approx(0.25).margin(1e-12));
    CHECK(r.p[2] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("worked example: temperature sharpening at tau = 0.5") {
    CalibrationParams p;
    p.alpha = 0.0;
    p.beta = 100.0;
    p.tau = 0.5;
    // the appended 0 forces l = 0, h = 0.75; 1/tau = 2 squares the entries
    const CalibrationResult r = calibrate({0.75, 0.25, 0.0}, p);
    CHECK(r.p[0] == Catch::Approx(0.9).margin(1e-12));
    CHECK(r.p[1] == Catch::Approx(0.1).margin(1e-12));
    CHECK(r.p[2] == 0.0);
}

TEST_CASE("tau = 1 with a zero floor is plain normalization") {
    CalibrationParams p;
    p.alpha = 0.0;
    p.beta = 100.0;
    p.tau = 1.0;
    const std::vector<double> raw = {0.2, 0.0, 0.6};
    const CalibrationResult r = calibrate(raw, p);
    const double total = 0.8;
    for (std::size_t i = 0; i < raw.size(); ++i)
        CHECK(r.p[i] == Catch::Approx(raw[i] / total).margin(1e-12));
}

TEST_CASE("negatives are clamped before thresholding") {
    CalibrationParams p;
    p.alpha = 0.0;
    p.beta = 100.0;
    const CalibrationResult r = calibrate({-0.5, 0.25, 0.75}, p);
    CHECK(r.p[0] == 0.0);
    CHECK(r.p[2] > r.p[1]);
}

TEST_CASE("degenerate input falls back to a point mass at the raw argmax") {
    CalibrationParams p;
    const CalibrationResult flat = calibrate({5.0, 5.0, 5.0}, p);
    CHECK(flat.degenerate);
    CHECK(flat.p[0] == 1.0);

    const CalibrationResult neg = calibrate({-3.0, -1.0, -2.0}, p);
    CHECK(neg.degenerate);
    CHECK(neg.p[1] == 1.0);  // argmax of the raw input
}

TEST_CASE("calibrated outputs are distributions and preserve the argmax at alpha=0, tau=1") {
    CalibrationParams p;
    p.alpha = 0.0;
    p.beta = 100.0;
    p.tau = 1.0;
    Rng rng(6);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> raw(4);
        for (auto& v : raw) v = rng.uniform(0.0, 1.0);
        raw[rng.uniform_int(4)] = 0.0;  // force the floor l = 0
        const CalibrationResult r = calibrate(raw, p);
        double total = 0.0;
        for (double v : r.p) {
            CHECK(v >= 0.0);
            total += v;
        }
        CHECK(total == Catch::Approx(1.0).margin(1e-10));
        if (r.degenerate) continue;
        const auto raw_arg = std::max_element(raw.begin(), raw.end()) - raw.begin();
        const auto cal_arg = std::max_element(r.p.begin(), r.p.end()) - r.p.begin();
        CHECK(raw_arg == cal_arg);
    }
}

TEST_CASE("temperature monotonicity: tau = 0.5 sharpens vs tau = 1 (1000-vector fuzz)") {
    CalibrationParams sharp, plain;
    sharp.tau = 0.5;
    plain.tau = 1.0;
    Rng rng(7);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> raw(5);
        for (auto& v : raw) v = rng.uniform(0.0, 2.0);
        const CalibrationResult a = calibrate(raw, sharp);
        const CalibrationResult b = calibrate(raw, plain);
        if (a.degenerate || b.degenerate) continue;
        const double max_a = *std::max_element(a.p.begin(), a.p.end());
        const double max_b = *std::max_element(b.p.begin(), b.p.end());
        CHECK(max_a >= max_b - 1e-12);
    }
}

TEST_CASE("parameter validation") {
    CalibrationParams p;
    p.alpha = 50.0;
    p.beta = 10.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = CalibrationParams{};
    p.tau = 0.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = CalibrationParams{};
    p.eps_pc = 0.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    CHECK_THROWS_AS(calibrate({}, CalibrationParams{}), BoundsError);
    CHECK_THROWS_AS(calibrate({std::nan("")}, CalibrationParams{}), NumericError);
}

TEST_CASE("percentile uses linear interpolation") {
    CHECK(percentile({0.0, 1.0}, 50.0) == Catch::Approx(0.5));
    CHECK(percentile({1.0, 2.0, 4.0}, 0.0) == 1.0);
    CHECK(percentile({1.0, 2.0, 4.0}, 100.0) == 4.0);
    CHECK(percentile({1.0, 2.0, 4.0}, 75.0) == Catch::Approx(3.0));
    CHECK(percentile({7.0}, 33.0) == 7.0);
}
