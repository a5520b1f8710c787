#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "graphdiff/rng.hpp"

using namespace graphdiff;

TEST_CASE("identical seeds give identical streams") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge") {
    Rng a(1), b(2);
    int diffs = 0;
    for (int i = 0; i < 100; ++i) diffs += a.next_u64() != b.next_u64();
    CHECK(diffs > 90);
}

TEST_CASE("next_double stays in [0,1) and looks uniform") {
    Rng rng(7);
    double sum = 0.0;
    const int N = 100000;
    for (int i = 0; i < N; ++i) {
        const double u = rng.next_double();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(sum / N == Catch::Approx(0.5).margin(0.01));
}

TEST_CASE("uniform_int covers its range") {
    Rng rng(3);
    std::vector<int> counts(5, 0);
    for (int i = 0; i < 50000; ++i) ++counts[rng.uniform_int(5)];
    for (int c : counts) CHECK(c > 9000);
}

TEST_CASE("categorical respects weights and rejects zero mass") {
    Rng rng(11);
    const std::vector<double> w = {3.0, 1.0};
    int zero = 0;
    const int N = 40000;
    for (int i = 0; i < N; ++i) zero += rng.categorical(w) == 0;
    CHECK(static_cast<double>(zero) / N == Catch::Approx(0.75).margin(0.02));

    const std::vector<double> none = {0.0, 0.0};
    CHECK_THROWS_AS(rng.categorical(none), DomainError);
}

TEST_CASE("split streams are reproducible and distinct from the parent") {
    Rng a(99), b(99);
    Rng sa = a.split(), sb = b.split();
    for (int i = 0; i < 100; ++i) CHECK(sa.next_u64() == sb.next_u64());
    Rng c(99);
    Rng sc = c.split();
    int diffs = 0;
    for (int i = 0; i < 100; ++i) diffs += sc.next_u64() != c.next_u64();
    CHECK(diffs > 90);
}
