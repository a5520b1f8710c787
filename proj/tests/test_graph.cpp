#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>

#include "graphdiff/graph.hpp"

using namespace graphdiff;

TEST_CASE("enumerate_graphs counts match the mixed-radix formula") {
    const StateSpaces s(2, 2, false);
    CHECK(enumerate_graphs(1, s).size() == 2);
    CHECK(enumerate_graphs(2, s).size() == 8);
    CHECK(enumerate_graphs(3, s).size() == 64);
    // cross-check against a^n * b^(n(n-1)/2)
    for (int n = 1; n <= 3; ++n) {
        std::uint64_t expected = 1;
        for (int i = 0; i < n; ++i) expected *= 2;
        for (int k = 0; k < pair_count(n); ++k) expected *= 2;
        CHECK(graph_space_size(n, s) == expected);
    }
}

TEST_CASE("enumeration guard rejects oversized spaces") {
    CHECK_THROWS_AS(graph_space_size(5, StateSpaces(2, 2, false)), SizeError);
    CHECK_THROWS_AS(graph_space_size(4, StateSpaces(16, 16, false)), SizeError);
    CHECK_NOTHROW(graph_space_size(4, StateSpaces(2, 2, false)));
}

TEST_CASE("canonical_index is a bijection aligned with enumeration order") {
    const StateSpaces s(2, 2, false);
    Graph zero(3);
    CHECK(canonical_index(zero, s) == 0);

    const auto g2 = enumerate_graphs(2, s);
    CHECK(canonical_index(g2.back(), s) == 7);

    const auto g3 = enumerate_graphs(3, s);
    for (std::size_t k = 0; k < g3.size(); ++k) {
        CHECK(canonical_index(g3[k], s) == k);
        CHECK(graph_from_index(k, 3, s) == g3[k]);
    }
}

TEST_CASE("canonical_index rejects out-of-bounds states") {
    const StateSpaces s(2, 2, false);
    Graph g(2);
    g.nodes[0] = 3;
    CHECK_THROWS_AS(canonical_index(g, s), BoundsError);
}

TEST_CASE("apply_permutation identity and swap") {
    const StateSpaces s(2, 2, false);
    Graph g(2);
    g.nodes = {0, 1};
    g.set_edge(0, 1, 1);
    CHECK(apply_permutation(g, Permutation::identity(2)) == g);

    const Graph swapped = apply_permutation(g, Permutation({1, 0}));
    CHECK(swapped.nodes == std::vector<std::uint8_t>{1, 0});
    CHECK(swapped.edge(0, 1) == 1);
    CHECK(swapped.edge(1, 0) == 1);
}

TEST_CASE("permutation group action composes over all n=3 graphs") {
    const StateSpaces s(2, 2, false);
    const auto graphs = enumerate_graphs(3, s);
    const auto perms = all_permutations(3);
    REQUIRE(perms.size() == 6);
    for (const auto& g : graphs)
        for (const auto& p1 : perms)
            for (const auto& p2 : perms)
                CHECK(apply_permutation(apply_permutation(g, p1), p2) ==
                      apply_permutation(g, p2.compose(p1)));
}

TEST_CASE("transpositions are involutions and preserve histograms") {
    const StateSpaces s(2, 2, false);
    const Permutation swap01({1, 0, 2});
    for (const auto& g : enumerate_graphs(3, s)) {
        CHECK(apply_permutation(apply_permutation(g, swap01), swap01) == g);
        const Graph h = apply_permutation(g, swap01);
        auto nodes_g = g.nodes, nodes_h = h.nodes;
        std::sort(nodes_g.begin(), nodes_g.end());
        std::sort(nodes_h.begin(), nodes_h.end());
        CHECK(nodes_g == nodes_h);
        auto edges_g = g.edges_upper, edges_h = h.edges_upper;
        std::sort(edges_g.begin(), edges_g.end());
        std::sort(edges_h.begin(), edges_h.end());
        CHECK(edges_g == edges_h);
    }
}

TEST_CASE("Permutation rejects non-bijections") {
    CHECK_THROWS_AS(Permutation({0, 0}), BoundsError);
    CHECK_THROWS_AS(Permutation({0, 2}), BoundsError);
}

TEST_CASE("token_flip basics") {
    const StateSpaces s(2, 2, false);
    Graph g(2);
    CHECK(token_flip(g, TokenSite::node(0), 0, s) == g);  // no-op flip

    const Graph h = token_flip(g, TokenSite::edge(0, 1), 1, s);
    CHECK(h.edge(0, 1) == 1);
    CHECK(h.edge(1, 0) == 1);

    CHECK_THROWS_AS(TokenSite::edge(1, 1), BoundsError);
    CHECK_THROWS_AS(token_flip(g, TokenSite::node(0), 5, s), BoundsError);
    CHECK_THROWS_AS(token_flip(g, TokenSite::edge(0, 1), 5, s), BoundsError);
}

TEST_CASE("token_flip moves Hamming distance by at most one (exhaustive n=3)") {
    const StateSpaces s(2, 2, false);
    auto hamming = [](const Graph& a, const Graph& b) {
        int d = 0;
        for (int k = 0; k < a.token_count(); ++k) d += a.token(k) != b.token(k);
        return d;
    };
    for (const auto& g : enumerate_graphs(3, s)) {
        for (int i = 0; i < 3; ++i)
            for (int v = 0; v < 2; ++v)
                CHECK(hamming(g, token_flip(g, TokenSite::node(i), v, s)) <= 1);
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j)
                for (int v = 0; v < 2; ++v)
                    CHECK(hamming(g, token_flip(g, TokenSite::edge(i, j), v, s)) <= 1);
    }
}

TEST_CASE("pair indexing round-trips") {
    for (int n = 2; n <= 4; ++n)
        for (int k = 0; k < pair_count(n); ++k) {
            const auto [i, j] = pair_from_index(k, n);
            CHECK(pair_index(i, j, n) == k);
        }
    CHECK_THROWS_AS(pair_index(1, 1, 3), BoundsError);
    CHECK_THROWS_AS(pair_from_index(3, 3), BoundsError);
}

TEST_CASE("every enumerated graph satisfies its invariants") {
    const StateSpaces s(2, 3, false);
    for (const auto& g : enumerate_graphs(3, s)) {
        CHECK_NOTHROW(g.validate(s));
        for (int i = 0; i < 3; ++i) {
            CHECK(g.edge(i, i) == 0);
            for (int j = 0; j < 3; ++j) CHECK(g.edge(i, j) == g.edge(j, i));
        }
    }
}
