#ifndef GRAPHDIFF_GRAPH_HPP
#define GRAPHDIFF_GRAPH_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "graphdiff/errors.hpp"

namespace graphdiff {

/// State spaces for node and edge tokens. When `absorbing` is set, the last
/// index of each space is the dedicated MASK state and never appears in clean
/// data graphs. Edge index 0 means "no edge".
struct StateSpaces {
    int node_card = 2;  // a
    int edge_card = 2;  // b
    bool absorbing = false;

    StateSpaces() = default;
    StateSpaces(int a, int b, bool absorb) : node_card(a), edge_card(b), absorbing(absorb) {
        if (node_card < 2 || edge_card < 2)
            throw BoundsError("StateSpaces: cardinalities must be >= 2");
    }

    int mask_node_index() const { return absorbing ? node_card - 1 : -1; }
    int mask_edge_index() const { return absorbing ? edge_card - 1 : -1; }

    bool operator==(const StateSpaces&) const = default;
};

inline int pair_count(int n) { return n * (n - 1) / 2; }

/// Index of the undirected edge (i, j), i < j, in upper-triangle row-major
/// order: (0,1), (0,2), ..., (0,n-1), (1,2), ...
inline int pair_index(int i, int j, int n) {
    if (i >= j || i < 0 || j >= n) throw BoundsError("pair_index: need 0 <= i < j < n");
    return i * n - i * (i + 1) / 2 + (j - i - 1);
}

/// Inverse of pair_index.
inline std::pair<int, int> pair_from_index(int k, int n) {
    for (int i = 0; i < n - 1; ++i) {
        int row = n - 1 - i;
        if (k < row) return {i, i + 1 + k};
        k -= row;
    }
    throw BoundsError("pair_from_index: index out of range");
}

/// Node or edge token address. Edge sites are addressed by their (i, j), i < j
/// pair; the mirrored entry is implied.
struct TokenSite {
    bool is_edge = false;
    int i = 0;
    int j = 0;  // unused for node sites

    static TokenSite node(int i) { return {false, i, 0}; }
    static TokenSite edge(int i, int j) {
        if (i == j) throw BoundsError("TokenSite: diagonal edge address");
        if (i > j) std::swap(i, j);
        return {true, i, j};
    }
};

/// A categorical graph state: n node tokens plus the upper triangle of a
/// symmetric zero-diagonal edge matrix. Storing only the upper triangle makes
/// the symmetry and zero-diagonal invariants unrepresentable-by-construction.
struct Graph {
    int n = 0;
    std::vector<std::uint8_t> nodes;        // n entries in [0, a)
    std::vector<std::uint8_t> edges_upper;  // n(n-1)/2 entries in [0, b)

    Graph() = default;
    explicit Graph(int n_) : n(n_), nodes(n_, 0), edges_upper(pair_count(n_), 0) {}

    int node(int i) const { return nodes[static_cast<std::size_t>(i)]; }

    int edge(int i, int j) const {
        if (i == j) return 0;
        if (i > j) std::swap(i, j);
        return edges_upper[static_cast<std::size_t>(pair_index(i, j, n))];
    }

    void set_edge(int i, int j, int v) {
        if (i == j) throw BoundsError("Graph::set_edge: diagonal entries are fixed to 0");
        if (i > j) std::swap(i, j);
        edges_upper[static_cast<std::size_t>(pair_index(i, j, n))] = static_cast<std::uint8_t>(v);
    }

    int token_count() const { return n + pair_count(n); }

    /// Token value by flat index: nodes first, then upper-triangle edges.
    int token(int k) const {
        return k < n ? node(k) : edges_upper[static_cast<std::size_t>(k - n)];
    }

    bool operator==(const Graph&) const = default;

    void validate(const StateSpaces& spaces) const {
        if (static_cast<int>(nodes.size()) != n ||
            static_cast<int>(edges_upper.size()) != pair_count(n))
            throw BoundsError("Graph: size mismatch");
        for (auto x : nodes)
            if (x >= spaces.node_card) throw BoundsError("Graph: node state out of bounds");
        for (auto e : edges_upper)
            if (e >= spaces.edge_card) throw BoundsError("Graph: edge state out of bounds");
    }
};

/// Bijective relabeling of the n node slots.
struct Permutation {
    std::vector<int> mapping;  // node i moves to slot mapping[i]

    explicit Permutation(std::vector<int> m) : mapping(std::move(m)) {
        std::vector<char> seen(mapping.size(), 0);
        for (int v : mapping) {
            if (v < 0 || v >= static_cast<int>(mapping.size()) || seen[v])
                throw BoundsError("Permutation: mapping is not a bijection");
            seen[v] = 1;
        }
    }

    static Permutation identity(int n) {
        std::vector<int> m(n);
        std::iota(m.begin(), m.end(), 0);
        return Permutation(std::move(m));
    }

    int size() const { return static_cast<int>(mapping.size()); }

    /// this after other: (compose(other))(i) = this(other(i)).
    Permutation compose(const Permutation& other) const {
        std::vector<int> m(mapping.size());
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = mapping[other.mapping[i]];
        return Permutation(std::move(m));
    }
};

/// All permutations of {0..n-1} in lexicographic order.
inline std::vector<Permutation> all_permutations(int n) {
    std::vector<int> m(n);
    std::iota(m.begin(), m.end(), 0);
    std::vector<Permutation> out;
    do {
        out.emplace_back(m);
    } while (std::next_permutation(m.begin(), m.end()));
    return out;
}

/// Number of graphs in the enumerated space: a^n * b^(n(n-1)/2).
/// Throws SizeError past the 10^6 guard.
inline std::uint64_t graph_space_size(int n, const StateSpaces& spaces) {
    if (n < 1 || n > 4) throw SizeError("graph_space_size: n must be in [1,4]");
    const std::uint64_t guard = 1'000'000;
    std::uint64_t total = 1;
    for (int i = 0; i < n; ++i) {
        total *= static_cast<std::uint64_t>(spaces.node_card);
        if (total > guard) throw SizeError("graph_space_size: enumeration guard exceeded");
    }
    for (int k = 0; k < pair_count(n); ++k) {
        total *= static_cast<std::uint64_t>(spaces.edge_card);
        if (total > guard) throw SizeError("graph_space_size: enumeration guard exceeded");
    }
    return total;
}

/// Mixed-radix key of (nodes, upper-triangle edges), lexicographic with the
/// all-zero graph at 0. Bijective with graph_from_index.
inline std::uint64_t canonical_index(const Graph& g, const StateSpaces& spaces) {
    g.validate(spaces);
    std::uint64_t key = 0;
    for (int i = 0; i < g.n; ++i)
        key = key * static_cast<std::uint64_t>(spaces.node_card) + g.node(i);
    for (auto e : g.edges_upper)
        key = key * static_cast<std::uint64_t>(spaces.edge_card) + e;
    return key;
}

inline Graph graph_from_index(std::uint64_t key, int n, const StateSpaces& spaces) {
    Graph g(n);
    for (int k = pair_count(n) - 1; k >= 0; --k) {
        g.edges_upper[static_cast<std::size_t>(k)] =
            static_cast<std::uint8_t>(key % spaces.edge_card);
        key /= static_cast<std::uint64_t>(spaces.edge_card);
    }
    for (int i = n - 1; i >= 0; --i) {
        g.nodes[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(key % spaces.node_card);
        key /= static_cast<std::uint64_t>(spaces.node_card);
    }
    if (key != 0) throw BoundsError("graph_from_index: key out of range");
    return g;
}

/// Every symmetric zero-diagonal graph exactly once, in canonical order.
inline std::vector<Graph> enumerate_graphs(int n, const StateSpaces& spaces) {
    const std::uint64_t total = graph_space_size(n, spaces);
    std::vector<Graph> out;
    out.reserve(total);
    for (std::uint64_t key = 0; key < total; ++key)
        out.push_back(graph_from_index(key, n, spaces));
    return out;
}

/// nodes'[pi(i)] = nodes[i], edges'[pi(i),pi(j)] = edges[i,j].
inline Graph apply_permutation(const Graph& g, const Permutation& pi) {
    if (pi.size() != g.n) throw BoundsError("apply_permutation: size mismatch");
    Graph out(g.n);
    for (int i = 0; i < g.n; ++i)
        out.nodes[static_cast<std::size_t>(pi.mapping[i])] = static_cast<std::uint8_t>(g.node(i));
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j)
            out.set_edge(pi.mapping[i], pi.mapping[j], g.edge(i, j));
    return out;
}

/// Copy with exactly one site changed (edge writes mirrored by construction).
inline Graph token_flip(const Graph& g, const TokenSite& site, int new_state,
                        const StateSpaces& spaces) {
    Graph out = g;
    if (site.is_edge) {
        if (new_state < 0 || new_state >= spaces.edge_card)
            throw BoundsError("token_flip: edge state out of bounds");
        out.set_edge(site.i, site.j, new_state);
    } else {
        if (new_state < 0 || new_state >= spaces.node_card)
            throw BoundsError("token_flip: node state out of bounds");
        if (site.i < 0 || site.i >= g.n) throw BoundsError("token_flip: node index out of bounds");
        out.nodes[static_cast<std::size_t>(site.i)] = static_cast<std::uint8_t>(new_state);
    }
    return out;
}

}  // namespace graphdiff

#endif
