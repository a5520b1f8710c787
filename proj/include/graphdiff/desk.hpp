#ifndef GRAPHDIFF_DESK_HPP
#define GRAPHDIFF_DESK_HPP

#include "graphdiff/dataset.hpp"
#include "graphdiff/eval.hpp"

namespace graphdiff {

/// Desk-scale reference dataset shared by the CLI and the verification
/// suites: n = 3, two real node states and two real edge states, p_data
/// uniform over the four permutation-closed graphs {empty, complete} x
/// {all-zero nodes, all-one nodes}. Labels come from SyntheticLabeler.
inline Dataset desk_dataset(bool absorbing) {
    Dataset d;
    d.spaces = StateSpaces(absorbing ? 3 : 2, absorbing ? 3 : 2, absorbing);
    d.n = 3;
    const SyntheticLabeler labeler{d.spaces};
    d.schema = labeler.schema();
    for (int node_state = 0; node_state <= 1; ++node_state) {
        for (int full = 0; full <= 1; ++full) {
            Graph g(3);
            for (auto& x : g.nodes) x = static_cast<std::uint8_t>(node_state);
            for (auto& e : g.edges_upper) e = static_cast<std::uint8_t>(full);
            d.records.push_back({g, labeler.label(g)});
        }
    }
    d.validate();
    return d;
}

}  // namespace graphdiff

#endif
