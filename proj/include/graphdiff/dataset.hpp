#ifndef GRAPHDIFF_DATASET_HPP
#define GRAPHDIFF_DATASET_HPP

#include <vector>

#include "graphdiff/condition.hpp"
#include "graphdiff/errors.hpp"
#include "graphdiff/graph.hpp"

namespace graphdiff {

struct DatasetRecord {
    Graph graph;
    ConditionAssignment conditions;
};

/// In-memory dataset: shared spaces and condition schema plus records.
/// Duplicate graphs are allowed; weights arise from multiplicity.
struct Dataset {
    StateSpaces spaces;
    ConditionSchema schema;
    int n = 0;
    std::vector<DatasetRecord> records;

    void validate() const {
        if (records.empty()) throw SchemaError("Dataset: empty record list");
        for (const auto& rec : records) {
            if (rec.graph.n != n) throw SchemaError("Dataset: inconsistent node count");
            rec.graph.validate(spaces);
            rec.conditions.validate(schema);
            if (spaces.absorbing) {
                for (auto x : rec.graph.nodes)
                    if (x == spaces.mask_node_index())
                        throw SchemaError("Dataset: MASK state in clean data graph");
                for (auto e : rec.graph.edges_upper)
                    if (e == spaces.mask_edge_index())
                        throw SchemaError("Dataset: MASK state in clean data graph");
            }
        }
    }

    /// Records whose assignment matches every (slot, value) pair of the key.
    std::vector<const DatasetRecord*> matching(const ConditionKey& key) const {
        std::vector<const DatasetRecord*> out;
        for (const auto& rec : records) {
            bool ok = true;
            for (const auto& [m, v] : key.slots) {
                const auto& slot = rec.conditions.slots[static_cast<std::size_t>(m)];
                if (!slot || !(*slot == v)) {
                    ok = false;
                    break;
                }
            }
            if (ok) out.push_back(&rec);
        }
        return out;
    }
};

}  // namespace graphdiff

#endif
