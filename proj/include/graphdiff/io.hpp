#ifndef GRAPHDIFF_IO_HPP
#define GRAPHDIFF_IO_HPP

#include <cstdint>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "graphdiff/dataset.hpp"
#include "graphdiff/errors.hpp"
#include "graphdiff/neural.hpp"
#include "graphdiff/score.hpp"

namespace graphdiff {

using nlohmann::json;

// ---------------------------------------------------------------------------
// JSON helpers
// ---------------------------------------------------------------------------

inline json to_json(const ConditionValue& v) {
    if (v.is_categorical()) return v.category();
    return v.vec();
}

inline ConditionValue condition_value_from_json(const json& j) {
    if (j.is_number_integer()) return ConditionValue::categorical(j.get<int>());
    if (j.is_array()) return ConditionValue::numeric(j.get<std::vector<double>>());
    throw IoError("condition value must be an integer or an array");
}

inline json to_json(const ConditionAssignment& a) {
    json out = json::array();
    for (const auto& slot : a.slots)
        out.push_back(slot ? to_json(*slot) : json(nullptr));
    return out;
}

inline ConditionAssignment condition_assignment_from_json(const json& j) {
    ConditionAssignment a;
    for (const auto& item : j)
        a.slots.push_back(item.is_null() ? std::nullopt
                                         : std::optional<ConditionValue>(
                                               condition_value_from_json(item)));
    return a;
}

inline json to_json(const ConditionSchema& schema) {
    json out = json::array();
    for (const auto& spec : schema) {
        if (spec.kind == ConditionSlotSpec::Kind::Categorical)
            out.push_back({{"kind", "categorical"}, {"K", spec.cardinality}});
        else
            out.push_back({{"kind", "numeric"}, {"dim", spec.dim}});
    }
    return out;
}

inline ConditionSchema condition_schema_from_json(const json& j) {
    ConditionSchema schema;
    for (const auto& item : j) {
        ConditionSlotSpec spec;
        const std::string kind = item.at("kind").get<std::string>();
        if (kind == "categorical") {
            spec.kind = ConditionSlotSpec::Kind::Categorical;
            spec.cardinality = item.at("K").get<int>();
        } else if (kind == "numeric") {
            spec.kind = ConditionSlotSpec::Kind::Numeric;
            spec.dim = item.at("dim").get<int>();
        } else {
            throw IoError("unknown condition kind '" + kind + "'");
        }
        schema.push_back(spec);
    }
    return schema;
}

inline json to_json(const ConditionKey& key) {
    json out = json::array();
    for (const auto& [m, v] : key.slots) out.push_back({{"slot", m}, {"value", to_json(v)}});
    return out;
}

inline ConditionKey condition_key_from_json(const json& j) {
    if (j.empty()) return ConditionKey::null();
    std::vector<std::pair<int, ConditionValue>> entries;
    for (const auto& item : j)
        entries.emplace_back(item.at("slot").get<int>(),
                             condition_value_from_json(item.at("value")));
    return ConditionKey::subset(std::move(entries));
}

inline json spaces_to_json(const StateSpaces& s) {
    return {{"node_card", s.node_card}, {"edge_card", s.edge_card}, {"absorbing", s.absorbing}};
}

inline StateSpaces spaces_from_json(const json& j) {
    return StateSpaces(j.at("node_card").get<int>(), j.at("edge_card").get<int>(),
                       j.at("absorbing").get<bool>());
}

// ---------------------------------------------------------------------------
// Dataset / samples files: one JSON header line, then one JSON record per
// line with fixed field names n, nodes, edges_upper, conditions.
// ---------------------------------------------------------------------------

inline json graph_record_to_json(const Graph& g, const ConditionAssignment& cond) {
    return {{"n", g.n},
            {"nodes", g.nodes},
            {"edges_upper", g.edges_upper},
            {"conditions", to_json(cond)}};
}

inline void save_dataset(const Dataset& dataset, const std::string& path) {
    dataset.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    json header = {{"format", "graphdiff-dataset"},
                   {"version", 1},
                   {"n", dataset.n},
                   {"spaces", spaces_to_json(dataset.spaces)},
                   {"conditions", to_json(dataset.schema)}};
    out << header.dump() << "\n";
    for (const auto& rec : dataset.records)
        out << graph_record_to_json(rec.graph, rec.conditions).dump() << "\n";
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw IoError("'" + path + "': empty file");
    Dataset dataset;
    try {
        const json header = json::parse(line);
        if (header.at("format").get<std::string>() != "graphdiff-dataset")
            throw IoError("'" + path + "': not a dataset file");
        if (header.at("version").get<int>() != 1)
            throw SchemaError("'" + path + "': unrecognized dataset version");
        dataset.n = header.at("n").get<int>();
        dataset.spaces = spaces_from_json(header.at("spaces"));
        dataset.schema = condition_schema_from_json(header.at("conditions"));
    } catch (const json::exception& e) {
        throw IoError("'" + path + "' line 1: " + e.what());
    }
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            DatasetRecord rec;
            rec.graph.n = j.at("n").get<int>();
            rec.graph.nodes = j.at("nodes").get<std::vector<std::uint8_t>>();
            rec.graph.edges_upper = j.at("edges_upper").get<std::vector<std::uint8_t>>();
            rec.conditions = condition_assignment_from_json(j.at("conditions"));
            dataset.records.push_back(std::move(rec));
        } catch (const json::exception& e) {
            throw IoError("'" + path + "' line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (dataset.records.empty()) throw SchemaError("'" + path + "': dataset has no records");
    try {
        dataset.validate();
    } catch (const Error& e) {
        throw SchemaError("'" + path + "': " + e.what());
    }
    return dataset;
}

/// Samples files share the dataset line format; each record's `conditions`
/// field carries the assignment requested at sampling time.
inline void save_samples(const std::vector<std::pair<Graph, ConditionAssignment>>& samples,
                         const StateSpaces& spaces, const ConditionSchema& schema, int n,
                         const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    json header = {{"format", "graphdiff-samples"},
                   {"version", 1},
                   {"n", n},
                   {"spaces", spaces_to_json(spaces)},
                   {"conditions", to_json(schema)}};
    out << header.dump() << "\n";
    for (const auto& [g, cond] : samples) out << graph_record_to_json(g, cond).dump() << "\n";
    if (!out) throw IoError("failed writing '" + path + "'");
}

struct SamplesFile {
    StateSpaces spaces;
    ConditionSchema schema;
    int n = 0;
    std::vector<std::pair<Graph, ConditionAssignment>> samples;
};

inline SamplesFile load_samples(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw IoError("'" + path + "': empty file");
    SamplesFile out;
    try {
        const json header = json::parse(line);
        if (header.at("format").get<std::string>() != "graphdiff-samples")
            throw IoError("'" + path + "': not a samples file");
        out.n = header.at("n").get<int>();
        out.spaces = spaces_from_json(header.at("spaces"));
        out.schema = condition_schema_from_json(header.at("conditions"));
    } catch (const json::exception& e) {
        throw IoError("'" + path + "' line 1: " + e.what());
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        Graph g;
        g.n = j.at("n").get<int>();
        g.nodes = j.at("nodes").get<std::vector<std::uint8_t>>();
        g.edges_upper = j.at("edges_upper").get<std::vector<std::uint8_t>>();
        out.samples.emplace_back(std::move(g),
                                 condition_assignment_from_json(j.at("conditions")));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Checkpoints: JSON header plus a length-prefixed flat parameter array.
// ---------------------------------------------------------------------------

inline constexpr char kCheckpointMagic[] = "GDIFFCKPT1\n";

struct Checkpoint {
    std::string scorer_kind;  // "tabular" | "neural"
    StateSpaces spaces;
    NoiseSchedule schedule;
    TransitionModels models;
    ConditionSchema schema;
    int n = 0;
    json extra;  // scorer-specific (keys/time_bins or net config)
    json config_echo;
    std::uint64_t seed = 0;
    std::vector<double> params;
};

inline void write_checkpoint(const Checkpoint& ck, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    json header = {{"version", 1},
                   {"scorer", ck.scorer_kind},
                   {"spaces", spaces_to_json(ck.spaces)},
                   {"schedule", {{"eps", ck.schedule.eps}, {"t_min", ck.schedule.t_min}}},
                   {"conditions", to_json(ck.schema)},
                   {"n", ck.n},
                   {"extra", ck.extra},
                   {"config", ck.config_echo},
                   {"seed", ck.seed}};
    const std::string head = header.dump();
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic) - 1);
    const auto head_len = static_cast<std::uint64_t>(head.size());
    out.write(reinterpret_cast<const char*>(&head_len), sizeof(head_len));
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    const auto count = static_cast<std::uint64_t>(ck.params.size());
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    out.write(reinterpret_cast<const char*>(ck.params.data()),
              static_cast<std::streamsize>(ck.params.size() * sizeof(double)));
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    char magic[sizeof(kCheckpointMagic) - 1];
    if (!in.read(magic, sizeof(magic)) ||
        std::string(magic, sizeof(magic)) != std::string(kCheckpointMagic))
        throw IoError("'" + path + "': not a checkpoint file");
    std::uint64_t head_len = 0;
    if (!in.read(reinterpret_cast<char*>(&head_len), sizeof(head_len)) || head_len > (1u << 24))
        throw IoError("'" + path + "': corrupt checkpoint header");
    std::string head(head_len, '\0');
    if (!in.read(head.data(), static_cast<std::streamsize>(head_len)))
        throw IoError("'" + path + "': truncated checkpoint header");
    Checkpoint ck;
    try {
        const json header = json::parse(head);
        if (header.at("version").get<int>() != 1)
            throw SchemaError("'" + path + "': unrecognized checkpoint version");
        ck.scorer_kind = header.at("scorer").get<std::string>();
        ck.spaces = spaces_from_json(header.at("spaces"));
        ck.schedule = NoiseSchedule(header.at("schedule").at("eps").get<double>(),
                                    header.at("schedule").at("t_min").get<double>());
        ck.schema = condition_schema_from_json(header.at("conditions"));
        ck.n = header.at("n").get<int>();
        ck.extra = header.at("extra");
        ck.config_echo = header.at("config");
        ck.seed = header.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw IoError("'" + path + "': corrupt checkpoint header: " + e.what());
    }
    ck.models = TransitionModels::for_spaces(ck.spaces);
    std::uint64_t count = 0;
    if (!in.read(reinterpret_cast<char*>(&count), sizeof(count)))
        throw IoError("'" + path + "': truncated checkpoint payload");
    ck.params.resize(count);
    if (!in.read(reinterpret_cast<char*>(ck.params.data()),
                 static_cast<std::streamsize>(count * sizeof(double))))
        throw IoError("'" + path + "': truncated checkpoint payload");
    return ck;
}

inline Checkpoint checkpoint_of(const TabularScorer& scorer, const ConditionSchema& schema,
                                json config_echo, std::uint64_t seed) {
    Checkpoint ck;
    ck.scorer_kind = "tabular";
    ck.spaces = scorer.spaces();
    ck.schedule = scorer.schedule();
    ck.models = scorer.models();
    ck.schema = schema;
    ck.n = scorer.n();
    json keys = json::array();
    for (const auto& k : scorer.keys()) keys.push_back(to_json(k));
    ck.extra = {{"time_bins", scorer.time_bins()},
                {"bin_spacing",
                 scorer.bin_spacing() == BinSpacing::Geometric ? "geometric" : "linear"},
                {"keys", keys}};
    ck.config_echo = std::move(config_echo);
    ck.seed = seed;
    ck.params = scorer.raw_params();
    return ck;
}

inline Checkpoint checkpoint_of(const NeuralScorer& scorer, json config_echo,
                                std::uint64_t seed) {
    Checkpoint ck;
    ck.scorer_kind = "neural";
    ck.spaces = scorer.spaces();
    ck.schedule = scorer.schedule();
    ck.models = scorer.models();
    ck.schema = scorer.schema();
    ck.n = 0;
    ck.extra = {{"d_h", scorer.config().d_h},
                {"hidden", scorer.config().hidden},
                {"cluster_hidden", scorer.config().cluster_hidden}};
    ck.config_echo = std::move(config_echo);
    ck.seed = seed;
    ck.params = scorer.raw_params();
    return ck;
}

/// Reconstructs the scorer from a checkpoint. When `expected_schema` is given
/// a mismatch raises a schema error.
inline std::unique_ptr<TrainableScorer> restore_scorer(
    const Checkpoint& ck, const ConditionSchema* expected_schema = nullptr) {
    if (expected_schema && !(*expected_schema == ck.schema))
        throw SchemaError("checkpoint condition schema does not match");
    if (ck.scorer_kind == "tabular") {
        std::vector<ConditionKey> keys;
        for (const auto& j : ck.extra.at("keys")) keys.push_back(condition_key_from_json(j));
        const BinSpacing spacing =
            ck.extra.value("bin_spacing", "linear") == std::string("geometric")
                ? BinSpacing::Geometric
                : BinSpacing::Linear;
        auto scorer = std::make_unique<TabularScorer>(ck.spaces, ck.n, ck.schedule, ck.models,
                                                      std::move(keys),
                                                      ck.extra.at("time_bins").get<int>(), spacing);
        if (scorer->param_count() != ck.params.size())
            throw SchemaError("checkpoint parameter payload dimension mismatch");
        scorer->raw_params() = ck.params;
        return scorer;
    }
    if (ck.scorer_kind == "neural") {
        NeuralScorer::Config cfg;
        cfg.d_h = ck.extra.at("d_h").get<int>();
        cfg.hidden = ck.extra.at("hidden").get<int>();
        cfg.cluster_hidden = ck.extra.at("cluster_hidden").get<int>();
        auto scorer = std::make_unique<NeuralScorer>(ck.spaces, ck.schedule, ck.models, ck.schema,
                                                     cfg, ck.seed);
        if (scorer->param_count() != ck.params.size())
            throw SchemaError("checkpoint parameter payload dimension mismatch");
        scorer->raw_params() = ck.params;
        return scorer;
    }
    throw SchemaError("unknown scorer kind '" + ck.scorer_kind + "'");
}

}  // namespace graphdiff

#endif
