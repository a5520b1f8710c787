#ifndef GRAPHDIFF_CONDITION_HPP
#define GRAPHDIFF_CONDITION_HPP

#include <algorithm>
#include <cstdio>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "graphdiff/errors.hpp"

namespace graphdiff {

/// A single condition value: a class index or a fixed-dimension vector.
struct ConditionValue {
    std::variant<int, std::vector<double>> value;

    static ConditionValue categorical(int cls) { return {cls}; }
    static ConditionValue numeric(std::vector<double> v) { return {std::move(v)}; }
    static ConditionValue numeric(double v) { return {std::vector<double>{v}}; }

    bool is_categorical() const { return std::holds_alternative<int>(value); }
    int category() const { return std::get<int>(value); }
    const std::vector<double>& vec() const { return std::get<std::vector<double>>(value); }

    bool operator==(const ConditionValue&) const = default;
};

/// Declared kind of one condition slot.
struct ConditionSlotSpec {
    enum class Kind { Categorical, Numeric } kind = Kind::Categorical;
    int cardinality = 2;  // K for categorical
    int dim = 1;          // d_in for numeric

    bool operator==(const ConditionSlotSpec&) const = default;
};

using ConditionSchema = std::vector<ConditionSlotSpec>;

inline void validate_value(const ConditionValue& v, const ConditionSlotSpec& spec) {
    if (spec.kind == ConditionSlotSpec::Kind::Categorical) {
        if (!v.is_categorical()) throw SchemaError("condition: expected categorical value");
        if (v.category() < 0 || v.category() >= spec.cardinality)
            throw BoundsError("condition: class index out of bounds");
    } else {
        if (v.is_categorical()) throw SchemaError("condition: expected numeric value");
        if (static_cast<int>(v.vec().size()) != spec.dim)
            throw SchemaError("condition: numeric dimension mismatch");
    }
}

/// Per-record assignment of all M slots; nullopt is the unconditional symbol
/// for that slot.
struct ConditionAssignment {
    std::vector<std::optional<ConditionValue>> slots;

    ConditionAssignment() = default;
    explicit ConditionAssignment(int m) : slots(static_cast<std::size_t>(m)) {}

    int size() const { return static_cast<int>(slots.size()); }

    void validate(const ConditionSchema& schema) const {
        if (slots.size() != schema.size())
            throw SchemaError("ConditionAssignment: slot count mismatch");
        for (std::size_t m = 0; m < slots.size(); ++m)
            if (slots[m]) validate_value(*slots[m], schema[m]);
    }

    bool operator==(const ConditionAssignment&) const = default;
};

/// Conditioning input fed to a scorer. Canonical form is a sorted list of
/// (slot, value) pairs; the empty list is the unconditional key. A single
/// slot, a one-element subset and a joint key over M=1 are the same key.
struct ConditionKey {
    std::vector<std::pair<int, ConditionValue>> slots;

    static ConditionKey null() { return {}; }

    static ConditionKey single(int m, ConditionValue v) {
        ConditionKey k;
        k.slots.emplace_back(m, std::move(v));
        return k;
    }

    static ConditionKey subset(std::vector<std::pair<int, ConditionValue>> entries) {
        if (entries.empty()) throw SchemaError("ConditionKey: subset must be non-empty");
        std::sort(entries.begin(), entries.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t i = 1; i < entries.size(); ++i)
            if (entries[i].first == entries[i - 1].first)
                throw SchemaError("ConditionKey: duplicate slot in subset");
        ConditionKey k;
        k.slots = std::move(entries);
        return k;
    }

    /// Joint key over every assigned slot of an assignment.
    static ConditionKey joint(const ConditionAssignment& assignment) {
        std::vector<std::pair<int, ConditionValue>> entries;
        for (int m = 0; m < assignment.size(); ++m)
            if (assignment.slots[static_cast<std::size_t>(m)])
                entries.emplace_back(m, *assignment.slots[static_cast<std::size_t>(m)]);
        if (entries.empty()) return null();
        return subset(std::move(entries));
    }

    bool is_null() const { return slots.empty(); }

    bool operator==(const ConditionKey&) const = default;

    /// Stable text encoding used for table lookup and checkpoints.
    /// Numeric values are encoded with full precision hex floats.
    std::string canonical() const {
        if (slots.empty()) return "null";
        std::string out;
        for (const auto& [m, v] : slots) {
            if (!out.empty()) out += '|';
            out += std::to_string(m);
            out += v.is_categorical() ? ":c" : ":n";
            if (v.is_categorical()) {
                out += std::to_string(v.category());
            } else {
                char buf[40];
                for (double x : v.vec()) {
                    std::snprintf(buf, sizeof(buf), ",%a", x);
                    out += buf;
                }
            }
        }
        return out;
    }
};

}  // namespace graphdiff

#endif
