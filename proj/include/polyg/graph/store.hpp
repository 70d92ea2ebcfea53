#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "polyg/core/result.hpp"
#include "polyg/core/scalar.hpp"

namespace polyg::graph {

using AttrMap = std::map<std::string, Scalar>;

struct Entity {
    std::string id;
    std::string type;
    std::string name;
    AttrMap attrs;
};

struct Relation {
    std::uint32_t src = 0;  // entity index
    std::uint32_t dst = 0;  // entity index
    std::string rel_type;
    AttrMap attrs;
    // Set on edges synthesized by materialize_inverses with a generated
    // name; such edges render back in their original orientation where a
    // human-facing view is built.
    bool synthesized = false;
};

struct GraphSchema {
    // entity type -> attribute names observed for that type, including the
    // built-in pseudo-attributes id, name and node_type.
    std::map<std::string, std::set<std::string>> entity_types;
    // (src type, rel type, dst type), lexicographically ordered.
    std::set<std::tuple<std::string, std::string, std::string>> relation_types;
    // rel type -> inverse rel type. Entries form an involution. Relation
    // names whose inverse depends on the endpoint types are omitted.
    std::map<std::string, std::string> inverse_map;
};

struct EdgeRef {
    std::string rel_type;
    std::uint32_t dst = 0;       // neighbor entity index
    std::uint32_t relation = 0;  // index into relations
};

class PropertyGraph {
public:
    const std::vector<Entity>& entities() const { return entities_; }
    const std::vector<Relation>& relations() const { return relations_; }

    const Entity& entity(std::uint32_t index) const { return entities_[index]; }
    const Relation& relation(std::uint32_t index) const { return relations_[index]; }

    std::optional<std::uint32_t> index_of(const std::string& entity_id) const;

    // Outgoing edges sorted by (rel_type, dst entity id, relation index).
    const std::vector<EdgeRef>& out_edges(std::uint32_t index) const {
        return out_edges_[index];
    }
    // Incoming edges under the same ordering, keyed by the source id.
    const std::vector<EdgeRef>& in_edges(std::uint32_t index) const {
        return in_edges_[index];
    }

    // Entity ids whose normalized name equals normalize_name(name),
    // optionally restricted to a type, ordered by id.
    std::vector<std::string> resolve_entity(
        const std::string& name,
        const std::optional<std::string>& type_hint = std::nullopt) const;

    // All normalized entity names, each with the ids carrying it.
    const std::map<std::string, std::vector<std::uint32_t>>& name_index() const {
        return name_index_;
    }

    const std::map<std::string, std::string>& inverse_map() const {
        return inverse_map_;
    }
    std::size_t original_relation_count() const { return original_relation_count_; }
    bool inverses_materialized() const { return inverses_materialized_; }

    // Looks up the value of a property on an entity. id, name and
    // node_type resolve to the corresponding record fields; anything else
    // reads the attribute map.
    std::optional<Scalar> property_of(std::uint32_t index,
                                      const std::string& property) const;

    // Construction helpers (used by the loader, the snapshot reader and
    // fixture builders). rebuild_indexes must run after the last mutation.
    std::uint32_t add_entity(Entity e);
    void add_relation(Relation r);
    void set_inverse_hint(std::map<std::string, std::string> hint);
    void rebuild_indexes();

    const std::map<std::string, std::string>& inverse_hint() const {
        return inverse_hint_;
    }

private:
    friend PropertyGraph materialize_inverses(PropertyGraph graph,
                                              const std::string& prefix);

    std::vector<Entity> entities_;
    std::vector<Relation> relations_;
    std::unordered_map<std::string, std::uint32_t> id_to_index_;
    std::map<std::string, std::vector<std::uint32_t>> name_index_;
    std::vector<std::vector<EdgeRef>> out_edges_;
    std::vector<std::vector<EdgeRef>> in_edges_;
    std::map<std::string, std::string> inverse_hint_;
    std::map<std::string, std::string> inverse_map_;
    std::size_t original_relation_count_ = 0;
    bool inverses_materialized_ = false;
};

// Loads a graph from line-delimited JSON records.
//
// Node records: {"id": ..., "type": ..., "name": ..., "attrs": {...}}
// (name defaults to id, attrs to empty). Edge records: {"src": ...,
// "rel": ..., "dst": ..., "attrs": {...}}. The optional schema hint is a
// JSON object {"inverse_map": {"rel": "inverse rel", ...}}.
//
// Errors carry the offending line number; edges referencing unknown ids
// name the id; duplicate entity ids are rejected.
Result<PropertyGraph> load_graph(std::istream& nodes, std::istream& edges,
                                 std::istream* schema_hint = nullptr);

// Adds the reverse edge (v, inv(r), u) for every edge (u, r, v) that does
// not already have one. inv(r) comes from the hint pair when one covers r
// (checked in both directions, so a pair listed once covers both names);
// otherwise inv(r) = prefix + r, and the prefix is stripped again when r
// already carries it. Idempotent; at most doubles the relation count.
PropertyGraph materialize_inverses(PropertyGraph graph,
                                   const std::string& prefix = "inv_");

// Deterministic schema extraction; identical graphs with reordered input
// records produce identical schemas.
GraphSchema schema_of(const PropertyGraph& graph);

struct Neighbor {
    std::string rel_type;
    std::uint32_t relation = 0;
    std::uint32_t entity = 0;
};

// Outgoing neighbors of an entity, sorted by (rel_type, neighbor id),
// optionally filtered to one relation type. Unknown ids are an error.
Result<std::vector<Neighbor>> neighbors(
    const PropertyGraph& graph, const std::string& entity_id,
    const std::optional<std::string>& rel_type = std::nullopt);

}  // namespace polyg::graph
