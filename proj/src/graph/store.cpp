#include "polyg/graph/store.hpp"

#include <algorithm>
#include <json.hpp>

#include "polyg/core/text.hpp"

namespace polyg::graph {

using nlohmann::json;

std::optional<std::uint32_t> PropertyGraph::index_of(const std::string& entity_id) const {
    auto it = id_to_index_.find(entity_id);
    if (it == id_to_index_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> PropertyGraph::resolve_entity(
    const std::string& name, const std::optional<std::string>& type_hint) const {
    std::vector<std::string> out;
    auto it = name_index_.find(normalize_name(name));
    if (it == name_index_.end()) return out;
    for (std::uint32_t idx : it->second) {
        if (type_hint && entities_[idx].type != *type_hint) continue;
        out.push_back(entities_[idx].id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<Scalar> PropertyGraph::property_of(std::uint32_t index,
                                                 const std::string& property) const {
    const Entity& e = entities_[index];
    if (property == "id") return Scalar(e.id);
    if (property == "name") return Scalar(e.name);
    if (property == "node_type") return Scalar(e.type);
    auto it = e.attrs.find(property);
    if (it == e.attrs.end()) return std::nullopt;
    return it->second;
}

std::uint32_t PropertyGraph::add_entity(Entity e) {
    auto index = static_cast<std::uint32_t>(entities_.size());
    id_to_index_.emplace(e.id, index);
    entities_.push_back(std::move(e));
    return index;
}

void PropertyGraph::add_relation(Relation r) { relations_.push_back(std::move(r)); }

void PropertyGraph::set_inverse_hint(std::map<std::string, std::string> hint) {
    inverse_hint_ = std::move(hint);
}

void PropertyGraph::rebuild_indexes() {
    name_index_.clear();
    for (std::uint32_t i = 0; i < entities_.size(); ++i) {
        name_index_[normalize_name(entities_[i].name)].push_back(i);
    }
    for (auto& [name, ids] : name_index_) {
        std::sort(ids.begin(), ids.end(), [this](std::uint32_t a, std::uint32_t b) {
            return entities_[a].id < entities_[b].id;
        });
    }

    out_edges_.assign(entities_.size(), {});
    in_edges_.assign(entities_.size(), {});
    for (std::uint32_t r = 0; r < relations_.size(); ++r) {
        const Relation& rel = relations_[r];
        out_edges_[rel.src].push_back({rel.rel_type, rel.dst, r});
        in_edges_[rel.dst].push_back({rel.rel_type, rel.src, r});
    }
    auto order = [this](const EdgeRef& a, const EdgeRef& b) {
        if (a.rel_type != b.rel_type) return a.rel_type < b.rel_type;
        const std::string& da = entities_[a.dst].id;
        const std::string& db = entities_[b.dst].id;
        if (da != db) return da < db;
        return a.relation < b.relation;
    };
    for (auto& edges : out_edges_) std::sort(edges.begin(), edges.end(), order);
    for (auto& edges : in_edges_) std::sort(edges.begin(), edges.end(), order);

    if (!inverses_materialized_) original_relation_count_ = relations_.size();
}

namespace {

Result<Scalar> scalar_from_json(const json& v) {
    if (v.is_string()) return Scalar(v.get<std::string>());
    if (v.is_number_integer() || v.is_number_unsigned())
        return Scalar(v.get<std::int64_t>());
    if (v.is_number_float()) return Scalar(v.get<double>());
    return Error{"attribute values must be strings, integers or floats"};
}

Result<AttrMap> attrs_from_json(const json& v) {
    AttrMap out;
    if (!v.is_object()) return Error{"attrs must be an object"};
    for (auto it = v.begin(); it != v.end(); ++it) {
        auto s = scalar_from_json(it.value());
        if (!s) return Error{"attrs." + it.key() + ": " + s.error().message};
        out.emplace(it.key(), std::move(s.value()));
    }
    return out;
}

Result<json> parse_record(const std::string& line, std::size_t line_no,
                          const char* what) {
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) {
        return Error{std::string(what) + " line " + std::to_string(line_no) +
                     ": malformed record"};
    }
    return rec;
}

}  // namespace

Result<PropertyGraph> load_graph(std::istream& nodes, std::istream& edges,
                                 std::istream* schema_hint) {
    PropertyGraph g;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(nodes, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto rec = parse_record(line, line_no, "nodes");
        if (!rec) return rec.error();
        const json& r = rec.value();
        if (!r.contains("id") || !r["id"].is_string() || !r.contains("type") ||
            !r["type"].is_string()) {
            return Error{"nodes line " + std::to_string(line_no) +
                         ": malformed record (id and type are required strings)"};
        }
        Entity e;
        e.id = r["id"].get<std::string>();
        e.type = r["type"].get<std::string>();
        e.name = r.contains("name") && r["name"].is_string()
                     ? r["name"].get<std::string>()
                     : e.id;
        if (r.contains("attrs")) {
            auto attrs = attrs_from_json(r["attrs"]);
            if (!attrs) {
                return Error{"nodes line " + std::to_string(line_no) + ": " +
                             attrs.error().message};
            }
            e.attrs = std::move(attrs.value());
        }
        if (g.index_of(e.id)) {
            return Error{"nodes line " + std::to_string(line_no) +
                         ": duplicate entity id '" + e.id + "'"};
        }
        g.add_entity(std::move(e));
    }

    line_no = 0;
    while (std::getline(edges, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto rec = parse_record(line, line_no, "edges");
        if (!rec) return rec.error();
        const json& r = rec.value();
        for (const char* field : {"src", "rel", "dst"}) {
            if (!r.contains(field) || !r[field].is_string()) {
                return Error{"edges line " + std::to_string(line_no) +
                             ": malformed record (src, rel and dst are required strings)"};
            }
        }
        auto src = g.index_of(r["src"].get<std::string>());
        if (!src) {
            return Error{"edges line " + std::to_string(line_no) +
                         ": unknown entity id '" + r["src"].get<std::string>() + "'"};
        }
        auto dst = g.index_of(r["dst"].get<std::string>());
        if (!dst) {
            return Error{"edges line " + std::to_string(line_no) +
                         ": unknown entity id '" + r["dst"].get<std::string>() + "'"};
        }
        Relation rel;
        rel.src = *src;
        rel.dst = *dst;
        rel.rel_type = r["rel"].get<std::string>();
        if (r.contains("attrs")) {
            auto attrs = attrs_from_json(r["attrs"]);
            if (!attrs) {
                return Error{"edges line " + std::to_string(line_no) + ": " +
                             attrs.error().message};
            }
            rel.attrs = std::move(attrs.value());
        }
        g.add_relation(std::move(rel));
    }

    if (schema_hint) {
        json h = json::parse(*schema_hint, nullptr, false);
        if (h.is_discarded() || !h.is_object()) {
            return Error{"schema hint: malformed document"};
        }
        std::map<std::string, std::string> hint;
        if (h.contains("inverse_map")) {
            if (!h["inverse_map"].is_object()) {
                return Error{"schema hint: inverse_map must be an object"};
            }
            for (auto it = h["inverse_map"].begin(); it != h["inverse_map"].end(); ++it) {
                if (!it.value().is_string()) {
                    return Error{"schema hint: inverse_map values must be strings"};
                }
                hint.emplace(it.key(), it.value().get<std::string>());
            }
        }
        g.set_inverse_hint(std::move(hint));
    }

    g.rebuild_indexes();
    return g;
}

namespace {

// True when hint pairs r with r_back (either direction of the pair may be
// the one written in the hint file).
bool hint_pairs(const std::map<std::string, std::string>& hint, const std::string& r,
                const std::string& r_back) {
    auto it = hint.find(r);
    if (it != hint.end() && it->second == r_back) return true;
    auto jt = hint.find(r_back);
    return jt != hint.end() && jt->second == r;
}

}  // namespace

PropertyGraph materialize_inverses(PropertyGraph graph, const std::string& prefix) {
    if (graph.inverses_materialized_) return graph;
    graph.original_relation_count_ = graph.relations_.size();

    const auto& hint = graph.inverse_hint_;
    // Inverse name for an unpaired edge. A hint pair wins only when it is
    // unambiguous for this relation name; otherwise the prefix rule applies
    // (and strips the prefix when the name already carries it, keeping the
    // naming involutive).
    auto inverse_name = [&](const std::string& r) -> std::string {
        std::set<std::string> candidates;
        for (const auto& [a, b] : hint) {
            if (a == r) candidates.insert(b);
            if (b == r) candidates.insert(a);
        }
        if (candidates.size() == 1) return *candidates.begin();
        if (r.rfind(prefix, 0) == 0) return r.substr(prefix.size());
        return prefix + r;
    };

    // Greedy pairing: edge j can serve as the inverse of edge i when it runs
    // v -> u under a relation name the hint (or the prefix rule) pairs with
    // i's. Each edge backs at most one partner so multi-edge counts line up.
    std::size_t n = graph.relations_.size();
    std::vector<bool> paired(n, false);
    std::vector<std::size_t> partner_of(n, 0);
    std::multimap<std::tuple<std::uint32_t, std::uint32_t, std::string>, std::size_t> by_key;
    for (std::size_t i = 0; i < n; ++i) {
        const Relation& r = graph.relations_[i];
        by_key.emplace(std::make_tuple(r.src, r.dst, r.rel_type), i);
    }
    auto find_partner = [&](std::size_t i) -> std::optional<std::size_t> {
        const Relation& r = graph.relations_[i];
        auto try_name = [&](const std::string& back) -> std::optional<std::size_t> {
            auto range = by_key.equal_range(std::make_tuple(r.dst, r.src, back));
            for (auto it = range.first; it != range.second; ++it) {
                if (!paired[it->second] && it->second != i) return it->second;
            }
            return std::nullopt;
        };
        // Hint pairs first, then the prefix rule, then a same-name edge
        // back (self-inverse relation written explicitly in both directions).
        for (const auto& [a, b] : hint) {
            if (a == r.rel_type) {
                if (auto p = try_name(b)) return p;
            }
            if (b == r.rel_type) {
                if (auto p = try_name(a)) return p;
            }
        }
        std::string synth = r.rel_type.rfind(prefix, 0) == 0
                                ? r.rel_type.substr(prefix.size())
                                : prefix + r.rel_type;
        if (auto p = try_name(synth)) return p;
        if (hint_pairs(hint, r.rel_type, r.rel_type) || r.src == r.dst) {
            if (auto p = try_name(r.rel_type)) return p;
        }
        return std::nullopt;
    };

    for (std::size_t i = 0; i < n; ++i) {
        if (paired[i]) continue;
        if (auto partner = find_partner(i)) {
            paired[i] = true;
            paired[*partner] = true;
            partner_of[i] = *partner;
            partner_of[*partner] = i;
        }
    }

    std::map<std::string, std::set<std::string>> observed_pairs;
    for (std::size_t i = 0; i < n; ++i) {
        const Relation& r = graph.relations_[i];
        if (paired[i]) {
            const std::string& back = graph.relations_[partner_of[i]].rel_type;
            observed_pairs[r.rel_type].insert(back);
            observed_pairs[back].insert(r.rel_type);
            continue;
        }
        std::string back = inverse_name(r.rel_type);
        observed_pairs[r.rel_type].insert(back);
        observed_pairs[back].insert(r.rel_type);
        Relation inv;
        inv.src = r.dst;
        inv.dst = r.src;
        inv.rel_type = back;
        inv.attrs = r.attrs;
        inv.synthesized = !hint_pairs(hint, r.rel_type, back);
        graph.relations_.push_back(std::move(inv));
    }

    // Keep only relation names with a single unambiguous inverse.
    graph.inverse_map_.clear();
    for (const auto& [rel, backs] : observed_pairs) {
        if (backs.size() == 1) graph.inverse_map_[rel] = *backs.begin();
    }
    for (auto it = graph.inverse_map_.begin(); it != graph.inverse_map_.end();) {
        auto back = graph.inverse_map_.find(it->second);
        if (back == graph.inverse_map_.end() || back->second != it->first) {
            it = graph.inverse_map_.erase(it);
        } else {
            ++it;
        }
    }

    graph.inverses_materialized_ = true;
    graph.rebuild_indexes();
    return graph;
}

GraphSchema schema_of(const PropertyGraph& graph) {
    GraphSchema s;
    for (const Entity& e : graph.entities()) {
        auto& attrs = s.entity_types[e.type];
        attrs.insert("id");
        attrs.insert("name");
        attrs.insert("node_type");
        for (const auto& [k, v] : e.attrs) attrs.insert(k);
    }
    for (const Relation& r : graph.relations()) {
        s.relation_types.emplace(graph.entity(r.src).type, r.rel_type,
                                 graph.entity(r.dst).type);
    }
    s.inverse_map = graph.inverse_map();
    return s;
}

Result<std::vector<Neighbor>> neighbors(const PropertyGraph& graph,
                                        const std::string& entity_id,
                                        const std::optional<std::string>& rel_type) {
    auto idx = graph.index_of(entity_id);
    if (!idx) return Error{"unknown entity id '" + entity_id + "'"};
    std::vector<Neighbor> out;
    for (const EdgeRef& e : graph.out_edges(*idx)) {
        if (rel_type && e.rel_type != *rel_type) continue;
        out.push_back({e.rel_type, e.relation, e.dst});
    }
    return out;
}

}  // namespace polyg::graph
