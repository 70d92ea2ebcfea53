#include "polyg/cypher/validate.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "polyg/core/text.hpp"
#include "polyg/cypher/render.hpp"

namespace polyg::cypher {

const char* to_string(SchemaViolation::Kind kind) {
    switch (kind) {
        case SchemaViolation::Kind::unknown_label: return "unknown_label";
        case SchemaViolation::Kind::unknown_rel_type: return "unknown_rel_type";
        case SchemaViolation::Kind::unknown_property: return "unknown_property";
        case SchemaViolation::Kind::type_mismatch: return "type_mismatch";
    }
    return "unknown";
}

namespace {

std::vector<std::string> nearest(const std::string& name,
                                 const std::set<std::string>& candidates) {
    std::vector<std::pair<std::size_t, std::string>> scored;
    for (const std::string& c : candidates) {
        scored.emplace_back(edit_distance(name, c), c);
    }
    std::sort(scored.begin(), scored.end());
    std::vector<std::string> out;
    for (const auto& [d, c] : scored) {
        if (d <= 3) out.push_back(c);
        if (out.size() == 3) break;
    }
    if (out.empty() && !scored.empty()) out.push_back(scored.front().second);
    return out;
}

class Validator {
public:
    Validator(const CypherQuery& q, const graph::GraphSchema& schema)
        : q_(q), schema_(schema), rendered_(render(q)) {
        for (const auto& [type, attrs] : schema.entity_types) {
            labels_.insert(type);
            all_props_.insert(attrs.begin(), attrs.end());
        }
        for (const auto& [src, rel, dst] : schema.relation_types) {
            rel_types_.insert(rel);
        }
        for (const MatchClause& m : q.matches) {
            for (const PathPattern& p : m.paths) {
                for (const NodePattern& n : p.nodes) {
                    if (n.variable && n.label && !var_labels_.count(*n.variable)) {
                        var_labels_[*n.variable] = *n.label;
                    }
                }
            }
        }
    }

    std::vector<SchemaViolation> run() {
        for (const MatchClause& m : q_.matches) {
            for (const PathPattern& p : m.paths) {
                check_node(p.nodes[0]);
                for (std::size_t i = 0; i < p.edges.size(); ++i) {
                    check_edge(p.edges[i]);
                    check_node(p.nodes[i + 1]);
                }
            }
        }
        if (q_.where) check_expr(*q_.where);
        if (q_.with) {
            for (const Projection& p : q_.with->projections) check_operand(p.expr);
        }
        if (q_.where_after_with) check_expr(*q_.where_after_with);
        for (const Projection& p : q_.ret.projections) check_operand(p.expr);
        if (q_.ret.order_by) check_operand(q_.ret.order_by->expr);
        return std::move(violations_);
    }

private:
    void add(SchemaViolation::Kind kind, const std::string& name,
             const std::set<std::string>& candidates, const std::string& what) {
        SchemaViolation v;
        v.kind = kind;
        v.offending = name;
        v.suggestions = nearest(name, candidates);
        locate(name, v);
        v.message = what + " '" + name + "' is not in the schema";
        if (kind == SchemaViolation::Kind::type_mismatch) {
            v.message = what;
        }
        if (!v.suggestions.empty()) {
            v.message += "; did you mean ";
            for (std::size_t i = 0; i < v.suggestions.size(); ++i) {
                if (i) v.message += ", ";
                v.message += "'" + v.suggestions[i] + "'";
            }
            v.message += "?";
        }
        violations_.push_back(std::move(v));
    }

    // Violations are produced in render order, so scanning forward from the
    // previous hit keeps spans aligned with their occurrences.
    void locate(const std::string& name, SchemaViolation& v) {
        std::string needle = render_identifier(name);
        std::size_t at = rendered_.find(needle, cursor_);
        if (at == std::string::npos) at = rendered_.find(needle);
        if (at == std::string::npos) {
            v.begin = v.end = 0;
            return;
        }
        v.begin = at;
        v.end = at + needle.size();
        cursor_ = v.end;
    }

    void check_node(const NodePattern& n) {
        if (n.label) {
            if (!labels_.count(*n.label)) {
                if (rel_types_.count(*n.label)) {
                    add(SchemaViolation::Kind::type_mismatch, *n.label, labels_,
                        "'" + *n.label +
                            "' is a relation type, not an entity label");
                } else {
                    add(SchemaViolation::Kind::unknown_label, *n.label, labels_,
                        "label");
                }
            }
        }
        const std::set<std::string>* props = &all_props_;
        if (n.label) {
            auto it = schema_.entity_types.find(*n.label);
            if (it != schema_.entity_types.end()) props = &it->second;
        }
        for (const auto& [key, value] : n.props) {
            if (!props->count(key)) {
                add(SchemaViolation::Kind::unknown_property, key, *props, "property");
            }
        }
    }

    void check_edge(const EdgePattern& e) {
        for (const std::string& rel : e.rel_types) {
            if (!rel_types_.count(rel)) {
                if (labels_.count(rel)) {
                    add(SchemaViolation::Kind::type_mismatch, rel, rel_types_,
                        "'" + rel + "' is an entity label, not a relation type");
                } else {
                    add(SchemaViolation::Kind::unknown_rel_type, rel, rel_types_,
                        "relation type");
                }
            }
        }
    }

    void check_operand(const Operand& o) {
        if (!std::holds_alternative<PropertyRef>(o)) return;
        const PropertyRef& p = std::get<PropertyRef>(o);
        const std::set<std::string>* props = &all_props_;
        auto it = var_labels_.find(p.variable);
        if (it != var_labels_.end()) {
            auto jt = schema_.entity_types.find(it->second);
            if (jt != schema_.entity_types.end()) props = &jt->second;
        }
        if (!props->count(p.property)) {
            add(SchemaViolation::Kind::unknown_property, p.property, *props,
                "property");
        }
    }

    void check_expr(const Expr& e) {
        if (e.kind == Expr::Kind::comparison) {
            check_operand(e.cmp->lhs);
            check_operand(e.cmp->rhs);
            return;
        }
        for (const Expr& kid : e.kids) check_expr(kid);
    }

    const CypherQuery& q_;
    const graph::GraphSchema& schema_;
    std::string rendered_;
    std::size_t cursor_ = 0;
    std::set<std::string> labels_;
    std::set<std::string> rel_types_;
    std::set<std::string> all_props_;
    std::map<std::string, std::string> var_labels_;
    std::vector<SchemaViolation> violations_;
};

}  // namespace

std::vector<SchemaViolation> validate(const CypherQuery& query,
                                      const graph::GraphSchema& schema) {
    return Validator(query, schema).run();
}

}  // namespace polyg::cypher
