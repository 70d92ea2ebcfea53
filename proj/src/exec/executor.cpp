#include "polyg/exec/executor.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include <json.hpp>

#include "polyg/core/text.hpp"
#include "polyg/cypher/render.hpp"

namespace polyg::exec {

using cypher::CmpOp;
using cypher::CypherQuery;
using cypher::Direction;
using cypher::EdgePattern;
using cypher::Expr;
using cypher::MatchClause;
using cypher::NodePattern;
using cypher::Operand;
using cypher::PathPattern;
using cypher::Projection;
using cypher::PropertyRef;
using cypher::VarRef;
using graph::PropertyGraph;

namespace {

int compare_scalarish(const Value& a, const Value& b) {
    if (a.index() != b.index()) return a.index() < b.index() ? -1 : 1;
    switch (a.index()) {
        case 0: return 0;
        case 1: {
            auto x = std::get<std::int64_t>(a), y = std::get<std::int64_t>(b);
            return x < y ? -1 : x > y ? 1 : 0;
        }
        case 2: {
            auto x = std::get<double>(a), y = std::get<double>(b);
            return x < y ? -1 : x > y ? 1 : 0;
        }
        case 3: {
            const auto& x = std::get<std::string>(a);
            const auto& y = std::get<std::string>(b);
            return x < y ? -1 : x > y ? 1 : 0;
        }
        default: return 0;
    }
}

int compare_str(const std::string& a, const std::string& b) {
    return a < b ? -1 : a > b ? 1 : 0;
}

}  // namespace

int compare_values(const PropertyGraph& g, const Value& a, const Value& b) {
    if (a.index() != b.index()) return a.index() < b.index() ? -1 : 1;
    switch (a.index()) {
        case 4: {
            const auto& x = g.entity(std::get<EntityRef>(a).index);
            const auto& y = g.entity(std::get<EntityRef>(b).index);
            return compare_str(x.id, y.id);
        }
        case 5: {
            std::uint32_t ia = std::get<RelationRef>(a).index;
            std::uint32_t ib = std::get<RelationRef>(b).index;
            const auto& x = g.relation(ia);
            const auto& y = g.relation(ib);
            if (int c = compare_str(g.entity(x.src).id, g.entity(y.src).id)) return c;
            if (int c = compare_str(x.rel_type, y.rel_type)) return c;
            if (int c = compare_str(g.entity(x.dst).id, g.entity(y.dst).id)) return c;
            return ia < ib ? -1 : ia > ib ? 1 : 0;
        }
        case 6: {
            const auto& x = std::get<PathValue>(a);
            const auto& y = std::get<PathValue>(b);
            if (x.hop_count() != y.hop_count()) {
                return x.hop_count() < y.hop_count() ? -1 : 1;
            }
            for (std::size_t i = 0; i < x.nodes.size(); ++i) {
                if (int c = compare_str(g.entity(x.nodes[i]).id,
                                        g.entity(y.nodes[i]).id))
                    return c;
            }
            for (std::size_t i = 0; i < x.rels.size(); ++i) {
                if (int c = compare_str(g.relation(x.rels[i]).rel_type,
                                        g.relation(y.rels[i]).rel_type))
                    return c;
            }
            for (std::size_t i = 0; i < x.rels.size(); ++i) {
                if (x.rels[i] != y.rels[i]) return x.rels[i] < y.rels[i] ? -1 : 1;
            }
            return 0;
        }
        default:
            return compare_scalarish(a, b);
    }
}

std::string value_to_string(const PropertyGraph& g, const Value& v) {
    switch (v.index()) {
        case 0: return "null";
        case 1: return std::to_string(std::get<std::int64_t>(v));
        case 2: return scalar_to_string(Scalar(std::get<double>(v)));
        case 3: return std::get<std::string>(v);
        case 4: return g.entity(std::get<EntityRef>(v).index).id;
        case 5: {
            const auto& r = g.relation(std::get<RelationRef>(v).index);
            return g.entity(r.src).id + " -[" + r.rel_type + "]-> " +
                   g.entity(r.dst).id;
        }
        default: {
            const auto& p = std::get<PathValue>(v);
            std::string out = g.entity(p.nodes[0]).id;
            for (std::size_t i = 0; i < p.rels.size(); ++i) {
                out += " -[" + g.relation(p.rels[i]).rel_type + "]-> ";
                out += g.entity(p.nodes[i + 1]).id;
            }
            return out;
        }
    }
}

namespace {

// ---------------------------------------------------------------------------
// Evaluation machinery
// ---------------------------------------------------------------------------

using Binding = std::map<std::string, Value>;

struct EvalContext {
    const PropertyGraph& g;
    const ExecLimits& limits;
    ExecStats stats;
    std::chrono::steady_clock::time_point deadline;
    std::optional<ExecError> failure;

    EvalContext(const PropertyGraph& graph, const ExecLimits& lim)
        : g(graph), limits(lim) {
        deadline = std::chrono::steady_clock::now() + lim.timeout;
    }

    bool charge_path() {
        if (++stats.paths_expanded > limits.max_paths) {
            failure = ExecError{ExecError::Kind::limit_exceeded,
                                "path expansion limit exceeded (max_paths=" +
                                    std::to_string(limits.max_paths) + ")"};
            return false;
        }
        if ((stats.paths_expanded & 0x3ff) == 0 &&
            std::chrono::steady_clock::now() > deadline) {
            failure = ExecError{ExecError::Kind::timeout, "execution timed out"};
            return false;
        }
        return true;
    }

    bool charge_rows(std::size_t n) {
        stats.rows_scanned += n;
        if (stats.rows_scanned > limits.max_rows) {
            failure = ExecError{ExecError::Kind::limit_exceeded,
                                "row limit exceeded (max_rows=" +
                                    std::to_string(limits.max_rows) + ")"};
            return false;
        }
        return true;
    }
};

bool scalar_matches(const PropertyGraph& g, std::uint32_t entity,
                    const std::string& prop, const Scalar& want) {
    auto have = g.property_of(entity, prop);
    if (!have) return false;
    return compare_for_query(*have, want) == 0;
}

bool node_admits(const PropertyGraph& g, const NodePattern& n, std::uint32_t idx) {
    if (n.label && g.entity(idx).type != *n.label) return false;
    for (const auto& [prop, want] : n.props) {
        if (!scalar_matches(g, idx, prop, want)) return false;
    }
    return true;
}

// Candidate entities for a node pattern, using the id/name fast paths when
// the property filters pin them down.
std::vector<std::uint32_t> node_candidates(const PropertyGraph& g,
                                           const NodePattern& n) {
    for (const auto& [prop, want] : n.props) {
        if (prop == "id" && std::holds_alternative<std::string>(want)) {
            auto idx = g.index_of(std::get<std::string>(want));
            if (idx && node_admits(g, n, *idx)) return {*idx};
            return {};
        }
    }
    for (const auto& [prop, want] : n.props) {
        if (prop == "name" && std::holds_alternative<std::string>(want)) {
            std::vector<std::uint32_t> out;
            auto it = g.name_index().find(normalize_name(std::get<std::string>(want)));
            if (it == g.name_index().end()) return out;
            for (std::uint32_t idx : it->second) {
                // The name index folds case; the pattern wants exact equality.
                if (node_admits(g, n, idx)) out.push_back(idx);
            }
            return out;
        }
    }
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i < g.entities().size(); ++i) {
        if (node_admits(g, n, i)) out.push_back(i);
    }
    return out;
}

bool edge_type_ok(const EdgePattern& e, const std::string& rel_type) {
    if (e.rel_types.empty()) return true;
    return std::find(e.rel_types.begin(), e.rel_types.end(), rel_type) !=
           e.rel_types.end();
}

// Expands one edge pattern from a fixed entity. Yields (far entity, bound
// value for the edge variable) pairs through the sink.
template <typename Sink>
bool expand_edge(EvalContext& ctx, const EdgePattern& e, std::uint32_t from,
                 const Sink& sink) {
    const auto& adjacency = e.direction == Direction::out
                                ? ctx.g.out_edges(from)
                                : ctx.g.in_edges(from);
    if (!e.hops.variable_length) {
        for (const auto& edge : adjacency) {
            if (!edge_type_ok(e, edge.rel_type)) continue;
            if (!ctx.charge_path()) return false;
            if (!sink(edge.dst, Value(RelationRef{edge.relation}))) return false;
        }
        return true;
    }

    int max_len = std::min(e.hops.max, ctx.limits.hop_cap);
    int min_len = std::max(e.hops.min, 1);
    // Simple-path DFS within the segment.
    std::vector<std::uint32_t> nodes{from};
    std::vector<std::uint32_t> rels;
    std::vector<bool> visited(ctx.g.entities().size(), false);
    visited[from] = true;

    std::function<bool(std::uint32_t, int)> dfs = [&](std::uint32_t cur,
                                                      int depth) -> bool {
        if (depth >= min_len) {
            PathValue pv{nodes, rels};
            if (!sink(cur, Value(std::move(pv)))) return false;
        }
        if (depth == max_len) return true;
        const auto& adj = e.direction == Direction::out ? ctx.g.out_edges(cur)
                                                        : ctx.g.in_edges(cur);
        for (const auto& edge : adj) {
            if (!edge_type_ok(e, edge.rel_type)) continue;
            if (visited[edge.dst]) continue;
            if (!ctx.charge_path()) return false;
            visited[edge.dst] = true;
            nodes.push_back(edge.dst);
            rels.push_back(edge.relation);
            bool keep = dfs(edge.dst, depth + 1);
            nodes.pop_back();
            rels.pop_back();
            visited[edge.dst] = false;
            if (!keep) return false;
        }
        return true;
    };
    return dfs(from, 0);
}

struct ConstrainedNode {
    // How selective the node pattern is; lower evaluates first.
    static int score(const Binding* scope_hint, const NodePattern& n,
                     const std::set<std::string>& bound) {
        (void)scope_hint;
        if (n.variable && bound.count(*n.variable)) return 0;
        bool has_id = false, has_other_prop = false;
        for (const auto& [prop, v] : n.props) {
            if (prop == "id" || prop == "name") has_id = true;
            else has_other_prop = true;
        }
        if (has_id) return 1;
        if (has_other_prop) return 2;
        if (n.label) return 3;
        return 4;
    }
};

// Joins a path pattern into the current binding set.
bool join_path(EvalContext& ctx, const PathPattern& path_in,
               std::vector<Binding>& bindings) {
    PathPattern path = path_in;
    std::set<std::string> bound;
    for (const Binding& b : bindings) {
        for (const auto& [k, v] : b) bound.insert(k);
    }
    // Evaluate from the more selective end.
    if (!path.edges.empty()) {
        int first = ConstrainedNode::score(nullptr, path.nodes.front(), bound);
        int last = ConstrainedNode::score(nullptr, path.nodes.back(), bound);
        if (last < first) {
            std::reverse(path.nodes.begin(), path.nodes.end());
            std::reverse(path.edges.begin(), path.edges.end());
            for (EdgePattern& e : path.edges) {
                e.direction = e.direction == Direction::out ? Direction::in
                                                            : Direction::out;
            }
        }
    }

    std::vector<Binding> out;
    for (const Binding& base : bindings) {
        // Candidates for the first node.
        std::vector<std::uint32_t> starts;
        const NodePattern& first = path.nodes[0];
        if (first.variable && base.count(*first.variable)) {
            const Value& v = base.at(*first.variable);
            if (!std::holds_alternative<EntityRef>(v)) continue;
            std::uint32_t idx = std::get<EntityRef>(v).index;
            if (node_admits(ctx.g, first, idx)) starts.push_back(idx);
        } else {
            starts = node_candidates(ctx.g, first);
        }

        // Depth-first join across the chain.
        std::function<bool(std::size_t, std::uint32_t, Binding&)> step =
            [&](std::size_t edge_i, std::uint32_t cur, Binding& b) -> bool {
            if (edge_i == path.edges.size()) {
                if (!ctx.charge_rows(1)) return false;
                out.push_back(b);
                return true;
            }
            const EdgePattern& e = path.edges[edge_i];
            const NodePattern& far = path.nodes[edge_i + 1];
            return expand_edge(ctx, e, cur, [&](std::uint32_t far_idx,
                                                Value edge_val) -> bool {
                if (!node_admits(ctx.g, far, far_idx)) return true;
                if (far.variable) {
                    auto it = b.find(*far.variable);
                    if (it != b.end()) {
                        if (!std::holds_alternative<EntityRef>(it->second) ||
                            std::get<EntityRef>(it->second).index != far_idx) {
                            return true;
                        }
                        if (e.variable) {
                            Binding next = b;
                            next[*e.variable] = std::move(edge_val);
                            return step(edge_i + 1, far_idx, next);
                        }
                        return step(edge_i + 1, far_idx, b);
                    }
                }
                Binding next = b;
                if (far.variable) next[*far.variable] = Value(EntityRef{far_idx});
                if (e.variable) next[*e.variable] = std::move(edge_val);
                return step(edge_i + 1, far_idx, next);
            });
        };

        for (std::uint32_t s : starts) {
            Binding b = base;
            if (first.variable && !b.count(*first.variable)) {
                b[*first.variable] = Value(EntityRef{s});
            }
            if (!step(0, s, b)) return false;
        }
    }
    bindings = std::move(out);
    return true;
}

// ---------------------------------------------------------------------------
// Expression evaluation
// ---------------------------------------------------------------------------

Value eval_operand(const PropertyGraph& g, const Binding& b, const Operand& o) {
    if (std::holds_alternative<Scalar>(o)) {
        const Scalar& s = std::get<Scalar>(o);
        switch (s.index()) {
            case 0: return Value(std::get<std::int64_t>(s));
            case 1: return Value(std::get<double>(s));
            default: return Value(std::get<std::string>(s));
        }
    }
    if (std::holds_alternative<VarRef>(o)) {
        auto it = b.find(std::get<VarRef>(o).name);
        if (it == b.end()) return Value();
        return it->second;
    }
    const PropertyRef& p = std::get<PropertyRef>(o);
    auto it = b.find(p.variable);
    if (it == b.end()) return Value();
    const Value& v = it->second;
    if (std::holds_alternative<EntityRef>(v)) {
        auto s = g.property_of(std::get<EntityRef>(v).index, p.property);
        if (!s) return Value();
        switch (s->index()) {
            case 0: return Value(std::get<std::int64_t>(*s));
            case 1: return Value(std::get<double>(*s));
            default: return Value(std::get<std::string>(*s));
        }
    }
    if (std::holds_alternative<RelationRef>(v)) {
        const auto& rel = g.relation(std::get<RelationRef>(v).index);
        if (p.property == "rel_type") return Value(rel.rel_type);
        auto a = rel.attrs.find(p.property);
        if (a == rel.attrs.end()) return Value();
        switch (a->second.index()) {
            case 0: return Value(std::get<std::int64_t>(a->second));
            case 1: return Value(std::get<double>(a->second));
            default: return Value(std::get<std::string>(a->second));
        }
    }
    if (std::holds_alternative<PathValue>(v)) {
        if (p.property == "length") {
            return Value(static_cast<std::int64_t>(
                std::get<PathValue>(v).hop_count()));
        }
        return Value();
    }
    return Value();
}

std::optional<Scalar> value_as_scalar(const Value& v) {
    switch (v.index()) {
        case 1: return Scalar(std::get<std::int64_t>(v));
        case 2: return Scalar(std::get<double>(v));
        case 3: return Scalar(std::get<std::string>(v));
        default: return std::nullopt;
    }
}

bool eval_comparison(const PropertyGraph& g, const Binding& b,
                     const cypher::Comparison& c) {
    Value lv = eval_operand(g, b, c.lhs);
    Value rv = eval_operand(g, b, c.rhs);
    if (std::holds_alternative<std::monostate>(lv) ||
        std::holds_alternative<std::monostate>(rv)) {
        return false;
    }
    auto ls = value_as_scalar(lv);
    auto rs = value_as_scalar(rv);
    if (ls && rs) {
        int cmp = compare_for_query(*ls, *rs);
        if (cmp == -2) return false;
        switch (c.op) {
            case CmpOp::eq: return cmp == 0;
            case CmpOp::ne: return cmp != 0;
            case CmpOp::lt: return cmp < 0;
            case CmpOp::le: return cmp <= 0;
            case CmpOp::gt: return cmp > 0;
            case CmpOp::ge: return cmp >= 0;
        }
    }
    // Graph references support equality only.
    if (lv.index() == rv.index()) {
        bool eq = lv == rv;
        if (c.op == CmpOp::eq) return eq;
        if (c.op == CmpOp::ne) return !eq;
    }
    return false;
}

bool eval_expr(const PropertyGraph& g, const Binding& b, const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::comparison: return eval_comparison(g, b, *e.cmp);
        case Expr::Kind::and_: return eval_expr(g, b, e.kids[0]) && eval_expr(g, b, e.kids[1]);
        case Expr::Kind::or_: return eval_expr(g, b, e.kids[0]) || eval_expr(g, b, e.kids[1]);
        case Expr::Kind::not_: return !eval_expr(g, b, e.kids[0]);
    }
    return false;
}

// ---------------------------------------------------------------------------
// Projection
// ---------------------------------------------------------------------------

struct ValueVecLess {
    const PropertyGraph& g;
    bool operator()(const std::vector<Value>& a, const std::vector<Value>& b) const {
        for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
            if (int c = compare_values(g, a[i], b[i])) return c < 0;
        }
        return a.size() < b.size();
    }
};

struct ProjectedRows {
    std::vector<std::vector<Value>> cells;
    // Input binding behind each output row (first of the group for
    // aggregates); used by ORDER BY expressions over pre-projection scope.
    std::vector<Binding> sources;
};

bool has_aggregate(const std::vector<Projection>& ps) {
    return std::any_of(ps.begin(), ps.end(), [](const Projection& p) {
        return p.agg != Projection::Agg::none;
    });
}

ProjectedRows project(const PropertyGraph& g, const std::vector<Binding>& input,
                      const std::vector<Projection>& ps) {
    ProjectedRows out;
    if (!has_aggregate(ps)) {
        for (const Binding& b : input) {
            std::vector<Value> row;
            row.reserve(ps.size());
            for (const Projection& p : ps) row.push_back(eval_operand(g, b, p.expr));
            out.cells.push_back(std::move(row));
            out.sources.push_back(b);
        }
        return out;
    }

    // Non-aggregate projections are the grouping key.
    std::vector<std::size_t> key_idx, agg_idx;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        (ps[i].agg == Projection::Agg::none ? key_idx : agg_idx).push_back(i);
    }
    struct Group {
        std::vector<Value> key;
        Binding first;
        std::int64_t count_rows = 0;
        std::vector<std::vector<Value>> distinct_pools;  // one per aggregate
        std::vector<std::int64_t> counts;                // one per aggregate
    };
    std::map<std::vector<Value>, Group, ValueVecLess> groups{ValueVecLess{g}};
    for (const Binding& b : input) {
        std::vector<Value> key;
        for (std::size_t i : key_idx) key.push_back(eval_operand(g, b, ps[i].expr));
        auto [it, inserted] = groups.try_emplace(key);
        Group& grp = it->second;
        if (inserted) {
            grp.key = key;
            grp.first = b;
            grp.distinct_pools.resize(agg_idx.size());
            grp.counts.assign(agg_idx.size(), 0);
        }
        ++grp.count_rows;
        for (std::size_t a = 0; a < agg_idx.size(); ++a) {
            const Projection& p = ps[agg_idx[a]];
            Value v = eval_operand(g, b, p.expr);
            if (std::holds_alternative<std::monostate>(v)) continue;
            if (p.agg == Projection::Agg::count) {
                ++grp.counts[a];
            } else {
                grp.distinct_pools[a].push_back(std::move(v));
            }
        }
    }
    for (auto& [key, grp] : groups) {
        std::vector<Value> row(ps.size());
        for (std::size_t j = 0; j < key_idx.size(); ++j) row[key_idx[j]] = grp.key[j];
        for (std::size_t a = 0; a < agg_idx.size(); ++a) {
            const Projection& p = ps[agg_idx[a]];
            if (p.agg == Projection::Agg::count) {
                row[agg_idx[a]] = Value(grp.counts[a]);
            } else {
                auto& pool = grp.distinct_pools[a];
                std::sort(pool.begin(), pool.end(), [&](const Value& x, const Value& y) {
                    return compare_values(g, x, y) < 0;
                });
                pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
                row[agg_idx[a]] = Value(static_cast<std::int64_t>(pool.size()));
            }
        }
        out.cells.push_back(std::move(row));
        out.sources.push_back(std::move(grp.first));
    }
    return out;
}

void dedupe_rows(const PropertyGraph& g, ProjectedRows& rows) {
    std::vector<std::size_t> order(rows.cells.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    ValueVecLess less{g};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return less(rows.cells[a], rows.cells[b]);
    });
    ProjectedRows out;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (!out.cells.empty() && rows.cells[order[i]] == out.cells.back()) continue;
        out.cells.push_back(std::move(rows.cells[order[i]]));
        out.sources.push_back(std::move(rows.sources[order[i]]));
    }
    rows = std::move(out);
}

std::string projection_column_name(const Projection& p) {
    if (p.alias) return *p.alias;
    return cypher::render(p);
}

std::optional<std::string> projection_binding_name(const Projection& p) {
    if (p.alias) return *p.alias;
    if (p.agg == Projection::Agg::none && std::holds_alternative<VarRef>(p.expr)) {
        return std::get<VarRef>(p.expr).name;
    }
    return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------------------
// k shortest paths
// ---------------------------------------------------------------------------

Result<std::vector<PathValue>, ExecError> k_shortest_paths(
    const PropertyGraph& graph, const std::string& src_id, const std::string& dst_id,
    int k, const RelSequenceConstraint& rel_constraint, const ExecLimits& limits,
    int min_hops, int max_hops) {
    auto src = graph.index_of(src_id);
    if (!src) {
        return ExecError{ExecError::Kind::unknown_entity,
                         "unknown entity id '" + src_id + "'"};
    }
    auto dst = graph.index_of(dst_id);
    if (!dst) {
        return ExecError{ExecError::Kind::unknown_entity,
                         "unknown entity id '" + dst_id + "'"};
    }
    if (k < 1) return std::vector<PathValue>{};

    EvalContext ctx(graph, limits);
    int cap = max_hops < 0 ? limits.hop_cap : std::min(max_hops, limits.hop_cap);

    std::vector<PathValue> results;
    if (*src == *dst) {
        // The only simple path from a node to itself is the zero-hop path.
        if (min_hops <= 0) {
            std::vector<std::string> empty;
            if (!rel_constraint || rel_constraint(std::span<const std::string>(empty))) {
                results.push_back(PathValue{{*src}, {}});
            }
        }
        return results;
    }

    // Hop-count lower bounds to the target, ignoring the constraint
    // (sound for pruning: constraints only remove paths).
    std::vector<int> dist(graph.entities().size(), -1);
    {
        std::deque<std::uint32_t> queue{*dst};
        dist[*dst] = 0;
        while (!queue.empty()) {
            std::uint32_t cur = queue.front();
            queue.pop_front();
            for (const auto& e : graph.in_edges(cur)) {
                if (dist[e.dst] < 0) {
                    dist[e.dst] = dist[cur] + 1;
                    queue.push_back(e.dst);
                }
            }
        }
    }
    if (dist[*src] < 0) return results;

    // Orders paths of equal length: the full entity-id sequence first, then
    // the relation-type sequence, then relation indices. Comparing the id
    // sequence as a block is not the same as the DFS emission order, so
    // each depth level is sorted explicitly before truncation.
    auto path_less = [&graph](const PathValue& a, const PathValue& b) {
        for (std::size_t i = 0; i < a.nodes.size(); ++i) {
            const std::string& x = graph.entity(a.nodes[i]).id;
            const std::string& y = graph.entity(b.nodes[i]).id;
            if (x != y) return x < y;
        }
        for (std::size_t i = 0; i < a.rels.size(); ++i) {
            const std::string& x = graph.relation(a.rels[i]).rel_type;
            const std::string& y = graph.relation(b.rels[i]).rel_type;
            if (x != y) return x < y;
        }
        return a.rels < b.rels;
    };

    std::vector<bool> visited(graph.entities().size(), false);
    std::vector<std::uint32_t> nodes{*src};
    std::vector<std::uint32_t> rels;
    visited[*src] = true;

    // Iterative deepening: shorter paths always precede longer ones, and
    // each complete level is sorted before the cutoff applies.
    for (int d = std::max(1, min_hops); d <= cap; ++d) {
        if (static_cast<int>(results.size()) >= k) break;
        if (dist[*src] > d) continue;
        std::vector<PathValue> level;
        std::function<bool(std::uint32_t, int)> dfs = [&](std::uint32_t cur,
                                                          int depth) -> bool {
            if (depth == d) {
                if (cur == *dst) {
                    std::vector<std::string> types;
                    types.reserve(rels.size());
                    for (std::uint32_t r : rels) types.push_back(graph.relation(r).rel_type);
                    if (!rel_constraint ||
                        rel_constraint(std::span<const std::string>(types))) {
                        level.push_back(PathValue{nodes, rels});
                    }
                }
                return true;
            }
            for (const auto& e : graph.out_edges(cur)) {
                if (visited[e.dst]) continue;
                if (dist[e.dst] < 0 || depth + 1 + dist[e.dst] > d) continue;
                if (!ctx.charge_path()) return false;
                visited[e.dst] = true;
                nodes.push_back(e.dst);
                rels.push_back(e.relation);
                bool keep = dfs(e.dst, depth + 1);
                nodes.pop_back();
                rels.pop_back();
                visited[e.dst] = false;
                if (!keep) return false;
            }
            return true;
        };
        dfs(*src, 0);
        if (ctx.failure) return *ctx.failure;
        std::sort(level.begin(), level.end(), path_less);
        for (PathValue& p : level) {
            if (static_cast<int>(results.size()) >= k) break;
            results.push_back(std::move(p));
        }
    }
    return results;
}

// ---------------------------------------------------------------------------
// execute
// ---------------------------------------------------------------------------

namespace {

Result<Ok, ExecError> apply_shortest(EvalContext& ctx, const MatchClause& m,
                                     std::vector<Binding>& bindings,
                                     const ExecLimits& limits) {
    const PathPattern& p = m.paths[0];
    const NodePattern& src_pat = p.nodes[0];
    const NodePattern& dst_pat = p.nodes[1];
    const EdgePattern& edge = p.edges[0];

    // [*] admits the zero-hop path when both endpoints resolve to the same
    // entity; an explicit lower bound or a fixed-length edge does not.
    int min_hops = edge.hops.variable_length ? (edge.hops.min > 1 ? edge.hops.min : 0)
                                             : edge.hops.min;
    int max_hops = edge.hops.max;

    RelSequenceConstraint constraint;
    if (!edge.rel_types.empty()) {
        std::set<std::string> allowed(edge.rel_types.begin(), edge.rel_types.end());
        constraint = [allowed](std::span<const std::string> types) {
            for (const std::string& t : types) {
                if (!allowed.count(t)) return false;
            }
            return true;
        };
    }

    std::vector<Binding> out;
    for (const Binding& base : bindings) {
        auto candidates_for = [&](const NodePattern& n) -> std::vector<std::uint32_t> {
            if (n.variable && base.count(*n.variable)) {
                const Value& v = base.at(*n.variable);
                if (!std::holds_alternative<EntityRef>(v)) return {};
                std::uint32_t idx = std::get<EntityRef>(v).index;
                if (node_admits(ctx.g, n, idx)) return {idx};
                return {};
            }
            return node_candidates(ctx.g, n);
        };
        std::vector<std::uint32_t> srcs = candidates_for(src_pat);
        std::vector<std::uint32_t> dsts = candidates_for(dst_pat);
        bool swap_ends = edge.direction == Direction::in;
        for (std::uint32_t s : srcs) {
            for (std::uint32_t t : dsts) {
                std::uint32_t from = swap_ends ? t : s;
                std::uint32_t to = swap_ends ? s : t;
                auto paths = k_shortest_paths(
                    ctx.g, ctx.g.entity(from).id, ctx.g.entity(to).id,
                    *m.shortest_k, constraint, limits, min_hops, max_hops);
                if (!paths) return paths.error();
                for (PathValue& pv : paths.value()) {
                    if (!ctx.charge_rows(1)) return *ctx.failure;
                    Binding b = base;
                    if (src_pat.variable) b[*src_pat.variable] = Value(EntityRef{s});
                    if (dst_pat.variable) b[*dst_pat.variable] = Value(EntityRef{t});
                    if (edge.variable) b[*edge.variable] = Value(pv);
                    if (m.path_variable) b[*m.path_variable] = Value(std::move(pv));
                    out.push_back(std::move(b));
                }
            }
        }
    }
    bindings = std::move(out);
    return Ok{};
}

}  // namespace

Result<ResultTable, ExecError> execute(const PropertyGraph& graph,
                                       const CypherQuery& query,
                                       const ExecLimits& limits) {
    EvalContext ctx(graph, limits);
    std::vector<Binding> bindings{Binding{}};

    for (const MatchClause& m : query.matches) {
        if (m.shortest_k) {
            auto r = apply_shortest(ctx, m, bindings, limits);
            if (!r) return r.error();
        } else {
            for (const PathPattern& p : m.paths) {
                if (!join_path(ctx, p, bindings)) {
                    if (ctx.failure) return *ctx.failure;
                    break;
                }
            }
            if (ctx.failure) return *ctx.failure;
        }
    }

    if (query.where) {
        std::vector<Binding> kept;
        for (Binding& b : bindings) {
            if (eval_expr(graph, b, *query.where)) kept.push_back(std::move(b));
        }
        bindings = std::move(kept);
    }

    if (query.with) {
        ProjectedRows rows = project(graph, bindings, query.with->projections);
        if (query.with->distinct) dedupe_rows(graph, rows);
        std::vector<Binding> next;
        for (std::size_t i = 0; i < rows.cells.size(); ++i) {
            Binding b;
            for (std::size_t j = 0; j < query.with->projections.size(); ++j) {
                auto name = projection_binding_name(query.with->projections[j]);
                if (name) b[*name] = rows.cells[i][j];
            }
            next.push_back(std::move(b));
        }
        bindings = std::move(next);
        if (query.where_after_with) {
            std::vector<Binding> kept;
            for (Binding& b : bindings) {
                if (eval_expr(graph, b, *query.where_after_with)) {
                    kept.push_back(std::move(b));
                }
            }
            bindings = std::move(kept);
        }
    }

    const auto& ret = query.ret;
    ProjectedRows rows = project(graph, bindings, ret.projections);
    if (ret.distinct) dedupe_rows(graph, rows);

    // Ordering: ORDER BY evaluates against a projected column when the
    // expression names one (alias or identical expression), otherwise
    // against the pre-projection binding. Remaining ties and the default
    // order use the lexicographic row order.
    std::vector<std::size_t> order(rows.cells.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    ValueVecLess less{graph};
    if (ret.order_by) {
        std::optional<std::size_t> column;
        for (std::size_t j = 0; j < ret.projections.size(); ++j) {
            const Projection& p = ret.projections[j];
            if (std::holds_alternative<VarRef>(ret.order_by->expr)) {
                const std::string& name = std::get<VarRef>(ret.order_by->expr).name;
                if ((p.alias && *p.alias == name) ||
                    (projection_binding_name(p) &&
                     *projection_binding_name(p) == name)) {
                    column = j;
                    break;
                }
            }
            if (p.agg == Projection::Agg::none && p.expr == ret.order_by->expr) {
                column = j;
                break;
            }
        }
        std::vector<Value> keys(rows.cells.size());
        for (std::size_t i = 0; i < rows.cells.size(); ++i) {
            keys[i] = column ? rows.cells[i][*column]
                             : eval_operand(graph, rows.sources[i], ret.order_by->expr);
        }
        bool desc = ret.order_by->descending;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) {
                             int c = compare_values(graph, keys[a], keys[b]);
                             if (c != 0) return desc ? c > 0 : c < 0;
                             return less(rows.cells[a], rows.cells[b]);
                         });
    } else {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return less(rows.cells[a], rows.cells[b]);
        });
    }

    ResultTable table;
    for (const Projection& p : ret.projections) {
        table.columns.push_back(projection_column_name(p));
    }
    std::size_t limit = ret.limit ? static_cast<std::size_t>(std::max<std::int64_t>(
                                        0, *ret.limit))
                                  : order.size();
    for (std::size_t i = 0; i < order.size() && i < limit; ++i) {
        table.rows.push_back(std::move(rows.cells[order[i]]));
    }
    table.stats = ctx.stats;
    return table;
}

// ---------------------------------------------------------------------------
// Retrieval entry points
// ---------------------------------------------------------------------------

Result<ResultTable, ExecError> expand_neighborhood(const PropertyGraph& graph,
                                                   const std::string& entity_id,
                                                   const ExecLimits& limits) {
    auto idx = graph.index_of(entity_id);
    if (!idx) {
        return ExecError{ExecError::Kind::unknown_entity,
                         "unknown entity id '" + entity_id + "'"};
    }
    ResultTable t;
    t.columns = {"p", "o"};
    for (const auto& e : graph.out_edges(*idx)) {
        t.rows.push_back({Value(RelationRef{e.relation}), Value(EntityRef{e.dst})});
        if (t.rows.size() > limits.max_rows) {
            return ExecError{ExecError::Kind::limit_exceeded,
                             "row limit exceeded (max_rows=" +
                                 std::to_string(limits.max_rows) + ")"};
        }
    }
    t.stats.rows_scanned = t.rows.size();
    return t;
}

Result<ResultTable, ExecError> match_meta_path(const PropertyGraph& graph,
                                               const std::vector<std::string>& start_ids,
                                               const std::vector<std::string>& rel_chain,
                                               const HopFilters& filters,
                                               const ExecLimits& limits) {
    EvalContext ctx(graph, limits);
    std::vector<std::uint32_t> starts;
    for (const std::string& id : start_ids) {
        auto idx = graph.index_of(id);
        if (!idx) {
            return ExecError{ExecError::Kind::unknown_entity,
                             "unknown entity id '" + id + "'"};
        }
        starts.push_back(*idx);
    }

    auto passes = [&](std::size_t hop, std::uint32_t entity) {
        auto it = filters.find(hop);
        if (it == filters.end()) return true;
        for (const auto& [prop, want] : it->second) {
            if (!scalar_matches(graph, entity, prop, want)) return false;
        }
        return true;
    };

    ResultTable t;
    t.columns = {"v" + std::to_string(rel_chain.size())};

    std::function<bool(std::uint32_t, std::size_t)> walk = [&](std::uint32_t cur,
                                                               std::size_t hop) -> bool {
        if (hop == rel_chain.size()) {
            if (!ctx.charge_rows(1)) return false;
            t.rows.push_back({Value(EntityRef{cur})});
            return true;
        }
        for (const auto& e : graph.out_edges(cur)) {
            if (e.rel_type != rel_chain[hop]) continue;
            if (!ctx.charge_path()) return false;
            if (!passes(hop + 1, e.dst)) continue;
            if (!walk(e.dst, hop + 1)) return false;
        }
        return true;
    };

    for (std::uint32_t s : starts) {
        if (!passes(0, s)) continue;
        if (!walk(s, 0)) break;
    }
    if (ctx.failure) return *ctx.failure;

    std::sort(t.rows.begin(), t.rows.end(),
              [&](const std::vector<Value>& a, const std::vector<Value>& b) {
                  return ValueVecLess{graph}(a, b);
              });
    t.stats = ctx.stats;
    t.stats.rows_scanned = t.rows.size();
    return t;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string serialize_result(const PropertyGraph& g, const ResultTable& t) {
    using nlohmann::ordered_json;
    std::string out;
    ordered_json header;
    header["columns"] = t.columns;
    header["stats"] = {{"rows_scanned", t.stats.rows_scanned},
                       {"paths_expanded", t.stats.paths_expanded}};
    out += header.dump();
    out += "\n";
    for (const auto& row : t.rows) {
        ordered_json cells = ordered_json::array();
        for (const Value& v : row) {
            switch (v.index()) {
                case 0: cells.push_back(nullptr); break;
                case 1: cells.push_back(std::get<std::int64_t>(v)); break;
                case 2: cells.push_back(std::get<double>(v)); break;
                case 3: cells.push_back(std::get<std::string>(v)); break;
                case 4:
                    cells.push_back(
                        ordered_json{{"entity", g.entity(std::get<EntityRef>(v).index).id}});
                    break;
                case 5: {
                    const auto& r = g.relation(std::get<RelationRef>(v).index);
                    cells.push_back(ordered_json{
                        {"relation", {g.entity(r.src).id, r.rel_type, g.entity(r.dst).id}}});
                    break;
                }
                default: {
                    const auto& p = std::get<PathValue>(v);
                    ordered_json seq = ordered_json::array();
                    seq.push_back(g.entity(p.nodes[0]).id);
                    for (std::size_t i = 0; i < p.rels.size(); ++i) {
                        seq.push_back(g.relation(p.rels[i]).rel_type);
                        seq.push_back(g.entity(p.nodes[i + 1]).id);
                    }
                    cells.push_back(ordered_json{{"path", seq}});
                    break;
                }
            }
        }
        ordered_json rec;
        rec["row"] = std::move(cells);
        out += rec.dump();
        out += "\n";
    }
    return out;
}

}  // namespace polyg::exec
