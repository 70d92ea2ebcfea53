#include "polyg/cypher/render.hpp"

#include <cctype>

namespace polyg::cypher {

namespace {

bool plain_identifier(const std::string& name) {
    if (name.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(name[0])) && name[0] != '_') {
        return false;
    }
    for (char c : name) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    }
    return true;
}

std::string render_scalar(const Scalar& s) {
    if (std::holds_alternative<std::string>(s)) {
        return render_string_literal(std::get<std::string>(s));
    }
    return scalar_to_string(s);
}

int precedence(Expr::Kind k) {
    switch (k) {
        case Expr::Kind::or_: return 1;
        case Expr::Kind::and_: return 2;
        case Expr::Kind::not_: return 3;
        default: return 4;
    }
}

std::string render_expr(const Expr& e, int parent_prec) {
    std::string out;
    int prec = precedence(e.kind);
    switch (e.kind) {
        case Expr::Kind::comparison: {
            const Comparison& c = *e.cmp;
            const char* op = "=";
            switch (c.op) {
                case CmpOp::eq: op = "="; break;
                case CmpOp::ne: op = "<>"; break;
                case CmpOp::lt: op = "<"; break;
                case CmpOp::le: op = "<="; break;
                case CmpOp::gt: op = ">"; break;
                case CmpOp::ge: op = ">="; break;
            }
            out = render(c.lhs) + " " + op + " " + render(c.rhs);
            break;
        }
        case Expr::Kind::not_:
            out = "NOT " + render_expr(e.kids[0], prec);
            break;
        case Expr::Kind::and_:
            out = render_expr(e.kids[0], prec) + " AND " + render_expr(e.kids[1], prec);
            break;
        case Expr::Kind::or_:
            out = render_expr(e.kids[0], prec) + " OR " + render_expr(e.kids[1], prec);
            break;
    }
    if (prec < parent_prec) return "(" + out + ")";
    return out;
}

}  // namespace

std::string render_identifier(const std::string& name) {
    if (plain_identifier(name)) return name;
    return "`" + name + "`";
}

std::string render_string_literal(const std::string& value) {
    std::string out = "'";
    for (char c : value) {
        if (c == '\'' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

std::string render(const Operand& o) {
    if (std::holds_alternative<Scalar>(o)) return render_scalar(std::get<Scalar>(o));
    if (std::holds_alternative<VarRef>(o)) {
        return render_identifier(std::get<VarRef>(o).name);
    }
    const PropertyRef& p = std::get<PropertyRef>(o);
    return render_identifier(p.variable) + "." + render_identifier(p.property);
}

std::string render(const Expr& e) { return render_expr(e, 0); }

std::string render(const Projection& p) {
    std::string out;
    switch (p.agg) {
        case Projection::Agg::none: out = render(p.expr); break;
        case Projection::Agg::count: out = "COUNT(" + render(p.expr) + ")"; break;
        case Projection::Agg::count_distinct:
            out = "COUNT(DISTINCT " + render(p.expr) + ")";
            break;
    }
    if (p.alias) out += " AS " + render_identifier(*p.alias);
    return out;
}

namespace {

std::string render_node(const NodePattern& n) {
    std::string out = "(";
    if (n.variable) out += render_identifier(*n.variable);
    if (n.label) out += ":" + render_identifier(*n.label);
    if (!n.props.empty()) {
        if (out.size() > 1) out += " ";
        out += "{";
        for (std::size_t i = 0; i < n.props.size(); ++i) {
            if (i) out += ", ";
            out += render_identifier(n.props[i].first) + ": " +
                   render_scalar(n.props[i].second);
        }
        out += "}";
    }
    out += ")";
    return out;
}

std::string render_edge(const EdgePattern& e, int hop_cap = 5) {
    std::string body;
    if (e.variable) body += render_identifier(*e.variable);
    if (!e.rel_types.empty()) {
        body += ":";
        for (std::size_t i = 0; i < e.rel_types.size(); ++i) {
            if (i) body += "|";
            body += render_identifier(e.rel_types[i]);
        }
    }
    if (e.hops.variable_length) {
        body += "*";
        if (e.hops.min == e.hops.max) {
            body += std::to_string(e.hops.min);
        } else if (!(e.hops.min == 1 && e.hops.max == hop_cap)) {
            body += std::to_string(e.hops.min) + ".." + std::to_string(e.hops.max);
        }
    }
    if (e.direction == Direction::out) return "-[" + body + "]->";
    return "<-[" + body + "]-";
}

}  // namespace

std::string render(const PathPattern& p) {
    std::string out = render_node(p.nodes[0]);
    for (std::size_t i = 0; i < p.edges.size(); ++i) {
        out += render_edge(p.edges[i]);
        out += render_node(p.nodes[i + 1]);
    }
    return out;
}

std::string render(const MatchClause& m) {
    std::string out = "MATCH ";
    if (m.path_variable) out += render_identifier(*m.path_variable) + " = ";
    if (m.shortest_k) out += "SHORTEST " + std::to_string(*m.shortest_k) + " ";
    for (std::size_t i = 0; i < m.paths.size(); ++i) {
        if (i) out += ", ";
        out += render(m.paths[i]);
    }
    return out;
}

std::string render(const CypherQuery& q) {
    std::string out;
    for (const MatchClause& m : q.matches) {
        if (!out.empty()) out += " ";
        out += render(m);
    }
    if (q.where) out += " WHERE " + render(*q.where);
    if (q.with) {
        out += " WITH ";
        if (q.with->distinct) out += "DISTINCT ";
        for (std::size_t i = 0; i < q.with->projections.size(); ++i) {
            if (i) out += ", ";
            out += render(q.with->projections[i]);
        }
        if (q.where_after_with) out += " WHERE " + render(*q.where_after_with);
    }
    out += " RETURN ";
    if (q.ret.distinct) out += "DISTINCT ";
    for (std::size_t i = 0; i < q.ret.projections.size(); ++i) {
        if (i) out += ", ";
        out += render(q.ret.projections[i]);
    }
    if (q.ret.order_by) {
        out += " ORDER BY " + render(q.ret.order_by->expr);
        if (q.ret.order_by->descending) out += " DESC";
    }
    if (q.ret.limit) out += " LIMIT " + std::to_string(*q.ret.limit);
    return out;
}

}  // namespace polyg::cypher
