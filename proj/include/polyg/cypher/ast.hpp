#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "polyg/core/scalar.hpp"

namespace polyg::cypher {

// Reference to a bound variable.
struct VarRef {
    std::string name;
    bool operator==(const VarRef&) const = default;
};

// variable.property access.
struct PropertyRef {
    std::string variable;
    std::string property;
    bool operator==(const PropertyRef&) const = default;
};

// Operand of comparisons, projections and ORDER BY.
using Operand = std::variant<Scalar, VarRef, PropertyRef>;

enum class CmpOp { eq, ne, lt, le, gt, ge };

struct Comparison {
    Operand lhs;
    CmpOp op = CmpOp::eq;
    Operand rhs;
    bool operator==(const Comparison&) const = default;
};

// Boolean expression tree. kids holds one child for not_, two for and_/or_.
struct Expr {
    enum class Kind { comparison, and_, or_, not_ };
    Kind kind = Kind::comparison;
    std::optional<Comparison> cmp;
    std::vector<Expr> kids;
    bool operator==(const Expr&) const = default;
};

struct NodePattern {
    std::optional<std::string> variable;
    std::optional<std::string> label;
    // Property equality filters in written order.
    std::vector<std::pair<std::string, Scalar>> props;
    bool operator==(const NodePattern&) const = default;
};

enum class Direction { out, in };

// min == max == 1 with variable_length == false is a plain single hop.
// variable_length spans min..max hops (bounded by the executor hop cap).
struct HopRange {
    bool variable_length = false;
    int min = 1;
    int max = 1;
    bool operator==(const HopRange&) const = default;
};

struct EdgePattern {
    std::optional<std::string> variable;
    // Empty = any relation type; several entries = alternation (:a|b).
    std::vector<std::string> rel_types;
    Direction direction = Direction::out;
    HopRange hops;
    bool operator==(const EdgePattern&) const = default;
};

// nodes.size() == edges.size() + 1.
struct PathPattern {
    std::vector<NodePattern> nodes;
    std::vector<EdgePattern> edges;
    bool operator==(const PathPattern&) const = default;
};

struct MatchClause {
    std::optional<std::string> path_variable;
    std::optional<int> shortest_k;
    std::vector<PathPattern> paths;
    bool operator==(const MatchClause&) const = default;
};

struct Projection {
    enum class Agg { none, count, count_distinct };
    Agg agg = Agg::none;
    Operand expr;
    std::optional<std::string> alias;
    bool operator==(const Projection&) const = default;
};

struct WithClause {
    bool distinct = false;
    std::vector<Projection> projections;
    bool operator==(const WithClause&) const = default;
};

struct OrderBy {
    Operand expr;
    bool descending = false;
    bool operator==(const OrderBy&) const = default;
};

struct ReturnClause {
    bool distinct = false;
    std::vector<Projection> projections;
    std::optional<OrderBy> order_by;
    std::optional<std::int64_t> limit;
    bool operator==(const ReturnClause&) const = default;
};

// Clause sequence: MATCH+ [WHERE] [WITH [WHERE]] RETURN. The single
// RETURN is always last; the structure encodes the legal ordering.
struct CypherQuery {
    std::vector<MatchClause> matches;
    std::optional<Expr> where;             // before WITH
    std::optional<WithClause> with;
    std::optional<Expr> where_after_with;  // filters WITH output
    ReturnClause ret;
    bool operator==(const CypherQuery&) const = default;
};

}  // namespace polyg::cypher
