#include "polyg/cypher/parser.hpp"

#include <cctype>
#include <cstdlib>
#include <set>

#include "polyg/core/text.hpp"

namespace polyg::cypher {

std::string ParseError::to_string() const {
    std::string out = "line " + std::to_string(line) + ", column " +
                      std::to_string(column) + ": " + message;
    if (!expected.empty()) {
        out += " (expected ";
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) out += ", ";
            out += expected[i];
        }
        out += ")";
    }
    return out;
}

namespace {

enum class Tok {
    ident,
    quoted_ident,
    string_lit,
    int_lit,
    float_lit,
    lparen,
    rparen,
    lbrace,
    rbrace,
    lbracket,
    rbracket,
    colon,
    comma,
    dot,
    dotdot,
    pipe,
    star,
    minus,
    lt,
    gt,
    eq,
    eqeq,
    neq,
    le,
    ge,
    semicolon,
    end
};

struct Token {
    Tok kind = Tok::end;
    std::string text;
    int line = 1;
    int column = 1;
};

bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    Result<std::vector<Token>, ParseError> run() {
        std::vector<Token> out;
        while (true) {
            skip_ws();
            Token t;
            t.line = line_;
            t.column = col_;
            if (pos_ >= text_.size()) {
                t.kind = Tok::end;
                out.push_back(t);
                return out;
            }
            char c = text_[pos_];
            if (ident_start(c)) {
                std::size_t b = pos_;
                while (pos_ < text_.size() && ident_char(text_[pos_])) advance();
                t.kind = Tok::ident;
                t.text = text_.substr(b, pos_ - b);
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                std::size_t b = pos_;
                while (pos_ < text_.size() &&
                       std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    advance();
                bool is_float = false;
                if (pos_ + 1 < text_.size() && text_[pos_] == '.' &&
                    std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
                    is_float = true;
                    advance();
                    while (pos_ < text_.size() &&
                           std::isdigit(static_cast<unsigned char>(text_[pos_])))
                        advance();
                }
                t.kind = is_float ? Tok::float_lit : Tok::int_lit;
                t.text = text_.substr(b, pos_ - b);
            } else if (c == '\'') {
                advance();
                std::string value;
                bool closed = false;
                while (pos_ < text_.size()) {
                    char d = text_[pos_];
                    if (d == '\\' && pos_ + 1 < text_.size() &&
                        (text_[pos_ + 1] == '\'' || text_[pos_ + 1] == '\\')) {
                        value.push_back(text_[pos_ + 1]);
                        advance();
                        advance();
                        continue;
                    }
                    if (d == '\'') {
                        closed = true;
                        advance();
                        break;
                    }
                    value.push_back(d);
                    advance();
                }
                if (!closed) {
                    return ParseError{t.line, t.column, "unterminated string literal",
                                      {"closing '"}};
                }
                t.kind = Tok::string_lit;
                t.text = std::move(value);
            } else if (c == '`') {
                advance();
                std::size_t b = pos_;
                while (pos_ < text_.size() && text_[pos_] != '`') advance();
                if (pos_ >= text_.size()) {
                    return ParseError{t.line, t.column,
                                      "unterminated backtick identifier",
                                      {"closing `"}};
                }
                t.kind = Tok::quoted_ident;
                t.text = text_.substr(b, pos_ - b);
                advance();
            } else {
                switch (c) {
                    case '(': t.kind = Tok::lparen; advance(); break;
                    case ')': t.kind = Tok::rparen; advance(); break;
                    case '{': t.kind = Tok::lbrace; advance(); break;
                    case '}': t.kind = Tok::rbrace; advance(); break;
                    case '[': t.kind = Tok::lbracket; advance(); break;
                    case ']': t.kind = Tok::rbracket; advance(); break;
                    case ':': t.kind = Tok::colon; advance(); break;
                    case ',': t.kind = Tok::comma; advance(); break;
                    case ';': t.kind = Tok::semicolon; advance(); break;
                    case '|': t.kind = Tok::pipe; advance(); break;
                    case '*': t.kind = Tok::star; advance(); break;
                    case '-': t.kind = Tok::minus; advance(); break;
                    case '.':
                        advance();
                        if (pos_ < text_.size() && text_[pos_] == '.') {
                            t.kind = Tok::dotdot;
                            advance();
                        } else {
                            t.kind = Tok::dot;
                        }
                        break;
                    case '=':
                        advance();
                        if (pos_ < text_.size() && text_[pos_] == '=') {
                            t.kind = Tok::eqeq;
                            advance();
                        } else {
                            t.kind = Tok::eq;
                        }
                        break;
                    case '<':
                        advance();
                        if (pos_ < text_.size() && text_[pos_] == '=') {
                            t.kind = Tok::le;
                            advance();
                        } else if (pos_ < text_.size() && text_[pos_] == '>') {
                            t.kind = Tok::neq;
                            advance();
                        } else {
                            t.kind = Tok::lt;
                        }
                        break;
                    case '>':
                        advance();
                        if (pos_ < text_.size() && text_[pos_] == '=') {
                            t.kind = Tok::ge;
                            advance();
                        } else {
                            t.kind = Tok::gt;
                        }
                        break;
                    default:
                        return ParseError{
                            t.line, t.column,
                            std::string("unexpected character '") + c + "'",
                            {}};
                }
            }
            out.push_back(std::move(t));
        }
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() &&
               std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            advance();
        }
    }
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

bool keyword_is(const Token& t, const char* kw) {
    if (t.kind != Tok::ident) return false;
    return to_lower(t.text) == to_lower(kw);
}

const std::set<std::string>& keywords() {
    static const std::set<std::string> kws = {
        "match", "where", "with",  "return", "distinct", "order", "by",
        "asc",   "desc",  "limit", "as",     "and",      "or",    "not",
        "count", "shortest"};
    return kws;
}

bool is_keyword(const Token& t) {
    return t.kind == Tok::ident && keywords().count(to_lower(t.text)) > 0;
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    Result<CypherQuery, ParseError> run() {
        CypherQuery q;
        if (!keyword_is(peek(), "MATCH")) {
            return err("query must start with MATCH", {"MATCH"});
        }
        while (keyword_is(peek(), "MATCH")) {
            auto m = parse_match();
            if (!m) return m.error();
            q.matches.push_back(std::move(m.value()));
        }
        if (keyword_is(peek(), "WHERE")) {
            auto w = parse_where();
            if (!w) return w.error();
            q.where = std::move(w.value());
        }
        if (keyword_is(peek(), "WITH")) {
            auto w = parse_with(q);
            if (!w) return w.error();
            if (keyword_is(peek(), "WHERE")) {
                auto w2 = parse_where();
                if (!w2) return w2.error();
                q.where_after_with = std::move(w2.value());
            }
        }
        if (keyword_is(peek(), "WITH")) {
            return err("only one WITH clause is supported", {"RETURN"});
        }
        if (!keyword_is(peek(), "RETURN")) {
            return err("expected RETURN clause",
                       q.with ? std::vector<std::string>{"RETURN"}
                              : std::vector<std::string>{"WHERE", "WITH", "RETURN"});
        }
        auto r = parse_return(q);
        if (!r) return r.error();
        if (peek().kind == Tok::semicolon) next();
        if (peek().kind != Tok::end) {
            return err("unexpected input after RETURN clause", {"end of query"});
        }
        return q;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token& next() {
        const Token& t = peek();
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }

    ParseError err(std::string message, std::vector<std::string> expected) const {
        const Token& t = peek();
        return ParseError{t.line, t.column, std::move(message), std::move(expected)};
    }
    ParseError err_at(const Token& t, std::string message,
                      std::vector<std::string> expected = {}) const {
        return ParseError{t.line, t.column, std::move(message), std::move(expected)};
    }

    // --- name handling -----------------------------------------------------

    // Accepts a plain or backticked identifier that is not a keyword.
    Result<std::string, ParseError> parse_name(const char* what) {
        const Token& t = peek();
        if (t.kind == Tok::quoted_ident) {
            next();
            return t.text;
        }
        if (t.kind == Tok::ident) {
            if (is_keyword(t)) {
                return err_at(t, std::string("keyword '") + t.text +
                                     "' cannot be used as " + what,
                              {what});
            }
            next();
            return t.text;
        }
        return err(std::string("expected ") + what, {what});
    }

    Result<Scalar, ParseError> parse_literal() {
        const Token& t = peek();
        if (t.kind == Tok::string_lit) {
            next();
            return Scalar(t.text);
        }
        bool negative = false;
        if (t.kind == Tok::minus) {
            next();
            negative = true;
        }
        const Token& n = peek();
        if (n.kind == Tok::int_lit) {
            next();
            std::int64_t v = std::strtoll(n.text.c_str(), nullptr, 10);
            return Scalar(negative ? -v : v);
        }
        if (n.kind == Tok::float_lit) {
            next();
            double v = std::strtod(n.text.c_str(), nullptr);
            return Scalar(negative ? -v : v);
        }
        return err("expected literal", {"string", "integer", "float"});
    }

    // --- patterns ----------------------------------------------------------

    Result<NodePattern, ParseError> parse_node() {
        if (peek().kind != Tok::lparen) return err("expected node pattern", {"("});
        next();
        NodePattern node;
        if (peek().kind == Tok::ident && !is_keyword(peek())) {
            node.variable = next().text;
        } else if (peek().kind == Tok::quoted_ident) {
            node.variable = next().text;
        }
        if (peek().kind == Tok::colon) {
            next();
            auto label = parse_name("label");
            if (!label) return label.error();
            node.label = std::move(label.value());
        }
        if (peek().kind == Tok::lbrace) {
            next();
            while (true) {
                auto key = parse_name("property name");
                if (!key) return key.error();
                if (peek().kind != Tok::colon) {
                    return err("expected ':' after property name", {":"});
                }
                next();
                auto value = parse_literal();
                if (!value) return value.error();
                node.props.emplace_back(std::move(key.value()),
                                        std::move(value.value()));
                if (peek().kind == Tok::comma) {
                    next();
                    continue;
                }
                break;
            }
            if (peek().kind != Tok::rbrace) {
                return err("expected '}' after properties", {"}", ","});
            }
            next();
        }
        if (peek().kind != Tok::rparen) {
            return err("expected ')' to close node pattern", {")"});
        }
        next();
        return node;
    }

    // Body between '[' and ']': [var] [:type (|type)*] [*range].
    Result<EdgePattern, ParseError> parse_edge_body() {
        EdgePattern edge;
        if ((peek().kind == Tok::ident && !is_keyword(peek())) ||
            peek().kind == Tok::quoted_ident) {
            edge.variable = next().text;
        }
        if (peek().kind == Tok::colon) {
            next();
            while (true) {
                auto t = parse_name("relation type");
                if (!t) return t.error();
                edge.rel_types.push_back(std::move(t.value()));
                if (peek().kind == Tok::pipe) {
                    next();
                    if (peek().kind == Tok::colon) next();  // tolerate :a|:b
                    continue;
                }
                break;
            }
        }
        if (peek().kind == Tok::star) {
            next();
            edge.hops.variable_length = true;
            edge.hops.min = 1;
            edge.hops.max = kDefaultHopCap;
            if (peek().kind == Tok::int_lit) {
                const Token& lo = next();
                int v = std::atoi(lo.text.c_str());
                if (peek().kind == Tok::dotdot) {
                    next();
                    if (peek().kind != Tok::int_lit) {
                        return err("expected upper bound after '..'", {"integer"});
                    }
                    const Token& hi_tok = next();
                    int hi = std::atoi(hi_tok.text.c_str());
                    if (v < 1) {
                        return err_at(lo, "hop range lower bound must be at least 1");
                    }
                    if (hi < v) {
                        return err_at(hi_tok,
                                      "hop range upper bound is below the lower bound");
                    }
                    edge.hops.min = v;
                    edge.hops.max = hi;
                } else {
                    if (v < 1) {
                        return err_at(lo, "hop count must be at least 1");
                    }
                    edge.hops.min = v;
                    edge.hops.max = v;
                }
            } else if (peek().kind == Tok::dotdot) {
                return err("hop range requires an explicit lower bound",
                           {"integer"});
            }
        }
        return edge;
    }

    // Parses the edge between two nodes, starting just after the left node.
    Result<EdgePattern, ParseError> parse_edge() {
        if (peek().kind == Tok::lt) {
            // <-[ ... ]-
            next();
            if (peek().kind != Tok::minus) {
                return err("expected '-' after '<' in edge pattern", {"-"});
            }
            next();
            if (peek().kind != Tok::lbracket) {
                return err("expected '[' in edge pattern", {"["});
            }
            next();
            auto edge = parse_edge_body();
            if (!edge) return edge.error();
            if (peek().kind != Tok::rbracket) {
                return err("expected ']' in edge pattern", {"]"});
            }
            next();
            if (peek().kind != Tok::minus) {
                return err("expected '-' to close incoming edge", {"-"});
            }
            next();
            if (peek().kind == Tok::gt) {
                return err("edge cannot point both ways", {"("});
            }
            edge.value().direction = Direction::in;
            return edge;
        }
        if (peek().kind == Tok::minus) {
            // -[ ... ]->
            next();
            if (peek().kind != Tok::lbracket) {
                return err("expected '[' in edge pattern", {"["});
            }
            next();
            auto edge = parse_edge_body();
            if (!edge) return edge.error();
            if (peek().kind != Tok::rbracket) {
                return err("expected ']' in edge pattern", {"]"});
            }
            next();
            if (peek().kind != Tok::minus) {
                return err("expected '->' to close outgoing edge", {"->"});
            }
            next();
            if (peek().kind != Tok::gt) {
                return err("undirected edges are not supported; expected '->'",
                           {">"});
            }
            next();
            edge.value().direction = Direction::out;
            return edge;
        }
        return err("expected edge pattern", {"-[", "<-["});
    }

    Result<PathPattern, ParseError> parse_path() {
        PathPattern path;
        auto first = parse_node();
        if (!first) return first.error();
        path.nodes.push_back(std::move(first.value()));
        while (peek().kind == Tok::minus || peek().kind == Tok::lt) {
            auto edge = parse_edge();
            if (!edge) return edge.error();
            auto node = parse_node();
            if (!node) return node.error();
            path.edges.push_back(std::move(edge.value()));
            path.nodes.push_back(std::move(node.value()));
        }
        return path;
    }

    Result<MatchClause, ParseError> parse_match() {
        next();  // MATCH
        MatchClause m;
        // Optional "var =" prefix.
        if ((peek().kind == Tok::ident && !is_keyword(peek()) &&
             peek(1).kind == Tok::eq) ||
            (peek().kind == Tok::quoted_ident && peek(1).kind == Tok::eq)) {
            m.path_variable = next().text;
            next();  // =
        }
        if (keyword_is(peek(), "SHORTEST")) {
            const Token& kw = next();
            if (peek().kind != Tok::int_lit) {
                return err("SHORTEST requires a count", {"integer"});
            }
            int k = std::atoi(next().text.c_str());
            if (k < 1) {
                return err_at(kw, "SHORTEST count must be at least 1");
            }
            m.shortest_k = k;
        }
        while (true) {
            auto path = parse_path();
            if (!path) return path.error();
            m.paths.push_back(std::move(path.value()));
            if (peek().kind == Tok::comma) {
                next();
                continue;
            }
            break;
        }
        if (m.shortest_k) {
            if (m.paths.size() != 1 || m.paths[0].edges.size() != 1) {
                return err(
                    "SHORTEST expects exactly one source-target pattern "
                    "(two nodes, one edge)",
                    {});
            }
        }
        // Bind variables.
        for (const PathPattern& p : m.paths) {
            for (const NodePattern& n : p.nodes) {
                if (n.variable) {
                    if (edge_vars_.count(*n.variable) || path_vars_.count(*n.variable)) {
                        return err("variable '" + *n.variable +
                                       "' is already bound to a different kind",
                                   {});
                    }
                    node_vars_.insert(*n.variable);
                }
            }
            for (const EdgePattern& e : p.edges) {
                if (e.variable) {
                    if (node_vars_.count(*e.variable) || path_vars_.count(*e.variable) ||
                        edge_vars_.count(*e.variable)) {
                        return err("variable '" + *e.variable + "' is already bound",
                                   {});
                    }
                    edge_vars_.insert(*e.variable);
                }
            }
        }
        if (m.path_variable) {
            if (node_vars_.count(*m.path_variable) ||
                edge_vars_.count(*m.path_variable) ||
                path_vars_.count(*m.path_variable)) {
                return err("variable '" + *m.path_variable + "' is already bound",
                           {});
            }
            path_vars_.insert(*m.path_variable);
        }
        return m;
    }

    // --- expressions ---------------------------------------------------------

    std::set<std::string> current_scope() const {
        if (with_done_) return with_scope_;
        std::set<std::string> s = node_vars_;
        s.insert(edge_vars_.begin(), edge_vars_.end());
        s.insert(path_vars_.begin(), path_vars_.end());
        return s;
    }

    Result<Operand, ParseError> parse_operand(bool allow_literal,
                                              const std::set<std::string>* extra =
                                                  nullptr) {
        const Token& t = peek();
        if (t.kind == Tok::string_lit || t.kind == Tok::int_lit ||
            t.kind == Tok::float_lit || t.kind == Tok::minus) {
            if (!allow_literal) {
                return err("literal not allowed here", {"variable"});
            }
            auto lit = parse_literal();
            if (!lit) return lit.error();
            return Operand(std::move(lit.value()));
        }
        if ((t.kind == Tok::ident && !is_keyword(t)) || t.kind == Tok::quoted_ident) {
            std::string var = next().text;
            if (peek().kind == Tok::dot) {
                next();
                auto prop = parse_name("property name");
                if (!prop) return prop.error();
                auto scope = current_scope();
                if (!scope.count(var) && !(extra && extra->count(var))) {
                    return err_at(t, "variable '" + var + "' is not bound");
                }
                return Operand(PropertyRef{std::move(var), std::move(prop.value())});
            }
            auto scope = current_scope();
            if (!scope.count(var) && !(extra && extra->count(var))) {
                return err_at(t, "variable '" + var + "' is not bound");
            }
            return Operand(VarRef{std::move(var)});
        }
        return err("expected operand",
                   allow_literal
                       ? std::vector<std::string>{"variable", "literal"}
                       : std::vector<std::string>{"variable"});
    }

    Result<Expr, ParseError> parse_comparison() {
        auto lhs = parse_operand(true);
        if (!lhs) return lhs.error();
        CmpOp op;
        switch (peek().kind) {
            case Tok::eq:
            case Tok::eqeq: op = CmpOp::eq; break;
            case Tok::neq: op = CmpOp::ne; break;
            case Tok::lt: op = CmpOp::lt; break;
            case Tok::le: op = CmpOp::le; break;
            case Tok::gt: op = CmpOp::gt; break;
            case Tok::ge: op = CmpOp::ge; break;
            default:
                return err("expected comparison operator",
                           {"=", "==", "<>", "<", "<=", ">", ">="});
        }
        next();
        auto rhs = parse_operand(true);
        if (!rhs) return rhs.error();
        Expr e;
        e.kind = Expr::Kind::comparison;
        e.cmp = Comparison{std::move(lhs.value()), op, std::move(rhs.value())};
        return e;
    }

    Result<Expr, ParseError> parse_not_expr() {
        if (keyword_is(peek(), "NOT")) {
            next();
            auto inner = parse_not_expr();
            if (!inner) return inner.error();
            Expr e;
            e.kind = Expr::Kind::not_;
            e.kids.push_back(std::move(inner.value()));
            return e;
        }
        if (peek().kind == Tok::lparen) {
            next();
            auto inner = parse_or_expr();
            if (!inner) return inner.error();
            if (peek().kind != Tok::rparen) {
                return err("expected ')' to close expression", {")"});
            }
            next();
            return inner;
        }
        return parse_comparison();
    }

    Result<Expr, ParseError> parse_and_expr() {
        auto lhs = parse_not_expr();
        if (!lhs) return lhs.error();
        while (keyword_is(peek(), "AND")) {
            next();
            auto rhs = parse_not_expr();
            if (!rhs) return rhs.error();
            Expr e;
            e.kind = Expr::Kind::and_;
            e.kids.push_back(std::move(lhs.value()));
            e.kids.push_back(std::move(rhs.value()));
            lhs = Result<Expr, ParseError>(std::move(e));
        }
        return lhs;
    }

    Result<Expr, ParseError> parse_or_expr() {
        auto lhs = parse_and_expr();
        if (!lhs) return lhs.error();
        while (keyword_is(peek(), "OR")) {
            next();
            auto rhs = parse_and_expr();
            if (!rhs) return rhs.error();
            Expr e;
            e.kind = Expr::Kind::or_;
            e.kids.push_back(std::move(lhs.value()));
            e.kids.push_back(std::move(rhs.value()));
            lhs = Result<Expr, ParseError>(std::move(e));
        }
        return lhs;
    }

    Result<Expr, ParseError> parse_where() {
        next();  // WHERE
        return parse_or_expr();
    }

    // --- projections ---------------------------------------------------------

    Result<Projection, ParseError> parse_projection() {
        Projection p;
        if (keyword_is(peek(), "COUNT")) {
            next();
            if (peek().kind != Tok::lparen) {
                return err("expected '(' after COUNT", {"("});
            }
            next();
            p.agg = Projection::Agg::count;
            if (keyword_is(peek(), "DISTINCT")) {
                next();
                p.agg = Projection::Agg::count_distinct;
            }
            auto inner = parse_operand(false);
            if (!inner) return inner.error();
            p.expr = std::move(inner.value());
            if (peek().kind != Tok::rparen) {
                return err("expected ')' to close COUNT", {")"});
            }
            next();
        } else {
            auto operand = parse_operand(false);
            if (!operand) return operand.error();
            p.expr = std::move(operand.value());
        }
        if (keyword_is(peek(), "AS")) {
            next();
            auto alias = parse_name("alias");
            if (!alias) return alias.error();
            p.alias = std::move(alias.value());
        }
        return p;
    }

    static std::optional<std::string> binding_name(const Projection& p) {
        if (p.alias) return p.alias;
        if (p.agg == Projection::Agg::none &&
            std::holds_alternative<VarRef>(p.expr)) {
            return std::get<VarRef>(p.expr).name;
        }
        return std::nullopt;
    }

    Result<Ok, ParseError> parse_with(CypherQuery& q) {
        const Token& kw = peek();
        next();  // WITH
        WithClause w;
        if (keyword_is(peek(), "DISTINCT")) {
            next();
            w.distinct = true;
        }
        std::set<std::string> new_scope;
        while (true) {
            const Token& start = peek();
            auto p = parse_projection();
            if (!p) return p.error();
            auto name = binding_name(p.value());
            if (!name) {
                return err_at(start,
                              "WITH projections that are not bare variables "
                              "need an AS alias");
            }
            new_scope.insert(*name);
            w.projections.push_back(std::move(p.value()));
            if (peek().kind == Tok::comma) {
                next();
                continue;
            }
            break;
        }
        if (w.projections.empty()) {
            return err_at(kw, "WITH requires at least one projection");
        }
        q.with = std::move(w);
        with_scope_ = std::move(new_scope);
        with_done_ = true;
        // ORDER BY between WITH and RETURN orders the rows feeding RETURN;
        // it is stored on the RETURN clause.
        if (keyword_is(peek(), "ORDER")) {
            auto ob = parse_order_by({});
            if (!ob) return ob.error();
            pending_order_ = std::move(ob.value());
        }
        return Ok{};
    }

    Result<OrderBy, ParseError> parse_order_by(const std::set<std::string>& aliases) {
        next();  // ORDER
        if (!keyword_is(peek(), "BY")) {
            return err("expected BY after ORDER", {"BY"});
        }
        next();
        OrderBy ob;
        auto operand = parse_operand(false, &aliases);
        if (!operand) return operand.error();
        ob.expr = std::move(operand.value());
        if (keyword_is(peek(), "ASC")) {
            next();
        } else if (keyword_is(peek(), "DESC")) {
            next();
            ob.descending = true;
        }
        return ob;
    }

    Result<Ok, ParseError> parse_return(CypherQuery& q) {
        next();  // RETURN
        ReturnClause r;
        if (keyword_is(peek(), "DISTINCT")) {
            next();
            r.distinct = true;
        }
        std::set<std::string> aliases;
        while (true) {
            auto p = parse_projection();
            if (!p) return p.error();
            if (p.value().alias) aliases.insert(*p.value().alias);
            r.projections.push_back(std::move(p.value()));
            if (peek().kind == Tok::comma) {
                next();
                continue;
            }
            break;
        }
        if (keyword_is(peek(), "ORDER")) {
            if (pending_order_) {
                return err("duplicate ORDER BY", {});
            }
            auto ob = parse_order_by(aliases);
            if (!ob) return ob.error();
            r.order_by = std::move(ob.value());
        } else if (pending_order_) {
            r.order_by = std::move(pending_order_);
        }
        if (keyword_is(peek(), "LIMIT")) {
            next();
            if (peek().kind != Tok::int_lit) {
                return err("LIMIT requires a non-negative integer", {"integer"});
            }
            r.limit = std::strtoll(next().text.c_str(), nullptr, 10);
        }
        q.ret = std::move(r);
        return Ok{};
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;

    std::set<std::string> node_vars_;
    std::set<std::string> edge_vars_;
    std::set<std::string> path_vars_;
    std::set<std::string> with_scope_;
    bool with_done_ = false;
    std::optional<OrderBy> pending_order_;

    static constexpr int kDefaultHopCap = 5;
};

}  // namespace

Result<CypherQuery, ParseError> parse(const std::string& text) {
    auto tokens = Lexer(text).run();
    if (!tokens) return tokens.error();
    return Parser(std::move(tokens.value())).run();
}

}  // namespace polyg::cypher
