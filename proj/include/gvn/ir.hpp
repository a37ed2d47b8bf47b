#pragma once

// Three-address-code flow graphs: domain types, the line-oriented textual
// format with parser and renderer, normalization into one-statement nodes,
// structural validation and deterministic traversal order.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "gvn/errors.hpp"

namespace gvn {

enum class Op : char { Add = '+', Sub = '-', Mul = '*', Div = '/' };

inline char to_char(Op op) { return static_cast<char>(op); }

inline std::optional<Op> op_from_char(char c) {
    switch (c) {
        case '+': return Op::Add;
        case '-': return Op::Sub;
        case '*': return Op::Mul;
        case '/': return Op::Div;
        default: return std::nullopt;
    }
}

struct Variable {
    std::string name;
    auto operator<=>(const Variable&) const = default;
};

struct Constant {
    std::int64_t value = 0;
    auto operator<=>(const Constant&) const = default;
};

/// A leaf of three-address code: a variable or a 64-bit integer constant.
using Operand = std::variant<Variable, Constant>;

inline bool is_variable(const Operand& o) { return std::holds_alternative<Variable>(o); }
inline bool is_constant(const Operand& o) { return std::holds_alternative<Constant>(o); }

inline const std::string* variable_name(const Operand& o) {
    const auto* v = std::get_if<Variable>(&o);
    return v ? &v->name : nullptr;
}

/// Right-hand side of an assignment: either a bare operand or `left op right`.
/// Operands are atoms; there is no nesting.
class Expression {
public:
    static Expression operand(Operand o) {
        Expression e;
        e.left_ = std::move(o);
        return e;
    }

    static Expression binary(Operand left, Op op, Operand right) {
        Expression e;
        e.left_ = std::move(left);
        e.rest_.emplace(op, std::move(right));
        return e;
    }

    bool is_binary() const { return rest_.has_value(); }
    const Operand& left() const { return left_; }

    Op op() const {
        if (!rest_) throw InternalError("Expression::op on operand form");
        return rest_->first;
    }

    const Operand& right() const {
        if (!rest_) throw InternalError("Expression::right on operand form");
        return rest_->second;
    }

    /// Variable operands, left to right.
    std::vector<std::string> variables() const {
        std::vector<std::string> out;
        if (const auto* v = variable_name(left_)) out.push_back(*v);
        if (rest_) {
            if (const auto* v = variable_name(rest_->second)) out.push_back(*v);
        }
        return out;
    }

    bool mentions(std::string_view var) const {
        for (const auto& v : variables())
            if (v == var) return true;
        return false;
    }

    auto operator<=>(const Expression&) const = default;

private:
    Operand left_;
    std::optional<std::pair<Op, Operand>> rest_;
};

struct Statement {
    std::string target;
    Expression rhs;
    int line = 0;  // 1-based source line, 0 when synthesized

    friend bool operator==(const Statement& a, const Statement& b) {
        return a.target == b.target && a.rhs == b.rhs;
    }
};

/// Where a normalized node came from in the source graph.
struct NodeOrigin {
    std::string node_id;
    int stmt_index = -1;  // index within the source node, -1 for empty nodes

    friend bool operator==(const NodeOrigin&, const NodeOrigin&) = default;
};

struct Node {
    std::string id;
    std::vector<Statement> stmts;  // at most one after normalization
    std::optional<NodeOrigin> origin;
    int line = 0;

    bool empty() const { return stmts.empty(); }

    const Statement* single_statement() const {
        return stmts.size() == 1 ? &stmts.front() : nullptr;
    }

    friend bool operator==(const Node& a, const Node& b) {
        return a.id == b.id && a.stmts == b.stmts;
    }
};

struct Edge {
    std::string from;
    std::string to;
    int line = 0;

    friend bool operator==(const Edge& a, const Edge& b) {
        return a.from == b.from && a.to == b.to;
    }
};

struct FlowGraph {
    std::string name;
    std::vector<Node> nodes;  // declaration order
    std::vector<Edge> edges;  // declaration order
    std::string entry;
    std::string exit;

    const Node* find_node(std::string_view id) const {
        for (const auto& n : nodes)
            if (n.id == id) return &n;
        return nullptr;
    }

    Node* find_node(std::string_view id) {
        for (auto& n : nodes)
            if (n.id == id) return &n;
        return nullptr;
    }

    const Node& node(std::string_view id) const {
        const Node* n = find_node(id);
        if (!n) throw InternalError("unknown node id: " + std::string(id));
        return *n;
    }

    std::vector<std::string> successors(std::string_view id) const {
        std::vector<std::string> out;
        for (const auto& e : edges)
            if (e.from == id) out.push_back(e.to);
        return out;
    }

    std::vector<std::string> predecessors(std::string_view id) const {
        std::vector<std::string> out;
        for (const auto& e : edges)
            if (e.to == id) out.push_back(e.from);
        return out;
    }

    friend bool operator==(const FlowGraph& a, const FlowGraph& b) {
        return a.name == b.name && a.nodes == b.nodes && a.edges == b.edges &&
               a.entry == b.entry && a.exit == b.exit;
    }
};

// ---------------------------------------------------------------------------
// Identifier rules

/// Temporaries minted by normalize(). The prefix is reserved: the parser
/// accepts these names (so rendered normalized graphs reparse) but rejects
/// every other leading-underscore identifier.
inline bool is_temp_name(std::string_view s) {
    if (s.size() < 4 || s.substr(0, 3) != "__t") return false;
    for (char c : s.substr(3))
        if (c < '0' || c > '9') return false;
    return true;
}

inline bool valid_variable_name(std::string_view s) {
    if (is_temp_name(s)) return true;
    if (s.empty() || s[0] < 'a' || s[0] > 'z') return false;
    for (char c : s)
        if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_')) return false;
    return true;
}

inline bool valid_node_id(std::string_view s) {
    if (s.empty()) return false;
    auto head = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
    if (!head(s[0])) return false;
    for (char c : s.substr(1))
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

class LineScanner {
public:
    LineScanner(std::string_view text, int line) : text_(text), line_(line) {}

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r'))
            ++pos_;
    }

    bool at_end() {
        skip_ws();
        return pos_ >= text_.size();
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    char peek2() const { return pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0'; }

    int column() const { return static_cast<int>(pos_) + 1; }
    int line() const { return line_; }

    [[noreturn]] void fail(const std::string& msg) {
        skip_ws();
        throw ParseError(msg, line_, column());
    }

    bool consume(char c) {
        if (peek() != c) return false;
        ++pos_;
        return true;
    }

    void expect(char c, const std::string& what) {
        if (!consume(c)) fail("expected '" + std::string(1, c) + "' " + what);
    }

    std::string identifier(const std::string& what) {
        skip_ws();
        std::size_t start = pos_;
        auto idch = [](char c) {
            return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
        };
        while (pos_ < text_.size() && idch(text_[pos_])) ++pos_;
        if (pos_ == start) fail("expected " + what);
        return std::string(text_.substr(start, pos_ - start));
    }

    std::int64_t integer() {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ < text_.size() && text_[pos_] == '-') ++pos_;
        while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
        std::int64_t value = 0;
        auto first = text_.data() + start;
        auto last = text_.data() + pos_;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec == std::errc::result_out_of_range) {
            pos_ = start;
            fail("integer literal out of 64-bit range");
        }
        if (ec != std::errc() || ptr != last || first == last) {
            pos_ = start;
            fail("expected integer literal");
        }
        return value;
    }

private:
    std::string_view text_;
    int line_;
    std::size_t pos_ = 0;
};

inline Operand parse_atom(LineScanner& sc) {
    char c = sc.peek();
    if ((c >= '0' && c <= '9') || (c == '-' && sc.peek2() >= '0' && sc.peek2() <= '9'))
        return Constant{sc.integer()};
    int col = sc.column();
    std::string name = sc.identifier("variable or integer");
    if (!valid_variable_name(name))
        throw ParseError("invalid variable name '" + name + "' (want [a-z][a-z0-9_]*)", sc.line(), col);
    return Variable{std::move(name)};
}

inline Statement parse_statement(LineScanner& sc) {
    Statement st;
    st.line = sc.line();
    int col = sc.column();
    st.target = sc.identifier("variable");
    if (!valid_variable_name(st.target))
        throw ParseError("invalid variable name '" + st.target + "' (want [a-z][a-z0-9_]*)", sc.line(), col);
    sc.expect('=', "in statement");
    Operand left = parse_atom(sc);
    char c = sc.peek();
    if (auto op = op_from_char(c); op && !(c == '-' && sc.peek2() == '>')) {
        sc.consume(c);
        Operand right = parse_atom(sc);
        st.rhs = Expression::binary(std::move(left), *op, std::move(right));
    } else {
        st.rhs = Expression::operand(std::move(left));
    }
    return st;
}

}  // namespace detail

/// Parses flow-graph source. Statements are kept as written; call normalize()
/// before running any analysis.
inline FlowGraph parse_program(std::string_view text) {
    FlowGraph g;
    bool saw_graph = false;
    std::optional<int> entry_line, exit_line;
    std::map<std::string, int> node_lines;

    int lineno = 0;
    std::size_t cursor = 0;
    while (cursor < text.size()) {
        std::size_t nl = text.find('\n', cursor);
        std::string_view raw = text.substr(cursor, nl == std::string_view::npos ? std::string_view::npos : nl - cursor);
        cursor = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
        ++lineno;

        if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        detail::LineScanner sc(raw, lineno);
        if (sc.at_end()) continue;

        std::string word = sc.identifier("directive");
        if (word == "graph") {
            if (saw_graph) sc.fail("duplicate graph declaration");
            g.name = sc.identifier("graph name");
            saw_graph = true;
        } else if (!saw_graph) {
            throw ParseError("expected 'graph <name>' before '" + word + "'", lineno, 1);
        } else if (word == "node") {
            int col = sc.column();
            Node n;
            n.id = sc.identifier("node id");
            n.line = lineno;
            if (!valid_node_id(n.id))
                throw ParseError("invalid node id '" + n.id + "'", lineno, col);
            if (node_lines.count(n.id))
                throw ParseError("duplicate node id '" + n.id + "'", lineno, col);
            if (sc.consume('{')) {
                while (true) {
                    if (sc.consume('}')) break;
                    n.stmts.push_back(detail::parse_statement(sc));
                    if (sc.consume(';')) continue;
                    sc.expect('}', "after statement");
                    break;
                }
            }
            node_lines[n.id] = lineno;
            g.nodes.push_back(std::move(n));
        } else if (word == "edge") {
            Edge e;
            e.line = lineno;
            e.from = sc.identifier("node id");
            sc.expect('-', "in '->'");
            sc.expect('>', "in '->'");
            e.to = sc.identifier("node id");
            g.edges.push_back(std::move(e));
        } else if (word == "entry") {
            if (entry_line) sc.fail("duplicate entry declaration");
            g.entry = sc.identifier("node id");
            entry_line = lineno;
        } else if (word == "exit") {
            if (exit_line) sc.fail("duplicate exit declaration");
            g.exit = sc.identifier("node id");
            exit_line = lineno;
        } else {
            throw ParseError("unknown directive '" + word + "'", lineno, 1);
        }
        if (!sc.at_end()) sc.fail("trailing input");
    }

    if (!saw_graph) throw ParseError("missing graph declaration", std::max(lineno, 1), 1);
    for (const auto& e : g.edges) {
        if (!node_lines.count(e.from)) throw ParseError("unknown node id '" + e.from + "'", e.line, 1);
        if (!node_lines.count(e.to)) throw ParseError("unknown node id '" + e.to + "'", e.line, 1);
    }
    if (!entry_line) throw ParseError("missing entry declaration", lineno, 1);
    if (!exit_line) throw ParseError("missing exit declaration", lineno, 1);
    if (!node_lines.count(g.entry))
        throw ParseError("unknown node id '" + g.entry + "'", *entry_line, 1);
    if (!node_lines.count(g.exit))
        throw ParseError("unknown node id '" + g.exit + "'", *exit_line, 1);
    if (!g.node(g.entry).empty())
        throw ParseError("entry node '" + g.entry + "' must be empty", *entry_line, 1);
    return g;
}

// ---------------------------------------------------------------------------
// Rendering

inline std::string render_operand(const Operand& o) {
    if (const auto* v = std::get_if<Variable>(&o)) return v->name;
    return std::to_string(std::get<Constant>(o).value);
}

inline std::string render_expression(const Expression& e) {
    std::string out = render_operand(e.left());
    if (e.is_binary()) {
        out += ' ';
        out += to_char(e.op());
        out += ' ';
        out += render_operand(e.right());
    }
    return out;
}

inline std::string render_statement(const Statement& st) {
    return st.target + " = " + render_expression(st.rhs);
}

/// Renders a graph in the input format. parse_program(render_program(g)) == g.
inline std::string render_program(const FlowGraph& g) {
    std::string out = "graph " + g.name + "\n";
    for (const auto& n : g.nodes) {
        out += "node " + n.id;
        if (!n.stmts.empty()) {
            out += " { ";
            for (std::size_t i = 0; i < n.stmts.size(); ++i) {
                if (i) out += " ; ";
                out += render_statement(n.stmts[i]);
            }
            out += " }";
        }
        out += '\n';
    }
    for (const auto& e : g.edges) out += "edge " + e.from + " -> " + e.to + "\n";
    out += "entry " + g.entry + "\n";
    out += "exit " + g.exit + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Normalization

/// Rewrites the graph so every node holds at most one statement and no
/// statement's target occurs in its right-hand side. Multi-statement nodes
/// become chains; `x = e` with x in e becomes `t = e; x = t` with a fresh
/// temporary. Idempotent; origins record where split nodes came from.
inline FlowGraph normalize(const FlowGraph& g) {
    std::set<std::string> taken;
    std::int64_t next_temp = 0;
    for (const auto& n : g.nodes) {
        taken.insert(n.id);
        for (const auto& st : n.stmts) {
            auto consider = [&](std::string_view name) {
                if (!is_temp_name(name)) return;
                std::int64_t idx = 0;
                auto digits = name.substr(3);
                std::from_chars(digits.data(), digits.data() + digits.size(), idx);
                next_temp = std::max(next_temp, idx + 1);
            };
            consider(st.target);
            for (const auto& v : st.rhs.variables()) consider(v);
        }
    }

    FlowGraph out;
    out.name = g.name;
    std::map<std::string, std::pair<std::string, std::string>> span;  // id -> (head, tail)

    for (const auto& n : g.nodes) {
        // Expand each statement; a self-referential target becomes two steps.
        std::vector<std::pair<Statement, int>> chain;  // statement, source index
        for (std::size_t i = 0; i < n.stmts.size(); ++i) {
            const Statement& st = n.stmts[i];
            if (st.rhs.mentions(st.target)) {
                std::string tmp = "__t" + std::to_string(next_temp++);
                chain.push_back({Statement{tmp, st.rhs, st.line}, static_cast<int>(i)});
                chain.push_back(
                    {Statement{st.target, Expression::operand(Variable{tmp}), st.line}, static_cast<int>(i)});
            } else {
                chain.push_back({st, static_cast<int>(i)});
            }
        }

        if (chain.size() <= 1) {
            Node copy = n;
            if (!copy.origin)
                copy.origin = NodeOrigin{n.id, chain.empty() ? -1 : chain.front().second};
            out.nodes.push_back(std::move(copy));
            span[n.id] = {n.id, n.id};
            continue;
        }

        std::string prev;
        for (std::size_t k = 0; k < chain.size(); ++k) {
            Node piece;
            if (k == 0) {
                piece.id = n.id;
            } else {
                piece.id = n.id + "__" + std::to_string(k + 1);
                while (taken.count(piece.id)) piece.id += "_";
                taken.insert(piece.id);
            }
            piece.line = n.line;
            piece.stmts.push_back(chain[k].first);
            piece.origin = NodeOrigin{n.id, chain[k].second};
            if (k > 0) out.edges.push_back(Edge{prev, piece.id});
            prev = piece.id;
            out.nodes.push_back(std::move(piece));
        }
        span[n.id] = {n.id, prev};
    }

    std::vector<Edge> remapped;
    for (const auto& e : g.edges)
        remapped.push_back(Edge{span.at(e.from).second, span.at(e.to).first, e.line});
    // Chain-internal edges follow the remapped originals.
    remapped.insert(remapped.end(), out.edges.begin(), out.edges.end());
    out.edges = std::move(remapped);

    out.entry = span.at(g.entry).first;
    out.exit = span.at(g.exit).second;
    return out;
}

// ---------------------------------------------------------------------------
// Validation and traversal

struct Diagnostic {
    enum class Code { UnreachableFromEntry, CannotReachExit, EntryHasIncomingEdges };
    Code code;
    std::string node_id;
    std::string message;
};

namespace detail {

inline std::set<std::string> reach(const FlowGraph& g, const std::string& from, bool forward) {
    std::set<std::string> seen;
    std::vector<std::string> stack{from};
    while (!stack.empty()) {
        std::string id = stack.back();
        stack.pop_back();
        if (!seen.insert(id).second) continue;
        for (const auto& next : forward ? g.successors(id) : g.predecessors(id))
            stack.push_back(next);
    }
    return seen;
}

}  // namespace detail

/// Structural diagnostics; empty for a well-formed graph.
inline std::vector<Diagnostic> validate(const FlowGraph& g) {
    std::vector<Diagnostic> out;
    if (!g.predecessors(g.entry).empty())
        out.push_back({Diagnostic::Code::EntryHasIncomingEdges, g.entry,
                       "entry node '" + g.entry + "' has incoming edges"});
    auto from_entry = detail::reach(g, g.entry, true);
    auto to_exit = detail::reach(g, g.exit, false);
    for (const auto& n : g.nodes) {
        if (!from_entry.count(n.id))
            out.push_back({Diagnostic::Code::UnreachableFromEntry, n.id,
                           "node '" + n.id + "' is unreachable from entry"});
        if (!to_exit.count(n.id))
            out.push_back({Diagnostic::Code::CannotReachExit, n.id,
                           "node '" + n.id + "' cannot reach exit"});
    }
    return out;
}

/// Reverse postorder over the nodes reachable from entry. Successors are
/// visited in edge declaration order, so the result is deterministic.
inline std::vector<std::string> reverse_postorder(const FlowGraph& g) {
    std::vector<std::string> post;
    std::set<std::string> seen;
    // Iterative DFS; frame holds the node and the next successor index.
    std::vector<std::pair<std::string, std::size_t>> stack;
    stack.push_back({g.entry, 0});
    seen.insert(g.entry);
    while (!stack.empty()) {
        auto& [id, next] = stack.back();
        auto succs = g.successors(id);
        if (next < succs.size()) {
            std::string s = succs[next++];
            if (seen.insert(s).second) stack.push_back({s, 0});
        } else {
            post.push_back(id);
            stack.pop_back();
        }
    }
    std::reverse(post.begin(), post.end());
    return post;
}

// ---------------------------------------------------------------------------
// Collection helpers shared by the analysis and the oracle.

inline std::vector<std::string> collect_variables(const FlowGraph& g) {
    std::set<std::string> vars;
    for (const auto& n : g.nodes)
        for (const auto& st : n.stmts) {
            vars.insert(st.target);
            for (const auto& v : st.rhs.variables()) vars.insert(v);
        }
    return {vars.begin(), vars.end()};
}

inline std::vector<std::int64_t> collect_constants(const FlowGraph& g) {
    std::set<std::int64_t> out;
    auto add = [&](const Operand& o) {
        if (const auto* c = std::get_if<Constant>(&o)) out.insert(c->value);
    };
    for (const auto& n : g.nodes)
        for (const auto& st : n.stmts) {
            add(st.rhs.left());
            if (st.rhs.is_binary()) add(st.rhs.right());
        }
    return {out.begin(), out.end()};
}

/// Distinct binary expressions occurring in the program, sorted.
inline std::vector<Expression> collect_binary_expressions(const FlowGraph& g) {
    std::set<Expression> out;
    for (const auto& n : g.nodes)
        for (const auto& st : n.stmts)
            if (st.rhs.is_binary()) out.insert(st.rhs);
    return {out.begin(), out.end()};
}

/// True when a DFS from entry finds an edge back into the active stack.
inline std::vector<std::size_t> back_edge_indices(const FlowGraph& g) {
    std::vector<std::size_t> back;
    std::set<std::string> seen, active;
    // Recursive DFS over declaration-ordered successor edges.
    struct Walk {
        const FlowGraph& g;
        std::set<std::string>& seen;
        std::set<std::string>& active;
        std::vector<std::size_t>& back;
        void visit(const std::string& id) {
            seen.insert(id);
            active.insert(id);
            for (std::size_t i = 0; i < g.edges.size(); ++i) {
                if (g.edges[i].from != id) continue;
                const std::string& to = g.edges[i].to;
                if (active.count(to))
                    back.push_back(i);
                else if (!seen.count(to))
                    visit(to);
            }
            active.erase(id);
        }
    };
    Walk{g, seen, active, back}.visit(g.entry);
    std::sort(back.begin(), back.end());
    return back;
}

inline bool has_back_edge(const FlowGraph& g) { return !back_edge_indices(g).empty(); }

}  // namespace gvn
