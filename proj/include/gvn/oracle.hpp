#pragma once

// Brute-force Herbrand-equivalence oracle. Paths are enumerated explicitly,
// statements are evaluated symbolically over uninterpreted operators, and
// equivalence is structural term equality along every path. None of the pool
// or meet machinery is used here: this is the independent ground truth the
// analysis is validated against, so it must stay that way.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "gvn/analysis.hpp"
#include "gvn/errors.hpp"
#include "gvn/ir.hpp"
#include "gvn/pool.hpp"

namespace gvn {

struct OracleBudget {
    std::int64_t max_paths = 10000;     // complete entry paths per enumeration
    std::size_t max_expansions = 4096;  // concrete expressions per class
};

/// Hash-consed symbolic terms. Within one table, structural equality is id
/// equality, and shared subterms keep repeated-doubling programs linear.
class TermTable {
public:
    using TermId = std::uint32_t;
    enum class Kind { Initial, Literal, Apply };

    TermId initial(const std::string& var) {
        if (auto it = initials_.find(var); it != initials_.end()) return it->second;
        TermId id = add({Kind::Initial, var, 0, Op::Add, 0, 0});
        initials_[var] = id;
        return id;
    }

    TermId literal(std::int64_t value) {
        if (auto it = literals_.find(value); it != literals_.end()) return it->second;
        TermId id = add({Kind::Literal, {}, value, Op::Add, 0, 0});
        literals_[value] = id;
        return id;
    }

    TermId apply(Op op, TermId left, TermId right) {
        auto key = std::make_tuple(to_char(op), left, right);
        if (auto it = applies_.find(key); it != applies_.end()) return it->second;
        TermId id = add({Kind::Apply, {}, 0, op, left, right});
        applies_[key] = id;
        return id;
    }

    Kind kind(TermId id) const { return terms_.at(id).kind; }
    const std::string& var(TermId id) const { return terms_.at(id).var; }
    std::int64_t value(TermId id) const { return terms_.at(id).value; }
    Op op(TermId id) const { return terms_.at(id).op; }
    TermId left(TermId id) const { return terms_.at(id).left; }
    TermId right(TermId id) const { return terms_.at(id).right; }

    /// Display form, truncated past max_depth. For reports only; use equal()
    /// to compare terms.
    std::string render(TermId id, int max_depth = 12) const {
        const TermData& t = terms_.at(id);
        switch (t.kind) {
            case Kind::Initial: return t.var;
            case Kind::Literal: return std::to_string(t.value);
            case Kind::Apply:
                if (max_depth <= 0) return "...";
                return "(" + render(t.left, max_depth - 1) + " " + to_char(t.op) + " " +
                       render(t.right, max_depth - 1) + ")";
        }
        return "?";
    }

    /// Structural equality across tables, memoized so shared subterms are
    /// compared once.
    static bool equal(const TermTable& ta, TermId a, const TermTable& tb, TermId b) {
        if (&ta == &tb) return a == b;
        std::map<std::pair<TermId, TermId>, bool> memo;
        return equal_rec(ta, a, tb, b, memo);
    }

private:
    struct TermData {
        Kind kind;
        std::string var;
        std::int64_t value;
        Op op;
        TermId left;
        TermId right;
    };

    static bool equal_rec(const TermTable& ta, TermId a, const TermTable& tb, TermId b,
                          std::map<std::pair<TermId, TermId>, bool>& memo) {
        auto key = std::make_pair(a, b);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        const TermData& x = ta.terms_.at(a);
        const TermData& y = tb.terms_.at(b);
        bool result = false;
        if (x.kind == y.kind) {
            switch (x.kind) {
                case Kind::Initial: result = x.var == y.var; break;
                case Kind::Literal: result = x.value == y.value; break;
                case Kind::Apply:
                    result = x.op == y.op && equal_rec(ta, x.left, tb, y.left, memo) &&
                             equal_rec(ta, x.right, tb, y.right, memo);
                    break;
            }
        }
        memo[key] = result;
        return result;
    }

    TermId add(TermData t) {
        terms_.push_back(std::move(t));
        return static_cast<TermId>(terms_.size() - 1);
    }

    std::vector<TermData> terms_;
    std::map<std::string, TermId> initials_;
    std::map<std::int64_t, TermId> literals_;
    std::map<std::tuple<char, TermId, TermId>, TermId> applies_;
};

/// The input or output side of one node.
struct ProgramPoint {
    std::string node;
    bool at_output = false;

    static ProgramPoint input(std::string id) { return {std::move(id), false}; }
    static ProgramPoint output(std::string id) { return {std::move(id), true}; }

    std::string label() const { return (at_output ? "OUT(" : "IN(") + node + ")"; }
    auto operator<=>(const ProgramPoint&) const = default;
};

/// Variable environment after evaluating one path prefix. Variables never
/// assigned along the path are implicitly initial(v).
struct PathState {
    std::map<std::string, TermTable::TermId> env;
};

/// Enumerates every entry path (traversing each back edge at most `unroll`
/// times) and records the symbolic state at the input and output of every
/// node visit. Fails loudly when the complete-path budget is exceeded.
class PathOracle {
public:
    PathOracle(const FlowGraph& g, int unroll, OracleBudget budget = {})
        : graph_(g), unroll_(unroll), budget_(budget) {
        for (std::size_t i : back_edge_indices(g)) back_edges_.insert(i);
        std::map<std::size_t, int> taken;
        walk(g.entry, {}, taken);
    }

    const std::vector<PathState>& states_at(const ProgramPoint& p) const {
        static const std::vector<PathState> none;
        auto it = states_.find(p);
        return it == states_.end() ? none : it->second;
    }

    TermTable& terms() { return terms_; }
    const TermTable& terms() const { return terms_; }
    std::int64_t complete_paths() const { return complete_paths_; }

    TermTable::TermId operand_term(const PathState& s, const Operand& o) {
        if (const auto* v = std::get_if<Variable>(&o)) {
            auto it = s.env.find(v->name);
            return it != s.env.end() ? it->second : terms_.initial(v->name);
        }
        return terms_.literal(std::get<Constant>(o).value);
    }

    TermTable::TermId expression_term(const PathState& s, const Expression& e) {
        TermTable::TermId l = operand_term(s, e.left());
        if (!e.is_binary()) return l;
        return terms_.apply(e.op(), l, operand_term(s, e.right()));
    }

private:
    void walk(const std::string& id, PathState state, std::map<std::size_t, int>& taken) {
        states_[ProgramPoint::input(id)].push_back(state);
        for (const Statement& st : graph_.node(id).stmts)
            state.env[st.target] = expression_term(state, st.rhs);
        states_[ProgramPoint::output(id)].push_back(state);

        bool extended = false;
        for (std::size_t i = 0; i < graph_.edges.size(); ++i) {
            if (graph_.edges[i].from != id) continue;
            if (back_edges_.count(i)) {
                if (taken[i] >= unroll_) continue;
                ++taken[i];
                walk(graph_.edges[i].to, state, taken);
                --taken[i];
            } else {
                walk(graph_.edges[i].to, state, taken);
            }
            extended = true;
        }
        if (!extended && ++complete_paths_ > budget_.max_paths)
            throw BudgetError("path enumeration exceeded " + std::to_string(budget_.max_paths) +
                              " paths");
    }

    const FlowGraph& graph_;
    int unroll_;
    OracleBudget budget_;
    std::set<std::size_t> back_edges_;
    TermTable terms_;
    std::map<ProgramPoint, std::vector<PathState>> states_;
    std::int64_t complete_paths_ = 0;
};

/// Spec-shaped wrapper: the states observed at one point, together with the
/// table their term ids live in.
struct PathEnumeration {
    TermTable terms;
    std::vector<PathState> states;
};

inline PathEnumeration enumerate_paths(const FlowGraph& g, const ProgramPoint& p, int unroll,
                                       OracleBudget budget = {}) {
    PathOracle oracle(g, unroll, budget);
    PathEnumeration out;
    out.states = oracle.states_at(p);
    out.terms = std::move(oracle.terms());
    return out;
}

// ---------------------------------------------------------------------------
// Herbrand partitions over the program's own expressions

/// The comparison universe: program variables, constants appearing in the
/// program, and binary expressions textually occurring in it.
using ProgramItem = std::variant<Variable, Constant, Expression>;

inline std::string render_item(const ProgramItem& item) {
    struct {
        std::string operator()(const Variable& v) const { return v.name; }
        std::string operator()(const Constant& c) const { return std::to_string(c.value); }
        std::string operator()(const Expression& e) const { return render_expression(e); }
    } r;
    return std::visit(r, item);
}

inline std::vector<ProgramItem> program_items(const FlowGraph& g, bool include_constants) {
    std::vector<ProgramItem> items;
    for (const auto& v : collect_variables(g)) items.push_back(Variable{v});
    if (include_constants)
        for (auto c : collect_constants(g)) items.push_back(Constant{c});
    for (const auto& e : collect_binary_expressions(g)) items.push_back(e);
    return items;
}

inline TermTable::TermId item_term(PathOracle& oracle, const PathState& s, const ProgramItem& item) {
    if (const auto* v = std::get_if<Variable>(&item))
        return oracle.operand_term(s, Operand{*v});
    if (const auto* c = std::get_if<Constant>(&item))
        return oracle.operand_term(s, Operand{*c});
    return oracle.expression_term(s, std::get<Expression>(item));
}

struct HerbrandPartition {
    ProgramPoint point;
    /// Items grouped by "same term along every path to the point"; group
    /// order follows the first member's position in the item universe.
    std::vector<std::vector<ProgramItem>> classes;
};

inline HerbrandPartition herbrand_partition(const FlowGraph& g, const ProgramPoint& p, int unroll,
                                            OracleBudget budget = {}) {
    PathOracle oracle(g, unroll, budget);
    HerbrandPartition out{p, {}};
    const auto& states = oracle.states_at(p);
    if (states.empty()) return out;  // unreachable point: nothing to group

    std::map<std::vector<TermTable::TermId>, std::size_t> groups;
    for (const auto& item : program_items(g, true)) {
        std::vector<TermTable::TermId> signature;
        for (const auto& s : states) signature.push_back(item_term(oracle, s, item));
        auto [it, fresh] = groups.emplace(std::move(signature), out.classes.size());
        if (fresh) out.classes.emplace_back();
        out.classes[it->second].push_back(item);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Expanding value-numbered classes into concrete expressions

/// A nested expression over variables and constants, as produced by expanding
/// value expressions. Depth 0 is an atom; a binary node is one deeper than
/// its deepest child.
struct OracleExpr {
    enum class Kind { Var, Const, Binary };
    Kind kind = Kind::Var;
    std::string var;
    std::int64_t value = 0;
    Op op = Op::Add;
    std::shared_ptr<OracleExpr> left, right;
    int depth = 0;

    static OracleExpr variable(std::string name) {
        OracleExpr e;
        e.kind = Kind::Var;
        e.var = std::move(name);
        return e;
    }

    static OracleExpr constant(std::int64_t v) {
        OracleExpr e;
        e.kind = Kind::Const;
        e.value = v;
        return e;
    }

    static OracleExpr binary(Op op, OracleExpr l, OracleExpr r) {
        OracleExpr e;
        e.kind = Kind::Binary;
        e.op = op;
        e.depth = 1 + std::max(l.depth, r.depth);
        e.left = std::make_shared<OracleExpr>(std::move(l));
        e.right = std::make_shared<OracleExpr>(std::move(r));
        return e;
    }

    std::string render() const {
        switch (kind) {
            case Kind::Var: return var;
            case Kind::Const: return std::to_string(value);
            case Kind::Binary:
                return "(" + left->render() + " " + to_char(op) + " " + right->render() + ")";
        }
        return "?";
    }

    TermTable::TermId eval(TermTable& terms, const PathState& s) const {
        switch (kind) {
            case Kind::Var: {
                auto it = s.env.find(var);
                return it != s.env.end() ? it->second : terms.initial(var);
            }
            case Kind::Const: return terms.literal(value);
            case Kind::Binary: return terms.apply(op, left->eval(terms, s), right->eval(terms, s));
        }
        throw InternalError("bad OracleExpr");
    }
};

/// Concrete expressions represented by a class: its variables and constants,
/// plus expansions of its value expression down to the depth bound. Sorted
/// and duplicate-free by display form.
inline std::vector<OracleExpr> represented_expressions(const ExpressionPool& pool, ValueNumber vn,
                                                       int max_depth,
                                                       OracleBudget budget = {}) {
    std::map<std::pair<std::uint64_t, int>, std::vector<OracleExpr>> memo;

    struct Expand {
        const ExpressionPool& pool;
        const OracleBudget& budget;
        std::map<std::pair<std::uint64_t, int>, std::vector<OracleExpr>>& memo;

        std::vector<OracleExpr> run(ValueNumber vn, int depth) {
            auto key = std::make_pair(vn.id, depth);
            if (auto it = memo.find(key); it != memo.end()) return it->second;
            const EqClass* c = pool.class_of(vn);
            if (!c) throw InternalError("represented_expressions: missing class");
            std::vector<OracleExpr> out;
            for (const auto& m : c->members) {
                if (const auto* v = std::get_if<Variable>(&m))
                    out.push_back(OracleExpr::variable(v->name));
                else if (const auto* k = std::get_if<Constant>(&m))
                    out.push_back(OracleExpr::constant(k->value));
            }
            if (const ValueExpression* e = c->value_expression(); e && depth >= 1) {
                for (const auto& l : run(e->left, depth - 1))
                    for (const auto& r : run(e->right, depth - 1)) {
                        out.push_back(OracleExpr::binary(e->op, l, r));
                        if (out.size() > budget.max_expansions)
                            throw BudgetError("class expansion exceeded " +
                                              std::to_string(budget.max_expansions) +
                                              " expressions");
                    }
            }
            std::sort(out.begin(), out.end(), [](const OracleExpr& a, const OracleExpr& b) {
                return a.render() < b.render();
            });
            out.erase(std::unique(out.begin(), out.end(),
                                  [](const OracleExpr& a, const OracleExpr& b) {
                                      return a.render() == b.render();
                                  }),
                      out.end());
            memo[key] = out;
            return out;
        }
    };

    return Expand{pool, budget, memo}.run(vn, max_depth);
}

// ---------------------------------------------------------------------------
// Soundness and completeness checks

/// One disagreement between the analysis and the enumerated ground truth.
struct OracleFinding {
    ProgramPoint point;
    std::string left;
    std::string right;
    std::vector<std::string> detail;  // per-path term renderings
};

namespace detail {

inline std::vector<std::pair<ProgramPoint, const ExpressionPool*>> result_points(
    const FlowGraph& g, const AnalysisResult& r) {
    std::vector<std::pair<ProgramPoint, const ExpressionPool*>> out;
    for (const auto& n : g.nodes) {
        out.push_back({ProgramPoint::input(n.id), &r.ein.at(n.id)});
        out.push_back({ProgramPoint::output(n.id), &r.eout.at(n.id)});
    }
    return out;
}

}  // namespace detail

/// Every pair of concrete expressions co-classified by the analysis must have
/// equal terms on every enumerated path. Value expressions are expanded into
/// the concrete expressions they stand for, down to depth 2.
inline std::vector<OracleFinding> check_soundness(const FlowGraph& g, const AnalysisResult& r,
                                                  int unroll, OracleBudget budget = {}) {
    PathOracle oracle(g, unroll, budget);
    std::vector<OracleFinding> findings;

    for (const auto& [point, pool] : detail::result_points(g, r)) {
        if (pool->is_top()) continue;
        const auto& states = oracle.states_at(point);
        if (states.empty()) continue;

        for (const auto& c : pool->classes()) {
            auto exprs = represented_expressions(*pool, c.vn, 2, budget);
            for (std::size_t i = 0; i < exprs.size(); ++i) {
                for (std::size_t j = i + 1; j < exprs.size(); ++j) {
                    std::vector<std::string> mismatches;
                    for (std::size_t k = 0; k < states.size(); ++k) {
                        auto ti = exprs[i].eval(oracle.terms(), states[k]);
                        auto tj = exprs[j].eval(oracle.terms(), states[k]);
                        if (ti != tj)
                            mismatches.push_back("path " + std::to_string(k + 1) + ": " +
                                                 oracle.terms().render(ti) + " vs " +
                                                 oracle.terms().render(tj));
                    }
                    if (!mismatches.empty())
                        findings.push_back(
                            {point, exprs[i].render(), exprs[j].render(), std::move(mismatches)});
                }
            }
        }
    }
    return findings;
}

/// On acyclic graphs, every Herbrand-equal pair of program variables and
/// program expressions must be co-classified by the analysis: variables via a
/// shared class, a variable/expression pair via the expression's value
/// expression sitting in the variable's class, and an expression pair via
/// equal value expressions. The pair is abstracted the way detect probes a
/// statement: operands without a class yet are resolved on a per-point
/// scratch copy, so an operand the program has not touched plays the role of
/// its own initial value on both sides of the pair.
inline std::vector<OracleFinding> check_completeness_acyclic(const FlowGraph& g,
                                                             const AnalysisResult& r,
                                                             OracleBudget budget = {}) {
    if (has_back_edge(g))
        throw std::invalid_argument("completeness check requires an acyclic graph");
    PathOracle oracle(g, 0, budget);
    std::vector<OracleFinding> findings;

    auto items = program_items(g, false);

    auto co_classified = [&](const ExpressionPool& scratch, const ProgramItem& a,
                             const ProgramItem& b) {
        const auto* va = std::get_if<Variable>(&a);
        const auto* vb = std::get_if<Variable>(&b);
        const auto* ea = std::get_if<Expression>(&a);
        const auto* eb = std::get_if<Expression>(&b);
        if (va && vb) return lookup(scratch, *va) == lookup(scratch, *vb);
        if (ea && eb) return value_exp(scratch, *ea) == value_exp(scratch, *eb);
        const Variable* var = va ? va : vb;
        const Expression* expr = ea ? ea : eb;
        ClassMember ve = value_exp(scratch, *expr);
        auto ce = lookup(scratch, ve);
        return ce && ce == lookup(scratch, *var);
    };

    for (const auto& [point, pool] : detail::result_points(g, r)) {
        const auto& states = oracle.states_at(point);
        if (states.empty() || pool->is_top()) continue;

        // Scratch extension shared by the whole universe at this point.
        ExpressionPool scratch = *pool;
        ValueNumberSource scratch_vns(r.next_value_number);
        auto ensure = [&](const Operand& o) {
            scratch = ensure_operand(scratch, o, scratch_vns).first;
        };
        for (const auto& item : items) {
            if (const auto* v = std::get_if<Variable>(&item)) {
                ensure(Operand{*v});
            } else if (const auto* e = std::get_if<Expression>(&item)) {
                ensure(e->left());
                ensure(e->right());
            }
        }

        std::map<std::vector<TermTable::TermId>, std::vector<const ProgramItem*>> groups;
        for (const auto& item : items) {
            std::vector<TermTable::TermId> signature;
            for (const auto& s : states) signature.push_back(item_term(oracle, s, item));
            groups[signature].push_back(&item);
        }

        for (const auto& [signature, members] : groups) {
            for (std::size_t i = 0; i < members.size(); ++i)
                for (std::size_t j = i + 1; j < members.size(); ++j)
                    if (!co_classified(scratch, *members[i], *members[j]))
                        findings.push_back({point, render_item(*members[i]),
                                            render_item(*members[j]),
                                            {oracle.terms().render(signature.front())}});
        }
    }
    return findings;
}

/// Final states at exit, compared term-for-term over `vars`, path by path.
/// Both graphs must branch identically (they differ only in statements), so
/// enumeration order lines the paths up.
inline bool same_path_semantics(const FlowGraph& a, const FlowGraph& b,
                                const std::vector<std::string>& vars, int unroll = 0,
                                OracleBudget budget = {}) {
    PathOracle oa(a, unroll, budget);
    PathOracle ob(b, unroll, budget);
    const auto& sa = oa.states_at(ProgramPoint::output(a.exit));
    const auto& sb = ob.states_at(ProgramPoint::output(b.exit));
    if (sa.size() != sb.size()) return false;
    for (std::size_t k = 0; k < sa.size(); ++k) {
        for (const auto& v : vars) {
            auto ta = oa.operand_term(sa[k], Operand{Variable{v}});
            auto tb = ob.operand_term(sb[k], Operand{Variable{v}});
            if (!TermTable::equal(oa.terms(), ta, ob.terms(), tb)) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Random program generation

/// Deterministic acyclic test programs: roughly `stmts` assignment nodes over
/// `vars` variables with `diamonds` branch/merge regions. Biased toward
/// recomputing earlier expressions and toward arms that recompute the same
/// right-hand side (into the same or different targets), which is what
/// stresses the confluence operator.
inline FlowGraph random_program(std::uint64_t seed, int vars, int stmts, int diamonds) {
    if (vars < 1 || vars > 8) throw std::invalid_argument("random_program: vars must be in 1..8");
    if (stmts < 1 || stmts > 16)
        throw std::invalid_argument("random_program: nodes must be in 1..16");
    if (diamonds < 0 || 2 * diamonds > stmts)
        throw std::invalid_argument("random_program: too many diamonds for the node budget");

    std::mt19937_64 rng(seed);
    auto roll = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };

    std::vector<std::string> names;
    for (int i = 0; i < vars; ++i) names.push_back(std::string(1, static_cast<char>('a' + i)));

    FlowGraph g;
    g.name = "rnd" + std::to_string(seed);
    int counter = 0;
    auto fresh_id = [&] { return "n" + std::to_string(counter++); };

    auto add_node = [&](std::vector<Statement> stmts_in) {
        Node n;
        n.id = fresh_id();
        n.stmts = std::move(stmts_in);
        g.nodes.push_back(std::move(n));
        return g.nodes.back().id;
    };

    std::string tail = add_node({});
    g.entry = tail;

    const Op ops[] = {Op::Add, Op::Sub, Op::Mul, Op::Div};
    std::vector<Expression> prior;

    auto pick_operand = [&](const std::string& avoid) -> Operand {
        if (roll(100) < 20 || (vars == 1 && names[0] == avoid))
            return Constant{static_cast<std::int64_t>(roll(10))};
        for (int tries = 0; tries < 8; ++tries) {
            const std::string& v = names[roll(vars)];
            if (v != avoid) return Variable{v};
        }
        return Constant{static_cast<std::int64_t>(roll(10))};
    };

    auto fresh_binary = [&](const std::string& avoid) {
        Expression e = Expression::binary(pick_operand(avoid), ops[roll(4)], pick_operand(avoid));
        prior.push_back(e);
        return e;
    };

    auto make_statement = [&]() -> Statement {
        std::string target = names[roll(vars)];
        int r = roll(100);
        if (r < 35 && !prior.empty()) {
            // Recompute something already seen, as long as it avoids the target.
            for (int tries = 0; tries < 8; ++tries) {
                const Expression& e = prior[roll(static_cast<int>(prior.size()))];
                if (!e.mentions(target)) return {target, e};
            }
            return {target, fresh_binary(target)};
        }
        if (r < 75) return {target, fresh_binary(target)};
        if (r < 88) return {target, Expression::operand(pick_operand(target))};
        return {target, Expression::operand(Constant{static_cast<std::int64_t>(roll(10))})};
    };

    int budget = stmts;
    auto append_statement = [&] {
        std::string id = add_node({make_statement()});
        g.edges.push_back(Edge{tail, id});
        tail = id;
        --budget;
    };

    auto append_arm = [&](const std::string& from, std::vector<Statement> body) {
        std::string prev = from;
        for (auto& st : body) {
            std::string id = add_node({std::move(st)});
            g.edges.push_back(Edge{prev, id});
            prev = id;
        }
        return prev;
    };

    auto append_diamond = [&] {
        std::string split = tail;
        Statement a, b;
        int pattern = roll(100);
        if (pattern < 35) {
            // Both arms compute the same thing into the same target.
            a = make_statement();
            b = a;
        } else if (pattern < 60) {
            // Same computation, different targets: the value survives the
            // merge with no variable holding it.
            a = make_statement();
            std::string other = names[roll(vars)];
            if (other == a.target && vars > 1) other = names[(roll(vars - 1) + 1) % vars];
            b = Statement{other, a.rhs};
            if (b.rhs.mentions(other)) b = make_statement();
        } else if (pattern < 85) {
            // Same target, different values: the merge must separate it.
            a = make_statement();
            b = Statement{a.target, fresh_binary(a.target)};
        } else {
            a = make_statement();
            b = make_statement();
        }
        std::vector<Statement> arm_a{a}, arm_b{b};
        budget -= 2;
        if (budget > 0 && roll(100) < 30) {
            arm_a.push_back(make_statement());
            --budget;
        }
        if (budget > 0 && roll(100) < 30) {
            arm_b.push_back(make_statement());
            --budget;
        }
        std::string ta = append_arm(split, std::move(arm_a));
        std::string tb = append_arm(split, std::move(arm_b));
        std::string merge = add_node({});
        g.edges.push_back(Edge{ta, merge});
        g.edges.push_back(Edge{tb, merge});
        tail = merge;
    };

    if (budget > 2 * diamonds) append_statement();
    for (int d = 0; d < diamonds; ++d) {
        append_diamond();
        if (budget > 2 * (diamonds - d - 1) && roll(100) < 60) append_statement();
    }
    while (budget > 0) append_statement();

    std::string exit_id = add_node({});
    g.edges.push_back(Edge{tail, exit_id});
    g.exit = exit_id;
    return g;
}

}  // namespace gvn
