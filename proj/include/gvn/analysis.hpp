#pragma once

// The dataflow core: the per-node transfer function, the confluence (meet)
// of pools from multiple predecessors, and the round-robin fixpoint driver
// that computes EIN/EOUT for every node.

#include <algorithm>
#include <functional>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gvn/errors.hpp"
#include "gvn/ir.hpp"
#include "gvn/pool.hpp"

namespace gvn {

/// Shared state of one confluence computation. The memo guarantees that each
/// pair of classes is intersected exactly once per meet: the recursion on
/// value-expression operands and the top-level pairwise loop would otherwise
/// materialize the same result class twice under different value numbers.
class MeetContext {
public:
    MeetContext(const ExpressionPool& left, const ExpressionPool& right, ValueNumberSource& vns)
        : left_(&left), right_(&right), vns_(&vns) {}

    /// Intersects the classes named vi (in the left pool) and vj (in the
    /// right pool), materializing the result class, and returns its value
    /// number; nullopt when the intersection is empty.
    std::optional<ValueNumber> intersect(ValueNumber vi, ValueNumber vj) {
        auto key = std::make_pair(vi.id, vj.id);
        if (auto it = memo_.find(key); it != memo_.end()) {
            // Re-entering an in-progress pair would mean a reference cycle;
            // pools are acyclic, so answer empty rather than recurse forever.
            if (it->second.state == State::Merged) return it->second.vn;
            return std::nullopt;
        }
        memo_[key] = {State::InProgress, {}};

        const EqClass* ci = left_->class_of(vi);
        const EqClass* cj = right_->class_of(vj);
        if (!ci || !cj)
            throw InternalError("meet: unknown class pair v" + std::to_string(vi.id) + ", v" +
                                std::to_string(vj.id));

        EqClass merged;
        // Members present in both classes: variables, constants, and a value
        // expression the classes share verbatim.
        std::set_intersection(ci->members.begin(), ci->members.end(), cj->members.begin(),
                              cj->members.end(), std::back_inserter(merged.members));

        // Distinct value expressions with a common operator may still stand
        // for a common program expression: both operand pairs must intersect
        // non-empty, and the result then carries the value expression built
        // from the intersected operand classes.
        const ValueExpression* ei = ci->value_expression();
        const ValueExpression* ej = cj->value_expression();
        if (ei && ej && *ei != *ej && ei->op == ej->op) {
            auto k1 = intersect(ei->left, ej->left);
            auto k2 = intersect(ei->right, ej->right);
            if (k1 && k2) merged.insert(ValueExpression{*k1, ei->op, *k2});
        }

        if (merged.members.empty()) {
            memo_[key] = {State::Empty, {}};
            return std::nullopt;
        }
        // A class surviving under the same value number in both pools keeps
        // it; anything else gets a fresh number.
        merged.vn = (vi == vj) ? vi : vns_->fresh();
        memo_[key] = {State::Merged, merged.vn};
        result_.push_back(std::move(merged));
        return result_.back().vn;
    }

    const ExpressionPool& left() const { return *left_; }
    const ExpressionPool& right() const { return *right_; }
    const std::vector<EqClass>& result() const { return result_; }
    std::vector<EqClass> take_result() { return std::move(result_); }

private:
    enum class State { InProgress, Empty, Merged };
    struct Entry {
        State state = State::InProgress;
        ValueNumber vn;
    };

    const ExpressionPool* left_;
    const ExpressionPool* right_;
    ValueNumberSource* vns_;
    std::map<std::pair<std::uint64_t, std::uint64_t>, Entry> memo_;
    std::vector<EqClass> result_;
};

/// Intersection of one class pair within a meet; the shared context keeps
/// overlapping recursive results consistent. Returns the materialized class.
inline std::optional<EqClass> class_meet(const EqClass& ci, const ExpressionPool& ei,
                                         const EqClass& cj, const ExpressionPool& ej,
                                         MeetContext& ctx) {
    if (&ei != &ctx.left() || &ej != &ctx.right())
        throw InternalError("class_meet: context was built over different pools");
    auto vn = ctx.intersect(ci.vn, cj.vn);
    if (!vn) return std::nullopt;
    for (const auto& c : ctx.result())
        if (c.vn == *vn) return c;
    throw InternalError("class_meet: result class was not materialized");
}

/// Confluence of two pools: every class pair is intersected, and the result
/// keeps exactly the equivalences common to both inputs. Top is the identity.
inline ExpressionPool pool_meet(const ExpressionPool& ei, const ExpressionPool& ej,
                                ValueNumberSource& vns) {
    if (ei.is_top()) return ej;
    if (ej.is_top()) return ei;
    MeetContext ctx(ei, ej, vns);
    for (const auto& ci : ei.classes())
        for (const auto& cj : ej.classes()) ctx.intersect(ci.vn, cj.vn);
    auto classes = ctx.take_result();
    // A kept value expression may reference an operand class whose own
    // intersection came up empty; purging strips it and cascades.
    detail::purge_classes(classes);
    return ExpressionPool::from_classes(std::move(classes));
}

/// Left fold of pool_meet; the result is order-independent up to renaming.
inline ExpressionPool meet_many(const std::vector<ExpressionPool>& pools, ValueNumberSource& vns) {
    if (pools.empty()) throw InternalError("meet_many on an empty list");
    ExpressionPool acc = pools.front();
    for (std::size_t i = 1; i < pools.size(); ++i) acc = pool_meet(acc, pools[i], vns);
    return acc;
}

/// Transfer function for a single node. An assignment x = e kills every
/// expression involving x (remove x from its class, then purge), and
/// generates the equivalence between x and e: x joins e's class when the
/// value expression of e is already present, otherwise a fresh class holding
/// x and the value expression is added.
inline ExpressionPool transfer(const Node& n, const ExpressionPool& ein, ValueNumberSource& vns) {
    if (ein.is_top()) return ein;  // unreached: nothing to transform
    if (n.stmts.empty()) return ein;
    const Statement* st = n.single_statement();
    if (!st) throw InternalError("transfer on a non-normalized node '" + n.id + "'");
    if (st->rhs.mentions(st->target))
        throw InternalError("transfer: target '" + st->target + "' occurs in its own rhs");

    ExpressionPool pool = ein;
    if (lookup(pool, ClassMember{Variable{st->target}})) {
        pool = remove_variable(pool, st->target);
        pool = delete_singletons(pool);
    }
    pool = ensure_operand(pool, st->rhs.left(), vns).first;
    if (st->rhs.is_binary()) pool = ensure_operand(pool, st->rhs.right(), vns).first;

    ClassMember e = value_exp(pool, st->rhs);
    if (auto vn = lookup(pool, e)) return insert_member(pool, *vn, Variable{st->target});

    EqClass fresh;
    fresh.vn = vns.fresh();
    fresh.insert(Variable{st->target});
    fresh.insert(std::move(e));
    return insert_class(pool, std::move(fresh));
}

// ---------------------------------------------------------------------------
// Fixpoint driver

struct AnalysisResult {
    std::map<std::string, ExpressionPool> ein;
    std::map<std::string, ExpressionPool> eout;
    int sweeps = 0;
    /// Counter state after the run; lets callers keep minting value numbers
    /// that cannot collide with any pool in the result.
    std::uint64_t next_value_number = 1;
};

/// Called after each node is recomputed: (sweep, node, EIN, EOUT).
using TraceHook =
    std::function<void(int, const std::string&, const ExpressionPool&, const ExpressionPool&)>;

struct AnalysisOptions {
    std::optional<int> max_sweeps;  // default: 4 * node count + 8
    TraceHook trace;
};

/// The fixpoint could not be confirmed within the sweep budget. Carries the
/// pools of the last two sweeps for diagnosis.
class ConvergenceError : public Error {
public:
    ConvergenceError(int sweeps, std::map<std::string, ExpressionPool> previous,
                     std::map<std::string, ExpressionPool> last)
        : Error("analysis did not converge within " + std::to_string(sweeps) + " sweeps"),
          sweeps_(sweeps),
          previous_(std::move(previous)),
          last_(std::move(last)) {}

    int sweeps() const { return sweeps_; }
    const std::map<std::string, ExpressionPool>& previous_eout() const { return previous_; }
    const std::map<std::string, ExpressionPool>& last_eout() const { return last_; }

private:
    int sweeps_;
    std::map<std::string, ExpressionPool> previous_;
    std::map<std::string, ExpressionPool> last_;
};

namespace detail {

inline void require_normalized(const FlowGraph& g) {
    for (const auto& n : g.nodes) {
        if (n.stmts.size() > 1)
            throw InternalError("node '" + n.id + "' holds " + std::to_string(n.stmts.size()) +
                                " statements; normalize the graph first");
        if (const Statement* st = n.single_statement(); st && st->rhs.mentions(st->target))
            throw InternalError("node '" + n.id +
                                "': target occurs in its own rhs; normalize the graph first");
    }
    if (!g.find_node(g.entry)) throw InternalError("entry node '" + g.entry + "' does not exist");
    if (!g.node(g.entry).empty()) throw InternalError("entry node must be empty");
}

}  // namespace detail

/// Round-robin fixpoint over reverse postorder. EOUT of the entry starts as
/// the empty partition, every other pool as top; sweeps repeat until no EOUT
/// changes up to renaming. Value numbers change every sweep at confluence
/// points, so plain equality would never settle; equivalence comparison is
/// what makes the iteration converge. Nodes unreachable from entry keep top.
inline AnalysisResult run_gvn(const FlowGraph& g, const AnalysisOptions& options = {}) {
    detail::require_normalized(g);

    ValueNumberSource vns;
    std::map<std::string, ExpressionPool> ein, eout;
    for (const auto& n : g.nodes) {
        ein[n.id] = ExpressionPool::top();
        eout[n.id] = ExpressionPool::top();
    }
    ein[g.entry] = ExpressionPool::empty_partition();
    eout[g.entry] = ExpressionPool::empty_partition();

    const auto order = reverse_postorder(g);
    const int max_sweeps = options.max_sweeps.value_or(static_cast<int>(4 * g.nodes.size() + 8));

    int sweeps = 0;
    std::map<std::string, ExpressionPool> previous = eout;
    for (;;) {
        if (sweeps >= max_sweeps) throw ConvergenceError(sweeps, std::move(previous), std::move(eout));
        ++sweeps;
        previous = eout;
        bool changed = false;
        for (const auto& id : order) {
            if (id == g.entry) continue;
            std::vector<ExpressionPool> preds;
            for (const auto& p : g.predecessors(id)) preds.push_back(eout.at(p));
            ein[id] = meet_many(preds, vns);
            ExpressionPool next = transfer(g.node(id), ein.at(id), vns);
            if (!pools_equivalent(next, eout.at(id))) changed = true;
            eout[id] = std::move(next);
            if (options.trace) options.trace(sweeps, id, ein.at(id), eout.at(id));
        }
        if (!changed) break;
    }

    AnalysisResult result;
    result.ein = std::move(ein);
    result.eout = std::move(eout);
    result.sweeps = sweeps;
    result.next_value_number = vns.next_id();
    return result;
}

/// Runs one more sweep over a finished result and reports whether any pool
/// would still change up to renaming. False confirms the fixpoint.
inline bool extra_sweep_changes(const FlowGraph& g, const AnalysisResult& r) {
    detail::require_normalized(g);
    ValueNumberSource vns(r.next_value_number);
    std::map<std::string, ExpressionPool> eout = r.eout;
    bool changed = false;
    for (const auto& id : reverse_postorder(g)) {
        if (id == g.entry) continue;
        std::vector<ExpressionPool> preds;
        for (const auto& p : g.predecessors(id)) preds.push_back(eout.at(p));
        ExpressionPool in = meet_many(preds, vns);
        ExpressionPool out = transfer(g.node(id), in, vns);
        if (!pools_equivalent(in, r.ein.at(id)) || !pools_equivalent(out, r.eout.at(id)))
            changed = true;
        eout[id] = std::move(out);
    }
    return changed;
}

}  // namespace gvn
