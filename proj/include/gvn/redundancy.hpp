#pragma once

// Classification of each computation against the fixpoint pools, and the
// conservative rewrite that replaces redundant computations with copies.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gvn/analysis.hpp"
#include "gvn/ir.hpp"
#include "gvn/pool.hpp"

namespace gvn {

enum class VerdictKind {
    Redundant,    // binary rhs whose value expression is already in EIN
    Novel,        // binary rhs computing a value not yet available
    Copy,         // operand rhs; never rewritten here
    Unreachable,  // the node has no incoming path
};

inline std::string_view to_string(VerdictKind k) {
    switch (k) {
        case VerdictKind::Redundant: return "redundant";
        case VerdictKind::Novel: return "novel";
        case VerdictKind::Copy: return "copy";
        case VerdictKind::Unreachable: return "unreachable";
    }
    return "?";
}

struct RedundancyVerdict {
    std::string node;
    Statement stmt;
    VerdictKind kind = VerdictKind::Novel;
    bool redundant = false;
    std::optional<ValueNumber> vn;       // matched class when redundant
    std::vector<std::string> witnesses;  // variables holding the value at EIN
};

struct RedundancyCounts {
    std::size_t redundant = 0;  // binary computations already available
    std::size_t novel = 0;      // binary computations
    std::size_t copies = 0;
    std::size_t unreachable = 0;
};

struct RedundancyReport {
    std::vector<RedundancyVerdict> verdicts;  // one per statement node, declaration order
    RedundancyCounts counts;
};

/// Classifies every statement node. A binary computation is redundant when
/// its value expression over EIN already has a class there; operands missing
/// from EIN are resolved on a scratch copy so the probe itself cannot count
/// as "present". Copy/constant statements are classified separately.
inline RedundancyReport detect(const FlowGraph& g, const AnalysisResult& r) {
    for (const auto& n : g.nodes)
        if (!r.ein.count(n.id) || !r.eout.count(n.id))
            throw std::invalid_argument("detect: analysis result does not cover node '" + n.id + "'");
    if (extra_sweep_changes(g, r))
        throw std::invalid_argument("detect: analysis result is not a fixpoint");

    ValueNumberSource scratch_vns(r.next_value_number);
    RedundancyReport rep;
    for (const auto& n : g.nodes) {
        const Statement* st = n.single_statement();
        if (!st) continue;

        RedundancyVerdict v;
        v.node = n.id;
        v.stmt = *st;
        const ExpressionPool& ein = r.ein.at(n.id);

        if (ein.is_top()) {
            v.kind = VerdictKind::Unreachable;
            ++rep.counts.unreachable;
        } else if (st->rhs.is_binary()) {
            ExpressionPool scratch = ensure_operand(ein, st->rhs.left(), scratch_vns).first;
            scratch = ensure_operand(scratch, st->rhs.right(), scratch_vns).first;
            ClassMember e = value_exp(scratch, st->rhs);
            if (auto vn = lookup(ein, e)) {
                v.kind = VerdictKind::Redundant;
                v.redundant = true;
                v.vn = *vn;
                v.witnesses = ein.class_of(*vn)->variable_members();
                ++rep.counts.redundant;
            } else {
                v.kind = VerdictKind::Novel;
                ++rep.counts.novel;
            }
        } else {
            v.kind = VerdictKind::Copy;
            ++rep.counts.copies;
            if (auto vn = lookup(ein, member_of(st->rhs.left()))) {
                v.redundant = true;
                v.vn = *vn;
                v.witnesses = ein.class_of(*vn)->variable_members();
            }
        }
        rep.verdicts.push_back(std::move(v));
    }
    return rep;
}

/// Rewrites each redundant binary computation to a copy from a variable that
/// already holds the value at EIN, choosing the first witness other than the
/// target. Verdicts without such a witness are reported but left untouched;
/// materializing those values would need new temporaries on incoming edges.
inline FlowGraph eliminate(const FlowGraph& g, const RedundancyReport& rep,
                           const AnalysisResult& r) {
    for (const auto& n : g.nodes)
        if (!r.ein.count(n.id))
            throw std::invalid_argument("eliminate: analysis result does not cover node '" + n.id +
                                        "'");

    FlowGraph out = g;
    for (const auto& v : rep.verdicts) {
        if (v.kind != VerdictKind::Redundant) continue;
        const std::string* witness = nullptr;
        for (const auto& w : v.witnesses) {
            if (w != v.stmt.target) {
                witness = &w;
                break;
            }
        }
        if (!witness) continue;
        Node* node = out.find_node(v.node);
        if (!node || node->stmts.size() != 1)
            throw InternalError("eliminate: report does not match the graph");
        int line = node->stmts[0].line;
        node->stmts[0] = Statement{v.stmt.target, Expression::operand(Variable{*witness}), line};
    }

    // The rewrite never touches structure; diagnostics must be unchanged.
    auto before = validate(g);
    auto after = validate(out);
    if (before.size() != after.size())
        throw InternalError("eliminate: rewrite changed graph diagnostics");
    return out;
}

}  // namespace gvn
