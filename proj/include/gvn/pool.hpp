#pragma once

// Expression pools: partitions of variables, constants and value expressions
// into value-numbered equivalence classes. Pools are persistent values; every
// operation returns a new pool and never mutates its input. The only mutable
// piece of an analysis run is the ValueNumberSource.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gvn/errors.hpp"
#include "gvn/ir.hpp"

namespace gvn {

struct ValueNumber {
    std::uint64_t id = 0;
    auto operator<=>(const ValueNumber&) const = default;
};

inline std::string render(ValueNumber vn) { return "v" + std::to_string(vn.id); }

/// Issues run-unique, strictly increasing value numbers. One source per
/// analysis run; pools from different runs must not be mixed.
class ValueNumberSource {
public:
    explicit ValueNumberSource(std::uint64_t next = 1) : next_(next) {}

    ValueNumber fresh() {
        if (next_ == 0) throw InternalError("value number counter exhausted");
        return ValueNumber{next_++};
    }

    /// Guarantees future numbers are strictly greater than `vn`.
    void reserve_past(ValueNumber vn) { next_ = std::max(next_, vn.id + 1); }

    std::uint64_t next_id() const { return next_; }

private:
    std::uint64_t next_;
};

/// A binary expression over classes instead of program operands. One value
/// expression stands for every program expression whose operands lie in the
/// referenced classes.
struct ValueExpression {
    ValueNumber left;
    Op op = Op::Add;
    ValueNumber right;
    auto operator<=>(const ValueExpression&) const = default;
};

/// Class members compare structurally; member sets order variables first,
/// then constants, then the value expression.
using ClassMember = std::variant<Variable, Constant, ValueExpression>;

inline ClassMember member_of(const Operand& o) {
    if (const auto* v = std::get_if<Variable>(&o)) return *v;
    return std::get<Constant>(o);
}

inline std::string render(const ClassMember& m) {
    struct {
        std::string operator()(const Variable& v) const { return v.name; }
        std::string operator()(const Constant& c) const { return std::to_string(c.value); }
        std::string operator()(const ValueExpression& e) const {
            return render_vn(e.left) + to_char(e.op) + render_vn(e.right);
        }
        static std::string render_vn(ValueNumber vn) { return "v" + std::to_string(vn.id); }
    } r;
    return std::visit(r, m);
}

struct EqClass {
    ValueNumber vn;
    std::vector<ClassMember> members;  // sorted, duplicate-free

    bool contains(const ClassMember& m) const {
        return std::binary_search(members.begin(), members.end(), m);
    }

    void insert(ClassMember m) {
        auto it = std::lower_bound(members.begin(), members.end(), m);
        if (it == members.end() || *it != m) members.insert(it, std::move(m));
    }

    void erase(const ClassMember& m) {
        auto it = std::lower_bound(members.begin(), members.end(), m);
        if (it != members.end() && *it == m) members.erase(it);
    }

    /// The class's value expression, or nullptr. A class holds at most one.
    const ValueExpression* value_expression() const {
        for (const auto& m : members)
            if (const auto* e = std::get_if<ValueExpression>(&m)) return e;
        return nullptr;
    }

    /// Variable members in name order.
    std::vector<std::string> variable_members() const {
        std::vector<std::string> out;
        for (const auto& m : members)
            if (const auto* v = std::get_if<Variable>(&m)) out.push_back(v->name);
        return out;
    }

    friend bool operator==(const EqClass& a, const EqClass& b) {
        return a.vn == b.vn && a.members == b.members;
    }
};

namespace detail {

inline void sort_members(EqClass& c) {
    std::sort(c.members.begin(), c.members.end());
    c.members.erase(std::unique(c.members.begin(), c.members.end()), c.members.end());
}

/// Removes classes with no members left and value expressions whose operand
/// classes are gone, cascading until stable.
inline void purge_classes(std::vector<EqClass>& classes) {
    bool changed = true;
    while (changed) {
        changed = false;
        auto empty = [](const EqClass& c) { return c.members.empty(); };
        auto it = std::remove_if(classes.begin(), classes.end(), empty);
        if (it != classes.end()) {
            classes.erase(it, classes.end());
            changed = true;
        }
        std::set<std::uint64_t> live;
        for (const auto& c : classes) live.insert(c.vn.id);
        for (auto& c : classes) {
            const ValueExpression* e = c.value_expression();
            if (e && (!live.count(e->left.id) || !live.count(e->right.id))) {
                c.erase(*e);
                changed = true;
            }
        }
    }
}

/// Reference depth of every class: 0 without a value expression, otherwise
/// one more than the deepest operand. Fails on cycles or dangling operands.
inline std::map<std::uint64_t, int> compute_levels(const std::vector<EqClass>& classes) {
    std::map<std::uint64_t, const EqClass*> by_vn;
    for (const auto& c : classes) by_vn[c.vn.id] = &c;

    std::map<std::uint64_t, int> level;
    std::set<std::uint64_t> in_progress;

    struct Walk {
        const std::map<std::uint64_t, const EqClass*>& by_vn;
        std::map<std::uint64_t, int>& level;
        std::set<std::uint64_t>& in_progress;

        int visit(std::uint64_t vn) {
            if (auto it = level.find(vn); it != level.end()) return it->second;
            if (!in_progress.insert(vn).second)
                throw InternalError("cyclic value-number reference through v" + std::to_string(vn));
            auto it = by_vn.find(vn);
            if (it == by_vn.end())
                throw InternalError("value expression references missing class v" + std::to_string(vn));
            int result = 0;
            if (const ValueExpression* e = it->second->value_expression())
                result = 1 + std::max(visit(e->left.id), visit(e->right.id));
            in_progress.erase(vn);
            level[vn] = result;
            return result;
        }
    };

    Walk walk{by_vn, level, in_progress};
    for (const auto& c : classes) walk.visit(c.vn.id);
    return level;
}

}  // namespace detail

/// A partition of expressions into value-numbered classes, or the
/// distinguished top element ("no path information yet").
class ExpressionPool {
public:
    ExpressionPool() = default;  // top

    static ExpressionPool top() { return ExpressionPool(); }

    static ExpressionPool empty_partition() {
        ExpressionPool p;
        p.top_ = false;
        return p;
    }

    /// Builds a partition and verifies its invariants: unique value numbers,
    /// each member in at most one class, at most one value expression per
    /// class, operand references resolved and acyclic. Classes with empty
    /// member sets are tolerated (they arise between remove_variable and
    /// delete_singletons) but most operations expect them purged.
    static ExpressionPool from_classes(std::vector<EqClass> classes) {
        ExpressionPool p;
        p.top_ = false;
        for (auto& c : classes) detail::sort_members(c);
        std::sort(classes.begin(), classes.end(),
                  [](const EqClass& a, const EqClass& b) { return a.vn < b.vn; });

        std::set<std::uint64_t> vns;
        std::set<ClassMember> seen;
        for (const auto& c : classes) {
            if (c.vn.id == 0) throw InternalError("class without a value number");
            if (!vns.insert(c.vn.id).second)
                throw InternalError("duplicate value number v" + std::to_string(c.vn.id));
            int vexprs = 0;
            for (const auto& m : c.members) {
                if (!seen.insert(m).second)
                    throw InternalError("member '" + render(m) + "' occurs in two classes");
                if (std::holds_alternative<ValueExpression>(m)) ++vexprs;
            }
            if (vexprs > 1)
                throw InternalError("class v" + std::to_string(c.vn.id) +
                                    " holds more than one value expression");
        }
        detail::compute_levels(classes);  // closure + acyclicity
        p.classes_ = std::move(classes);
        return p;
    }

    bool is_top() const { return top_; }

    const std::vector<EqClass>& classes() const {
        require_partition("classes");
        return classes_;
    }

    const EqClass* class_of(ValueNumber vn) const {
        require_partition("class_of");
        auto it = std::lower_bound(classes_.begin(), classes_.end(), vn,
                                   [](const EqClass& c, ValueNumber v) { return c.vn < v; });
        return (it != classes_.end() && it->vn == vn) ? &*it : nullptr;
    }

    friend bool operator==(const ExpressionPool& a, const ExpressionPool& b) {
        return a.top_ == b.top_ && a.classes_ == b.classes_;
    }

private:
    void require_partition(const char* what) const {
        if (top_) throw InternalError(std::string(what) + " on the top pool");
    }

    bool top_ = true;
    std::vector<EqClass> classes_;
};

// ---------------------------------------------------------------------------
// Core operations

/// The value number of the unique class containing `m`, if any.
inline std::optional<ValueNumber> lookup(const ExpressionPool& pool, const ClassMember& m) {
    for (const auto& c : pool.classes())
        if (c.contains(m)) return c.vn;
    return std::nullopt;
}

/// For a binary expression, the value expression over its operands' classes;
/// for an operand expression, the operand itself. Operands must already have
/// classes (see ensure_operand).
inline ClassMember value_exp(const ExpressionPool& pool, const Expression& e) {
    if (!e.is_binary()) return member_of(e.left());
    auto vn_of = [&](const Operand& o) {
        auto vn = lookup(pool, member_of(o));
        if (!vn)
            throw InternalError("operand '" + render_operand(o) + "' has no class in the pool");
        return *vn;
    };
    return ValueExpression{vn_of(e.left()), e.op(), vn_of(e.right())};
}

/// Returns the pool (extended with a fresh singleton class when needed) and
/// the operand's value number.
inline std::pair<ExpressionPool, ValueNumber> ensure_operand(const ExpressionPool& pool,
                                                             const Operand& o,
                                                             ValueNumberSource& vns) {
    ClassMember m = member_of(o);
    if (auto vn = lookup(pool, m)) return {pool, *vn};
    ValueNumber vn = vns.fresh();
    std::vector<EqClass> classes = pool.classes();
    classes.push_back(EqClass{vn, {std::move(m)}});
    return {ExpressionPool::from_classes(std::move(classes)), vn};
}

/// Removes the variable from its class. The class may be left bare; callers
/// follow up with delete_singletons before comparing or rendering.
inline ExpressionPool remove_variable(const ExpressionPool& pool, std::string_view name) {
    std::vector<EqClass> classes = pool.classes();
    for (auto& c : classes) c.erase(Variable{std::string(name)});
    return ExpressionPool::from_classes(std::move(classes));
}

/// Deletes classes whose member set is empty and every value expression that
/// references a deleted class, repeating until no bare class remains.
inline ExpressionPool delete_singletons(const ExpressionPool& pool) {
    std::vector<EqClass> classes = pool.classes();
    detail::purge_classes(classes);
    return ExpressionPool::from_classes(std::move(classes));
}

/// Adds a member to an existing class.
inline ExpressionPool insert_member(const ExpressionPool& pool, ValueNumber vn, ClassMember m) {
    std::vector<EqClass> classes = pool.classes();
    for (auto& c : classes) {
        if (c.vn == vn) {
            c.insert(std::move(m));
            return ExpressionPool::from_classes(std::move(classes));
        }
    }
    throw InternalError("insert_member: no class v" + std::to_string(vn.id));
}

/// Adds a whole class.
inline ExpressionPool insert_class(const ExpressionPool& pool, EqClass c) {
    std::vector<EqClass> classes = pool.classes();
    classes.push_back(std::move(c));
    return ExpressionPool::from_classes(std::move(classes));
}

// ---------------------------------------------------------------------------
// Canonical form: the renaming-independent encoding used for equivalence
// tests and stable display order.

/// One class, with value numbers erased: atom members encoded as strings and
/// the value expression (if any) pointing at canonical class indices.
struct CanonClass {
    std::vector<std::string> atoms;  // encoded variables/constants, sorted
    bool has_vexpr = false;
    char op = 0;
    std::size_t left = 0;
    std::size_t right = 0;
    auto operator<=>(const CanonClass&) const = default;
};

struct CanonicalForm {
    bool top = false;
    std::vector<CanonClass> classes;  // canonical order
    auto operator<=>(const CanonicalForm&) const = default;
};

namespace detail {

struct CanonOrdering {
    std::vector<std::size_t> positions;          // into pool.classes(), canonical order
    std::map<std::uint64_t, std::size_t> index;  // vn -> canonical index
    std::vector<CanonClass> classes;
};

inline std::string encode_atom(const ClassMember& m) {
    if (const auto* v = std::get_if<Variable>(&m)) return "a" + v->name;
    if (const auto* c = std::get_if<Constant>(&m)) return "b" + std::to_string(c->value);
    throw InternalError("encode_atom on a value expression");
}

inline CanonOrdering canonical_ordering(const ExpressionPool& pool) {
    const auto& classes = pool.classes();
    for (const auto& c : classes)
        if (c.members.empty())
            throw InternalError("canonical form of a pool with a bare class v" +
                                std::to_string(c.vn.id));

    auto levels = compute_levels(classes);
    std::map<int, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < classes.size(); ++i)
        buckets[levels.at(classes[i].vn.id)].push_back(i);

    CanonOrdering out;
    for (auto& [lvl, bucket] : buckets) {
        std::vector<std::pair<CanonClass, std::size_t>> keyed;
        for (std::size_t pos : bucket) {
            const EqClass& c = classes[pos];
            CanonClass key;
            for (const auto& m : c.members)
                if (!std::holds_alternative<ValueExpression>(m))
                    key.atoms.push_back(encode_atom(m));
            std::sort(key.atoms.begin(), key.atoms.end());
            if (const ValueExpression* e = c.value_expression()) {
                key.has_vexpr = true;
                key.op = to_char(e->op);
                key.left = out.index.at(e->left.id);
                key.right = out.index.at(e->right.id);
            }
            keyed.push_back({std::move(key), pos});
        }
        std::sort(keyed.begin(), keyed.end());
        for (auto& [key, pos] : keyed) {
            out.index[classes[pos].vn.id] = out.positions.size();
            out.positions.push_back(pos);
            out.classes.push_back(std::move(key));
        }
    }
    return out;
}

}  // namespace detail

/// Renaming-independent canonical encoding: two pools canonicalize equal
/// exactly when one is the other under a bijective value-number renaming.
inline CanonicalForm canonicalize(const ExpressionPool& pool) {
    CanonicalForm form;
    if (pool.is_top()) {
        form.top = true;
        return form;
    }
    form.classes = detail::canonical_ordering(pool).classes;
    return form;
}

/// Equality of equivalence information; value-number choices are ignored.
inline bool pools_equivalent(const ExpressionPool& a, const ExpressionPool& b) {
    return canonicalize(a) == canonicalize(b);
}

// ---------------------------------------------------------------------------
// Display

struct RenderOptions {
    bool ascii = false;
};

/// Deterministic pool text: classes in canonical order, each class showing
/// its value number first, then the value expression, constants and
/// variables, e.g. `{[v1, a, x], [v3, v1+v2, z]}`.
inline std::string render(const ExpressionPool& pool, RenderOptions opts = {}) {
    if (pool.is_top()) return opts.ascii ? "TOP" : "⊤";
    auto ordering = detail::canonical_ordering(pool);
    std::string out = "{";
    bool first_class = true;
    for (std::size_t pos : ordering.positions) {
        const EqClass& c = pool.classes()[pos];
        if (!first_class) out += ", ";
        first_class = false;
        out += "[" + render(c.vn);
        for (const auto& m : c.members)
            if (std::holds_alternative<ValueExpression>(m)) out += ", " + render(m);
        for (const auto& m : c.members)
            if (std::holds_alternative<Constant>(m)) out += ", " + render(m);
        for (const auto& m : c.members)
            if (std::holds_alternative<Variable>(m)) out += ", " + render(m);
        out += "]";
    }
    out += "}";
    return out;
}

}  // namespace gvn
