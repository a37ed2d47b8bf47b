#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>

#include "gvn/analysis.hpp"
#include "gvn/pool.hpp"
#include "support/builders.hpp"

using namespace gvn;
using namespace testsupport;

namespace {

// The section-2.3 pool: {[v1, a, x], [v2, b, y], [v3, v1+v2, z]}.
ExpressionPool sample_pool() {
    return make_pool({cls(1, {var("a"), var("x")}),
                      cls(2, {var("b"), var("y")}),
                      cls(3, {vexpr(1, '+', 2), var("z")})});
}

}  // namespace

TEST_CASE("value numbers are fresh and increasing") {
    ValueNumberSource vns;
    ValueNumber first = vns.fresh();
    ValueNumber second = vns.fresh();
    CHECK(first == ValueNumber{1});
    CHECK(second == ValueNumber{2});

    std::set<std::uint64_t> seen{first.id, second.id};
    for (int i = 0; i < 100; ++i) {
        ValueNumber vn = vns.fresh();
        CHECK(seen.insert(vn.id).second);
        CHECK(vn.id > second.id);
        second = vn;
    }

    ValueNumberSource other;
    other.reserve_past(ValueNumber{41});
    CHECK(other.fresh() == ValueNumber{42});
}

TEST_CASE("lookup finds the class of a member") {
    ExpressionPool pool = sample_pool();
    CHECK(lookup(pool, var("x")) == ValueNumber{1});
    CHECK(lookup(pool, var("q")) == std::nullopt);
    CHECK(lookup(pool, vexpr(1, '+', 2)) == ValueNumber{3});
    CHECK(lookup(pool, num(5)) == std::nullopt);
}

TEST_CASE("value_exp abstracts operands into value numbers") {
    ExpressionPool pool = sample_pool();
    CHECK(value_exp(pool, Expression::binary(Variable{"x"}, Op::Add, Variable{"y"})) ==
          ClassMember{ValueExpression{ValueNumber{1}, Op::Add, ValueNumber{2}}});
    CHECK(value_exp(pool, Expression::operand(Variable{"a"})) == ClassMember{Variable{"a"}});
    // a + z reaches through the nested class: v1 + v3.
    CHECK(value_exp(pool, Expression::binary(Variable{"a"}, Op::Add, Variable{"z"})) ==
          ClassMember{ValueExpression{ValueNumber{1}, Op::Add, ValueNumber{3}}});
    CHECK_THROWS_AS(value_exp(pool, Expression::binary(Variable{"nope"}, Op::Add, Variable{"x"})),
                    InternalError);
}

TEST_CASE("ensure_operand creates classes only when missing") {
    ValueNumberSource vns;
    ExpressionPool empty = ExpressionPool::empty_partition();

    auto [with_a, va] = ensure_operand(empty, Variable{"a"}, vns);
    CHECK(va == ValueNumber{1});
    CHECK(with_a.classes().size() == 1);
    CHECK(lookup(with_a, var("a")) == va);

    auto [same, again] = ensure_operand(with_a, Variable{"a"}, vns);
    CHECK(again == va);
    CHECK(same == with_a);

    auto [with_five, v5] = ensure_operand(with_a, Constant{5}, vns);
    CHECK(v5 == ValueNumber{2});
    CHECK(lookup(with_five, num(5)) == v5);
}

TEST_CASE("remove_variable leaves other members alone") {
    ExpressionPool pool = make_pool({cls(1, {var("a"), var("x")}), cls(2, {var("b"), var("y")})});
    ExpressionPool removed = remove_variable(pool, "x");
    CHECK(lookup(removed, var("x")) == std::nullopt);
    CHECK(lookup(removed, var("a")) == ValueNumber{1});
    CHECK(lookup(removed, var("y")) == ValueNumber{2});

    // Removing the last variable leaves a bare class for delete_singletons.
    ExpressionPool bare = remove_variable(make_pool({cls(1, {var("x")})}), "x");
    REQUIRE(bare.classes().size() == 1);
    CHECK(bare.classes()[0].members.empty());

    CHECK(remove_variable(pool, "zz") == pool);
}

TEST_CASE("delete_singletons purges bare classes and cascades") {
    ExpressionPool one_bare = make_pool({cls(1, {}), cls(2, {var("b"), var("y")})});
    ExpressionPool purged = delete_singletons(one_bare);
    REQUIRE(purged.classes().size() == 1);
    CHECK(purged.classes()[0].vn == ValueNumber{2});

    // Deleting v1 strips v1+v2, which leaves v3 bare, which is then deleted.
    ExpressionPool cascade =
        make_pool({cls(1, {}), cls(3, {vexpr(1, '+', 2)}), cls(2, {var("b")})});
    ExpressionPool after = delete_singletons(cascade);
    REQUIRE(after.classes().size() == 1);
    CHECK(after.classes()[0].vn == ValueNumber{2});
    CHECK(after.classes()[0].members == std::vector<ClassMember>{var("b")});

    ExpressionPool stable = sample_pool();
    CHECK(delete_singletons(stable) == stable);
}

namespace {

// Reference implementation for the cascade rule, written directly over the
// class list: drop empty classes, strip references to dropped numbers, loop.
std::vector<EqClass> naive_purge(std::vector<EqClass> classes) {
    while (true) {
        std::set<std::uint64_t> dead;
        std::vector<EqClass> kept;
        for (const auto& c : classes) {
            if (c.members.empty())
                dead.insert(c.vn.id);
            else
                kept.push_back(c);
        }
        std::set<std::uint64_t> live;
        for (const auto& c : kept) live.insert(c.vn.id);
        bool stripped = false;
        for (auto& c : kept) {
            std::vector<ClassMember> members;
            for (const auto& m : c.members) {
                const auto* e = std::get_if<ValueExpression>(&m);
                if (e && (!live.count(e->left.id) || !live.count(e->right.id))) {
                    stripped = true;
                    continue;
                }
                members.push_back(m);
            }
            c.members = std::move(members);
        }
        if (dead.empty() && !stripped) return classes;
        classes = std::move(kept);
    }
}

}  // namespace

TEST_CASE("delete_singletons matches a naive reference on all small pools") {
    // Enumerate pools over classes v1..v3: every placement of atoms {x, y, z}
    // into a class (or none), and every downward-referencing value-expression
    // choice, so references never cycle. Covers every bare/cascade pattern at
    // this size, including deleting v1 stripping v1+v2 and so emptying v3.
    const std::vector<std::optional<ClassMember>> v2_choices = {std::nullopt, vexpr(1, '+', 1),
                                                                vexpr(1, '-', 1)};
    const std::vector<std::optional<ClassMember>> v3_choices = {
        std::nullopt, vexpr(1, '+', 2), vexpr(1, '*', 2), vexpr(2, '+', 2), vexpr(1, '+', 1)};
    int checked = 0;
    for (int ax = 0; ax < 4; ++ax) {
        for (int ay = 0; ay < 4; ++ay) {
            for (int az = 0; az < 4; ++az) {
                for (const auto& e2 : v2_choices) {
                    for (const auto& e3 : v3_choices) {
                        if (e2 && e3 && *e2 == *e3) continue;  // member in two classes
                        std::vector<EqClass> classes(3);
                        for (int i = 0; i < 3; ++i)
                            classes[i].vn = ValueNumber{std::uint64_t(i + 1)};
                        if (ax < 3) classes[ax].insert(var("x"));
                        if (ay < 3) classes[ay].insert(var("y"));
                        if (az < 3) classes[az].insert(var("z"));
                        if (e2) classes[1].insert(*e2);
                        if (e3) classes[2].insert(*e3);
                        ExpressionPool pool = ExpressionPool::from_classes(classes);
                        ExpressionPool expected =
                            ExpressionPool::from_classes(naive_purge(classes));
                        CHECK(delete_singletons(pool) == expected);
                        ++checked;
                    }
                }
            }
        }
    }
    CHECK(checked == 64 * (3 * 5 - 1));
}

TEST_CASE("canonical forms ignore value-number renamings") {
    ExpressionPool a =
        make_pool({cls(1, {var("x")}), cls(2, {var("y")}), cls(3, {vexpr(1, '+', 2)})});
    ExpressionPool b =
        make_pool({cls(9, {var("x")}), cls(4, {var("y")}), cls(7, {vexpr(9, '+', 4)})});
    CHECK(canonicalize(a) == canonicalize(b));
    CHECK(pools_equivalent(a, b));

    ExpressionPool split = make_pool({cls(1, {var("x")}), cls(2, {var("y")})});
    ExpressionPool joined = make_pool({cls(1, {var("x"), var("y")})});
    CHECK(canonicalize(split) != canonicalize(joined));
    CHECK(!pools_equivalent(split, joined));

    CHECK(pools_equivalent(ExpressionPool::top(), ExpressionPool::top()));
    CHECK(!pools_equivalent(ExpressionPool::top(), ExpressionPool::empty_partition()));
}

TEST_CASE("the same confluence computed under different counters is canonical") {
    auto confluence_of = [](std::uint64_t counter_start) {
        ExpressionPool e1 = make_pool({cls(counter_start + 0, {var("x"), var("a")}),
                                       cls(counter_start + 1, {var("y"), var("b")}),
                                       cls(counter_start + 2,
                                           {ValueExpression{ValueNumber{counter_start + 0}, Op::Add,
                                                            ValueNumber{counter_start + 1}},
                                            var("z")})});
        ExpressionPool e2 = make_pool({cls(counter_start + 3, {var("x"), var("c")}),
                                       cls(counter_start + 4, {var("y"), var("d")}),
                                       cls(counter_start + 5,
                                           {ValueExpression{ValueNumber{counter_start + 3}, Op::Add,
                                                            ValueNumber{counter_start + 4}},
                                            var("s")})});
        ValueNumberSource vns(counter_start + 6);
        return pool_meet(e1, e2, vns);
    };
    CHECK(canonicalize(confluence_of(1)) == canonicalize(confluence_of(100)));
}

TEST_CASE("renaming invariance holds for random pools") {
    std::mt19937_64 rng(2024);
    for (int round = 0; round < 40; ++round) {
        ValueNumberSource vns;
        ExpressionPool pool = random_pool(rng, vns, 10);

        // Apply a bijective renaming: shift every value number by a fixed
        // offset plus a per-class jitter that preserves uniqueness.
        std::map<std::uint64_t, std::uint64_t> renum;
        std::uint64_t next = 1000 + rng() % 1000;
        for (const auto& c : pool.classes()) renum[c.vn.id] = next += 1 + rng() % 3;
        std::vector<EqClass> renamed;
        for (const auto& c : pool.classes()) {
            EqClass copy;
            copy.vn = ValueNumber{renum.at(c.vn.id)};
            for (const auto& m : c.members) {
                if (const auto* e = std::get_if<ValueExpression>(&m))
                    copy.insert(ValueExpression{ValueNumber{renum.at(e->left.id)}, e->op,
                                                ValueNumber{renum.at(e->right.id)}});
                else
                    copy.insert(m);
            }
            renamed.push_back(std::move(copy));
        }
        CHECK(pools_equivalent(pool, ExpressionPool::from_classes(std::move(renamed))));
    }
}

TEST_CASE("pool operations preserve the invariants") {
    std::mt19937_64 rng(7);
    for (int round = 0; round < 30; ++round) {
        ValueNumberSource vns;
        ExpressionPool pool = random_pool(rng, vns, 12);
        CHECK_NOTHROW(assert_valid_pool(pool));
        CHECK(delete_singletons(pool) == pool);  // idempotent on purged pools

        // lookup and membership agree, member by member.
        for (const auto& c : pool.classes())
            for (const auto& m : c.members) CHECK(lookup(pool, m) == c.vn);
    }
}

TEST_CASE("from_classes rejects malformed partitions") {
    CHECK_THROWS_AS(make_pool({cls(1, {var("x")}), cls(2, {var("x")})}), InternalError);
    CHECK_THROWS_AS(make_pool({cls(1, {var("x")}), cls(1, {var("y")})}), InternalError);
    CHECK_THROWS_AS(make_pool({cls(1, {var("x")}), cls(2, {vexpr(1, '+', 3)})}), InternalError);
    CHECK_THROWS_AS(make_pool({cls(1, {var("a"), vexpr(1, '+', 1)})}), InternalError);
    CHECK_THROWS_AS(
        make_pool({cls(1, {var("a"), vexpr(2, '+', 2)}), cls(2, {var("b"), vexpr(1, '+', 1)})}),
        InternalError);
    CHECK_THROWS_AS(make_pool({cls(1, {vexpr(1, '+', 2), vexpr(2, '+', 1), var("x")}),
                               cls(2, {var("y")})}),
                    InternalError);
}

TEST_CASE("pool rendering is bit-exact and deterministic") {
    ExpressionPool pool = sample_pool();
    CHECK(render(pool) == "{[v1, a, x], [v2, b, y], [v3, v1+v2, z]}");
    CHECK(render(ExpressionPool::empty_partition()) == "{}");
    CHECK(render(ExpressionPool::top()) == "⊤");
    CHECK(render(ExpressionPool::top(), {true}) == "TOP");

    // Constants sit between the value expression and the variables.
    ExpressionPool with_const =
        make_pool({cls(4, {num(7), var("a")}), cls(1, {var("x")}), cls(2, {var("y")}),
                   cls(3, {vexpr(1, '+', 2), var("z")})});
    CHECK(render(with_const) == "{[v4, 7, a], [v1, x], [v2, y], [v3, v1+v2, z]}");
}
