#include <catch2/catch_amalgamated.hpp>

#include "gvn/oracle.hpp"
#include "gvn/redundancy.hpp"
#include "support/builders.hpp"

using namespace gvn;
using namespace testsupport;

namespace {

const RedundancyVerdict& verdict_for(const RedundancyReport& rep, const std::string& node) {
    for (const auto& v : rep.verdicts)
        if (v.node == node) return v;
    throw std::runtime_error("no verdict for " + node);
}

}  // namespace

TEST_CASE("diamond-chain recomputations are detected with no witnesses") {
    FlowGraph g = parse_normalized(read_fixture("diamond_chain.gvn"));
    auto r = run_gvn(g);
    auto rep = detect(g, r);

    const auto& vg = verdict_for(rep, "m");
    CHECK(vg.kind == VerdictKind::Redundant);
    CHECK(vg.redundant);
    CHECK(vg.witnesses.empty());
    REQUIRE(vg.vn);
    // The matched class is the one whose value expression abstracts x + y at
    // the merge (no variable survives both arms).
    const ExpressionPool& ein = r.ein.at("m");
    auto vx = lookup(ein, var("x"));
    auto vy = lookup(ein, var("y"));
    REQUIRE((vx && vy));
    CHECK(lookup(ein, ClassMember{ValueExpression{*vx, Op::Add, *vy}}) == *vg.vn);

    const auto& vh = verdict_for(rep, "m__2");
    CHECK(vh.kind == VerdictKind::Redundant);
    CHECK(vh.witnesses.empty());
    REQUIRE(vh.vn);
    // h = g + z matches the nested class (v13): its value expression is the
    // x+y class combined with z's class.
    const ExpressionPool& ein_h = r.ein.at("m__2");
    auto vz = lookup(ein_h, var("z"));
    auto vg_class = lookup(ein_h, var("g"));
    REQUIRE((vz && vg_class));
    CHECK(lookup(ein_h, ClassMember{ValueExpression{*vg_class, Op::Add, *vz}}) == *vh.vn);

    CHECK(rep.counts.redundant == 2);
    CHECK(rep.counts.novel == 4);
    CHECK(rep.counts.copies == 4);
}

TEST_CASE("a recomputation with a live variable witness names it") {
    FlowGraph g = parse_normalized(read_fixture("pair.gvn"));
    auto r = run_gvn(g);
    auto rep = detect(g, r);

    CHECK(verdict_for(rep, "n1").kind == VerdictKind::Novel);
    const auto& second = verdict_for(rep, "n2");
    CHECK(second.kind == VerdictKind::Redundant);
    CHECK(second.witnesses == std::vector<std::string>{"a"});

    // Oracle view: a and b hold the same term after the second assignment.
    auto hp = herbrand_partition(g, ProgramPoint::output("n2"), 0);
    bool together = false;
    for (const auto& c : hp.classes) {
        bool has_a = false, has_b = false;
        for (const auto& item : c) {
            if (render_item(item) == "a") has_a = true;
            if (render_item(item) == "b") has_b = true;
        }
        together = together || (has_a && has_b);
    }
    CHECK(together);
}

TEST_CASE("copies and constants are classified apart from computations") {
    FlowGraph g = parse_normalized(
        "graph t\nnode n0\nnode s { a = 5 ; b = a ; c = 5 }\nedge n0 -> s\nentry n0\nexit s\n");
    auto r = run_gvn(g);
    auto rep = detect(g, r);
    CHECK(verdict_for(rep, "s").kind == VerdictKind::Copy);
    CHECK(!verdict_for(rep, "s").redundant);  // 5 not seen before the first assignment
    CHECK(verdict_for(rep, "s__2").kind == VerdictKind::Copy);
    CHECK(verdict_for(rep, "s__2").redundant);
    CHECK(verdict_for(rep, "s__3").kind == VerdictKind::Copy);
    CHECK(verdict_for(rep, "s__3").redundant);  // 5 has a class by now
    CHECK(rep.counts.redundant == 0);
    CHECK(rep.counts.copies == 3);
}

TEST_CASE("statements on unreachable nodes are reported as such") {
    FlowGraph g = parse_normalized(read_fixture("unreachable.gvn"));
    auto r = run_gvn(g);
    auto rep = detect(g, r);
    CHECK(verdict_for(rep, "dead").kind == VerdictKind::Unreachable);
    CHECK(rep.counts.unreachable == 1);
}

TEST_CASE("eliminate rewrites witnessed redundancies into copies") {
    FlowGraph g = parse_normalized(read_fixture("pair.gvn"));
    auto r = run_gvn(g);
    auto rewritten = eliminate(g, detect(g, r), r);
    const Statement* st = rewritten.node("n2").single_statement();
    REQUIRE(st);
    CHECK(*st == Statement{"b", Expression::operand(Variable{"a"})});
    CHECK(same_path_semantics(g, rewritten, collect_variables(g)));
}

TEST_CASE("eliminate leaves witness-less redundancies untouched") {
    FlowGraph g = parse_normalized(read_fixture("diamond_chain.gvn"));
    auto r = run_gvn(g);
    auto rep = detect(g, r);
    FlowGraph rewritten = eliminate(g, rep, r);
    CHECK(rewritten == g);
    CHECK(rep.counts.redundant == 2);
}

TEST_CASE("eliminate is the identity on graphs without redundancies") {
    FlowGraph g = parse_normalized(read_fixture("straightline.gvn"));
    auto r = run_gvn(g);
    CHECK(eliminate(g, detect(g, r), r) == g);
}

TEST_CASE("eliminate never rewrites a statement whose target is the only witness") {
    FlowGraph g = parse_normalized(
        "graph t\nnode n0\nnode s { a = x + y ; a = x + y }\nedge n0 -> s\nentry n0\nexit s\n");
    auto r = run_gvn(g);
    auto rep = detect(g, r);
    const auto& second = rep.verdicts.at(1);
    CHECK(second.kind == VerdictKind::Redundant);
    CHECK(second.witnesses == std::vector<std::string>{"a"});
    FlowGraph rewritten = eliminate(g, rep, r);
    CHECK(rewritten == g);
}

TEST_CASE("a second detect and eliminate pass changes nothing") {
    for (const char* fixture : {"pair.gvn", "diamond_chain.gvn"}) {
        FlowGraph g = parse_normalized(read_fixture(fixture));
        auto r1 = run_gvn(g);
        FlowGraph once = eliminate(g, detect(g, r1), r1);
        auto r2 = run_gvn(once);
        FlowGraph twice = eliminate(once, detect(once, r2), r2);
        CHECK(twice == once);
    }
}

TEST_CASE("elimination preserves semantics on random programs") {
    for (std::uint64_t seed = 100; seed < 130; ++seed) {
        FlowGraph g = normalize(random_program(seed, 4 + seed % 4, 8 + seed % 8, 1 + seed % 2));
        auto r = run_gvn(g);
        FlowGraph rewritten = eliminate(g, detect(g, r), r);
        CHECK(same_path_semantics(g, rewritten, collect_variables(g)));
    }
}

TEST_CASE("detect refuses results that are not a fixpoint") {
    FlowGraph g = parse_normalized(read_fixture("pair.gvn"));
    auto r = run_gvn(g);
    AnalysisResult corrupt = r;
    corrupt.eout.at("n2") = ExpressionPool::empty_partition();
    CHECK_THROWS_AS(detect(g, corrupt), std::invalid_argument);

    AnalysisResult missing = r;
    missing.ein.erase("n1");
    CHECK_THROWS_AS(detect(g, missing), std::invalid_argument);
}
