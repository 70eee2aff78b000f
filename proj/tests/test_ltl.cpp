#include "doctest.h"
#include "lasso_oracle.hpp"

#include "wfv/ltl.hpp"

#include <random>

using namespace wfv::ltl;
using wfv::testing::compare_on_lassos;
using wfv::testing::random_formula;

namespace {

const std::set<std::string> kProps{"p", "q", "r"};

FormulaPtr P(const char* n) { return make_prop(n); }

} // namespace

TEST_CASE("parse: objective formula")
{
    auto f = parse_formula("[] (p -> <> (q || r))", kProps);
    CHECK(equal(f, make_always(make_implies(P("p"), make_eventually(make_or(P("q"), P("r")))))));
}

TEST_CASE("parse: response formula")
{
    auto f = parse_formula("[] ((p && q) -> <> (r))", kProps);
    CHECK(equal(f, make_always(make_implies(make_and(P("p"), P("q")), make_eventually(P("r"))))));
}

TEST_CASE("parse: precedence and associativity")
{
    CHECK(equal(parse_formula("p", kProps), P("p")));
    CHECK(equal(parse_formula("p U q && r", kProps), make_and(make_until(P("p"), P("q")), P("r"))));
    CHECK(equal(parse_formula("p && q || r", kProps), make_or(make_and(P("p"), P("q")), P("r"))));
    CHECK(equal(parse_formula("p -> q -> r", kProps), make_implies(P("p"), make_implies(P("q"), P("r")))));
    CHECK(equal(parse_formula("p U q U r", kProps), make_until(P("p"), make_until(P("q"), P("r")))));
    CHECK(equal(parse_formula("[]p U q", kProps), make_until(make_always(P("p")), P("q"))));
    CHECK(equal(parse_formula("!X p", kProps), make_not(make_next(P("p")))));
    CHECK(equal(parse_formula("true U false", kProps), make_until(make_true(), make_false())));
}

TEST_CASE("parse: errors")
{
    CHECK_THROWS_AS(parse_formula("", kProps), wfv::SyntaxError);
    CHECK_THROWS_AS(parse_formula("p &&", kProps), wfv::SyntaxError);
    CHECK_THROWS_AS(parse_formula("(p", kProps), wfv::SyntaxError);
    CHECK_THROWS_AS(parse_formula("p q", kProps), wfv::SyntaxError);
    CHECK_THROWS_AS(parse_formula("[] zz", kProps), UnknownProposition);
    try {
        parse_formula("p && )", kProps);
        FAIL("expected a syntax error");
    } catch (const wfv::SyntaxError& e) {
        CHECK(e.pos().column == 6);
    }
}

TEST_CASE("normalize: dualities")
{
    CHECK(equal(normalize_negation(make_not(make_always(P("p")))), make_eventually(make_not(P("p")))));
    CHECK(equal(normalize_negation(make_not(make_eventually(make_or(P("q"), P("r"))))),
                make_always(make_and(make_not(P("q")), make_not(P("r"))))));
    CHECK(equal(normalize_negation(make_not(make_until(P("p"), P("q")))),
                make_release(make_not(P("p")), make_not(P("q")))));
    CHECK(equal(normalize_negation(make_not(make_next(P("p")))), make_next(make_not(P("p")))));
    CHECK(equal(normalize_negation(make_not(make_not(P("p")))), P("p")));
}

TEST_CASE("normalize: idempotent on random formulas")
{
    std::mt19937 rng(2024);
    for (int i = 0; i < 1000; ++i) {
        auto f = random_formula(rng, 5);
        auto n = normalize_negation(f);
        CHECK(is_nnf(n));
        CHECK(equal(normalize_negation(n), n));
    }
}

TEST_CASE("automaton: always p")
{
    auto a = ltl_to_buchi(normalize_negation(parse_formula("[] p", kProps)));
    REQUIRE(a.states.size() == 1);
    CHECK(a.states[0].accepting);
    REQUIRE(a.states[0].edges.size() == 1);
    CHECK(a.states[0].edges[0].to == 0);
    CHECK(a.guard_text(a.states[0].edges[0]) == "p");
}

TEST_CASE("automaton: eventually p")
{
    auto a = ltl_to_buchi(normalize_negation(parse_formula("<> p", kProps)));
    REQUIRE(a.states.size() == 2);
    const auto& waiting = a.states[static_cast<std::size_t>(a.initial)];
    CHECK_FALSE(waiting.accepting);
    int done = 1 - a.initial;
    bool loops_on_true = false, moves_on_p = false;
    for (const auto& e : waiting.edges) {
        if (e.to == a.initial && a.guard_text(e) == "true") loops_on_true = true;
        if (e.to == done && a.guard_text(e) == "p") moves_on_p = true;
    }
    CHECK(loops_on_true);
    CHECK(moves_on_p);
    const auto& accepted = a.states[static_cast<std::size_t>(done)];
    CHECK(accepted.accepting);
    REQUIRE(accepted.edges.size() == 1);
    CHECK(accepted.edges[0].to == done);
    CHECK(a.guard_text(accepted.edges[0]) == "true");
}

TEST_CASE("automaton: contradictory next obligation is a rejecting sink")
{
    auto a = ltl_to_buchi(normalize_negation(parse_formula("X false", kProps)));
    bool sink = false;
    for (const auto& s : a.states) sink = sink || s.edges.empty();
    CHECK(sink);
    CHECK(compare_on_lassos(make_next(make_false()), a, 3).mismatches == 0);
}

TEST_CASE("automaton: objective and response formulas agree with lasso semantics")
{
    for (const char* text : {"[] (p -> <> (q || r))", "[] ((p && q) -> <> (r))"}) {
        auto f = parse_formula(text, kProps);
        auto pos = compare_on_lassos(f, ltl_to_buchi(normalize_negation(f)));
        CHECK_MESSAGE(pos.mismatches == 0, text, " ", pos.first_mismatch);
        auto neg = compare_on_lassos(make_not(f), ltl_to_buchi(normalize_negation(make_not(f))));
        CHECK_MESSAGE(neg.mismatches == 0, text, " negated ", neg.first_mismatch);
        CHECK(pos.lassos > 1'000'000);
    }
}

TEST_CASE("automaton: random formulas agree with lasso semantics")
{
    std::mt19937 rng(77);
    for (int i = 0; i < 40; ++i) {
        auto f = random_formula(rng, 4);
        auto rep = compare_on_lassos(f, ltl_to_buchi(normalize_negation(f)), 5);
        CHECK_MESSAGE(rep.mismatches == 0, to_string(f), " ", rep.first_mismatch);
    }
}

TEST_CASE("duality: f and !normalize(!f) agree on lassos")
{
    std::mt19937 rng(99);
    for (int i = 0; i < 30; ++i) {
        auto f = random_formula(rng, 5);
        auto dual = make_not(normalize_negation(make_not(f)));
        // both agree with one automaton, hence with each other
        auto a = ltl_to_buchi(normalize_negation(f));
        CHECK_MESSAGE(compare_on_lassos(f, a, 4).mismatches == 0, to_string(f));
        CHECK_MESSAGE(compare_on_lassos(dual, a, 4).mismatches == 0, to_string(f));
    }
}

TEST_CASE("lasso oracle rejects wrong automata")
{
    auto f = parse_formula("[] (p -> <> (q || r))", kProps);
    auto negated = ltl_to_buchi(normalize_negation(make_not(f)));
    CHECK(compare_on_lassos(f, negated, 4).mismatches > 0);

    auto eventually = ltl_to_buchi(normalize_negation(parse_formula("<> p", kProps)));
    for (auto& s : eventually.states) s.accepting = !s.accepting;
    CHECK(compare_on_lassos(parse_formula("<> p", kProps), eventually, 3).mismatches > 0);

    auto always = ltl_to_buchi(normalize_negation(parse_formula("[] p", kProps)));
    always.states[0].edges[0].pos = 0; // guard dropped
    CHECK(compare_on_lassos(parse_formula("[] p", kProps), always, 2).mismatches > 0);
}
