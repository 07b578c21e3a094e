#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "support.hpp"

using namespace syncplan;
using namespace syncplan::ltl;

namespace {

const Alphabet kEx1({"p1", "p2", "p3", "pi"});

PropSet L(std::initializer_list<const char*> props) {
    PropSet m = 0;
    for (auto p : props) m |= kEx1.bit(p);
    return m;
}

// Planned word of the example1 team run.
LassoWord example1_word() {
    return {{L({}), L({"p1", "p2", "pi"})}, {L({"p3"}), L({"p2", "pi"}), L({"p3"}), L({"p1", "p2", "pi"})}};
}

}  // namespace

TEST_CASE("parser builds the example1 mission tree") {
    auto f = parse_ltl("G (p1 -> X (! p1 U p3)) && G F pi", kEx1);
    auto p1 = Formula::atom("p1", 0), p3 = Formula::atom("p3", 2), pi = Formula::atom("pi", 3);
    auto expected = globally(implies(p1, next(until(!p1, p3)))) && globally(eventually(pi));
    CHECK(f == expected);
}

TEST_CASE("parser precedence and associativity") {
    Alphabet al({"p", "p1", "p2", "p3"});
    auto a = Formula::atom("p1", 1), b = Formula::atom("p2", 2), c = Formula::atom("p3", 3);
    CHECK(parse_ltl("p", al) == Formula::atom("p", 0));
    CHECK(parse_ltl("p1 U p2 U p3", al) == until(a, until(b, c)));
    CHECK(parse_ltl("p1 -> p2 -> p3", al) == implies(a, implies(b, c)));
    CHECK(parse_ltl("p1 || p2 && p3", al) == (a || (b && c)));
    CHECK(parse_ltl("p1 && p2 U p3", al) == (a && until(b, c)));
    CHECK(parse_ltl("! p1 U p2", al) == until(!a, b));
    CHECK(parse_ltl("X F G p1", al) == next(eventually(globally(a))));
    CHECK(parse_ltl("p1 R p2", al) == release(a, b));
    CHECK(parse_ltl("true && false", al) == (Formula::constant(true) && Formula::constant(false)));
}

TEST_CASE("printing round-trips through the parser") {
    std::mt19937_64 rng(11);
    Alphabet al({"a", "b", "c"});
    for (int n = 0; n < 300; ++n) {
        auto f = testsupport::random_formula(rng, al, 4);
        CAPTURE(to_string(f));
        CHECK(parse_ltl(to_string(f), al) == f);
    }
}

TEST_CASE("parser errors") {
    Alphabet al({"p"});
    CHECK_THROWS_AS(parse_ltl("q", al), ParseError);
    CHECK_THROWS_AS(parse_ltl("p &&", al), ParseError);
    CHECK_THROWS_AS(parse_ltl("(p", al), ParseError);
    CHECK_THROWS_AS(parse_ltl("p p", al), ParseError);
    CHECK_THROWS_AS(parse_ltl("", al), ParseError);
}

TEST_CASE("eval_lasso on hand-checked words") {
    Alphabet al({"pi"});
    auto f = parse_ltl("G F pi", al);
    PropSet pi = al.bit("pi");
    CHECK(eval_lasso(f, {{}, {pi, 0}}));
    CHECK_FALSE(eval_lasso(f, {{pi}, {0}}));
    CHECK(eval_lasso(parse_ltl("G (p1 -> X (! p1 U p3))", kEx1), example1_word()));
    CHECK(eval_lasso(parse_ltl("G (p1 -> X (! p1 U p3)) && G F pi", kEx1), example1_word()));
    // Two p1 letters with no p3 between them.
    LassoWord bad{{}, {L({"p1", "pi"}), L({}), L({"p1", "pi"}), L({"p3"})}};
    CHECK_FALSE(eval_lasso(parse_ltl("G (p1 -> X (! p1 U p3))", kEx1), bad));
}

TEST_CASE("negation normal form preserves semantics") {
    std::mt19937_64 rng(5);
    Alphabet al({"a", "b"});
    auto words = testsupport::all_lassos(2, 1, 2);
    for (int n = 0; n < 100; ++n) {
        auto f = testsupport::random_formula(rng, al, 4);
        auto g = to_nnf(f);
        REQUIRE(is_nnf(g));
        for (const auto& w : words) REQUIRE(eval_lasso(f, w) == eval_lasso(g, w));
    }
}

TEST_CASE("G F pi automaton agrees with eval_lasso exhaustively") {
    Alphabet al({"pi"});
    auto f = parse_ltl("G F pi", al);
    auto b = ltl_to_buchi(f, al);
    for (const auto& w : testsupport::all_lassos(1, 2, 2)) CHECK(accepts(b, w) == eval_lasso(f, w));
}

TEST_CASE("false has an empty automaton") {
    Alphabet al({"p"});
    auto b = ltl_to_buchi(Formula::constant(false), al);
    CHECK_FALSE(find_accepting_lasso(b).has_value());
    auto t = ltl_to_buchi(Formula::constant(true), al);
    CHECK(find_accepting_lasso(t).has_value());
}

TEST_CASE("G F pi automaton is nonempty with a pi letter in the loop") {
    Alphabet al({"pi"});
    auto b = ltl_to_buchi(parse_ltl("G F pi", al), al);
    auto w = find_accepting_lasso(b);
    REQUIRE(w);
    auto word = witness_word(b, *w);
    bool has_pi = false;
    for (auto l : word.loop) has_pi |= (l & al.bit("pi")) != 0;
    CHECK(has_pi);
}

TEST_CASE("unreachable accepting state means empty") {
    BuchiAutomaton b;
    b.alphabet = Alphabet({"p"});
    b.names = {"init", "loop", "acc"};
    b.initial = {0};
    b.out = {{{1, {}}}, {{1, {}}}, {{2, {}}}};
    b.accepting = {false, false, true};
    CHECK_FALSE(find_accepting_lasso(b).has_value());
    // A guard requiring p and not p is unsatisfiable.
    b.out[1].push_back({2, Guard{1, 1}});
    CHECK_FALSE(find_accepting_lasso(b).has_value());
    b.out[1].push_back({2, Guard{1, 0}});
    CHECK(find_accepting_lasso(b).has_value());
}

TEST_CASE("negated example1 mission accepts a violating word") {
    auto phi = parse_ltl("G (p1 -> X (! p1 U p3)) && G F pi", kEx1);
    auto b_neg = ltl_to_buchi(!phi, kEx1);
    LassoWord bad{{}, {L({"p1", "pi"}), L({"p2"}), L({"p1", "pi"}), L({"p3"})}};
    CHECK_FALSE(eval_lasso(phi, bad));
    CHECK(accepts(b_neg, bad));
    CHECK_FALSE(accepts(b_neg, example1_word()));
    auto b = ltl_to_buchi(phi, kEx1);
    CHECK(accepts(b, example1_word()));
    CHECK_FALSE(accepts(b, bad));
}

TEST_CASE("a witness of a nonempty product is an accepting lasso") {
    auto phi = parse_ltl("G (p1 -> X (! p1 U p3)) && G F pi", kEx1);
    auto b_neg = ltl_to_buchi(!phi, kEx1);
    auto w = find_accepting_lasso(b_neg);
    REQUIRE(w);
    auto word = witness_word(b_neg, *w);
    CHECK_FALSE(eval_lasso(phi, word));
}

TEST_CASE("product of a one-state pi loop with G F pi") {
    TransitionSystem ts;
    ts.add_state("q", {"pi"});
    ts.add_edge("q", "q", 1);
    Alphabet al({"pi"});
    auto p = build_product(graph_of(ts, al), ltl_to_buchi(parse_ltl("G F pi", al), al));
    auto w = find_accepting_lasso(p);
    REQUIRE(w);
    // Every cycle state projects to q and every cycle arc costs one time unit.
    for (std::size_t k = 0; k < w->cycle.size(); ++k) {
        auto from = w->cycle[k], to = w->cycle[(k + 1) % w->cycle.size()];
        CHECK(p.states[from].first == 0);
        bool found = false;
        for (const auto& a : p.succ[from]) found |= a.to == to && a.weight == 1;
        CHECK(found);
    }
}

TEST_CASE("any product with false is empty") {
    auto robots = testsupport::example1();
    auto team = construct_team_ts(robots);
    auto p = build_product(graph_of(team.ts, kEx1), ltl_to_buchi(Formula::constant(false), kEx1));
    CHECK(is_empty(p));
}

TEST_CASE("automaton writer lists states and guards") {
    Alphabet al({"pi"});
    std::ostringstream os;
    write_buchi(os, ltl_to_buchi(parse_ltl("G F pi", al), al));
    CHECK(os.str().rfind("buchi ", 0) == 0);
    CHECK(os.str().find("edge ") != std::string::npos);
}

TEST_CASE("mission requires the recurrence conjunct") {
    CHECK_NOTHROW(make_mission("G F pi && G (a -> X b)", "pi", {"a", "b"}));
    CHECK_THROWS_AS(make_mission("G (a -> X b)", "pi", {"a", "b"}), ParseError);
    CHECK_THROWS_AS(make_mission("F G pi", "pi", {}), ParseError);
}
