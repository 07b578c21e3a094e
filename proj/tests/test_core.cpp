#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>

#include "support.hpp"

using namespace syncplan;

TEST_CASE("rational arithmetic is exact and normalized") {
    Rational a(1, 3), b(1, 6);
    CHECK(a + b == Rational(1, 2));
    CHECK(a - b == Rational(1, 6));
    CHECK(a * b == Rational(1, 18));
    CHECK(a / b == Rational(2));
    CHECK(Rational(2, -4) == Rational(-1, 2));
    CHECK(Rational(-1, 2).str() == "-1/2");
    CHECK(Rational(6, 3).is_integer());
    CHECK(Rational(1, 3) < Rational(1, 2));
}

TEST_CASE("rational parsing accepts decimals and fractions") {
    CHECK(Rational::parse("0.95") == Rational(19, 20));
    CHECK(Rational::parse("1.05") == Rational(21, 20));
    CHECK(Rational::parse("7") == Rational(7));
    CHECK(Rational::parse("-3/4") == Rational(-3, 4));
    CHECK_THROWS_AS(Rational::parse("1e-2"), std::invalid_argument);
    CHECK_THROWS_AS(Rational::parse("1/0"), std::invalid_argument);
    CHECK_THROWS_AS(Rational::parse(""), std::invalid_argument);
}

TEST_CASE("alphabet maps labels to bit sets and back") {
    Alphabet al({"pi", "p1", "p2"});
    Label l{"p1", "pi"};
    CHECK(al.label(al.mask(l)) == l);
    CHECK(al.format(al.mask(l)) == "{p1,pi}");
    CHECK_THROWS_AS(al.bit("q"), ModelError);
}

TEST_CASE("transition system rejects malformed edges") {
    TransitionSystem ts;
    ts.add_state("a");
    ts.add_state("b");
    CHECK(ts.add_edge("a", "b", 2));
    CHECK_FALSE(ts.add_edge("a", "b", 2));
    CHECK_THROWS_AS(ts.add_edge("a", "b", 3), ModelError);
    CHECK_THROWS_AS(ts.add_edge("b", "a", 0), ModelError);
    CHECK_THROWS_AS(ts.add_state("a"), ModelError);
    CHECK_THROWS_AS(ts.require("z"), ModelError);
    CHECK(ts.edge_count() == 1);
}

TEST_CASE("edges are kept sorted by target name") {
    TransitionSystem ts;
    for (auto n : {"z", "m", "a"}) ts.add_state(n);
    ts.add_edge("z", "z", 1);
    ts.add_edge("z", "a", 1);
    ts.add_edge("z", "m", 1);
    std::vector<std::string> order;
    for (const auto& e : ts.edges(ts.require("z"))) order.push_back(ts.name(e.to));
    CHECK(order == std::vector<std::string>{"a", "m", "z"});
}

TEST_CASE("is_run_of checks every step including the cycle closure") {
    auto robots = testsupport::example1();
    const auto& t2 = robots[1].ts;
    CHECK(is_run_of(NamedRun{{"a", "b"}, {"c", "b"}}, t2));
    CHECK_FALSE(is_run_of(NamedRun{{"a", "b"}, {"c", "a"}}, t2));
    CHECK_FALSE(is_run_of(NamedRun{{"b"}, {"c", "b"}}, t2));
}

TEST_CASE("fold_lasso recovers the shortest prefix and cycle") {
    auto run = fold_lasso(std::vector<int>{7, 1, 2, 3, 1, 2, 3, 1, 2, 3});
    CHECK(run.prefix == std::vector<int>{7});
    CHECK(run.suffix_cycle == std::vector<int>{1, 2, 3});
    CHECK_THROWS_AS(fold_lasso(std::vector<int>{1, 2, 3}), ModelError);
}

TEST_CASE("extract_pi_times filters by the optimizing proposition") {
    Alphabet al({"a", "pi"});
    PropSet a = al.bit("a"), pi = al.bit("pi");
    TimedWord w;
    w.push(Rational(1), a);
    w.push(Rational(3), pi | a);
    w.push(Rational(7), pi);
    CHECK(extract_pi_times(w, pi) == std::vector<Rational>{3, 7});
    TimedWord none;
    none.push(Rational(1), a);
    CHECK(extract_pi_times(none, pi).empty());
    CHECK_THROWS_AS(w.push(Rational(7), a), ModelError);
}

TEST_CASE("merge_events unions letters at equal times") {
    auto w = merge_events({{Rational(2), 1}, {Rational(1), 4}, {Rational(2), 2}});
    REQUIRE(w.size() == 2);
    CHECK(w.entries[0] == TimedEntry{Rational(1), 4});
    CHECK(w.entries[1] == TimedEntry{Rational(2), 3});
}

TEST_CASE("suffix_cost is the largest steady-state gap") {
    CHECK(suffix_cost({2, 4, 6, 8}, 0) == Rational(2));
    CHECK(suffix_cost({0, 5, 10, 15}, 0) == Rational(5));
    CHECK(suffix_cost({0, 1, 4, 6}, 0) == Rational(3));
    CHECK(suffix_cost({0, 10, 11, 12}, 1) == Rational(1));
    CHECK_THROWS_WITH(suffix_cost({3}, 0), Catch::Matchers::ContainsSubstring("cost undefined"));
}

TEST_CASE("cycle_cost includes the wrap-around gap") {
    CHECK(cycle_cost({0, 2}, Rational(4)) == Rational(2));
    CHECK(cycle_cost({1}, Rational(5)) == Rational(5));
    CHECK(cycle_cost({0, 1, 4}, Rational(6)) == Rational(3));
    CHECK_THROWS_AS(cycle_cost({}, Rational(3)), ModelError);
}

TEST_CASE("field cost bound formula") {
    CHECK(field_cost_bound(2, 4, testsupport::kRhoLo, testsupport::kRhoHi) == Rational(5, 2));
    CHECK(field_cost_bound(7, 3, 1, 1) == Rational(7));
    // Inverting the bound for J = 28, bound = 32.2 at [0.95, 1.05] gives d_s = 28.
    Rational ds = (Rational::parse("32.2") - Rational(28) * testsupport::kRhoHi) /
                  (testsupport::kRhoHi - testsupport::kRhoLo);
    CHECK(ds == Rational(28));
    CHECK(field_cost_bound(28, ds, testsupport::kRhoLo, testsupport::kRhoHi) == Rational::parse("32.2"));
}

TEST_CASE("team deviation bounds take the extremes") {
    auto robots = testsupport::example1();
    robots[1].rho_lower = Rational(9, 10);
    auto [lo, hi] = team_rho(robots);
    CHECK(lo == Rational(9, 10));
    CHECK(hi == Rational(21, 20));
}

TEST_CASE("robot validation rejects inverted deviation bounds") {
    auto robots = testsupport::example1(Rational(11, 10), Rational(21, 20));
    CHECK_THROWS_AS(robots[0].validate(), ModelError);
}

TEST_CASE("state cap honours the environment override") {
    ::setenv("SYNCPLAN_MAX_STATES", "5", 1);
    CHECK(state_cap() == 5);
    CHECK_THROWS_AS(check_state_cap(6, "team TS"), ResourceError);
    ::unsetenv("SYNCPLAN_MAX_STATES");
    CHECK_NOTHROW(check_state_cap(6, "team TS"));
}
