#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "support.hpp"

using namespace syncplan;

namespace {

std::set<std::string> state_names(const TransitionSystem& ts) {
    std::set<std::string> out;
    for (TransitionSystem::StateId s = 0; s < ts.size(); ++s) out.insert(ts.name(s));
    return out;
}

std::set<std::tuple<std::string, std::string, std::int64_t>> edge_set(const TransitionSystem& ts) {
    std::set<std::tuple<std::string, std::string, std::int64_t>> out;
    for (TransitionSystem::StateId s = 0; s < ts.size(); ++s)
        for (const auto& e : ts.edges(s)) out.emplace(ts.name(s), ts.name(e.to), e.weight);
    return out;
}

RobotModel loop_robot(const std::string& name) {
    RobotModel r{name, {}, 1, 1};
    r.ts.add_state("q", {"pi"});
    r.ts.add_edge("q", "q", 1);
    r.ts.set_initial("q");
    return r;
}

}  // namespace

TEST_CASE("traveling state names round-trip") {
    CHECK(traveling_name("b", "a", 1) == "b>a@1");
    auto t = parse_traveling("b>a@1");
    REQUIRE(t);
    CHECK(t->src == "b");
    CHECK(t->dst == "a");
    CHECK(t->x == 1);
    CHECK_FALSE(parse_traveling("b,a"));
    CHECK_FALSE(parse_traveling("b>a@0"));
    CHECK_FALSE(parse_traveling("b>a@1x"));
}

TEST_CASE("example1 team TS has six states and eight edges") {
    auto team = construct_team_ts(testsupport::example1());
    CHECK(team.ts.size() == 6);
    CHECK(team.ts.name(team.ts.initial()) == "a,a");
    CHECK(state_names(team.ts) == std::set<std::string>{"a,a", "b,b", "b>a@1,c", "a,b", "b,a", "a>b@1,c"});
    using E = std::tuple<std::string, std::string, std::int64_t>;
    CHECK(edge_set(team.ts) == std::set<E>{{"a,a", "b,b", 2},
                                           {"b,b", "a,a", 2},
                                           {"b,b", "b>a@1,c", 1},
                                           {"b>a@1,c", "a,b", 1},
                                           {"a,b", "a>b@1,c", 1},
                                           {"a,b", "b,a", 2},
                                           {"b,a", "a,b", 2},
                                           {"a>b@1,c", "b,b", 1}});
    CHECK(team.ts.label(team.ts.require("b,b")) == Label{"p1", "p2", "pi"});
    CHECK(team.ts.label(team.ts.require("b>a@1,c")) == Label{"p3"});
    CHECK(team.ts.label(team.ts.require("a,b")) == Label{"p2", "pi"});
    CHECK(team.ts.label(team.ts.require("a,a")).empty());
}

TEST_CASE("a single robot's team TS is the robot itself") {
    auto r = testsupport::example1()[1];
    auto team = construct_team_ts({r});
    CHECK(state_names(team.ts) == state_names(r.ts));
    CHECK(edge_set(team.ts) == edge_set(r.ts));
}

TEST_CASE("two unit self-loop robots give the synchronous product") {
    auto team = construct_team_ts({loop_robot("x"), loop_robot("y")});
    CHECK(team.ts.size() == 1);
    CHECK(team.ts.name(0) == "q,q");
    REQUIRE(team.ts.edges(0).size() == 1);
    CHECK(team.ts.edges(0)[0].weight == 1);
}

TEST_CASE("terminal states are rejected") {
    auto robots = testsupport::example1();
    robots[1].ts.add_state("sink");
    robots[1].ts.add_edge("c", "sink", 1);
    CHECK_THROWS_WITH(construct_team_ts(robots), Catch::Matchers::ContainsSubstring("individual TS has terminal state"));
}

TEST_CASE("example1 region automaton") {
    auto robots = testsupport::example1();
    auto ra = construct_region_automaton(robots);
    auto names = state_names(ra.ts);
    CHECK(names.count("((a>b,b>c),(0,0))") == 1);
    CHECK(names.count("((a>b,b>a),(0,0))") == 1);
    CHECK(names.count("((b>a,c>b),(1,0))") == 1);
    CHECK(ra.ts.name(ra.ts.initial()) == "((a>b,a>b),(0,0))");
    CHECK(ra.ts.size() == 8);
    CHECK(ra.ts.edge_count() == 12);
}

TEST_CASE("single-robot region automaton keeps clocks at zero") {
    RobotModel r{"r", {}, 1, 1};
    r.ts.add_state("a");
    r.ts.add_state("b");
    r.ts.add_edge("a", "b", 2);
    r.ts.add_edge("b", "a", 2);
    r.ts.set_initial("a");
    auto ra = construct_region_automaton({r});
    CHECK(state_names(ra.ts) == std::set<std::string>{"((a>b),(0))", "((b>a),(0))"});
}

TEST_CASE("unit weights leave no residual clocks") {
    std::mt19937_64 rng(3);
    for (int n = 0; n < 10; ++n) {
        auto robots = testsupport::random_pair(rng, 4, 1);
        auto ra = construct_region_automaton(robots);
        for (const auto& s : ra.states)
            for (auto c : s.clock) CHECK(c == 0);
        auto team = construct_team_ts(robots);
        for (const auto& tuple : team.elements)
            for (const auto& e : tuple) CHECK_FALSE(e.traveling());
    }
}

TEST_CASE("relation R maps region states to team states") {
    auto robots = testsupport::example1();
    auto id = [&](std::size_t i, const char* n) { return robots[i].ts.require(n); };
    RegionState s1{{id(0, "b"), id(1, "c")}, {id(0, "a"), id(1, "b")}, {1, 0}};
    CHECK(relation_R_name(robots, s1) == "b>a@1,c");
    RegionState s2{{id(0, "a"), id(1, "a")}, {id(0, "b"), id(1, "b")}, {0, 0}};
    CHECK(relation_R_name(robots, s2) == "a,a");
    RegionState s3{{id(0, "a"), id(1, "b")}, {id(0, "b"), id(1, "c")}, {0, 0}};
    RegionState s4{{id(0, "a"), id(1, "b")}, {id(0, "b"), id(1, "a")}, {0, 0}};
    CHECK(relation_R_name(robots, s3) == "a,b");
    CHECK(relation_R_name(robots, s4) == "a,b");
}

TEST_CASE("bisimulation holds on example1 and catches label corruption") {
    auto robots = testsupport::example1();
    auto team = construct_team_ts(robots);
    auto ra = construct_region_automaton(robots);
    auto ok = check_bisimulation(ra, team);
    CHECK(ok.ok);
    CAPTURE(ok.reason);

    auto corrupted = team;
    corrupted.ts.set_label(corrupted.ts.require("b>a@1,c"), {"p1"});
    auto bad = check_bisimulation(ra, corrupted);
    CHECK_FALSE(bad.ok);
    CHECK(bad.team_state == "b>a@1,c");
    CHECK_FALSE(bad.region_state.empty());
}

TEST_CASE("strict pairwise bisimulation fails where a region state commits to a direction") {
    auto robots = testsupport::example1();
    auto r = check_bisimulation(construct_region_automaton(robots), construct_team_ts(robots),
                                BisimulationMode::Strict);
    CHECK_FALSE(r.ok);
    CHECK(r.reason.find("has no matching region move") != std::string::npos);
}

TEST_CASE("bisimulation detects a dropped team edge") {
    auto robots = testsupport::example1();
    auto team = construct_team_ts(robots);
    TeamTransitionSystem pruned = team;
    pruned.ts = TransitionSystem();
    for (TransitionSystem::StateId s = 0; s < team.ts.size(); ++s) pruned.ts.add_state(team.ts.name(s), team.ts.label(s));
    for (TransitionSystem::StateId s = 0; s < team.ts.size(); ++s)
        for (const auto& e : team.ts.edges(s))
            if (!(team.ts.name(s) == "a,b" && team.ts.name(e.to) == "b,a")) pruned.ts.add_edge(s, e.to, e.weight);
    pruned.ts.set_initial(team.ts.initial());
    CHECK_FALSE(check_bisimulation(construct_region_automaton(robots), pruned).ok);
}

TEST_CASE("state bounds") {
    auto b = state_bounds(testsupport::example1());
    CHECK(b.team == 14);
    CHECK(b.region == 24);
    CHECK(b.naive == 20);

    std::vector<RobotModel> unit;
    for (int i = 0; i < 3; ++i) {
        RobotModel r{"r" + std::to_string(i), {}, 1, 1};
        for (auto n : {"a", "b", "c"}) r.ts.add_state(n);
        r.ts.add_edge("a", "b", 1);
        r.ts.add_edge("b", "c", 1);
        r.ts.add_edge("c", "a", 1);
        unit.push_back(r);
    }
    CHECK(state_bounds(unit).team == 27);
}

TEST_CASE("the team bound can be exceeded when one transition tuple recurs at another offset") {
    std::vector<RobotModel> robots;
    for (std::int64_t w : {2, 3}) {
        RobotModel r{"r" + std::to_string(w), {}, 1, 1};
        r.ts.add_state("q");
        r.ts.add_edge("q", "q", w);
        r.ts.set_initial("q");
        robots.push_back(r);
    }
    // Arrivals at 2, 3, 4 and 6: three traveling states from the single tuple of self-loops.
    auto team = construct_team_ts(robots);
    CHECK(team.ts.size() == 4);
    CHECK(state_bounds(robots).team == 3);
    CHECK(construct_region_automaton(robots).ts.size() == 4);
    CHECK(check_bisimulation(construct_region_automaton(robots), team).ok);
}

TEST_CASE("state bounds report overflow") {
    std::vector<RobotModel> robots;
    for (int i = 0; i < 20; ++i) {
        RobotModel r{"r" + std::to_string(i), {}, 1, 1};
        for (int s = 0; s < 16; ++s) r.ts.add_state("s" + std::to_string(s));
        for (int s = 0; s < 16; ++s) r.ts.add_edge("s" + std::to_string(s), "s" + std::to_string((s + 1) % 16), 5);
        robots.push_back(r);
    }
    CHECK_THROWS_AS(state_bounds(robots), ResourceError);
}

TEST_CASE("graph writer format") {
    std::ostringstream os;
    write_team_ts(os, construct_team_ts(testsupport::example1()));
    std::string text = os.str();
    CHECK(text.rfind("team-ts 6 8\ninitial a,a\n", 0) == 0);
    CHECK(text.find("state b,b {p1,p2,pi}\n") != std::string::npos);
    CHECK(text.find("edge b>a@1,c a,b 1\n") != std::string::npos);
}

TEST_CASE("team construction respects the state cap") {
    ::setenv("SYNCPLAN_MAX_STATES", "3", 1);
    CHECK_THROWS_AS(construct_team_ts(testsupport::example1()), ResourceError);
    ::unsetenv("SYNCPLAN_MAX_STATES");
}
