#pragma once

// Shared fixtures and independent oracles for the unit and acceptance tests.

#include <algorithm>
#include <chrono>
#include <random>
#include <string>
#include <vector>

#include "syncplan/syncplan.hpp"

namespace testsupport {

using namespace syncplan;

inline const Rational kRhoLo{19, 20};
inline const Rational kRhoHi{21, 20};

inline std::string data_dir() {
#ifdef SYNCPLAN_DATA_DIR
    return SYNCPLAN_DATA_DIR;
#else
    return "data";
#endif
}

// Two robots: T1 a <-> b (2), T2 a <-> b (2), b <-> c (1).
inline std::vector<RobotModel> example1(Rational lo = kRhoLo, Rational hi = kRhoHi) {
    RobotModel r1{"r1", {}, lo, hi};
    r1.ts.add_state("a");
    r1.ts.add_state("b", {"p1", "pi"});
    r1.ts.add_edge("a", "b", 2);
    r1.ts.add_edge("b", "a", 2);
    r1.ts.set_initial("a");
    RobotModel r2{"r2", {}, lo, hi};
    r2.ts.add_state("a");
    r2.ts.add_state("b", {"p2", "pi"});
    r2.ts.add_state("c", {"p3"});
    r2.ts.add_edge("a", "b", 2);
    r2.ts.add_edge("b", "a", 2);
    r2.ts.add_edge("b", "c", 1);
    r2.ts.add_edge("c", "b", 1);
    r2.ts.set_initial("a");
    return {r1, r2};
}

inline const char* kExample1Formula = "G (p1 -> X (! p1 U p3)) && G F pi";

inline Mission example1_mission() { return make_mission(kExample1Formula, "pi", {"p1", "p2", "p3"}); }

inline std::vector<RobotModel> load_set(const std::string& dir, std::size_t count) {
    std::vector<RobotModel> robots;
    for (std::size_t i = 1; i <= count; ++i)
        robots.push_back(load_robot(data_dir() + "/" + dir + "/robot" + std::to_string(i) + ".ts"));
    return robots;
}

// Random deadlock-free robot: every state has at least one outgoing edge.
inline RobotModel random_robot(std::mt19937_64& rng, const std::string& name, std::size_t max_states,
                               std::int64_t max_weight, const std::vector<std::string>& props, double label_p,
                               Rational lo = kRhoLo, Rational hi = kRhoHi) {
    std::uniform_int_distribution<std::size_t> n_states(1, max_states);
    std::uniform_int_distribution<std::int64_t> weight(1, max_weight);
    std::bernoulli_distribution labeled(label_p);
    RobotModel r{name, {}, lo, hi};
    const std::size_t n = n_states(rng);
    for (std::size_t s = 0; s < n; ++s) {
        Label l;
        for (const auto& p : props)
            if (labeled(rng)) l.insert(p);
        r.ts.add_state("s" + std::to_string(s), l);
    }
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::bernoulli_distribution extra(0.35);
    for (std::size_t s = 0; s < n; ++s) {
        auto from = static_cast<TransitionSystem::StateId>(s);
        auto to = static_cast<TransitionSystem::StateId>(pick(rng));
        if (to == from && n > 1) to = static_cast<TransitionSystem::StateId>((s + 1) % n);
        if (!r.ts.weight(from, to)) r.ts.add_edge(from, to, weight(rng));
        for (std::size_t t = 0; t < n; ++t)
            if (extra(rng) && !r.ts.weight(from, static_cast<TransitionSystem::StateId>(t)))
                r.ts.add_edge(from, static_cast<TransitionSystem::StateId>(t), weight(rng));
    }
    r.ts.set_initial(static_cast<TransitionSystem::StateId>(pick(rng)));
    return r;
}

inline std::vector<RobotModel> random_pair(std::mt19937_64& rng, std::size_t max_states, std::int64_t max_weight) {
    return {random_robot(rng, "r1", max_states, max_weight, {"a", "pi"}, 0.4),
            random_robot(rng, "r2", max_states, max_weight, {"b", "c"}, 0.4)};
}

struct Instance {
    std::string name;
    std::vector<RobotModel> robots;
    Mission mission;
    PipelineResult result;
};

// Mission shapes over robot 1's {a, pi} and robot 2's {b, c}.
inline const std::vector<std::string>& random_missions() {
    static const std::vector<std::string> m = {
        "G F pi",
        "G F pi && G F c",
        "G (a -> X (!a U b)) && G F pi",
        "G (b -> X (!b U a)) && G F pi",
        "G (pi -> !c) && G F pi",
        "G (a -> X (!pi U c)) && G F pi",
        "G F b && G F pi && G (b -> X !b)",
    };
    return m;
}

// Random two-robot instances that plan and synchronize without error.
inline std::vector<Instance> robust_instances(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Instance> out;
    std::uniform_int_distribution<std::size_t> which(0, random_missions().size() - 1);
    for (std::size_t attempt = 0; out.size() < count && attempt < 50 * count; ++attempt) {
        auto robots = random_pair(rng, 4, 3);
        const auto& text = random_missions()[which(rng)];
        auto mission = make_mission(text, "pi", {"a", "b", "c"});
        try {
            auto result = run_pipeline(robots, mission);
            out.push_back({"random#" + std::to_string(attempt) + " [" + text + "]", robots, mission, result});
        } catch (const UnsatisfiableError&) {
        } catch (const NotRobustError&) {
        }
    }
    return out;
}

// Exhaustive optimal cost. For a bound J build the graph of (product state, time since the last
// pi-state) with every gap capped at J; a lasso of cost <= J exists iff that graph has a cycle through
// an accepting state. Feasibility is monotone in J, and any simple cycle through an accepting state
// carries pi (its word satisfies G F pi), so the optimum is at most |P| * max weight.
inline std::optional<Rational> brute_force_cost(const TeamTransitionSystem& team, const Mission& mission) {
    auto g = ltl::graph_of(team.ts, mission.alphabet);
    auto p = ltl::build_product(g, ltl::ltl_to_buchi(mission.formula, mission.alphabet));
    const PropSet pi = mission.pi_bit();
    const std::size_t n = p.size();
    std::int64_t max_w = 0;
    for (const auto& arcs : p.succ)
        for (const auto& a : arcs) max_w = std::max(max_w, a.weight);
    auto feasible = [&](std::int64_t bound) {
        const std::size_t width = static_cast<std::size_t>(bound) + 1;
        auto id = [&](std::size_t s, std::int64_t gap) { return s * width + static_cast<std::size_t>(gap); };
        std::vector<std::vector<std::size_t>> fwd(n * width), rev(n * width);
        for (std::size_t s = 0; s < n; ++s)
            for (std::int64_t gap = 0; gap <= bound; ++gap)
                for (const auto& a : p.succ[s]) {
                    std::int64_t next = gap + a.weight;
                    if (next > bound) continue;
                    if (g.labels[p.states[a.to].first] & pi) next = 0;
                    fwd[id(s, gap)].push_back(id(a.to, next));
                    rev[id(a.to, next)].push_back(id(s, gap));
                }
        // Kosaraju: finishing order on fwd, components on rev.
        const std::size_t total = n * width;
        std::vector<bool> seen(total, false);
        std::vector<std::size_t> order;
        for (std::size_t root = 0; root < total; ++root) {
            if (seen[root]) continue;
            std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
            seen[root] = true;
            while (!stack.empty()) {
                auto& [v, i] = stack.back();
                if (i < fwd[v].size()) {
                    auto w = fwd[v][i++];
                    if (!seen[w]) {
                        seen[w] = true;
                        stack.push_back({w, 0});
                    }
                } else {
                    order.push_back(v);
                    stack.pop_back();
                }
            }
        }
        std::vector<long> comp(total, -1);
        long c = 0;
        for (auto it = order.rbegin(); it != order.rend(); ++it, ++c) {
            if (comp[*it] >= 0) {
                --c;
                continue;
            }
            std::vector<std::size_t> stack{*it};
            comp[*it] = c;
            while (!stack.empty()) {
                auto v = stack.back();
                stack.pop_back();
                for (auto w : rev[v])
                    if (comp[w] < 0) {
                        comp[w] = c;
                        stack.push_back(w);
                    }
            }
        }
        for (std::size_t v = 0; v < total; ++v) {
            if (!p.accepting[v / width]) continue;
            for (auto w : fwd[v])
                if (comp[w] == comp[v]) return true;
        }
        return false;
    };
    std::int64_t lo = 1, hi = static_cast<std::int64_t>(n) * max_w;
    if (hi == 0 || !feasible(hi)) return std::nullopt;
    while (lo < hi) {
        std::int64_t mid = lo + (hi - lo) / 2;
        if (feasible(mid))
            hi = mid;
        else
            lo = mid + 1;
    }
    return Rational(lo);
}

// Removes the wait of robot i on robot j at position k together with its notify.
inline SyncSchedule strip(SyncSchedule s, std::size_t i, std::size_t k, std::size_t j) {
    s.remove(i, k, j);
    return s;
}

struct Stopwatch {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

// Random formula over the given atoms with nesting depth at most `depth`.
inline ltl::Formula random_formula(std::mt19937_64& rng, const Alphabet& al, int depth) {
    using namespace ltl;
    std::uniform_int_distribution<std::size_t> atom(0, al.size() - 1);
    std::uniform_int_distribution<int> op(0, depth <= 0 ? 1 : 11);
    auto leaf = [&] {
        auto i = atom(rng);
        return Formula::atom(al.names()[i], i);
    };
    const int o = op(rng);
    if (o <= 1) return leaf();
    if (o == 11) return Formula::constant(std::bernoulli_distribution(0.5)(rng));
    Formula a = random_formula(rng, al, depth - 1);
    switch (o) {
        case 2: return !a;
        case 3: return next(a);
        case 4: return eventually(a);
        case 5: return globally(a);
        default: break;
    }
    Formula b = random_formula(rng, al, depth - 1);
    switch (o) {
        case 6: return a && b;
        case 7: return a || b;
        case 8: return implies(a, b);
        case 9: return until(a, b);
        default: return release(a, b);
    }
}

// Every lasso with |stem| <= max_stem and 1 <= |loop| <= max_loop over 2^props letters.
inline std::vector<ltl::LassoWord> all_lassos(std::size_t props, std::size_t max_stem, std::size_t max_loop) {
    const PropSet letters = PropSet{1} << props;
    std::vector<std::vector<PropSet>> by_len{{}};
    std::vector<std::vector<std::vector<PropSet>>> all{by_len};
    for (std::size_t len = 1; len <= std::max(max_stem, max_loop); ++len) {
        std::vector<std::vector<PropSet>> next;
        for (const auto& s : all.back())
            for (PropSet l = 0; l < letters; ++l) {
                auto t = s;
                t.push_back(l);
                next.push_back(t);
            }
        all.push_back(next);
    }
    std::vector<ltl::LassoWord> out;
    for (std::size_t sl = 0; sl <= max_stem; ++sl)
        for (std::size_t ll = 1; ll <= max_loop; ++ll)
            for (const auto& stem : all[sl])
                for (const auto& loop : all[ll]) out.push_back({stem, loop});
    return out;
}

}  // namespace testsupport
