#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "syncplan/core.hpp"
#include "syncplan/error.hpp"

namespace syncplan {

// Robot i is either at vertex src (x == 0) or x time units along the edge src -> dst.
struct TeamElement {
    TransitionSystem::StateId src = 0;
    TransitionSystem::StateId dst = 0;
    std::int64_t x = 0;

    bool traveling() const { return x > 0; }
    friend bool operator==(const TeamElement&, const TeamElement&) = default;
};

struct TravelingState {
    std::string src;
    std::string dst;
    std::int64_t x = 0;
};

inline std::string traveling_name(const std::string& src, const std::string& dst, std::int64_t x) {
    return src + ">" + dst + "@" + std::to_string(x);
}

inline std::optional<TravelingState> parse_traveling(const std::string& name) {
    auto gt = name.find('>');
    auto at = name.find('@');
    if (gt == std::string::npos || at == std::string::npos || at < gt) return std::nullopt;
    TravelingState t{name.substr(0, gt), name.substr(gt + 1, at - gt - 1), 0};
    try {
        std::size_t used = 0;
        t.x = std::stoll(name.substr(at + 1), &used);
        if (used != name.size() - at - 1 || t.x <= 0) return std::nullopt;
    } catch (const std::exception&) {
        return std::nullopt;
    }
    return t;
}

inline std::string element_name(const RobotModel& r, const TeamElement& e) {
    if (!e.traveling()) return r.ts.name(e.src);
    return traveling_name(r.ts.name(e.src), r.ts.name(e.dst), e.x);
}

inline std::string join_names(const std::vector<std::string>& parts) {
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) s += ",";
        s += parts[i];
    }
    return s;
}

struct TeamTransitionSystem {
    TransitionSystem ts;
    std::vector<RobotModel> robots;
    std::vector<std::vector<TeamElement>> elements;  // per team state, one element per robot

    std::size_t robot_count() const { return robots.size(); }
    std::string element_name(TransitionSystem::StateId s, std::size_t i) const {
        return syncplan::element_name(robots[i], elements[s][i]);
    }
};

inline void require_deadlock_free(const std::vector<RobotModel>& robots) {
    for (const auto& r : robots)
        for (auto s : r.ts.reachable())
            if (r.ts.edges(s).empty())
                throw ModelError("individual TS has terminal state: robot '" + r.name + "', state '" + r.ts.name(s) + "'");
}

namespace detail {

inline Label team_label(const std::vector<RobotModel>& robots, const std::vector<TeamElement>& tuple) {
    Label l;
    for (std::size_t i = 0; i < robots.size(); ++i)
        if (!tuple[i].traveling()) {
            const auto& li = robots[i].ts.label(tuple[i].src);
            l.insert(li.begin(), li.end());
        }
    return l;
}

inline std::string tuple_name(const std::vector<RobotModel>& robots, const std::vector<TeamElement>& tuple) {
    std::vector<std::string> parts;
    for (std::size_t i = 0; i < robots.size(); ++i) parts.push_back(element_name(robots[i], tuple[i]));
    return join_names(parts);
}

// Edge choices per robot at a team state: all outgoing edges at a vertex, the in-flight edge otherwise.
inline std::vector<std::vector<TransitionSystem::Edge>> edge_choices(const std::vector<RobotModel>& robots,
                                                                     const std::vector<TeamElement>& tuple) {
    std::vector<std::vector<TransitionSystem::Edge>> choices(robots.size());
    for (std::size_t i = 0; i < robots.size(); ++i) {
        const auto& e = tuple[i];
        if (e.traveling())
            choices[i].push_back({e.dst, *robots[i].ts.weight(e.src, e.dst)});
        else
            choices[i] = robots[i].ts.edges(e.src);
    }
    return choices;
}

}  // namespace detail

// Depth-first construction from the tuple of initial vertices. Transition tuples are enumerated
// lexicographically (robot 1 slowest, each robot's edges in target-name order), so numbering is stable.
inline TeamTransitionSystem construct_team_ts(const std::vector<RobotModel>& robots) {
    if (robots.empty()) throw ModelError("at least one robot is required");
    for (const auto& r : robots) r.validate();
    require_deadlock_free(robots);

    TeamTransitionSystem team;
    team.robots = robots;
    const std::size_t m = robots.size();
    std::unordered_map<std::string, TransitionSystem::StateId> index;

    auto intern = [&](const std::vector<TeamElement>& tuple) -> std::pair<TransitionSystem::StateId, bool> {
        std::string name = detail::tuple_name(robots, tuple);
        auto it = index.find(name);
        if (it != index.end()) return {it->second, false};
        auto id = team.ts.add_state(name, detail::team_label(robots, tuple));
        team.elements.push_back(tuple);
        index.emplace(std::move(name), id);
        check_state_cap(team.ts.size(), "team transition system");
        return {id, true};
    };

    std::vector<TeamElement> init(m);
    for (std::size_t i = 0; i < m; ++i) init[i] = {robots[i].ts.initial(), robots[i].ts.initial(), 0};
    auto root = intern(init).first;
    team.ts.set_initial(root);

    struct Frame {
        TransitionSystem::StateId state;
        std::vector<std::vector<TransitionSystem::Edge>> choices;
        std::vector<std::size_t> odometer;
        bool done = false;
    };
    auto make_frame = [&](TransitionSystem::StateId s) {
        Frame f{s, detail::edge_choices(robots, team.elements[s]), std::vector<std::size_t>(m, 0)};
        return f;
    };
    std::vector<Frame> stack;
    stack.push_back(make_frame(root));
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.done) {
            stack.pop_back();
            continue;
        }
        const auto& cur = team.elements[f.state];
        std::int64_t w = std::numeric_limits<std::int64_t>::max();
        for (std::size_t i = 0; i < m; ++i) w = std::min(w, f.choices[i][f.odometer[i]].weight - cur[i].x);
        std::vector<TeamElement> next(m);
        for (std::size_t i = 0; i < m; ++i) {
            const auto& e = f.choices[i][f.odometer[i]];
            std::int64_t remaining = e.weight - cur[i].x;
            if (remaining == w)
                next[i] = {e.to, e.to, 0};
            else
                next[i] = {cur[i].src, e.to, cur[i].x + w};
        }
        // advance the odometer, last robot fastest
        std::size_t k = m;
        while (k > 0) {
            --k;
            if (++f.odometer[k] < f.choices[k].size()) break;
            f.odometer[k] = 0;
            if (k == 0) f.done = true;
        }
        auto from = f.state;
        auto [to, fresh] = intern(next);
        team.ts.add_edge(from, to, w);
        if (fresh) stack.push_back(make_frame(to));
    }
    return team;
}

// Region automaton state: robot i is on edge src_i -> dst_i with clock x_i.
struct RegionState {
    std::vector<TransitionSystem::StateId> src;
    std::vector<TransitionSystem::StateId> dst;
    std::vector<std::int64_t> clock;
    friend bool operator==(const RegionState&, const RegionState&) = default;
};

struct RegionAutomaton {
    TransitionSystem ts;  // initial() is the first of initial_states
    std::vector<RegionState> states;
    std::vector<TransitionSystem::StateId> initial_states;
};

inline std::string region_name(const std::vector<RobotModel>& robots, const RegionState& s) {
    std::string pairs;
    std::string clocks;
    for (std::size_t i = 0; i < robots.size(); ++i) {
        if (i) {
            pairs += ",";
            clocks += ",";
        }
        pairs += robots[i].ts.name(s.src[i]) + ">" + robots[i].ts.name(s.dst[i]);
        clocks += std::to_string(s.clock[i]);
    }
    return "((" + pairs + "),(" + clocks + "))";
}

// Reachable part of the region automaton, explored breadth-first from all initial edge combinations.
inline RegionAutomaton construct_region_automaton(const std::vector<RobotModel>& robots) {
    if (robots.empty()) throw ModelError("at least one robot is required");
    require_deadlock_free(robots);
    const std::size_t m = robots.size();
    RegionAutomaton ra;
    std::unordered_map<std::string, TransitionSystem::StateId> index;

    auto label_of = [&](const RegionState& s) {
        Label l;
        for (std::size_t i = 0; i < m; ++i)
            if (s.clock[i] == 0) {
                const auto& li = robots[i].ts.label(s.src[i]);
                l.insert(li.begin(), li.end());
            }
        return l;
    };
    auto intern = [&](const RegionState& s) {
        std::string name = region_name(robots, s);
        auto it = index.find(name);
        if (it != index.end()) return it->second;
        auto id = ra.ts.add_state(name, label_of(s));
        ra.states.push_back(s);
        index.emplace(std::move(name), id);
        check_state_cap(ra.ts.size(), "region automaton");
        return id;
    };
    // every combination of one outgoing edge per robot from the given sources
    auto for_each_combo = [&](const std::vector<TransitionSystem::StateId>& from, const std::vector<bool>& choose,
                              const RegionState& base, auto&& fn) {
        std::vector<std::size_t> odo(m, 0);
        while (true) {
            RegionState s = base;
            for (std::size_t i = 0; i < m; ++i)
                if (choose[i]) {
                    s.src[i] = from[i];
                    s.dst[i] = robots[i].ts.edges(from[i])[odo[i]].to;
                    s.clock[i] = 0;
                }
            fn(s);
            std::size_t k = m;
            while (true) {
                if (k == 0) return;
                --k;
                if (!choose[k]) continue;
                if (++odo[k] < robots[k].ts.edges(from[k]).size()) break;
                odo[k] = 0;
            }
        }
    };

    RegionState base{std::vector<TransitionSystem::StateId>(m), std::vector<TransitionSystem::StateId>(m),
                     std::vector<std::int64_t>(m, 0)};
    std::vector<TransitionSystem::StateId> init(m);
    for (std::size_t i = 0; i < m; ++i) init[i] = robots[i].ts.initial();
    for_each_combo(init, std::vector<bool>(m, true), base, [&](const RegionState& s) {
        auto id = intern(s);
        if (std::find(ra.initial_states.begin(), ra.initial_states.end(), id) == ra.initial_states.end())
            ra.initial_states.push_back(id);
    });
    ra.ts.set_initial(ra.initial_states.front());

    for (std::size_t k = 0; k < ra.states.size(); ++k) {
        const RegionState cur = ra.states[k];
        std::int64_t w = std::numeric_limits<std::int64_t>::max();
        std::vector<std::int64_t> rem(m);
        for (std::size_t i = 0; i < m; ++i) {
            rem[i] = *robots[i].ts.weight(cur.src[i], cur.dst[i]) - cur.clock[i];
            w = std::min(w, rem[i]);
        }
        std::vector<bool> changed(m);
        RegionState next = cur;
        for (std::size_t i = 0; i < m; ++i) {
            changed[i] = rem[i] == w;
            if (!changed[i]) next.clock[i] += w;
        }
        for_each_combo(cur.dst, changed, next, [&](const RegionState& s) {
            auto to = intern(s);
            ra.ts.add_edge(static_cast<TransitionSystem::StateId>(k), to, w);
        });
    }
    return ra;
}

// Team state related to a region state: vertex when the clock is zero, traveling state otherwise.
inline std::vector<TeamElement> relation_R(const RegionState& s) {
    std::vector<TeamElement> t(s.src.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = s.clock[i] == 0 ? TeamElement{s.src[i], s.src[i], 0} : TeamElement{s.src[i], s.dst[i], s.clock[i]};
    return t;
}

inline std::string relation_R_name(const std::vector<RobotModel>& robots, const RegionState& s) {
    return detail::tuple_name(robots, relation_R(s));
}

struct BisimulationResult {
    bool ok = true;
    std::string region_state;
    std::string team_state;
    std::string reason;
};

enum class BisimulationMode {
    // Team moves must be matched by some region state related to the team state. This is the
    // condition the quotient construction guarantees.
    Quotient,
    // Team moves must be matched by every related region state. Region states fix a robot's next
    // direction early, so this fails whenever a vertex has more than one outgoing edge.
    Strict,
};

// Checks relation_R between the reachable region automaton and the team TS: labels agree, every
// region move is matched by a team move of the same weight, team moves are matched back (per
// mode), initial states correspond, and every team state is related to some region state.
inline BisimulationResult check_bisimulation(const RegionAutomaton& ra, const TeamTransitionSystem& team,
                                             BisimulationMode mode = BisimulationMode::Quotient) {
    const auto& robots = team.robots;
    auto fail = [](std::string s, std::string t, std::string why) { return BisimulationResult{false, s, t, why}; };
    std::vector<std::vector<TransitionSystem::StateId>> related(team.ts.size());
    std::vector<TransitionSystem::StateId> image(ra.states.size());
    for (std::size_t k = 0; k < ra.states.size(); ++k) {
        auto s = static_cast<TransitionSystem::StateId>(k);
        auto name = relation_R_name(robots, ra.states[k]);
        auto t = team.ts.find(name);
        if (!t) return fail(ra.ts.name(s), name, "related team state does not exist");
        image[k] = *t;
        related[*t].push_back(s);
        if (ra.ts.label(s) != team.ts.label(*t)) return fail(ra.ts.name(s), name, "labels differ");
    }
    auto matches = [&](TransitionSystem::StateId s, const TransitionSystem::Edge& e) {
        for (const auto& re : ra.ts.edges(s))
            if (image[re.to] == e.to && re.weight == e.weight) return true;
        return false;
    };
    for (std::size_t k = 0; k < ra.states.size(); ++k) {
        auto s = static_cast<TransitionSystem::StateId>(k);
        auto t = image[k];
        for (const auto& e : ra.ts.edges(s)) {
            auto tw = team.ts.weight(t, image[e.to]);
            if (!tw || *tw != e.weight)
                return fail(ra.ts.name(s), team.ts.name(t), "region move to " + ra.ts.name(e.to) + " has no matching team move");
        }
    }
    for (TransitionSystem::StateId t = 0; t < team.ts.size(); ++t) {
        if (related[t].empty()) return fail("", team.ts.name(t), "team state is not related to any region state");
        for (const auto& e : team.ts.edges(t)) {
            if (mode == BisimulationMode::Strict) {
                for (auto s : related[t])
                    if (!matches(s, e))
                        return fail(ra.ts.name(s), team.ts.name(t), "team move to " + team.ts.name(e.to) + " has no matching region move");
            } else if (std::none_of(related[t].begin(), related[t].end(), [&](auto s) { return matches(s, e); })) {
                return fail(ra.ts.name(related[t].front()), team.ts.name(t),
                            "team move to " + team.ts.name(e.to) + " has no matching region move");
            }
        }
    }
    if (ra.initial_states.empty()) return fail("", team.ts.name(team.ts.initial()), "no initial region state");
    for (auto s : ra.initial_states)
        if (image[s] != team.ts.initial())
            return fail(ra.ts.name(s), team.ts.name(image[s]), "initial region state maps to a non-initial team state");
    return {};
}

struct StateBounds {
    std::uint64_t team = 0;
    std::uint64_t region = 0;
    std::uint64_t naive = 0;
};

namespace detail {
inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r = 0;
    if (__builtin_mul_overflow(a, b, &r)) throw ResourceError("state bound overflows 64 bits");
    return r;
}
inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r = 0;
    if (__builtin_add_overflow(a, b, &r)) throw ResourceError("state bound overflows 64 bits");
    return r;
}
}  // namespace detail

// team:   prod |Q_i| + (W - 1) prod |delta_i|
// region: prod |delta_i| * (prod W_i - prod (W_i - 1))
// naive:  prod (|Q_i| + sum of weights_i - |delta_i|)
inline StateBounds state_bounds(const std::vector<RobotModel>& robots) {
    std::uint64_t prod_q = 1, prod_delta = 1, prod_w = 1, prod_w1 = 1, naive = 1;
    std::uint64_t w_all = 0;
    for (const auto& r : robots) {
        auto q = static_cast<std::uint64_t>(r.ts.size());
        auto d = static_cast<std::uint64_t>(r.ts.edge_count());
        auto wi = static_cast<std::uint64_t>(r.ts.max_weight());
        prod_q = detail::checked_mul(prod_q, q);
        prod_delta = detail::checked_mul(prod_delta, d);
        prod_w = detail::checked_mul(prod_w, wi);
        prod_w1 = detail::checked_mul(prod_w1, wi == 0 ? 0 : wi - 1);
        naive = detail::checked_mul(naive, q + static_cast<std::uint64_t>(r.ts.total_weight()) - d);
        w_all = std::max(w_all, wi);
    }
    StateBounds b;
    b.team = detail::checked_add(prod_q, detail::checked_mul(w_all == 0 ? 0 : w_all - 1, prod_delta));
    b.region = detail::checked_mul(prod_delta, prod_w - prod_w1);
    b.naive = naive;
    return b;
}

// One state per line, then one edge per line:
//   <kind> <states> <edges>
//   initial <name>...
//   state <name> {props}
//   edge <from> <to> <weight>
inline void write_graph(std::ostream& os, const std::string& kind, const TransitionSystem& ts,
                        const std::vector<TransitionSystem::StateId>& initial) {
    os << kind << " " << ts.size() << " " << ts.edge_count() << "\n";
    os << "initial";
    for (auto s : initial) os << " " << ts.name(s);
    os << "\n";
    for (TransitionSystem::StateId s = 0; s < ts.size(); ++s) {
        os << "state " << ts.name(s) << " {";
        bool first = true;
        for (const auto& p : ts.label(s)) {
            os << (first ? "" : ",") << p;
            first = false;
        }
        os << "}\n";
    }
    for (TransitionSystem::StateId s = 0; s < ts.size(); ++s)
        for (const auto& e : ts.edges(s)) os << "edge " << ts.name(s) << " " << ts.name(e.to) << " " << e.weight << "\n";
}

inline void write_team_ts(std::ostream& os, const TeamTransitionSystem& team) {
    write_graph(os, "team-ts", team.ts, {team.ts.initial()});
}

inline void write_region(std::ostream& os, const RegionAutomaton& ra) {
    write_graph(os, "region", ra.ts, ra.initial_states);
}

}  // namespace syncplan
