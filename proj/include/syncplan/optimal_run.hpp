#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "syncplan/core.hpp"
#include "syncplan/error.hpp"
#include "syncplan/ltl/buchi.hpp"
#include "syncplan/ltl/formula.hpp"
#include "syncplan/ltl/product.hpp"
#include "syncplan/team.hpp"

namespace syncplan {

// A satisfying team run with per-position data. Positions 0..prefix_len-1 are the prefix, the rest one
// suffix cycle. step_weights[k] is the team weight from position k to k+1; the last one wraps to the
// suffix start. Every robot advances by the same team weight per step.
struct TeamPlan {
    Alphabet alphabet;
    std::string optimizing;
    std::vector<std::string> robot_names;
    NamedRun team_run;
    std::vector<NamedRun> robot_runs;
    std::vector<std::int64_t> step_weights;
    std::vector<Rational> times;                    // nominal time of each position
    std::vector<PropSet> letters;                   // team label of each position
    std::vector<std::vector<PropSet>> robot_labels;  // [robot][position], empty for traveling states
    CostReport cost;
    Rational suffix_start_time;

    std::size_t prefix_len() const { return team_run.prefix.size(); }
    std::size_t suffix_len() const { return team_run.suffix_cycle.size(); }
    std::size_t length() const { return team_run.length(); }
    std::size_t robot_count() const { return robot_names.size(); }
    PropSet pi_bit() const { return alphabet.bit(optimizing); }

    ltl::LassoWord lasso_word() const {
        ltl::LassoWord w;
        w.stem.assign(letters.begin(), letters.begin() + static_cast<std::ptrdiff_t>(prefix_len()));
        w.loop.assign(letters.begin() + static_cast<std::ptrdiff_t>(prefix_len()), letters.end());
        return w;
    }

    // Planned timed word over the prefix and `cycles` suffix repetitions.
    TimedWord timed_word(std::size_t cycles) const {
        TimedWord w;
        for (std::size_t k = 0; k < prefix_len(); ++k) w.push(times[k], letters[k]);
        for (std::size_t c = 0; c < cycles; ++c)
            for (std::size_t k = prefix_len(); k < length(); ++k)
                w.push(times[k] + cost.suffix_duration * Rational(static_cast<std::int64_t>(c)), letters[k]);
        return w;
    }
};

namespace detail {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

// Shortest paths from a pi-state u to every pi-state reachable without passing through another
// pi-state, tracking whether an accepting product state was entered after u.
struct SegmentSearch {
    std::vector<std::int64_t> dist;  // index: state * 2 + flag
    std::vector<std::int64_t> parent;  // -1 means the start state

    static std::size_t node(std::uint32_t s, int flag) { return static_cast<std::size_t>(s) * 2 + static_cast<std::size_t>(flag); }
};

inline SegmentSearch segment_search(const ltl::ProductGraph& p, const std::vector<bool>& is_pi, std::uint32_t u) {
    SegmentSearch r;
    r.dist.assign(p.size() * 2, kInf);
    r.parent.assign(p.size() * 2, -2);
    using Item = std::pair<std::int64_t, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    auto relax = [&](std::size_t from_node, std::int64_t base, std::uint32_t t, std::int64_t w, int flag) {
        int f = flag || p.accepting[t] ? 1 : 0;
        auto n = SegmentSearch::node(t, f);
        if (base + w < r.dist[n]) {
            r.dist[n] = base + w;
            r.parent[n] = from_node == static_cast<std::size_t>(-1) ? -1 : static_cast<std::int64_t>(from_node);
            heap.emplace(r.dist[n], n);
        }
    };
    for (const auto& a : p.succ[u]) relax(static_cast<std::size_t>(-1), 0, a.to, a.weight, 0);
    while (!heap.empty()) {
        auto [d, n] = heap.top();
        heap.pop();
        if (d != r.dist[n]) continue;
        auto s = static_cast<std::uint32_t>(n / 2);
        int flag = static_cast<int>(n % 2);
        if (is_pi[s]) continue;
        for (const auto& a : p.succ[s]) relax(n, d, a.to, a.weight, flag);
    }
    return r;
}

// Product states after u up to and including v along the recorded segment.
inline std::vector<std::uint32_t> segment_path(const SegmentSearch& r, std::uint32_t v, int flag) {
    std::vector<std::uint32_t> path;
    auto n = static_cast<std::int64_t>(SegmentSearch::node(v, flag));
    while (n >= 0) {
        path.push_back(static_cast<std::uint32_t>(n / 2));
        n = r.parent[static_cast<std::size_t>(n)];
    }
    std::reverse(path.begin(), path.end());
    return path;
}

struct Hop {
    std::uint32_t to;  // index into the pi-state list
    std::int64_t d0;   // shortest segment
    std::int64_t d1;   // shortest segment entering an accepting state, kInf if none
};

// Strongly connected components (Tarjan, iterative) of the hop graph restricted to d0 <= bound.
inline std::vector<int> hop_components(const std::vector<std::vector<Hop>>& hops, std::int64_t bound) {
    const std::size_t n = hops.size();
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<bool> on(n, false);
    std::vector<std::uint32_t> st;
    int counter = 0, ncomp = 0;
    for (std::uint32_t root = 0; root < n; ++root) {
        if (index[root] >= 0) continue;
        std::vector<std::pair<std::uint32_t, std::size_t>> call{{root, 0}};
        index[root] = low[root] = counter++;
        st.push_back(root);
        on[root] = true;
        while (!call.empty()) {
            auto& [v, i] = call.back();
            if (i < hops[v].size()) {
                const auto& h = hops[v][i++];
                if (h.d0 > bound) continue;
                if (index[h.to] < 0) {
                    index[h.to] = low[h.to] = counter++;
                    st.push_back(h.to);
                    on[h.to] = true;
                    call.emplace_back(h.to, 0);
                } else if (on[h.to]) {
                    low[v] = std::min(low[v], index[h.to]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                while (true) {
                    auto w = st.back();
                    st.pop_back();
                    on[w] = false;
                    comp[w] = ncomp;
                    if (w == v) break;
                }
                ++ncomp;
            }
            auto done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
        }
    }
    return comp;
}

inline bool feasible(const std::vector<std::vector<Hop>>& hops, std::int64_t bound) {
    auto comp = hop_components(hops, bound);
    for (std::uint32_t u = 0; u < hops.size(); ++u)
        for (const auto& h : hops[u])
            if (h.d1 <= bound && comp[u] == comp[h.to]) return true;
    return false;
}

// Removes whole repetitions from a cycle: abab -> ab.
template <class T>
std::vector<T> primitive_root(const std::vector<T>& cycle) {
    const std::size_t n = cycle.size();
    for (std::size_t p = 1; p < n; ++p) {
        if (n % p) continue;
        bool ok = true;
        for (std::size_t k = p; k < n && ok; ++k) ok = cycle[k] == cycle[k - p];
        if (ok) return std::vector<T>(cycle.begin(), cycle.begin() + static_cast<std::ptrdiff_t>(p));
    }
    return cycle;
}

}  // namespace detail

// Builds the plan data for a given team lasso (state ids) and verifies the word and the cost.
inline TeamPlan make_team_plan(const TeamTransitionSystem& team, const Mission& mission,
                               const PrefixSuffixRun<TransitionSystem::StateId>& run) {
    TeamPlan plan;
    plan.alphabet = mission.alphabet;
    plan.optimizing = mission.optimizing;
    for (const auto& r : team.robots) plan.robot_names.push_back(r.name);
    std::vector<TransitionSystem::StateId> seq = run.unroll(1);
    const std::size_t n = seq.size();
    const std::size_t m = team.robot_count();
    plan.robot_runs.resize(m);
    plan.robot_labels.assign(m, {});
    Rational t{0};
    for (std::size_t k = 0; k < n; ++k) {
        auto s = seq[k];
        bool in_prefix = k < run.prefix.size();
        (in_prefix ? plan.team_run.prefix : plan.team_run.suffix_cycle).push_back(team.ts.name(s));
        for (std::size_t i = 0; i < m; ++i) {
            (in_prefix ? plan.robot_runs[i].prefix : plan.robot_runs[i].suffix_cycle).push_back(team.element_name(s, i));
            const auto& e = team.elements[s][i];
            plan.robot_labels[i].push_back(e.traveling() ? 0 : mission.alphabet.mask(team.robots[i].ts.label(e.src)));
        }
        plan.letters.push_back(mission.alphabet.mask(team.ts.label(s)));
        auto next = k + 1 < n ? seq[k + 1] : run.suffix_cycle.front();
        auto w = team.ts.weight(s, next);
        if (!w) throw VerificationError("planned run uses a missing team transition");
        plan.times.push_back(t);
        plan.step_weights.push_back(*w);
        t = t + Rational(*w);
    }
    plan.suffix_start_time = plan.times[run.prefix.size()];
    Rational ds{0};
    std::vector<Rational> offsets;
    const PropSet pi = mission.pi_bit();
    for (std::size_t k = run.prefix.size(); k < n; ++k) {
        if (plan.letters[k] & pi) offsets.push_back(ds);
        ds = ds + Rational(plan.step_weights[k]);
    }
    auto [lo, hi] = team_rho(team.robots);
    plan.cost.planned_cost = cycle_cost(offsets, ds);
    plan.cost.suffix_duration = ds;
    plan.cost.rho_lower = lo;
    plan.cost.rho_upper = hi;
    plan.cost.field_bound = field_cost_bound(plan.cost.planned_cost, ds, lo, hi);
    if (!ltl::eval_lasso(mission.formula, plan.lasso_word()))
        throw VerificationError("planned run does not satisfy the mission");
    return plan;
}

// Minimizes the largest gap between consecutive satisfactions of the optimizing proposition in the
// suffix over all satisfying runs of the team TS. Ties: shorter suffix duration, then shorter prefix
// duration, then lexicographic order of (prefix names, suffix names).
inline TeamPlan optimal_run(const TeamTransitionSystem& team, const Mission& mission,
                            const ltl::BuchiAutomaton& b_phi) {
    const auto g = ltl::graph_of(team.ts, mission.alphabet);
    const auto p = ltl::build_product(g, b_phi);
    if (p.initial.empty() || ltl::is_empty(p)) throw UnsatisfiableError("no satisfying run: the product with the mission automaton is empty");

    const PropSet pi = mission.pi_bit();
    std::vector<bool> is_pi(p.size());
    std::vector<std::uint32_t> pi_states;
    std::vector<std::int64_t> pi_index(p.size(), -1);
    for (std::uint32_t s = 0; s < p.size(); ++s) {
        is_pi[s] = (g.labels[p.states[s].first] & pi) != 0;
        if (is_pi[s]) {
            pi_index[s] = static_cast<std::int64_t>(pi_states.size());
            pi_states.push_back(s);
        }
    }

    std::vector<std::vector<detail::Hop>> hops(pi_states.size());
    std::vector<std::int64_t> candidates;
    for (std::uint32_t a = 0; a < pi_states.size(); ++a) {
        auto r = detail::segment_search(p, is_pi, pi_states[a]);
        for (std::uint32_t b = 0; b < pi_states.size(); ++b) {
            auto v = pi_states[b];
            auto d0 = std::min(r.dist[detail::SegmentSearch::node(v, 0)], r.dist[detail::SegmentSearch::node(v, 1)]);
            auto d1 = r.dist[detail::SegmentSearch::node(v, 1)];
            if (d0 >= detail::kInf) continue;
            hops[a].push_back({b, d0, d1});
            candidates.push_back(d0);
            if (d1 < detail::kInf) candidates.push_back(d1);
        }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    // feasibility is monotone in the bound
    std::size_t lo = 0, hi = candidates.size();
    while (lo < hi) {
        auto mid = (lo + hi) / 2;
        if (detail::feasible(hops, candidates[mid]))
            hi = mid;
        else
            lo = mid + 1;
    }
    if (lo == candidates.size()) throw UnsatisfiableError("no satisfying run: no accepting cycle visits the optimizing proposition");
    const std::int64_t J = candidates[lo];

    // Shortest closed walk in the hop graph through an accepting hop: d1(u,v) + dist(v -> u).
    auto comp = detail::hop_components(hops, J);
    const std::size_t np = pi_states.size();
    std::vector<std::vector<std::pair<std::uint32_t, std::int64_t>>> rev(np);
    for (std::uint32_t a = 0; a < np; ++a)
        for (const auto& h : hops[a])
            if (h.d0 <= J) rev[h.to].emplace_back(a, h.d0);
    struct Choice {
        std::uint32_t u, v;
        std::vector<std::uint32_t> back;  // pi indices v ... u
    };
    std::int64_t best_ds = detail::kInf;
    std::vector<Choice> choices;
    for (std::uint32_t u = 0; u < np; ++u) {
        bool any = false;
        for (const auto& h : hops[u]) any = any || (h.d1 <= J && comp[u] == comp[h.to]);
        if (!any) continue;
        // Dijkstra towards u on the reversed hop graph; next[x] is x's successor on a shortest x -> u path.
        std::vector<std::int64_t> dist(np, detail::kInf);
        std::vector<std::int64_t> next(np, -1);
        using Item = std::pair<std::int64_t, std::uint32_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        dist[u] = 0;
        heap.emplace(0, u);
        while (!heap.empty()) {
            auto [d, x] = heap.top();
            heap.pop();
            if (d != dist[x]) continue;
            for (auto [y, w] : rev[x])
                if (d + w < dist[y]) {
                    dist[y] = d + w;
                    next[y] = x;
                    heap.emplace(dist[y], y);
                }
        }
        for (const auto& h : hops[u]) {
            if (h.d1 > J || comp[u] != comp[h.to]) continue;
            auto total = h.d1 + dist[h.to];
            if (total > best_ds) continue;
            if (total < best_ds) {
                best_ds = total;
                choices.clear();
            }
            Choice c{u, h.to, {}};
            for (std::int64_t x = h.to; x != static_cast<std::int64_t>(u); x = next[static_cast<std::size_t>(x)])
                c.back.push_back(static_cast<std::uint32_t>(x));
            c.back.push_back(u);
            choices.push_back(std::move(c));
        }
    }

    // Prefix: shortest product path from an initial state to each state.
    std::vector<std::int64_t> pdist(p.size(), detail::kInf);
    std::vector<std::int64_t> pparent(p.size(), -1);
    {
        using Item = std::pair<std::int64_t, std::uint32_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        for (auto s : p.initial)
            if (pdist[s] != 0) {
                pdist[s] = 0;
                heap.emplace(0, s);
            }
        while (!heap.empty()) {
            auto [d, x] = heap.top();
            heap.pop();
            if (d != pdist[x]) continue;
            for (const auto& a : p.succ[x])
                if (d + a.weight < pdist[a.to]) {
                    pdist[a.to] = d + a.weight;
                    pparent[a.to] = x;
                    heap.emplace(pdist[a.to], a.to);
                }
        }
    }

    using Key = std::tuple<std::int64_t, std::vector<std::string>, std::vector<std::string>>;
    std::optional<Key> best_key;
    PrefixSuffixRun<TransitionSystem::StateId> best_run;
    auto names_of = [&](const std::vector<std::uint32_t>& ps) {
        std::vector<std::string> out;
        for (auto s : ps) out.push_back(team.ts.name(p.states[s].first));
        return out;
    };
    for (const auto& c : choices) {
        // product cycle after pi-state u, ending at u
        std::vector<std::uint32_t> cycle;
        auto first = detail::segment_search(p, is_pi, pi_states[c.u]);
        auto seg = detail::segment_path(first, pi_states[c.v], 1);
        cycle.insert(cycle.end(), seg.begin(), seg.end());
        for (std::size_t k = 0; k + 1 < c.back.size(); ++k) {
            auto r = detail::segment_search(p, is_pi, pi_states[c.back[k]]);
            auto to = pi_states[c.back[k + 1]];
            int flag = r.dist[detail::SegmentSearch::node(to, 0)] <= r.dist[detail::SegmentSearch::node(to, 1)] ? 0 : 1;
            auto part = detail::segment_path(r, to, flag);
            cycle.insert(cycle.end(), part.begin(), part.end());
        }
        // each pi-state on the cycle can anchor the lasso
        for (std::size_t a = 0; a < cycle.size(); ++a) {
            if (!is_pi[cycle[a]]) continue;
            std::vector<std::uint32_t> prefix;
            for (std::int64_t x = cycle[a]; x >= 0; x = pparent[static_cast<std::size_t>(x)])
                prefix.push_back(static_cast<std::uint32_t>(x));
            std::reverse(prefix.begin(), prefix.end());
            std::vector<std::uint32_t> suffix(cycle.begin() + static_cast<std::ptrdiff_t>(a) + 1, cycle.end());
            suffix.insert(suffix.end(), cycle.begin(), cycle.begin() + static_cast<std::ptrdiff_t>(a) + 1);
            Key key{pdist[cycle[a]], names_of(prefix), names_of(suffix)};
            if (best_key && !(key < *best_key)) continue;
            best_key = key;
            best_run.prefix.clear();
            best_run.suffix_cycle.clear();
            for (auto s : prefix) best_run.prefix.push_back(p.states[s].first);
            for (auto s : suffix) best_run.suffix_cycle.push_back(p.states[s].first);
        }
    }
    if (!best_key) throw UnsatisfiableError("no satisfying run");
    best_run.suffix_cycle = detail::primitive_root(best_run.suffix_cycle);

    auto plan = make_team_plan(team, mission, best_run);
    if (plan.cost.planned_cost != Rational(J))
        throw VerificationError("reconstructed run cost " + plan.cost.planned_cost.str() + " differs from the search bound " +
                                std::to_string(J));
    return plan;
}

inline TeamPlan optimal_run(const TeamTransitionSystem& team, const Mission& mission) {
    return optimal_run(team, mission, ltl::ltl_to_buchi(mission.formula, mission.alphabet));
}

// Adds every traveling state the plan visits to the robot's TS, with the team weights on the
// edges entering and leaving it. Idempotent.
inline std::vector<RobotModel> insert_traveling_states(std::vector<RobotModel> robots, const TeamPlan& plan) {
    const std::size_t n = plan.length();
    for (std::size_t i = 0; i < robots.size(); ++i) {
        auto& ts = robots[i].ts;
        const auto& run = plan.robot_runs[i];
        for (std::size_t k = 0; k < n; ++k) {
            const auto& name = run.at(k);
            if (parse_traveling(name) && !ts.find(name)) ts.add_state(name);
        }
        for (std::size_t k = 0; k < n; ++k) {
            const auto& from = run.at(k);
            const auto& to = k + 1 < n ? run.at(k + 1) : run.suffix_cycle.front();
            if (parse_traveling(from) || parse_traveling(to)) ts.add_edge(from, to, plan.step_weights[k]);
        }
    }
    return robots;
}

// Per-robot projection, position-aligned with the team run.
inline NamedRun project_run(const TeamPlan& plan, std::size_t robot) { return plan.robot_runs.at(robot); }

}  // namespace syncplan
