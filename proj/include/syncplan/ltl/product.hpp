#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "syncplan/core.hpp"
#include "syncplan/ltl/buchi.hpp"
#include "syncplan/ltl/formula.hpp"

namespace syncplan::ltl {

// State-labeled graph (Kripke structure) with weighted arcs. The word of a path q0 q1 ... is
// label(q0) label(q1) ...
struct LabeledGraph {
    struct Arc {
        std::uint32_t to;
        std::int64_t weight = 1;
    };
    std::vector<PropSet> labels;
    std::vector<std::vector<Arc>> succ;
    std::vector<std::uint32_t> initial;

    std::size_t size() const { return labels.size(); }
    std::uint32_t add(PropSet label) {
        labels.push_back(label);
        succ.emplace_back();
        return static_cast<std::uint32_t>(labels.size() - 1);
    }
};

inline LabeledGraph graph_of(const TransitionSystem& ts, const Alphabet& alphabet) {
    LabeledGraph g;
    for (std::size_t s = 0; s < ts.size(); ++s) g.add(alphabet.mask(ts.label(static_cast<TransitionSystem::StateId>(s))));
    for (std::size_t s = 0; s < ts.size(); ++s)
        for (const auto& e : ts.edges(static_cast<TransitionSystem::StateId>(s))) g.succ[s].push_back({e.to, e.weight});
    if (ts.size() > 0) g.initial.push_back(ts.initial());
    return g;
}

inline LabeledGraph graph_of(const LassoWord& w) {
    LabeledGraph g;
    const std::size_t n = w.size();
    for (std::size_t i = 0; i < n; ++i) g.add(w.at(i));
    for (std::size_t i = 0; i < n; ++i)
        g.succ[i].push_back({static_cast<std::uint32_t>(i + 1 < n ? i + 1 : w.stem.size()), 1});
    g.initial.push_back(0);
    return g;
}

// Synchronous product. The automaton reads the label of the graph state being entered; the first
// letter (label of the initial graph state) is read on the automaton's initial transition.
struct ProductGraph {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> states;  // (graph state, automaton state)
    std::vector<std::vector<LabeledGraph::Arc>> succ;
    std::vector<std::uint32_t> initial;
    std::vector<bool> accepting;

    std::size_t size() const { return states.size(); }
};

inline ProductGraph build_product(const LabeledGraph& g, const BuchiAutomaton& b) {
    ProductGraph p;
    constexpr std::uint32_t kNone = ~std::uint32_t{0};
    // Dense index when the full state space is small, hashed otherwise.
    const std::uint64_t cells = static_cast<std::uint64_t>(g.size()) * b.size();
    std::vector<std::uint32_t> dense(cells <= (std::uint64_t{1} << 22) ? cells : 0, kNone);
    std::unordered_map<std::uint64_t, std::uint32_t> sparse;
    const std::size_t cap = state_cap();
    auto get = [&](std::uint32_t q, std::uint32_t s) {
        const std::uint64_t key = static_cast<std::uint64_t>(q) * b.size() + s;
        const auto next = static_cast<std::uint32_t>(p.states.size());
        std::uint32_t id = kNone;
        if (!dense.empty()) {
            if (dense[key] == kNone) dense[key] = next;
            id = dense[key];
        } else {
            id = sparse.emplace(key, next).first->second;
        }
        if (id == next) {
            p.states.emplace_back(q, s);
            p.succ.emplace_back();
            p.accepting.push_back(b.accepting[s]);
            if (p.states.size() > cap) check_state_cap(p.states.size(), "product automaton");
        }
        return id;
    };
    for (auto q0 : g.initial)
        for (auto s0 : b.initial)
            for (const auto& t : b.out[s0])
                if (t.guard.satisfied_by(g.labels[q0])) {
                    auto before = p.states.size();
                    auto id = get(q0, t.to);
                    if (p.states.size() > before || std::find(p.initial.begin(), p.initial.end(), id) == p.initial.end())
                        p.initial.push_back(id);
                }
    for (std::size_t i = 0; i < p.states.size(); ++i) {
        auto [q, s] = p.states[i];
        for (const auto& arc : g.succ[q])
            for (const auto& t : b.out[s])
                if (t.guard.satisfied_by(g.labels[arc.to])) {
                    auto id = get(arc.to, t.to);
                    p.succ[i].push_back({id, arc.weight});
                }
    }
    return p;
}

// Accepting lasso in a product: stem from an initial state, then a cycle through an accepting state.
// The cycle's last state has an arc back to its first.
struct Witness {
    std::vector<std::uint32_t> stem;
    std::vector<std::uint32_t> cycle;
};

// Nested depth-first search. Deterministic for a fixed successor order.
inline std::optional<Witness> find_accepting_lasso(const ProductGraph& p) {
    const std::size_t n = p.size();
    std::vector<bool> visited(n, false), inner_visited(n, false), on_stack(n, false);
    std::vector<std::pair<std::uint32_t, std::size_t>> outer;

    auto inner = [&](std::uint32_t seed) -> std::optional<Witness> {
        std::vector<std::pair<std::uint32_t, std::size_t>> stack{{seed, 0}};
        while (!stack.empty()) {
            auto& [v, i] = stack.back();
            if (i >= p.succ[v].size()) {
                stack.pop_back();
                continue;
            }
            std::uint32_t t = p.succ[v][i++].to;
            if (on_stack[t]) {
                // cycle: t .. seed along the outer stack, then the inner path back to t
                Witness w;
                std::size_t j = 0;
                while (outer[j].first != t) w.stem.push_back(outer[j++].first);
                for (; j < outer.size(); ++j) w.cycle.push_back(outer[j].first);
                for (std::size_t k = 1; k < stack.size(); ++k) w.cycle.push_back(stack[k].first);
                return w;
            }
            if (!inner_visited[t]) {
                inner_visited[t] = true;
                stack.emplace_back(t, 0);
            }
        }
        return std::nullopt;
    };

    for (auto root : p.initial) {
        if (visited[root]) continue;
        visited[root] = true;
        on_stack[root] = true;
        outer.emplace_back(root, 0);
        while (!outer.empty()) {
            auto& [v, i] = outer.back();
            if (i < p.succ[v].size()) {
                std::uint32_t t = p.succ[v][i++].to;
                if (!visited[t]) {
                    visited[t] = true;
                    on_stack[t] = true;
                    outer.emplace_back(t, 0);
                }
                continue;
            }
            std::uint32_t done = v;
            if (p.accepting[done]) {
                if (auto w = inner(done)) return w;
            }
            on_stack[done] = false;
            outer.pop_back();
        }
    }
    return std::nullopt;
}

inline bool is_empty(const ProductGraph& p) { return !find_accepting_lasso(p).has_value(); }

// Emptiness of an automaton on its own: product with the universal graph over its guards is
// equivalent to asking for any accepting lasso of satisfiable guards.
inline std::optional<Witness> find_accepting_lasso(const BuchiAutomaton& b) {
    ProductGraph p;
    p.states.resize(b.size());
    p.succ.resize(b.size());
    p.accepting = b.accepting;
    for (std::uint32_t s = 0; s < b.size(); ++s) {
        p.states[s] = {s, s};
        for (const auto& t : b.out[s])
            if ((t.guard.pos & t.guard.neg) == 0) p.succ[s].push_back({t.to, 1});
    }
    p.initial = b.initial;
    return find_accepting_lasso(p);
}

// A word accepted along an automaton-only witness: letter k is the positive part of the guard
// on transition k.
inline LassoWord witness_word(const BuchiAutomaton& b, const Witness& w) {
    auto letter = [&](std::uint32_t from, std::uint32_t to) {
        for (const auto& t : b.out[from])
            if (t.to == to && (t.guard.pos & t.guard.neg) == 0) return t.guard.pos;
        throw ModelError("witness uses a missing transition");
    };
    std::vector<std::uint32_t> seq = w.stem;
    seq.insert(seq.end(), w.cycle.begin(), w.cycle.end());
    LassoWord word;
    for (std::size_t k = 0; k < seq.size(); ++k) {
        std::uint32_t to = k + 1 < seq.size() ? seq[k + 1] : w.cycle.front();
        (k < w.stem.size() ? word.stem : word.loop).push_back(letter(seq[k], to));
    }
    return word;
}

// Word of a product witness, projected through the graph labels.
inline LassoWord witness_word(const ProductGraph& p, const LabeledGraph& g, const Witness& w) {
    LassoWord word;
    for (auto s : w.stem) word.stem.push_back(g.labels[p.states[s].first]);
    for (auto s : w.cycle) word.loop.push_back(g.labels[p.states[s].first]);
    return word;
}

// Lasso membership: the product of the word's graph with b, explored directly over (position,
// automaton state) pairs. Accepting iff a reachable accepting pair lies on a cycle; cycles only use
// loop positions, so Tarjan's SCC runs there.
inline bool accepts(const BuchiAutomaton& b, const LassoWord& w) {
    const std::size_t n = w.size(), m = b.size(), loop = w.stem.size();
    if (w.loop.empty()) throw ModelError("lasso word needs a nonempty loop");
    auto next_pos = [&](std::size_t pos) { return pos + 1 < n ? pos + 1 : loop; };
    auto for_succ = [&](std::uint32_t v, auto&& fn) {
        const std::size_t pos = v / m, np = next_pos(pos);
        const PropSet letter = w.at(np);
        for (const auto& t : b.out[v % m])
            if (t.guard.satisfied_by(letter)) fn(static_cast<std::uint32_t>(np * m + t.to));
    };

    // Reachable pairs with their successor ranges in one flat array.
    constexpr std::uint32_t kUnseen = ~std::uint32_t{0};
    std::vector<std::uint32_t> first(n * m, kUnseen), last(n * m, 0), adj, work;
    std::vector<std::uint8_t> reached(n * m, 0);
    for (auto s0 : b.initial)
        for (const auto& t : b.out[s0])
            if (t.guard.satisfied_by(w.at(0)) && !reached[t.to]) {
                reached[t.to] = 1;
                work.push_back(t.to);
            }
    while (!work.empty()) {
        auto v = work.back();
        work.pop_back();
        first[v] = static_cast<std::uint32_t>(adj.size());
        for_succ(v, [&](std::uint32_t u) {
            adj.push_back(u);
            if (!reached[u]) {
                reached[u] = 1;
                work.push_back(u);
            }
        });
        last[v] = static_cast<std::uint32_t>(adj.size());
    }

    std::vector<std::uint32_t> index(n * m, kUnseen), low(n * m, 0), scc_stack;
    std::vector<std::uint8_t> on_stack(n * m, 0);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> call;  // (node, next arc)
    std::uint32_t counter = 0;
    for (std::uint32_t root = static_cast<std::uint32_t>(loop * m); root < n * m; ++root) {
        if (!reached[root] || index[root] != kUnseen) continue;
        auto open = [&](std::uint32_t v) {
            index[v] = low[v] = counter++;
            scc_stack.push_back(v);
            on_stack[v] = 1;
            call.emplace_back(v, first[v]);
        };
        open(root);
        while (!call.empty()) {
            auto& [v, i] = call.back();
            if (i < last[v]) {
                auto u = adj[i++];
                if (index[u] == kUnseen) open(u);
                else if (on_stack[u]) low[v] = std::min(low[v], index[u]);
                continue;
            }
            const auto done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
            if (low[done] != index[done]) continue;
            // done roots an SCC; it is a cycle if it has more than one node or a self-loop.
            bool accepting = false;
            std::size_t size = 0;
            std::uint32_t u = 0;
            do {
                u = scc_stack.back();
                scc_stack.pop_back();
                on_stack[u] = 0;
                accepting = accepting || b.accepting[u % m];
                ++size;
            } while (u != done);
            const bool self_loop =
                std::find(adj.begin() + first[done], adj.begin() + last[done], done) != adj.begin() + last[done];
            if (accepting && (size > 1 || self_loop)) return true;
        }
    }
    return false;
}

}  // namespace syncplan::ltl
