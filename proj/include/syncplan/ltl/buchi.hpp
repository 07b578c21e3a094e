#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "syncplan/core.hpp"
#include "syncplan/ltl/formula.hpp"

namespace syncplan::ltl {

// Conjunction of literals. A letter satisfies the guard iff it contains every
// positive proposition and none of the negative ones.
struct Guard {
    PropSet pos = 0;
    PropSet neg = 0;

    bool satisfied_by(PropSet letter) const { return (letter & pos) == pos && (letter & neg) == 0; }
    friend bool operator==(const Guard&, const Guard&) = default;
    friend auto operator<=>(const Guard&, const Guard&) = default;
};

inline std::string format_guard(const Guard& g, const Alphabet& alphabet) {
    std::string s;
    for (std::size_t i = 0; i < alphabet.size(); ++i) {
        PropSet b = PropSet{1} << i;
        if (!(g.pos & b) && !(g.neg & b)) continue;
        if (!s.empty()) s += " & ";
        if (g.neg & b) s += "!";
        s += alphabet.names()[i];
    }
    return s.empty() ? "true" : s;
}

// Transition-guarded Buchi automaton. A run reads letter k on the k-th transition,
// starting from an initial state; acceptance is a single set of states.
struct BuchiAutomaton {
    struct Transition {
        std::uint32_t to;
        Guard guard;
        friend bool operator==(const Transition&, const Transition&) = default;
    };

    Alphabet alphabet;
    std::vector<std::string> names;
    std::vector<std::uint32_t> initial;
    std::vector<std::vector<Transition>> out;
    std::vector<bool> accepting;

    std::size_t size() const { return out.size(); }
    std::size_t transition_count() const {
        std::size_t n = 0;
        for (const auto& o : out) n += o.size();
        return n;
    }
};

namespace detail {

// Hash-consed NNF subformulas.
class SubformulaTable {
public:
    struct Entry {
        Op op;
        int lhs = -1;
        int rhs = -1;
        std::size_t prop = 0;
    };

    int intern(const Formula& f) {
        int a = f.node()->lhs ? intern(f.lhs()) : -1;
        int b = f.node()->rhs ? intern(f.rhs()) : -1;
        return intern(Entry{f.op(), a, b, f.op() == Op::Prop ? f.prop() : 0});
    }

    int intern(const Entry& e) {
        auto key = std::make_tuple(static_cast<int>(e.op), e.lhs, e.rhs, e.prop);
        auto it = index_.find(key);
        if (it != index_.end()) return it->second;
        int id = static_cast<int>(entries_.size());
        entries_.push_back(e);
        index_.emplace(key, id);
        return id;
    }

    int find(const Entry& e) const {
        auto it = index_.find(std::make_tuple(static_cast<int>(e.op), e.lhs, e.rhs, e.prop));
        return it == index_.end() ? -1 : it->second;
    }

    const Entry& at(int id) const { return entries_.at(static_cast<std::size_t>(id)); }
    std::size_t size() const { return entries_.size(); }

    // id of the complementary literal, or -1 when it never occurs.
    int complement(int id) const {
        const Entry& e = at(id);
        if (e.op == Op::Prop) {
            int p = find(e);
            return find(Entry{Op::Not, p, -1, 0});
        }
        if (e.op == Op::Not) return e.lhs;
        if (e.op == Op::True) return find(Entry{Op::False, -1, -1, 0});
        if (e.op == Op::False) return find(Entry{Op::True, -1, -1, 0});
        return -1;
    }

private:
    std::vector<Entry> entries_;
    std::map<std::tuple<int, int, int, std::size_t>, int> index_;
};

struct TableauNode {
    int id = 0;
    std::set<int> incoming;
    std::set<int> fresh;  // formulas still to process ("New")
    std::set<int> old;
    std::set<int> next;
};

constexpr int kInitNode = 0;

// Tableau expansion of an NNF formula into a generalized Buchi automaton over state-labeled nodes.
class Tableau {
public:
    Tableau(const Formula& nnf, const Alphabet& alphabet) : alphabet_(alphabet) {
        root_ = table_.intern(nnf);
        expand_all();
    }

    SubformulaTable table_;
    std::vector<TableauNode> nodes_;
    int root_ = -1;

    std::vector<int> untils() const {
        std::vector<int> u;
        for (std::size_t i = 0; i < table_.size(); ++i)
            if (table_.at(static_cast<int>(i)).op == Op::Until) u.push_back(static_cast<int>(i));
        return u;
    }

    Guard guard_of(const TableauNode& n) const {
        Guard g;
        for (int f : n.old) {
            const auto& e = table_.at(f);
            if (e.op == Op::Prop) g.pos |= PropSet{1} << e.prop;
            if (e.op == Op::Not) g.neg |= PropSet{1} << table_.at(e.lhs).prop;
        }
        return g;
    }

private:
    const Alphabet& alphabet_;
    int next_id_ = 1;

    void expand_all() {
        std::vector<TableauNode> work;
        TableauNode start;
        start.id = next_id_++;
        start.incoming.insert(kInitNode);
        start.fresh.insert(root_);
        work.push_back(std::move(start));
        while (!work.empty()) {
            TableauNode n = std::move(work.back());
            work.pop_back();
            process(std::move(n), work);
        }
    }

    void process(TableauNode n, std::vector<TableauNode>& work) {
        while (true) {
            if (n.fresh.empty()) {
                for (auto& done : nodes_) {
                    if (done.old == n.old && done.next == n.next) {
                        done.incoming.insert(n.incoming.begin(), n.incoming.end());
                        return;
                    }
                }
                check_state_cap(nodes_.size() + 1, "LTL tableau");
                TableauNode succ;
                succ.id = next_id_++;
                succ.incoming.insert(n.id);
                succ.fresh = n.next;
                nodes_.push_back(std::move(n));
                n = std::move(succ);
                continue;
            }
            int eta = *n.fresh.begin();
            n.fresh.erase(n.fresh.begin());
            if (n.old.count(eta)) continue;
            const auto e = table_.at(eta);
            switch (e.op) {
                case Op::True:
                case Op::False:
                case Op::Prop:
                case Op::Not: {
                    int neg = table_.complement(eta);
                    if (e.op == Op::False || (neg >= 0 && n.old.count(neg))) return;
                    n.old.insert(eta);
                    break;
                }
                case Op::And:
                    n.old.insert(eta);
                    add_fresh(n, e.lhs);
                    add_fresh(n, e.rhs);
                    break;
                case Op::Next:
                    n.old.insert(eta);
                    n.next.insert(e.lhs);
                    break;
                case Op::Or:
                case Op::Until:
                case Op::Release: {
                    TableauNode second = n;
                    second.id = next_id_++;
                    n.id = next_id_++;
                    n.old.insert(eta);
                    second.old.insert(eta);
                    if (e.op == Op::Or) {
                        add_fresh(n, e.lhs);
                        add_fresh(second, e.rhs);
                    } else if (e.op == Op::Until) {
                        add_fresh(n, e.lhs);
                        n.next.insert(eta);
                        add_fresh(second, e.rhs);
                    } else {
                        add_fresh(n, e.rhs);
                        n.next.insert(eta);
                        add_fresh(second, e.lhs);
                        add_fresh(second, e.rhs);
                    }
                    work.push_back(std::move(second));
                    break;
                }
                default:
                    throw ModelError("tableau input is not in negation normal form");
            }
        }
    }

    static void add_fresh(TableauNode& n, int f) {
        if (!n.old.count(f)) n.fresh.insert(f);
    }
};

// Removes states that cannot reach an accepting state lying on a cycle.
inline BuchiAutomaton trim(const BuchiAutomaton& b) {
    const std::size_t n = b.size();
    // Tarjan SCC, iterative.
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<bool> on_stack(n, false);
    std::vector<std::uint32_t> stack;
    int counter = 0;
    int comps = 0;
    for (std::uint32_t root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        std::vector<std::pair<std::uint32_t, std::size_t>> call{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            auto& [v, i] = call.back();
            if (i < b.out[v].size()) {
                std::uint32_t w = b.out[v][i++].to;
                if (index[w] == -1) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                std::uint32_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = comps;
                } while (w != v);
                ++comps;
            }
            std::uint32_t done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
        }
    }
    // good = accepting state inside a nontrivial SCC (or with a self-loop)
    std::vector<bool> comp_size_gt1(static_cast<std::size_t>(comps), false);
    std::vector<int> comp_count(static_cast<std::size_t>(comps), 0);
    for (std::size_t v = 0; v < n; ++v) comp_count[static_cast<std::size_t>(comp[v])]++;
    std::vector<bool> live(n, false);
    std::vector<std::uint32_t> queue;
    for (std::uint32_t v = 0; v < n; ++v) {
        if (!b.accepting[v]) continue;
        bool cyclic = comp_count[static_cast<std::size_t>(comp[v])] > 1;
        for (const auto& t : b.out[v]) cyclic = cyclic || t.to == v;
        if (cyclic) {
            live[v] = true;
            queue.push_back(v);
        }
    }
    // backward reachability to live states
    std::vector<std::vector<std::uint32_t>> pred(n);
    for (std::uint32_t v = 0; v < n; ++v)
        for (const auto& t : b.out[v]) pred[t.to].push_back(v);
    for (std::size_t i = 0; i < queue.size(); ++i)
        for (auto p : pred[queue[i]])
            if (!live[p]) {
                live[p] = true;
                queue.push_back(p);
            }
    // forward reachability from initial states through live states
    std::vector<bool> keep(n, false);
    std::vector<std::uint32_t> fwd;
    for (auto s : b.initial)
        if (live[s] && !keep[s]) {
            keep[s] = true;
            fwd.push_back(s);
        }
    for (std::size_t i = 0; i < fwd.size(); ++i)
        for (const auto& t : b.out[fwd[i]])
            if (live[t.to] && !keep[t.to]) {
                keep[t.to] = true;
                fwd.push_back(t.to);
            }
    std::vector<std::uint32_t> remap(n, UINT32_MAX);
    BuchiAutomaton r;
    r.alphabet = b.alphabet;
    for (std::uint32_t v = 0; v < n; ++v)
        if (keep[v]) {
            remap[v] = static_cast<std::uint32_t>(r.names.size());
            r.names.push_back(b.names[v]);
            r.accepting.push_back(b.accepting[v]);
        }
    r.out.resize(r.names.size());
    for (std::uint32_t v = 0; v < n; ++v) {
        if (!keep[v]) continue;
        for (const auto& t : b.out[v])
            if (keep[t.to]) r.out[remap[v]].push_back({remap[t.to], t.guard});
    }
    for (auto s : b.initial)
        if (keep[s]) r.initial.push_back(remap[s]);
    if (r.names.empty()) {
        // keep a lone non-accepting initial state so the automaton stays well formed
        r.names.push_back("init");
        r.accepting.push_back(false);
        r.out.emplace_back();
        r.initial.push_back(0);
    }
    return r;
}

}  // namespace detail

// Tableau translation with generalized acceptance, degeneralized by a round-robin counter.
// The result reads the first letter on the transition leaving its single initial state.
inline BuchiAutomaton ltl_to_buchi(const Formula& f, const Alphabet& alphabet) {
    const Formula nnf = is_nnf(f) ? f : to_nnf(f);
    detail::Tableau tab(nnf, alphabet);
    const auto untils = tab.untils();
    const std::size_t k = untils.size();

    // acceptance sets: node satisfies (a U b) -> b
    std::vector<std::vector<bool>> in_set(std::max<std::size_t>(k, 1), std::vector<bool>(tab.nodes_.size(), true));
    for (std::size_t s = 0; s < k; ++s) {
        int u = untils[s];
        int rhs = tab.table_.at(u).rhs;
        for (std::size_t n = 0; n < tab.nodes_.size(); ++n) {
            const auto& old = tab.nodes_[n].old;
            in_set[s][n] = !old.count(u) || old.count(rhs);
        }
    }
    const std::size_t counters = std::max<std::size_t>(k, 1);

    std::map<int, std::size_t> node_index;
    for (std::size_t n = 0; n < tab.nodes_.size(); ++n) node_index.emplace(tab.nodes_[n].id, n);
    // successors of a tableau node id: nodes listing it as incoming
    std::map<int, std::vector<std::size_t>> succ;
    for (std::size_t n = 0; n < tab.nodes_.size(); ++n)
        for (int in : tab.nodes_[n].incoming) succ[in].push_back(n);

    BuchiAutomaton b;
    b.alphabet = alphabet;
    std::map<std::pair<std::size_t, std::size_t>, std::uint32_t> ids;
    std::vector<std::pair<std::size_t, std::size_t>> pending;
    b.names.push_back("init");
    b.accepting.push_back(false);
    b.out.emplace_back();
    b.initial.push_back(0);

    auto state_of = [&](std::size_t node, std::size_t c) {
        auto key = std::make_pair(node, c);
        auto it = ids.find(key);
        if (it != ids.end()) return it->second;
        auto id = static_cast<std::uint32_t>(b.names.size());
        ids.emplace(key, id);
        b.names.push_back("n" + std::to_string(tab.nodes_[node].id) + "." + std::to_string(c));
        b.accepting.push_back(c == 0 && in_set[0][node]);
        b.out.emplace_back();
        pending.push_back(key);
        return id;
    };

    for (std::size_t n : succ[detail::kInitNode]) {
        auto to = state_of(n, 0);
        b.out[0].push_back({to, tab.guard_of(tab.nodes_[n])});
    }
    for (std::size_t i = 0; i < pending.size(); ++i) {
        auto [node, c] = pending[i];
        std::uint32_t from = ids.at({node, c});
        std::size_t c2 = in_set[c][node] ? (c + 1) % counters : c;
        auto it = succ.find(tab.nodes_[node].id);
        if (it == succ.end()) continue;
        for (std::size_t n2 : it->second) {
            auto to = state_of(n2, c2);
            b.out[from].push_back({to, tab.guard_of(tab.nodes_[n2])});
        }
    }
    for (auto& o : b.out)
        std::sort(o.begin(), o.end(), [](const auto& x, const auto& y) {
            return std::tie(x.to, x.guard) < std::tie(y.to, y.guard);
        });
    return detail::trim(b);
}

// Text format:
//   buchi <states> <transitions>
//   props <p1> <p2> ...
//   initial <ids...>
//   accepting <ids...>
//   state <id> <name>
//   edge <from> <to> <guard>        guard: "true" or literals joined by " & ", negation as "!"
inline void write_buchi(std::ostream& os, const BuchiAutomaton& b) {
    os << "buchi " << b.size() << " " << b.transition_count() << "\n";
    os << "props";
    for (const auto& p : b.alphabet.names()) os << " " << p;
    os << "\ninitial";
    for (auto s : b.initial) os << " " << s;
    os << "\naccepting";
    for (std::size_t s = 0; s < b.size(); ++s)
        if (b.accepting[s]) os << " " << s;
    os << "\n";
    for (std::size_t s = 0; s < b.size(); ++s) os << "state " << s << " " << b.names[s] << "\n";
    for (std::size_t s = 0; s < b.size(); ++s)
        for (const auto& t : b.out[s]) os << "edge " << s << " " << t.to << " " << format_guard(t.guard, b.alphabet) << "\n";
}

}  // namespace syncplan::ltl
