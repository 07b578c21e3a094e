#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "syncplan/error.hpp"
#include "syncplan/rational.hpp"

namespace syncplan {

using Label = std::set<std::string>;

// Letters over the global proposition set, one bit per proposition.
using PropSet = std::uint64_t;

// Fixed, sorted list of proposition names; bit i of a PropSet is names()[i].
class Alphabet {
public:
    Alphabet() = default;
    explicit Alphabet(const std::set<std::string>& props) : names_(props.begin(), props.end()) {
        if (names_.size() > 64) throw ModelError("at most 64 propositions are supported");
        for (std::size_t i = 0; i < names_.size(); ++i) index_.emplace(names_[i], i);
    }

    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }
    bool contains(const std::string& p) const { return index_.count(p) != 0; }

    std::optional<std::size_t> index_of(const std::string& p) const {
        auto it = index_.find(p);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    PropSet bit(const std::string& p) const {
        auto i = index_of(p);
        if (!i) throw ModelError("proposition '" + p + "' is not in the alphabet");
        return PropSet{1} << *i;
    }

    PropSet mask(const Label& label) const {
        PropSet m = 0;
        for (const auto& p : label) m |= bit(p);
        return m;
    }

    Label label(PropSet m) const {
        Label out;
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (m & (PropSet{1} << i)) out.insert(names_[i]);
        return out;
    }

    std::string format(PropSet m) const {
        std::string s = "{";
        bool first = true;
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (!(m & (PropSet{1} << i))) continue;
            if (!first) s += ",";
            s += names_[i];
            first = false;
        }
        return s + "}";
    }

    friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.names_ == b.names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Cap on explicitly explored states (team TS, region automaton, products).
// SYNCPLAN_MAX_STATES overrides the default.
inline std::size_t state_cap() {
    if (const char* env = std::getenv("SYNCPLAN_MAX_STATES")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    return 20'000'000;
}

inline void check_state_cap(std::size_t count, const char* what) {
    if (count > state_cap())
        throw ResourceError(std::string(what) + " exceeds the state cap of " + std::to_string(state_cap()) +
                            " (set SYNCPLAN_MAX_STATES to raise it)");
}

// Weighted transition system. States are opaque names; weights are positive integers.
class TransitionSystem {
public:
    using StateId = std::uint32_t;
    struct Edge {
        StateId to;
        std::int64_t weight;
        friend bool operator==(const Edge&, const Edge&) = default;
    };

    StateId add_state(const std::string& name, Label label = {}) {
        if (index_.count(name)) throw ModelError("duplicate state '" + name + "'");
        auto id = static_cast<StateId>(names_.size());
        names_.push_back(name);
        labels_.push_back(std::move(label));
        edges_.emplace_back();
        index_.emplace(name, id);
        return id;
    }

    // Returns false when the edge already exists with the same weight.
    bool add_edge(StateId from, StateId to, std::int64_t weight) {
        if (from >= size() || to >= size()) throw ModelError("edge endpoint out of range");
        if (weight < 1) throw ModelError("edge weight must be a positive integer");
        auto& out = edges_[from];
        auto pos = std::lower_bound(out.begin(), out.end(), to, [&](const Edge& e, StateId t) {
            return names_[e.to] < names_[t];
        });
        if (pos != out.end() && pos->to == to) {
            if (pos->weight != weight)
                throw ModelError("edge " + names_[from] + " -> " + names_[to] + " already has weight " +
                                 std::to_string(pos->weight));
            return false;
        }
        out.insert(pos, Edge{to, weight});
        ++edge_count_;
        return true;
    }

    bool add_edge(const std::string& from, const std::string& to, std::int64_t weight) {
        return add_edge(require(from), require(to), weight);
    }

    void set_initial(StateId s) {
        if (s >= size()) throw ModelError("initial state out of range");
        initial_ = s;
    }
    void set_initial(const std::string& name) { set_initial(require(name)); }

    std::size_t size() const { return names_.size(); }
    std::size_t edge_count() const { return edge_count_; }
    StateId initial() const { return initial_; }
    const std::string& name(StateId s) const { return names_.at(s); }
    const Label& label(StateId s) const { return labels_.at(s); }
    void set_label(StateId s, Label l) { labels_.at(s) = std::move(l); }
    // Outgoing edges, sorted by target name.
    const std::vector<Edge>& edges(StateId s) const { return edges_.at(s); }

    std::optional<StateId> find(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    StateId require(const std::string& name) const {
        auto s = find(name);
        if (!s) throw ModelError("unknown state '" + name + "'");
        return *s;
    }

    std::optional<std::int64_t> weight(StateId from, StateId to) const {
        for (const auto& e : edges_.at(from))
            if (e.to == to) return e.weight;
        return std::nullopt;
    }

    std::int64_t max_weight() const {
        std::int64_t w = 0;
        for (const auto& out : edges_)
            for (const auto& e : out) w = std::max(w, e.weight);
        return w;
    }

    std::int64_t total_weight() const {
        std::int64_t w = 0;
        for (const auto& out : edges_)
            for (const auto& e : out) w += e.weight;
        return w;
    }

    std::set<std::string> propositions() const {
        std::set<std::string> props;
        for (const auto& l : labels_) props.insert(l.begin(), l.end());
        return props;
    }

    // States reachable from the initial state, in BFS order.
    std::vector<StateId> reachable() const {
        std::vector<StateId> order;
        if (names_.empty()) return order;
        std::vector<bool> seen(size(), false);
        order.push_back(initial_);
        seen[initial_] = true;
        for (std::size_t i = 0; i < order.size(); ++i)
            for (const auto& e : edges_[order[i]])
                if (!seen[e.to]) {
                    seen[e.to] = true;
                    order.push_back(e.to);
                }
        return order;
    }

    friend bool operator==(const TransitionSystem& a, const TransitionSystem& b) {
        return a.names_ == b.names_ && a.labels_ == b.labels_ && a.edges_ == b.edges_ && a.initial_ == b.initial_;
    }

private:
    std::vector<std::string> names_;
    std::vector<Label> labels_;
    std::vector<std::vector<Edge>> edges_;
    std::unordered_map<std::string, StateId> index_;
    StateId initial_ = 0;
    std::size_t edge_count_ = 0;
};

// One robot: its weighted TS plus multiplicative deviation bounds on travel time.
struct RobotModel {
    std::string name;
    TransitionSystem ts;
    Rational rho_lower{1};
    Rational rho_upper{1};

    void validate() const {
        if (ts.size() == 0) throw ModelError("robot '" + name + "' has no states");
        if (!(Rational(0) < rho_lower && rho_lower <= Rational(1) && Rational(1) <= rho_upper))
            throw ModelError("robot '" + name + "': deviation bounds must satisfy 0 < lower <= 1 <= upper");
    }
};

// Finite prefix followed by infinitely many copies of suffix_cycle.
template <class State>
struct PrefixSuffixRun {
    std::vector<State> prefix;
    std::vector<State> suffix_cycle;

    std::size_t length() const { return prefix.size() + suffix_cycle.size(); }
    const State& at(std::size_t k) const {
        if (k < prefix.size()) return prefix[k];
        return suffix_cycle[(k - prefix.size()) % suffix_cycle.size()];
    }
    // Prefix followed by `cycles` copies of the suffix.
    std::vector<State> unroll(std::size_t cycles) const {
        std::vector<State> out(prefix);
        for (std::size_t c = 0; c < cycles; ++c) out.insert(out.end(), suffix_cycle.begin(), suffix_cycle.end());
        return out;
    }
    friend bool operator==(const PrefixSuffixRun&, const PrefixSuffixRun&) = default;
};

using NamedRun = PrefixSuffixRun<std::string>;

// Checks the lasso against a TS: starts at the initial state, consecutive states are joined by edges,
// including prefix end -> suffix start and suffix end -> suffix start.
inline bool is_run_of(const NamedRun& run, const TransitionSystem& ts) {
    if (run.suffix_cycle.empty()) return false;
    std::vector<std::string> seq = run.unroll(1);
    seq.push_back(run.suffix_cycle.front());
    if (seq.front() != ts.name(ts.initial())) return false;
    for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
        auto a = ts.find(seq[k]);
        auto b = ts.find(seq[k + 1]);
        if (!a || !b || !ts.weight(*a, *b)) return false;
    }
    return true;
}

// Splits an unrolled sequence back into a lasso with the shortest prefix and cycle,
// assuming the input ends with at least two copies of the cycle.
template <class State>
PrefixSuffixRun<State> fold_lasso(const std::vector<State>& seq) {
    const std::size_t n = seq.size();
    for (std::size_t period = 1; period <= n / 2; ++period) {
        // smallest start such that seq[start..] is periodic with `period`
        std::size_t start = n;
        while (start > 0 && (start - 1 + period >= n || seq[start - 1] == seq[start - 1 + period])) --start;
        if (n - start >= 2 * period) {
            PrefixSuffixRun<State> run;
            run.prefix.assign(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(start));
            run.suffix_cycle.assign(seq.begin() + static_cast<std::ptrdiff_t>(start),
                                    seq.begin() + static_cast<std::ptrdiff_t>(start + period));
            return run;
        }
    }
    throw ModelError("sequence does not contain two full periods");
}

struct TimedEntry {
    Rational time;
    PropSet letter = 0;
    friend bool operator==(const TimedEntry&, const TimedEntry&) = default;
};

// Timed word with strictly increasing times.
struct TimedWord {
    std::vector<TimedEntry> entries;

    void push(Rational t, PropSet letter) {
        if (!entries.empty() && !(entries.back().time < t))
            throw ModelError("timed word times must be strictly increasing");
        entries.push_back({t, letter});
    }
    std::size_t size() const { return entries.size(); }
    friend bool operator==(const TimedWord&, const TimedWord&) = default;
};

// Merges events by exact time; letters at equal times are unioned.
inline TimedWord merge_events(std::vector<TimedEntry> events) {
    std::stable_sort(events.begin(), events.end(),
                     [](const TimedEntry& a, const TimedEntry& b) { return a.time < b.time; });
    TimedWord w;
    for (const auto& e : events) {
        if (!w.entries.empty() && w.entries.back().time == e.time)
            w.entries.back().letter |= e.letter;
        else
            w.entries.push_back(e);
    }
    return w;
}

inline std::vector<Rational> extract_pi_times(const TimedWord& word, PropSet pi) {
    std::vector<Rational> out;
    for (const auto& e : word.entries)
        if (e.letter & pi) out.push_back(e.time);
    return out;
}

// Largest gap between consecutive pi-times from suffix_start_index on.
inline Rational suffix_cost(const std::vector<Rational>& pi_times, std::size_t suffix_start_index) {
    if (suffix_start_index >= pi_times.size() || pi_times.size() - suffix_start_index < 2)
        throw ModelError("cost undefined: fewer than two steady-state satisfactions of the optimizing proposition");
    Rational worst = pi_times[suffix_start_index + 1] - pi_times[suffix_start_index];
    for (std::size_t k = suffix_start_index + 1; k + 1 < pi_times.size(); ++k)
        worst = max(worst, pi_times[k + 1] - pi_times[k]);
    return worst;
}

// Max gap over one period of an eventually periodic pi-sequence: offsets are the pi-times within one
// cycle relative to its start, period is the cycle duration. Includes the wrap gap into the next copy.
inline Rational cycle_cost(const std::vector<Rational>& offsets, Rational period) {
    if (offsets.empty())
        throw ModelError("cost undefined: the suffix cycle never satisfies the optimizing proposition");
    Rational worst = offsets.front() + period - offsets.back();
    for (std::size_t k = 0; k + 1 < offsets.size(); ++k) worst = max(worst, offsets[k + 1] - offsets[k]);
    return worst;
}

struct CostReport {
    Rational planned_cost;
    Rational suffix_duration;
    Rational rho_lower{1};
    Rational rho_upper{1};
    Rational field_bound;
    friend bool operator==(const CostReport&, const CostReport&) = default;
};

// J * rho_upper + d_s * (rho_upper - rho_lower).
inline Rational field_cost_bound(Rational planned_cost, Rational suffix_duration, Rational rho_lower,
                                 Rational rho_upper) {
    return planned_cost * rho_upper + suffix_duration * (rho_upper - rho_lower);
}

// Team-wide bounds: the largest upper deviation and the smallest lower deviation.
inline std::pair<Rational, Rational> team_rho(const std::vector<RobotModel>& robots) {
    Rational lo{1};
    Rational hi{1};
    for (const auto& r : robots) {
        lo = min(lo, r.rho_lower);
        hi = max(hi, r.rho_upper);
    }
    return {lo, hi};
}

}  // namespace syncplan
