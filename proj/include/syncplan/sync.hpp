#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "syncplan/core.hpp"
#include "syncplan/error.hpp"
#include "syncplan/ltl/buchi.hpp"
#include "syncplan/ltl/product.hpp"
#include "syncplan/optimal_run.hpp"

namespace syncplan {

using RobotMask = std::uint64_t;

// Wait/notify sets per robot and position, aligned with the plan's runs. Positions beyond the
// suffix repeat the suffix cycle.
struct SyncSchedule {
    std::size_t robots = 0;
    std::size_t length = 0;
    std::size_t beg = 0;
    std::vector<std::vector<RobotMask>> wait;    // [robot][position]
    std::vector<std::vector<RobotMask>> notify;  // [robot][position]

    static RobotMask all_but(std::size_t m, std::size_t i) {
        RobotMask all = m >= 64 ? ~RobotMask{0} : ((RobotMask{1} << m) - 1);
        return all & ~(RobotMask{1} << i);
    }

    static SyncSchedule full(std::size_t m, std::size_t length, std::size_t beg) {
        if (m > 64) throw ModelError("at most 64 robots are supported");
        SyncSchedule s{m, length, beg, {}, {}};
        for (std::size_t i = 0; i < m; ++i) {
            s.wait.emplace_back(length, all_but(m, i));
            s.notify.emplace_back(length, all_but(m, i));
        }
        return s;
    }

    // Position index within one prefix + suffix unrolling.
    std::size_t wrap(std::size_t k) const { return k < length ? k : beg + (k - beg) % (length - beg); }

    bool waits(std::size_t i, std::size_t k, std::size_t j) const { return (wait[i][wrap(k)] >> j) & 1; }

    void remove(std::size_t i, std::size_t k, std::size_t j) {
        wait[i][k] &= ~(RobotMask{1} << j);
        notify[j][k] &= ~(RobotMask{1} << i);
    }
    void restore(std::size_t i, std::size_t k, std::size_t j) {
        wait[i][k] |= RobotMask{1} << j;
        notify[j][k] |= RobotMask{1} << i;
    }

    bool reciprocal() const {
        for (std::size_t i = 0; i < robots; ++i)
            for (std::size_t k = 0; k < length; ++k)
                for (std::size_t j = 0; j < robots; ++j)
                    if (((wait[i][k] >> j) & 1) != ((notify[j][k] >> i) & 1)) return false;
        return true;
    }

    bool full_at(std::size_t k) const {
        for (std::size_t i = 0; i < robots; ++i)
            if (wait[i][k] != all_but(robots, i) || notify[i][k] != all_but(robots, i)) return false;
        return true;
    }

    std::size_t wait_count() const {
        std::size_t c = 0;
        for (const auto& row : wait)
            for (auto w : row) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }

    friend bool operator==(const SyncSchedule&, const SyncSchedule&) = default;
};

inline std::string format_robot_set(RobotMask mask) {
    std::string s = "{";
    bool first = true;
    for (std::size_t j = 0; j < 64; ++j)
        if ((mask >> j) & 1) {
            if (!first) s += ",";
            s += std::to_string(j + 1);
            first = false;
        }
    return s + "}";
}

struct Interval {
    Rational lo;
    Rational hi;
    friend bool operator==(const Interval&, const Interval&) = default;
};

enum class Segment { Prefix, Suffix };

// Event intervals of one segment, relative to the global synchronization at its first position.
// Index [robot][k - first]. depart is also the time the robot's labels are emitted.
struct SegmentIntervals {
    std::size_t first = 0;
    std::size_t last = 0;  // inclusive
    std::vector<std::vector<Interval>> arrive;
    std::vector<std::vector<Interval>> depart;

    std::size_t size() const { return last + 1 - first; }
};

inline std::pair<std::size_t, std::size_t> segment_bounds(const TeamPlan& plan, Segment seg) {
    if (seg == Segment::Prefix) return {0, plan.prefix_len() - 1};
    return {plan.prefix_len(), plan.length() - 1};
}

inline SegmentIntervals event_intervals(const TeamPlan& plan, const SyncSchedule& schedule,
                                        const std::vector<RobotModel>& robots, Segment seg) {
    const std::size_t m = plan.robot_count();
    auto [first, last] = segment_bounds(plan, seg);
    if (!schedule.full_at(first))
        throw ModelError("segment starting at position " + std::to_string(first) + " lacks a global synchronization");
    SegmentIntervals r;
    r.first = first;
    r.last = last;
    const std::size_t n = last + 1 - first;
    r.arrive.assign(m, std::vector<Interval>(n));
    r.depart.assign(m, std::vector<Interval>(n));
    for (std::size_t i = 0; i < m; ++i) r.arrive[i][0] = r.depart[i][0] = {Rational(0), Rational(0)};
    for (std::size_t off = 1; off < n; ++off) {
        const std::size_t k = first + off;
        const Rational w(plan.step_weights[k - 1]);
        for (std::size_t i = 0; i < m; ++i)
            r.arrive[i][off] = {r.depart[i][off - 1].lo + robots[i].rho_lower * w,
                                r.depart[i][off - 1].hi + robots[i].rho_upper * w};
        for (std::size_t i = 0; i < m; ++i) {
            Interval d = r.arrive[i][off];
            for (std::size_t j = 0; j < m; ++j)
                if ((schedule.wait[i][k] >> j) & 1) {
                    d.lo = max(d.lo, r.arrive[j][off].lo);
                    d.hi = max(d.hi, r.arrive[j][off].hi);
                }
            r.depart[i][off] = d;
        }
    }
    return r;
}

// Over-approximation of the field words: a prefix segment followed by the suffix segment forever.
// Within a segment a state is the per-robot index of the next unemitted event; a move emits a set
// of next events that can share one instant, and the letter is the union of their labels.
class FieldWordAutomaton {
public:
    using Progress = std::vector<std::uint32_t>;

    struct Move {
        PropSet letter;
        Progress to;
        RobotMask robots;
    };

    struct Node {
        Segment segment;
        Progress progress;
        PropSet letter;
    };

    FieldWordAutomaton(const TeamPlan& plan, const SyncSchedule& schedule, const std::vector<RobotModel>& robots)
        : m_(plan.robot_count()) {
        if (!schedule.reciprocal()) throw ModelError("synchronization schedule is not reciprocal");
        for (auto seg : {Segment::Prefix, Segment::Suffix}) {
            auto& d = data(seg);
            d.iv = event_intervals(plan, schedule, robots, seg);
            const std::size_t n = d.iv.size();
            d.labels.assign(m_, std::vector<PropSet>(n));
            d.closure.assign(m_, std::vector<RobotMask>(n));
            d.wait.assign(m_, std::vector<RobotMask>(n));
            for (std::size_t i = 0; i < m_; ++i)
                for (std::size_t off = 0; off < n; ++off) {
                    d.labels[i][off] = plan.robot_labels[i][d.iv.first + off];
                    d.wait[i][off] = schedule.wait[i][d.iv.first + off];
                    d.closure[i][off] = d.wait[i][off] | (RobotMask{1} << i);
                }
        }
        build_graph();
    }

    std::size_t robot_count() const { return m_; }
    const SegmentIntervals& intervals(Segment seg) const { return data(seg).iv; }
    const ltl::LabeledGraph& graph() const { return graph_; }
    const Node& node(std::size_t id) const { return nodes_[id]; }
    std::size_t size() const { return nodes_.size(); }

    // Moves available from a progress state of a segment.
    std::vector<Move> moves(Segment seg, const Progress& at) const {
        const auto& d = data(seg);
        const auto n = static_cast<std::uint32_t>(d.iv.size());
        std::vector<Move> out;
        RobotMask open = 0;
        for (std::size_t i = 0; i < m_; ++i)
            if (at[i] < n) open |= RobotMask{1} << i;
        if (!open) return out;
        // enumerate nonempty subsets of open robots in increasing order
        for (RobotMask u = open; ; u = (u - 1) & open) {
            if (u && valid(d, at, u, open)) {
                Move mv{0, at, u};
                for (std::size_t i = 0; i < m_; ++i)
                    if ((u >> i) & 1) {
                        mv.letter |= d.labels[i][at[i]];
                        ++mv.to[i];
                    }
                out.push_back(std::move(mv));
            }
            if (!u) break;
        }
        std::reverse(out.begin(), out.end());
        return out;
    }

    Progress start() const { return Progress(m_, 0); }
    bool complete(Segment seg, const Progress& at) const {
        const auto n = data(seg).iv.size();
        for (auto p : at)
            if (p < n) return false;
        return true;
    }

    // Whether the letters trace a path through a segment from its start to its end.
    bool accepts_segment(Segment seg, const std::vector<PropSet>& letters) const {
        std::vector<Progress> current{start()};
        for (auto letter : letters) {
            std::vector<Progress> next;
            for (const auto& at : current)
                for (auto& mv : moves(seg, at))
                    if (mv.letter == letter && std::find(next.begin(), next.end(), mv.to) == next.end())
                        next.push_back(std::move(mv.to));
            current = std::move(next);
            if (current.empty()) return false;
        }
        for (const auto& at : current)
            if (complete(seg, at)) return true;
        return false;
    }

    // Letters of the planned word along a lasso witness in a product with this automaton's graph.
    std::string describe(const ltl::ProductGraph& p, const ltl::Witness& w, const Alphabet& alphabet) const {
        std::string s;
        for (auto x : w.stem) s += alphabet.format(nodes_[p.states[x].first].letter) + " ";
        s += "(";
        for (std::size_t k = 0; k < w.cycle.size(); ++k) {
            if (k) s += " ";
            s += alphabet.format(nodes_[p.states[w.cycle[k]].first].letter);
        }
        return s + ")^w";
    }

private:
    struct SegmentData {
        SegmentIntervals iv;
        std::vector<std::vector<PropSet>> labels;
        std::vector<std::vector<RobotMask>> closure;
        std::vector<std::vector<RobotMask>> wait;
    };

    const SegmentData& data(Segment s) const { return s == Segment::Prefix ? prefix_ : suffix_; }
    SegmentData& data(Segment s) { return s == Segment::Prefix ? prefix_ : suffix_; }

    bool valid(const SegmentData& d, const Progress& at, RobotMask u, RobotMask open) const {
        Rational max_lo;
        Rational min_hi;
        bool first = true;
        for (std::size_t i = 0; i < m_; ++i) {
            if (!((u >> i) & 1)) continue;
            const std::uint32_t k = at[i];
            // a waited robot arrives at k after emitting k - 1
            if (k > 0)
                for (std::size_t j = 0; j < m_; ++j)
                    if (((d.wait[i][k] >> j) & 1) && at[j] < k) return false;
            // equal wait closures depart at the same instant
            for (std::size_t j = 0; j < m_; ++j) {
                if (j == i) continue;
                if (d.closure[j][k] == d.closure[i][k] && (at[j] != k || !((u >> j) & 1))) return false;
            }
            const auto& e = d.iv.depart[i][k];
            if (first || max_lo < e.lo) max_lo = e.lo;
            if (first || e.hi < min_hi) min_hi = e.hi;
            first = false;
        }
        if (min_hi < max_lo) return false;
        // an event left pending must be able to happen strictly later
        for (std::size_t j = 0; j < m_; ++j)
            if (((open >> j) & 1) && !((u >> j) & 1) && d.iv.depart[j][at[j]].hi <= max_lo) return false;
        return true;
    }

    void build_graph() {
        std::map<std::tuple<int, Progress, PropSet>, std::uint32_t> index;
        auto intern = [&](Segment seg, const Progress& p, PropSet letter) {
            auto key = std::make_tuple(seg == Segment::Prefix ? 0 : 1, p, letter);
            auto [it, fresh] = index.emplace(key, static_cast<std::uint32_t>(nodes_.size()));
            if (fresh) {
                nodes_.push_back({seg, p, letter});
                graph_.add(letter);
                check_state_cap(nodes_.size(), "field-word automaton");
            }
            return it->second;
        };
        auto expand = [&](Segment seg, const Progress& at) {
            if (complete(seg, at)) return moves(Segment::Suffix, start());
            return moves(seg, at);
        };
        auto seg_after = [&](Segment seg, const Progress& at) { return complete(seg, at) ? Segment::Suffix : seg; };
        for (const auto& mv : moves(Segment::Prefix, start())) graph_.initial.push_back(intern(Segment::Prefix, mv.to, mv.letter));
        for (std::size_t x = 0; x < nodes_.size(); ++x) {
            const Node cur = nodes_[x];
            Segment seg = seg_after(cur.segment, cur.progress);
            for (const auto& mv : expand(cur.segment, cur.progress)) {
                auto to = intern(seg, mv.to, mv.letter);
                graph_.succ[x].push_back({to, 1});
            }
        }
    }

    std::size_t m_;
    SegmentData prefix_;
    SegmentData suffix_;
    std::vector<Node> nodes_;
    ltl::LabeledGraph graph_;
};

struct SyncDecision {
    std::size_t position = 0;
    std::size_t robot = 0;   // the robot that would stop waiting
    std::size_t waited = 0;  // the robot it would stop waiting for
    bool removed = false;
    std::string witness;  // violating field word when the removal was rejected
};

struct SyncResult {
    SyncSchedule schedule;
    std::vector<SyncDecision> decisions;
    std::size_t emptiness_checks = 0;
};

// Witness of a field word violating the mission, if any.
inline std::optional<std::string> field_violation(const TeamPlan& plan, const SyncSchedule& schedule,
                                                  const std::vector<RobotModel>& robots,
                                                  const ltl::BuchiAutomaton& b_neg) {
    FieldWordAutomaton w(plan, schedule, robots);
    auto p = ltl::build_product(w.graph(), b_neg);
    auto witness = ltl::find_accepting_lasso(p);
    if (!witness) return std::nullopt;
    return w.describe(p, *witness, plan.alphabet);
}

// Greedy shrinking of the all-to-all schedule: ascending position, then waiting robot, then waited
// robot. Position 0 and the suffix start keep their global synchronization.
inline SyncResult sync_sequences(const TeamPlan& plan, const std::vector<RobotModel>& robots,
                                 const ltl::BuchiAutomaton& b_neg) {
    const std::size_t m = plan.robot_count();
    SyncResult out{SyncSchedule::full(m, plan.length(), plan.prefix_len()), {}, 0};
    if (auto v = field_violation(plan, out.schedule, robots, b_neg))
        throw NotRobustError("mission not robustly satisfiable at these deviation bounds; violating field word: " + *v);
    for (std::size_t k = 0; k < plan.length(); ++k) {
        if (k == 0 || k == plan.prefix_len()) continue;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                if (j == i) continue;
                out.schedule.remove(i, k, j);
                ++out.emptiness_checks;
                SyncDecision d{k, i, j, true, {}};
                if (auto v = field_violation(plan, out.schedule, robots, b_neg)) {
                    out.schedule.restore(i, k, j);
                    d.removed = false;
                    d.witness = *v;
                }
                out.decisions.push_back(std::move(d));
            }
    }
    return out;
}

inline SyncResult sync_sequences(const TeamPlan& plan, const std::vector<RobotModel>& robots, const Mission& mission) {
    return sync_sequences(plan, robots, ltl::ltl_to_buchi(!mission.formula, mission.alphabet));
}

// J * rho_upper + d_s * (rho_upper - rho_lower) with team-wide deviation bounds.
inline CostReport field_bound(CostReport report, const std::vector<RobotModel>& robots) {
    auto [lo, hi] = team_rho(robots);
    report.rho_lower = lo;
    report.rho_upper = hi;
    report.field_bound = field_cost_bound(report.planned_cost, report.suffix_duration, lo, hi);
    return report;
}

inline void write_explain(std::ostream& os, const SyncResult& r, const std::vector<std::string>& names) {
    for (const auto& d : r.decisions) {
        os << "position " << d.position << ": " << names[d.robot] << " waits for " << names[d.waited] << ": "
           << (d.removed ? "removed" : "kept");
        if (!d.removed) os << "; violating field word " << d.witness;
        os << "\n";
    }
    os << r.emptiness_checks << " emptiness checks\n";
}

}  // namespace syncplan
