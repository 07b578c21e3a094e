#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "syncplan/core.hpp"
#include "syncplan/error.hpp"
#include "syncplan/ltl/formula.hpp"
#include "syncplan/optimal_run.hpp"
#include "syncplan/sync.hpp"

namespace syncplan {

enum class Sampling { Uniform, Adversarial, Nominal };

struct SimConfig {
    std::uint64_t seed = 0;
    std::size_t cycles = 1;
    Sampling sampling = Sampling::Uniform;
    // Replaces a robot's deviation bounds when set.
    std::vector<std::optional<std::pair<Rational, Rational>>> rho_override;
};

struct SimEvent {
    Rational time;
    std::size_t robot = 0;
    std::size_t position = 0;  // absolute step index
    std::string state;
    PropSet letter = 0;
    Rational arrived;
    RobotMask waited = 0;
    friend bool operator==(const SimEvent&, const SimEvent&) = default;
};

struct SimTrace {
    std::vector<std::string> robot_names;
    Alphabet alphabet;
    PropSet pi = 0;
    std::size_t prefix_len = 0;
    std::size_t suffix_len = 0;
    std::size_t cycles = 0;
    std::vector<SimEvent> events;  // emission order: time, then robot
    TimedWord observed_word;
    std::vector<PropSet> prefix_word;
    std::vector<std::vector<PropSet>> cycle_words;
    std::vector<Rational> cycle_start;  // emission time of each cycle's synchronization
    std::vector<Rational> pi_times;

    friend bool operator==(const SimTrace&, const SimTrace&) = default;
};

namespace detail {

// Exact sample in [0, 1] on a 2^20 grid.
inline Rational unit_sample(std::mt19937_64& rng) {
    constexpr std::uint64_t grid = std::uint64_t{1} << 20;
    while (true) {
        std::uint64_t n = rng() >> 43;  // 21 bits
        if (n <= grid) return Rational(static_cast<std::int64_t>(n), static_cast<std::int64_t>(grid));
    }
}

inline std::vector<PropSet> merged_letters(std::vector<TimedEntry> events) {
    std::vector<PropSet> out;
    for (const auto& e : merge_events(std::move(events)).entries) out.push_back(e.letter);
    return out;
}

}  // namespace detail

// Executes the wait/notify protocol: on arrival at position k a robot notifies its notify-set, then
// blocks until every robot in its wait-set has notified it for position k, then emits its labels
// and departs. Travel takes w * rho with rho drawn from the robot's deviation interval.
inline SimTrace simulate(const TeamPlan& plan, const SyncSchedule& schedule, const std::vector<RobotModel>& robots,
                         const SimConfig& config) {
    if (config.cycles < 1) throw ModelError("at least one suffix cycle is required");
    if (!schedule.reciprocal()) throw ModelError("synchronization schedule is not reciprocal");
    const std::size_t m = plan.robot_count();
    const std::size_t total = plan.prefix_len() + config.cycles * plan.suffix_len();
    std::mt19937_64 rng(config.seed);

    std::vector<Rational> rho_lo(m), rho_hi(m);
    for (std::size_t i = 0; i < m; ++i) {
        rho_lo[i] = robots[i].rho_lower;
        rho_hi[i] = robots[i].rho_upper;
        if (i < config.rho_override.size() && config.rho_override[i]) {
            rho_lo[i] = config.rho_override[i]->first;
            rho_hi[i] = config.rho_override[i]->second;
        }
    }
    auto duration = [&](std::size_t i, std::int64_t w) {
        Rational rho{1};
        switch (config.sampling) {
        case Sampling::Nominal: break;
        case Sampling::Adversarial: rho = (rng() & 1) ? rho_hi[i] : rho_lo[i]; break;
        case Sampling::Uniform: rho = rho_lo[i] + (rho_hi[i] - rho_lo[i]) * detail::unit_sample(rng); break;
        }
        return rho * Rational(w);
    };
    auto wrapped = [&](std::size_t k) { return schedule.wrap(k); };
    auto run_state = [&](std::size_t i, std::size_t k) { return plan.robot_runs[i].at(k); };

    SimTrace trace;
    trace.robot_names = plan.robot_names;
    trace.alphabet = plan.alphabet;
    trace.pi = plan.pi_bit();
    trace.prefix_len = plan.prefix_len();
    trace.suffix_len = plan.suffix_len();
    trace.cycles = config.cycles;

    struct RobotState {
        std::size_t position = 0;
        Rational arrived;
        bool blocked = false;
        bool finished = false;
    };
    std::vector<RobotState> state(m);
    std::vector<std::map<std::size_t, RobotMask>> mailbox(m);  // position -> robots that notified
    using Arrival = std::tuple<Rational, std::size_t, std::size_t>;  // time, robot, position
    std::priority_queue<Arrival, std::vector<Arrival>, std::greater<>> queue;
    for (std::size_t i = 0; i < m; ++i) queue.emplace(Rational(0), i, 0);

    auto try_depart = [&](std::size_t i, const Rational& now) {
        auto& st = state[i];
        const RobotMask need = schedule.wait[i][wrapped(st.position)];
        RobotMask got = mailbox[i].count(st.position) ? mailbox[i][st.position] : 0;
        if ((need & got) != need) {
            st.blocked = true;
            return;
        }
        st.blocked = false;
        mailbox[i].erase(st.position);
        const std::size_t k = st.position;
        const std::size_t wk = wrapped(k);
        trace.events.push_back({now, i, k, run_state(i, k), plan.robot_labels[i][wk], st.arrived, need});
        if (k + 1 >= total) {
            st.finished = true;
            return;
        }
        queue.emplace(now + duration(i, plan.step_weights[wk]), i, k + 1);
    };

    while (!queue.empty()) {
        auto [now, i, k] = queue.top();
        queue.pop();
        state[i].position = k;
        state[i].arrived = now;
        const RobotMask notify = schedule.notify[i][wrapped(k)];
        for (std::size_t j = 0; j < m; ++j)
            if ((notify >> j) & 1) mailbox[j][k] |= RobotMask{1} << i;
        try_depart(i, now);
        for (std::size_t j = 0; j < m; ++j)
            if (((notify >> j) & 1) && state[j].blocked && state[j].position == k) try_depart(j, now);
    }

    for (std::size_t i = 0; i < m; ++i)
        if (!state[i].finished) {
            std::ostringstream msg;
            msg << "deadlock:";
            for (std::size_t j = 0; j < m; ++j)
                if (state[j].blocked) {
                    const RobotMask need = schedule.wait[j][wrapped(state[j].position)];
                    RobotMask got = mailbox[j].count(state[j].position) ? mailbox[j][state[j].position] : 0;
                    msg << " " << plan.robot_names[j] << " at position " << state[j].position << " waits for "
                        << format_robot_set(need & ~got) << ";";
                }
            throw VerificationError(msg.str());
        }

    std::stable_sort(trace.events.begin(), trace.events.end(), [](const SimEvent& a, const SimEvent& b) {
        return std::tie(a.time, a.robot) < std::tie(b.time, b.robot);
    });

    // protocol check: every emission follows the arrival of each waited robot at the same position
    std::vector<std::vector<Rational>> arrival(m, std::vector<Rational>(total));
    std::vector<std::vector<Rational>> emit(m, std::vector<Rational>(total));
    for (const auto& e : trace.events) {
        arrival[e.robot][e.position] = e.arrived;
        emit[e.robot][e.position] = e.time;
    }
    for (const auto& e : trace.events) {
        for (std::size_t j = 0; j < m; ++j)
            if (((e.waited >> j) & 1) && e.time < arrival[j][e.position])
                throw VerificationError("protocol violated: emission before a waited robot arrived");
        if (e.position > 0 && !(emit[e.robot][e.position - 1] < e.time))
            throw VerificationError("protocol violated: robot event times must increase");
    }

    std::vector<TimedEntry> all, prefix;
    std::vector<std::vector<TimedEntry>> per_cycle(config.cycles);
    for (const auto& e : trace.events) {
        all.push_back({e.time, e.letter});
        if (e.position < plan.prefix_len())
            prefix.push_back({e.time, e.letter});
        else
            per_cycle[(e.position - plan.prefix_len()) / plan.suffix_len()].push_back({e.time, e.letter});
    }
    trace.observed_word = merge_events(all);
    trace.prefix_word = detail::merged_letters(prefix);
    for (auto& c : per_cycle) {
        trace.cycle_start.push_back(c.front().time);
        trace.cycle_words.push_back(detail::merged_letters(std::move(c)));
    }
    trace.pi_times = extract_pi_times(trace.observed_word, trace.pi);
    return trace;
}

// Largest gap between consecutive pi-times from the first suffix cycle on.
inline Rational observed_cost(const SimTrace& trace) {
    if (trace.cycles < 2) throw ModelError("observed cost needs at least two completed suffix cycles");
    std::size_t start = 0;
    while (start < trace.pi_times.size() && trace.pi_times[start] < trace.cycle_start.front()) ++start;
    return suffix_cost(trace.pi_times, start);
}

struct Verdict {
    bool ok = true;
    std::vector<std::string> failures;
};

// Checks every completed cycle c as the lasso (prefix, cycles 1..c-1 | cycle c) against the
// formula, and each segment word against the field-word automaton when one is given.
inline Verdict verify_trace(const SimTrace& trace, const ltl::Formula& formula, const FieldWordAutomaton* w = nullptr) {
    Verdict v;
    ltl::LassoWord lasso;
    lasso.stem = trace.prefix_word;
    auto format = [&](const std::vector<PropSet>& letters) {
        std::string s;
        for (auto l : letters) s += trace.alphabet.format(l);
        return s;
    };
    if (w && !w->accepts_segment(Segment::Prefix, trace.prefix_word)) {
        v.ok = false;
        v.failures.push_back("prefix word " + format(trace.prefix_word) + " is outside the field-word automaton");
    }
    for (std::size_t c = 0; c < trace.cycle_words.size(); ++c) {
        lasso.loop = trace.cycle_words[c];
        if (!ltl::eval_lasso(formula, lasso)) {
            v.ok = false;
            v.failures.push_back("cycle " + std::to_string(c + 1) + " violates the mission: loop " + format(lasso.loop));
        }
        if (w && !w->accepts_segment(Segment::Suffix, lasso.loop)) {
            v.ok = false;
            v.failures.push_back("cycle " + std::to_string(c + 1) + " word " + format(lasso.loop) +
                                 " is outside the field-word automaton");
        }
        lasso.stem.insert(lasso.stem.end(), lasso.loop.begin(), lasso.loop.end());
    }
    return v;
}

inline void write_event_log(std::ostream& os, const SimTrace& trace) {
    for (const auto& e : trace.events) {
        os << "t=" << e.time.str() << " (" << e.time.to_double() << ") robot=" << trace.robot_names[e.robot]
           << " k=" << e.position << " state=" << e.state << " letter=" << trace.alphabet.format(e.letter)
           << " arrived=" << e.arrived.str() << " waited=" << format_robot_set(e.waited) << "\n";
    }
}

// Timeline: one lane per robot, a dot per emission (filled when it carries propositions), a line
// from each waited robot's arrival to the waiting robot's emission.
inline void write_svg(std::ostream& os, const SimTrace& trace) {
    const std::size_t m = trace.robot_names.size();
    double t_end = trace.events.empty() ? 1.0 : trace.events.back().time.to_double();
    if (t_end <= 0) t_end = 1.0;
    const double left = 80, right = 20, lane = 60, top = 30;
    const double width = std::max(600.0, 40.0 * t_end);
    const double height = top * 2 + lane * static_cast<double>(m);
    auto x = [&](const Rational& t) { return left + (width - left - right) * t.to_double() / t_end; };
    auto y = [&](std::size_t i) { return top + lane * (static_cast<double>(i) + 0.5); };
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < m; ++i) {
        os << "<text x=\"8\" y=\"" << y(i) + 4 << "\" font-size=\"12\">" << trace.robot_names[i] << "</text>\n";
        os << "<line x1=\"" << left << "\" y1=\"" << y(i) << "\" x2=\"" << width - right << "\" y2=\"" << y(i)
           << "\" stroke=\"#bbb\"/>\n";
    }
    for (const auto& t : trace.cycle_start)
        os << "<line x1=\"" << x(t) << "\" y1=\"" << top / 2 << "\" x2=\"" << x(t) << "\" y2=\"" << height - top / 2
           << "\" stroke=\"#ddd\" stroke-dasharray=\"4 3\"/>\n";
    std::map<std::pair<std::size_t, std::size_t>, Rational> arrival;
    for (const auto& e : trace.events) arrival[{e.robot, e.position}] = e.arrived;
    for (const auto& e : trace.events)
        for (std::size_t j = 0; j < m; ++j)
            if ((e.waited >> j) & 1)
                os << "<line x1=\"" << x(arrival[{j, e.position}]) << "\" y1=\"" << y(j) << "\" x2=\"" << x(e.time)
                   << "\" y2=\"" << y(e.robot) << "\" stroke=\"#36c\" stroke-width=\"0.8\"/>\n";
    for (const auto& e : trace.events) {
        bool pi = (e.letter & trace.pi) != 0;
        os << "<circle cx=\"" << x(e.time) << "\" cy=\"" << y(e.robot) << "\" r=\"" << (e.letter ? 4 : 2)
           << "\" fill=\"" << (pi ? "#c33" : e.letter ? "#333" : "#999") << "\"><title>" << e.state << " "
           << trace.alphabet.format(e.letter) << " t=" << e.time.to_double() << "</title></circle>\n";
    }
    os << "</svg>\n";
}

}  // namespace syncplan
