#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "syncplan/core.hpp"
#include "syncplan/error.hpp"
#include "syncplan/optimal_run.hpp"
#include "syncplan/simulator.hpp"
#include "syncplan/sync.hpp"

namespace syncplan {

using Json = nlohmann::ordered_json;

struct InputDigest {
    std::string path;
    std::string sha256;
    friend bool operator==(const InputDigest&, const InputDigest&) = default;
};

// Everything `simulate` needs: the plan, its schedule, the robots with traveling states inserted,
// and the mission. Rationals are stored as strings ("19/20") so values round-trip exactly.
struct PlanFile {
    std::string tool_version;
    std::vector<InputDigest> robot_inputs;
    InputDigest mission_input;
    std::string formula;
    std::size_t team_states = 0;
    std::size_t team_edges = 0;
    std::uint64_t team_bound = 0;
    TeamPlan plan;
    SyncSchedule schedule;
    std::vector<RobotModel> robots;

    Mission mission() const {
        std::set<std::string> props(plan.alphabet.names().begin(), plan.alphabet.names().end());
        return make_mission(formula, plan.optimizing, props);
    }
};

namespace detail {

inline Json label_json(const Label& l) {
    Json a = Json::array();
    for (const auto& p : l) a.push_back(p);
    return a;
}

inline Json letter_json(const Alphabet& alphabet, PropSet letter) { return label_json(alphabet.label(letter)); }

inline PropSet letter_from(const Alphabet& alphabet, const Json& j) {
    PropSet m = 0;
    for (const auto& p : j) m |= alphabet.bit(p.get<std::string>());
    return m;
}

inline Json robot_set_json(const std::vector<std::string>& names, RobotMask mask) {
    Json a = Json::array();
    for (std::size_t j = 0; j < names.size(); ++j)
        if ((mask >> j) & 1) a.push_back(names[j]);
    return a;
}

inline RobotMask robot_set_from(const std::vector<std::string>& names, const Json& j) {
    RobotMask m = 0;
    for (const auto& n : j) {
        auto it = std::find(names.begin(), names.end(), n.get<std::string>());
        if (it == names.end()) throw ParseError("plan", "unknown robot '" + n.get<std::string>() + "'");
        m |= RobotMask{1} << static_cast<std::size_t>(it - names.begin());
    }
    return m;
}

inline Json robot_json(const RobotModel& r) {
    Json j;
    j["name"] = r.name;
    j["rho"] = {r.rho_lower.str(), r.rho_upper.str()};
    j["init"] = r.ts.name(r.ts.initial());
    Json states = Json::array();
    for (TransitionSystem::StateId s = 0; s < r.ts.size(); ++s)
        states.push_back(Json{{"name", r.ts.name(s)}, {"props", label_json(r.ts.label(s))}});
    j["states"] = states;
    Json edges = Json::array();
    for (TransitionSystem::StateId s = 0; s < r.ts.size(); ++s)
        for (const auto& e : r.ts.edges(s))
            edges.push_back(Json{{"from", r.ts.name(s)}, {"to", r.ts.name(e.to)}, {"weight", e.weight}});
    j["edges"] = edges;
    return j;
}

inline RobotModel robot_from(const Json& j) {
    RobotModel r;
    r.name = j.at("name").get<std::string>();
    r.rho_lower = Rational::parse(j.at("rho").at(0).get<std::string>());
    r.rho_upper = Rational::parse(j.at("rho").at(1).get<std::string>());
    for (const auto& s : j.at("states")) {
        Label l;
        for (const auto& p : s.at("props")) l.insert(p.get<std::string>());
        r.ts.add_state(s.at("name").get<std::string>(), l);
    }
    for (const auto& e : j.at("edges"))
        r.ts.add_edge(e.at("from").get<std::string>(), e.at("to").get<std::string>(), e.at("weight").get<std::int64_t>());
    r.ts.set_initial(j.at("init").get<std::string>());
    r.validate();
    return r;
}

inline Json cost_json(const CostReport& c) {
    return Json{{"planned_cost", c.planned_cost.str()},
                {"suffix_duration", c.suffix_duration.str()},
                {"rho_lower", c.rho_lower.str()},
                {"rho_upper", c.rho_upper.str()},
                {"field_bound", c.field_bound.str()}};
}

inline CostReport cost_from(const Json& j) {
    return {Rational::parse(j.at("planned_cost").get<std::string>()),
            Rational::parse(j.at("suffix_duration").get<std::string>()),
            Rational::parse(j.at("rho_lower").get<std::string>()), Rational::parse(j.at("rho_upper").get<std::string>()),
            Rational::parse(j.at("field_bound").get<std::string>())};
}

}  // namespace detail

inline Json to_json(const PlanFile& f) {
    const auto& p = f.plan;
    Json j;
    j["format"] = "syncplan-plan";
    j["format_version"] = 1;
    j["tool_version"] = f.tool_version;
    Json inputs;
    Json rin = Json::array();
    for (const auto& d : f.robot_inputs) rin.push_back(Json{{"path", d.path}, {"sha256", d.sha256}});
    inputs["robots"] = rin;
    inputs["mission"] = Json{{"path", f.mission_input.path}, {"sha256", f.mission_input.sha256}};
    j["inputs"] = inputs;
    j["mission"] = Json{{"formula", f.formula}, {"optimizing", p.optimizing}, {"propositions", p.alphabet.names()}};
    j["team_ts"] = Json{{"states", f.team_states}, {"edges", f.team_edges}, {"state_bound", f.team_bound}};
    j["cost"] = detail::cost_json(p.cost);
    j["suffix_start_time"] = p.suffix_start_time.str();
    j["prefix_length"] = p.prefix_len();
    j["suffix_length"] = p.suffix_len();
    Json positions = Json::array();
    for (std::size_t k = 0; k < p.length(); ++k)
        positions.push_back(Json{{"k", k},
                                 {"time", p.times[k].str()},
                                 {"weight_to_next", p.step_weights[k]},
                                 {"team_state", p.team_run.at(k)},
                                 {"letter", detail::letter_json(p.alphabet, p.letters[k])}});
    j["team_run"] = positions;
    Json runs = Json::array();
    for (std::size_t i = 0; i < p.robot_count(); ++i) {
        Json steps = Json::array();
        for (std::size_t k = 0; k < p.length(); ++k)
            steps.push_back(Json{{"state", p.robot_runs[i].at(k)},
                                 {"time", p.times[k].str()},
                                 {"wait", detail::robot_set_json(p.robot_names, f.schedule.wait[i][k])},
                                 {"notify", detail::robot_set_json(p.robot_names, f.schedule.notify[i][k])},
                                 {"labels", detail::letter_json(p.alphabet, p.robot_labels[i][k])}});
        runs.push_back(Json{{"robot", p.robot_names[i]}, {"positions", steps}});
    }
    j["runs"] = runs;
    Json robots = Json::array();
    for (const auto& r : f.robots) robots.push_back(detail::robot_json(r));
    j["robots"] = robots;
    return j;
}

inline PlanFile plan_from_json(const Json& j) {
    try {
        if (j.at("format").get<std::string>() != "syncplan-plan") throw ParseError("plan", "not a plan file");
        PlanFile f;
        f.tool_version = j.at("tool_version").get<std::string>();
        for (const auto& d : j.at("inputs").at("robots"))
            f.robot_inputs.push_back({d.at("path").get<std::string>(), d.at("sha256").get<std::string>()});
        f.mission_input = {j.at("inputs").at("mission").at("path").get<std::string>(),
                           j.at("inputs").at("mission").at("sha256").get<std::string>()};
        f.formula = j.at("mission").at("formula").get<std::string>();
        f.team_states = j.at("team_ts").at("states").get<std::size_t>();
        f.team_edges = j.at("team_ts").at("edges").get<std::size_t>();
        f.team_bound = j.at("team_ts").at("state_bound").get<std::uint64_t>();
        auto& p = f.plan;
        auto props = j.at("mission").at("propositions").get<std::vector<std::string>>();
        p.alphabet = Alphabet(std::set<std::string>(props.begin(), props.end()));
        p.optimizing = j.at("mission").at("optimizing").get<std::string>();
        p.cost = detail::cost_from(j.at("cost"));
        p.suffix_start_time = Rational::parse(j.at("suffix_start_time").get<std::string>());
        const auto beg = j.at("prefix_length").get<std::size_t>();
        const auto n = beg + j.at("suffix_length").get<std::size_t>();
        const auto& positions = j.at("team_run");
        if (positions.size() != n || beg == 0 || beg >= n) throw ParseError("plan", "run length mismatch");
        for (std::size_t k = 0; k < n; ++k) {
            const auto& pos = positions.at(k);
            (k < beg ? p.team_run.prefix : p.team_run.suffix_cycle).push_back(pos.at("team_state").get<std::string>());
            p.times.push_back(Rational::parse(pos.at("time").get<std::string>()));
            p.step_weights.push_back(pos.at("weight_to_next").get<std::int64_t>());
            p.letters.push_back(detail::letter_from(p.alphabet, pos.at("letter")));
        }
        const auto& runs = j.at("runs");
        for (const auto& r : runs) p.robot_names.push_back(r.at("robot").get<std::string>());
        const std::size_t m = p.robot_names.size();
        f.schedule = SyncSchedule::full(m, n, beg);
        p.robot_runs.resize(m);
        p.robot_labels.assign(m, {});
        for (std::size_t i = 0; i < m; ++i) {
            const auto& steps = runs.at(i).at("positions");
            if (steps.size() != n) throw ParseError("plan", "run length mismatch for robot " + p.robot_names[i]);
            for (std::size_t k = 0; k < n; ++k) {
                const auto& s = steps.at(k);
                (k < beg ? p.robot_runs[i].prefix : p.robot_runs[i].suffix_cycle).push_back(s.at("state").get<std::string>());
                f.schedule.wait[i][k] = detail::robot_set_from(p.robot_names, s.at("wait"));
                f.schedule.notify[i][k] = detail::robot_set_from(p.robot_names, s.at("notify"));
                p.robot_labels[i].push_back(detail::letter_from(p.alphabet, s.at("labels")));
            }
        }
        for (const auto& r : j.at("robots")) f.robots.push_back(detail::robot_from(r));
        if (f.robots.size() != m) throw ParseError("plan", "robot count mismatch");
        for (std::size_t i = 0; i < m; ++i)
            if (f.robots[i].name != p.robot_names[i]) throw ParseError("plan", "robot order mismatch");
        return f;
    } catch (const Json::exception& e) {
        throw ParseError("plan", std::string("malformed plan file: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError("plan", std::string("malformed plan file: ") + e.what());
    } catch (const ModelError& e) {
        throw ParseError("plan", std::string("malformed plan file: ") + e.what());
    }
}

inline std::string dump_plan(const PlanFile& f) { return to_json(f).dump(2) + "\n"; }

inline PlanFile parse_plan(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::exception& e) {
        throw ParseError("plan", std::string("invalid JSON: ") + e.what());
    }
    return plan_from_json(j);
}

inline Json to_json(const SimTrace& t) {
    Json j;
    j["format"] = "syncplan-trace";
    j["robots"] = t.robot_names;
    j["prefix_length"] = t.prefix_len;
    j["suffix_length"] = t.suffix_len;
    j["cycles"] = t.cycles;
    Json events = Json::array();
    for (const auto& e : t.events)
        events.push_back(Json{{"time", e.time.str()},
                              {"robot", t.robot_names[e.robot]},
                              {"k", e.position},
                              {"state", e.state},
                              {"arrived", e.arrived.str()},
                              {"letter", detail::letter_json(t.alphabet, e.letter)},
                              {"waited", detail::robot_set_json(t.robot_names, e.waited)}});
    j["events"] = events;
    Json word = Json::array();
    for (const auto& e : t.observed_word.entries)
        word.push_back(Json{{"time", e.time.str()}, {"letter", detail::letter_json(t.alphabet, e.letter)}});
    j["observed_word"] = word;
    Json pi = Json::array();
    for (const auto& x : t.pi_times) pi.push_back(x.str());
    j["pi_times"] = pi;
    return j;
}

}  // namespace syncplan
