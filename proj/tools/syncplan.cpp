#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "syncplan/syncplan.hpp"

#ifndef SYNCPLAN_VERSION
#define SYNCPLAN_VERSION "dev"
#endif

namespace {

using namespace syncplan;

enum Exit { kOk = 0, kUsage = 1, kUnsat = 2, kNotRobust = 3, kVerification = 4 };

std::string sha256_file(const std::string& path) {
    std::string data = detail::read_file(path);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return hex.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path, "cannot write file");
    out << text;
}

std::vector<RobotModel> load_robots(const std::vector<std::string>& files) {
    std::vector<RobotModel> robots;
    for (const auto& f : files) robots.push_back(load_robot(f));
    return robots;
}

std::string decimal(const Rational& r) {
    if (r.is_integer()) return r.str();
    std::ostringstream s;
    s << r.str() << " (" << r.to_double() << ")";
    return s.str();
}

void print_bounds(std::ostream& os, const std::vector<RobotModel>& robots, std::size_t team_states,
                  std::optional<std::size_t> region_states) {
    auto b = state_bounds(robots);
    os << "bounds        actual  bound\n";
    os << "team-ts       " << std::setw(6) << team_states << "  " << b.team << "\n";
    os << "region        " << std::setw(6) << (region_states ? std::to_string(*region_states) : "-") << "  " << b.region << "\n";
    os << "naive         " << std::setw(6) << "-" << "  " << b.naive << "\n";
}

int cmd_plan(const std::vector<std::string>& robot_files, const std::string& mission_file, const std::string& out,
             const std::string& explain) {
    auto robots = load_robots(robot_files);
    auto mission = load_mission(mission_file, robots);
    auto result = run_pipeline(robots, mission);

    PlanFile f;
    f.tool_version = SYNCPLAN_VERSION;
    for (const auto& path : robot_files) f.robot_inputs.push_back({path, sha256_file(path)});
    f.mission_input = {mission_file, sha256_file(mission_file)};
    f.formula = mission.text;
    f.team_states = result.team.ts.size();
    f.team_edges = result.team.ts.edge_count();
    f.team_bound = result.bounds.team;
    f.plan = result.plan;
    f.schedule = result.sync.schedule;
    f.robots = result.robots;
    write_text(out, dump_plan(f));

    const auto& c = result.plan.cost;
    std::cout << "team TS: " << f.team_states << " states, " << f.team_edges << " edges (state bound " << f.team_bound
              << ")\n";
    std::cout << "planned cost J: " << decimal(c.planned_cost) << " time units\n";
    std::cout << "suffix duration d_s: " << decimal(c.suffix_duration) << " time units\n";
    std::cout << "deviation bounds: [" << c.rho_lower.str() << ", " << c.rho_upper.str() << "]\n";
    std::cout << "field bound: " << decimal(c.field_bound) << " time units\n";
    std::cout << "prefix length " << result.plan.prefix_len() << ", suffix length " << result.plan.suffix_len() << "\n";
    std::cout << "synchronization: " << result.sync.schedule.wait_count() << " wait entries kept, "
              << result.sync.emptiness_checks << " emptiness checks\n";
    for (std::size_t i = 0; i < result.plan.robot_count(); ++i) {
        std::cout << result.plan.robot_names[i] << ":";
        for (std::size_t k = 0; k < result.plan.length(); ++k) {
            if (k == result.plan.prefix_len()) std::cout << " |";
            std::cout << " " << result.plan.robot_runs[i].at(k);
        }
        std::cout << "\n";
    }
    if (!explain.empty()) {
        if (explain == "-") {
            write_explain(std::cout, result.sync, result.plan.robot_names);
        } else {
            std::ofstream os(explain);
            if (!os) throw ParseError(explain, "cannot write file");
            write_explain(os, result.sync, result.plan.robot_names);
        }
    }
    std::cout << "wrote " << out << "\n";
    return kOk;
}

struct SimulateArgs {
    std::string plan;
    std::uint64_t seed = 0;
    std::size_t cycles = 100;
    bool adversarial = false;
    bool nominal = false;
    std::string plot;
    std::string trace;
    std::string log;
    std::vector<std::string> robot_files;
    std::string mission_file;
};

int cmd_simulate(const SimulateArgs& a) {
    auto f = parse_plan(detail::read_file(a.plan));
    if (!a.robot_files.empty()) {
        if (a.robot_files.size() != f.robot_inputs.size())
            throw ParseError(a.plan, "plan was made from " + std::to_string(f.robot_inputs.size()) + " robot files");
        for (std::size_t i = 0; i < a.robot_files.size(); ++i)
            if (sha256_file(a.robot_files[i]) != f.robot_inputs[i].sha256)
                throw ParseError(a.robot_files[i], "digest does not match the plan's input " + f.robot_inputs[i].path);
    }
    if (!a.mission_file.empty() && sha256_file(a.mission_file) != f.mission_input.sha256)
        throw ParseError(a.mission_file, "digest does not match the plan's mission input " + f.mission_input.path);
    if (a.cycles < 2) throw ParseError("--cycles", "at least two suffix cycles are needed to measure the cost");

    auto mission = f.mission();
    SimConfig cfg;
    cfg.seed = a.seed;
    cfg.cycles = a.cycles;
    cfg.sampling = a.nominal ? Sampling::Nominal : a.adversarial ? Sampling::Adversarial : Sampling::Uniform;
    auto trace = simulate(f.plan, f.schedule, f.robots, cfg);
    FieldWordAutomaton w(f.plan, f.schedule, f.robots);
    auto verdict = verify_trace(trace, mission.formula, &w);
    auto cost = observed_cost(trace);
    const auto& bound = f.plan.cost.field_bound;

    if (!a.trace.empty()) write_text(a.trace, to_json(trace).dump(2) + "\n");
    if (!a.log.empty()) {
        std::ostringstream os;
        write_event_log(os, trace);
        write_text(a.log, os.str());
    }
    if (!a.plot.empty()) {
        std::ostringstream os;
        write_svg(os, trace);
        write_text(a.plot, os.str());
    }

    bool ok = verdict.ok;
    std::cout << "cycles: " << a.cycles << ", sampling: "
              << (a.nominal ? "nominal" : a.adversarial ? "adversarial" : "uniform") << ", seed " << a.seed << "\n";
    std::cout << "observed cost: " << decimal(cost) << " time units\n";
    std::cout << "planned cost: " << decimal(f.plan.cost.planned_cost) << ", field bound: " << decimal(bound) << "\n";
    if (bound < cost) {
        ok = false;
        std::cout << "BOUND EXCEEDED\n";
    }
    if (a.nominal && trace.observed_word != f.plan.timed_word(a.cycles)) {
        ok = false;
        std::cout << "nominal execution differs from the planned word\n";
    }
    for (const auto& msg : verdict.failures) std::cout << "VIOLATION: " << msg << "\n";
    std::cout << (ok ? "mission satisfied in every cycle" : "verification failed") << "\n";
    return ok ? kOk : kVerification;
}

int cmd_inspect(const std::vector<std::string>& robot_files, const std::string& what, const std::string& mission_file) {
    auto robots = load_robots(robot_files);
    if (what == "buchi") {
        if (mission_file.empty()) throw ParseError("--what buchi", "requires -m <mission>");
        auto mission = load_mission(mission_file, robots);
        std::cout << "# mission\n";
        ltl::write_buchi(std::cout, ltl::ltl_to_buchi(mission.formula, mission.alphabet));
        std::cout << "# negated mission\n";
        ltl::write_buchi(std::cout, ltl::ltl_to_buchi(!mission.formula, mission.alphabet));
        return kOk;
    }
    auto team = construct_team_ts(robots);
    std::optional<std::size_t> region_states;
    if (what == "team-ts") {
        write_team_ts(std::cout, team);
    } else if (what == "region") {
        auto ra = construct_region_automaton(robots);
        region_states = ra.ts.size();
        write_region(std::cout, ra);
    } else if (what != "bounds") {
        throw ParseError("--what", "expected team-ts, region, bounds or buchi");
    }
    if (!region_states) region_states = construct_region_automaton(robots).ts.size();
    print_bounds(std::cout, robots, team.ts.size(), region_states);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-robot optimal runs and synchronization under LTL missions"};
    app.set_version_flag("--version", SYNCPLAN_VERSION);
    app.require_subcommand(1);

    std::vector<std::string> robot_files;
    std::string mission_file, out, explain;
    auto* plan = app.add_subcommand("plan", "compute an optimal run and its synchronization sequences");
    plan->add_option("-r,--robot", robot_files, "robot TS file (one per robot, in order)")->required()->expected(1, -1);
    plan->add_option("-m,--mission", mission_file, "mission file")->required();
    plan->add_option("-o,--out", out, "plan file to write")->required();
    plan->add_option("--explain", explain, "write every wait-edge decision with its witness ('-' for stdout)")
        ->expected(0, 1)
        ->default_str("-");

    SimulateArgs sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "execute a plan under sampled travel times");
    simulate_cmd->add_option("-p,--plan", sim.plan, "plan file")->required();
    simulate_cmd->add_option("--seed", sim.seed, "random seed")->default_val(0);
    simulate_cmd->add_option("--cycles", sim.cycles, "suffix cycles to run")->default_val(100);
    auto* adv = simulate_cmd->add_flag("--adversarial", sim.adversarial, "sample only the deviation endpoints");
    auto* nom = simulate_cmd->add_flag("--nominal", sim.nominal, "use nominal travel times");
    adv->excludes(nom);
    simulate_cmd->add_option("--plot", sim.plot, "write an SVG timeline");
    simulate_cmd->add_option("--trace", sim.trace, "write the trace as JSON");
    simulate_cmd->add_option("--log", sim.log, "write the line-oriented event log");
    simulate_cmd->add_option("-r,--robot", sim.robot_files, "robot files to check against the plan's digests");
    simulate_cmd->add_option("-m,--mission", sim.mission_file, "mission file to check against the plan's digest");

    std::vector<std::string> inspect_robots;
    std::string what, inspect_mission;
    auto* inspect = app.add_subcommand("inspect", "dump the team TS, region automaton, bounds or automata");
    inspect->add_option("-r,--robot", inspect_robots, "robot TS file")->required()->expected(1, -1);
    inspect->add_option("--what", what, "team-ts | region | bounds | buchi")->required();
    inspect->add_option("-m,--mission", inspect_mission, "mission file (for buchi)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        if (*plan) return cmd_plan(robot_files, mission_file, out, plan->count("--explain") ? explain : "");
        if (*simulate_cmd) return cmd_simulate(sim);
        if (*inspect) return cmd_inspect(inspect_robots, what, inspect_mission);
    } catch (const UnsatisfiableError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUnsat;
    } catch (const NotRobustError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNotRobust;
    } catch (const VerificationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kVerification;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
