#pragma once

#include <vector>

#include "syncplan/ltl/buchi.hpp"
#include "syncplan/optimal_run.hpp"
#include "syncplan/sync.hpp"
#include "syncplan/team.hpp"

namespace syncplan {

struct PipelineResult {
    TeamTransitionSystem team;
    StateBounds bounds;
    TeamPlan plan;
    std::vector<RobotModel> robots;  // with the plan's traveling states inserted
    SyncResult sync;
};

// Team TS, optimal run, traveling states, projection, synchronization, field bound.
inline PipelineResult run_pipeline(const std::vector<RobotModel>& robots, const Mission& mission) {
    std::set<std::string> names;
    for (const auto& r : robots)
        if (!names.insert(r.name).second) throw ModelError("duplicate robot name '" + r.name + "'");
    PipelineResult out;
    out.team = construct_team_ts(robots);
    out.bounds = state_bounds(robots);
    out.plan = optimal_run(out.team, mission, ltl::ltl_to_buchi(mission.formula, mission.alphabet));
    out.robots = insert_traveling_states(robots, out.plan);
    for (std::size_t i = 0; i < robots.size(); ++i)
        if (!is_run_of(project_run(out.plan, i), out.robots[i].ts))
            throw VerificationError("projected run of robot '" + robots[i].name + "' is not executable");
    out.sync = sync_sequences(out.plan, out.robots, ltl::ltl_to_buchi(!mission.formula, mission.alphabet));
    out.plan.cost = field_bound(out.plan.cost, robots);
    return out;
}

}  // namespace syncplan
