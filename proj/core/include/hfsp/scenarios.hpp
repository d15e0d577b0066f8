#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hfsp/hfsp_scheduler.hpp"
#include "hfsp/reference.hpp"
#include "hfsp/sim.hpp"

namespace hfsp {

struct ScenarioJob {
    std::string job_id;
    double arrival = 0.0;
    double completion = 0.0;
    double sojourn = 0.0;
};

struct ScenarioRun {
    std::string label;
    std::vector<ScenarioJob> jobs;
    double mean_sojourn = 0.0;
};

struct ScenarioReport {
    std::string name;
    std::vector<ScenarioRun> runs;
    // Engine-backed runs keep their full result.
    std::vector<SimulationResult> simulations;
    nlohmann::json config;
};

// Three jobs on a single slot: sizes 30/10/10 s arriving at 0/10/15 s.
std::vector<FluidJob> fig1_jobs();
// Three jobs needing 100%/55%/35% of 20 slots for 30/10/10 s, arriving at 0/10/13 s.
std::vector<FluidJob> fig2_jobs();
inline constexpr double kFig2Capacity = 20.0;

// The single-slot case replayed through the engine: one tiny map and one reduce per job.
WorkloadTrace fig1_trace();
ClusterConfig fig1_cluster();
HfspConfig fig1_hfsp();

// Four machines with two reduce slots each; one 11-reduce job preempted by four small ones.
WorkloadTrace micro44_trace();
ClusterConfig micro44_cluster();
HfspConfig micro44_hfsp(ReducePreemption mode);

ScenarioRun scenario_run_from(const std::string& label, const SimulationResult& result);

// Names: "fig1", "fig2", "micro44". Throws ConfigError for anything else.
ScenarioReport run_scenario(const std::string& name, ReducePreemption mode,
                            const SimOptions& options = {});

}  // namespace hfsp
