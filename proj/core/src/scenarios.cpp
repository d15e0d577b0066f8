#include "hfsp/scenarios.hpp"

#include <fmt/format.h>

#include "hfsp/experiment.hpp"

namespace hfsp {

std::vector<FluidJob> fig1_jobs() {
    return {{"j1", 0.0, 30.0, 1.0, 1.0}, {"j2", 10.0, 10.0, 1.0, 1.0}, {"j3", 15.0, 10.0, 1.0, 1.0}};
}

std::vector<FluidJob> fig2_jobs() {
    return {{"j1", 0.0, 30.0 * 20, 20.0, 1.0},
            {"j2", 10.0, 10.0 * 11, 11.0, 1.0},
            {"j3", 13.0, 10.0 * 7, 7.0, 1.0}};
}

WorkloadTrace fig1_trace() {
    WorkloadTrace trace;
    trace.metadata.name = "fig1";
    for (const auto& j : fig1_jobs()) {
        JobSpec spec;
        spec.job_id = j.id;
        spec.submit_time = j.arrival;
        spec.num_map_tasks = 1;
        spec.map_task_duration = 0.01;
        spec.num_reduce_tasks = 1;
        spec.reduce_task_duration = j.work;
        spec.reduce_task_memory = 0.0;
        trace.jobs.push_back(spec);
    }
    return trace;
}

ClusterConfig fig1_cluster() {
    ClusterConfig cfg;
    cfg.num_machines = 1;
    cfg.map_slots_per_machine = 1;
    cfg.reduce_slots_per_machine = 1;
    cfg.replication_factor = 1;
    cfg.heartbeat_interval = 1.0;
    return cfg;
}

HfspConfig fig1_hfsp() {
    HfspConfig cfg;
    cfg.size_oracle = true;
    cfg.granularity = Granularity::Fluid;
    cfg.reduce_preemption = ReducePreemption::Eager;
    return cfg;
}

WorkloadTrace micro44_trace() {
    WorkloadTrace trace;
    trace.metadata.name = "micro44";
    auto job = [](std::string id, double submit, int reduces, double duration) {
        JobSpec spec;
        spec.job_id = std::move(id);
        spec.submit_time = submit;
        spec.num_map_tasks = 1;
        spec.map_task_duration = 10.0;
        spec.num_reduce_tasks = reduces;
        spec.reduce_task_duration = duration;
        spec.reduce_task_memory = kGB;
        return spec;
    };
    trace.jobs.push_back(job("j1", 140.0, 11, 500.0));
    trace.jobs.push_back(job("j2", 150.0, 2, 400.0));
    trace.jobs.push_back(job("j3", 150.0, 1, 400.0));
    trace.jobs.push_back(job("j4", 150.0, 1, 400.0));
    trace.jobs.push_back(job("j5", 150.0, 1, 400.0));
    return trace;
}

ClusterConfig micro44_cluster() {
    ClusterConfig cfg;
    cfg.num_machines = 4;
    cfg.map_slots_per_machine = 1;
    cfg.reduce_slots_per_machine = 2;
    cfg.replication_factor = 3;
    return cfg;
}

HfspConfig micro44_hfsp(ReducePreemption mode) {
    HfspConfig cfg;
    cfg.reduce_preemption = mode;
    return cfg;
}

ScenarioRun scenario_run_from(const std::string& label, const SimulationResult& result) {
    ScenarioRun run;
    run.label = label;
    double sum = 0.0;
    for (const auto& j : result.jobs) {
        run.jobs.push_back({j.job_id, j.submit, j.completion, j.completion - j.submit});
        sum += j.completion - j.submit;
    }
    run.mean_sojourn = result.jobs.empty() ? 0.0 : sum / static_cast<double>(result.jobs.size());
    return run;
}

namespace {

ScenarioRun fluid_run(const std::string& label, const std::vector<FluidJob>& jobs,
                      const std::vector<double>& done) {
    ScenarioRun run;
    run.label = label;
    double sum = 0.0;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        run.jobs.push_back({jobs[i].id, jobs[i].arrival, done[i], done[i] - jobs[i].arrival});
        sum += done[i] - jobs[i].arrival;
    }
    run.mean_sojourn = sum / static_cast<double>(jobs.size());
    return run;
}

}  // namespace

ScenarioReport run_scenario(const std::string& name, ReducePreemption mode,
                            const SimOptions& options) {
    ScenarioReport report;
    report.name = name;
    if (name == "fig1") {
        const auto jobs = fig1_jobs();
        report.runs.push_back(fluid_run("ps", jobs, processor_sharing_schedule(jobs, 1.0)));
        report.runs.push_back(fluid_run("fsp", jobs, fsp_schedule(jobs, 1.0)));
        const auto trace = fig1_trace();
        const auto cluster = fig1_cluster();
        HfspScheduler scheduler(fig1_hfsp());
        report.simulations.push_back(run_simulation(trace, cluster, scheduler, 1, options));
        report.runs.push_back(scenario_run_from("engine", report.simulations.back()));
        report.config = {{"cluster", to_json(cluster)}, {"hfsp", scheduler.config()}};
        return report;
    }
    if (name == "fig2") {
        const auto jobs = fig2_jobs();
        report.runs.push_back(fluid_run("ps", jobs, processor_sharing_schedule(jobs, kFig2Capacity)));
        report.runs.push_back(fluid_run("fsp", jobs, fsp_schedule(jobs, kFig2Capacity)));
        report.config = {{"capacity", kFig2Capacity}};
        return report;
    }
    if (name == "micro44") {
        const auto trace = micro44_trace();
        const auto cluster = micro44_cluster();
        HfspScheduler scheduler(micro44_hfsp(mode));
        report.simulations.push_back(run_simulation(trace, cluster, scheduler, 1, options));
        report.runs.push_back(
            scenario_run_from(fmt::format("hfsp-{}", to_string(mode)), report.simulations.back()));
        report.config = {{"cluster", to_json(cluster)}, {"hfsp", scheduler.config()}};
        return report;
    }
    throw ConfigError(fmt::format("unknown scenario '{}' (expected fig1, fig2 or micro44)", name));
}

}  // namespace hfsp
