#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hfsp/baselines.hpp"
#include "hfsp/hfsp_scheduler.hpp"
#include "hfsp/metrics.hpp"
#include "hfsp/sim.hpp"
#include "hfsp/workload.hpp"

namespace hfsp {

struct GeneratorSource {
    std::string preset;                 // "fb2009", "fb2010", or empty when `spec` is set
    std::optional<WorkloadSpec> spec;
    double scale = 1.0;
    bool map_only = false;
};

struct RunConfig {
    std::optional<std::string> trace_path;
    std::optional<GeneratorSource> generator;
    ClusterConfig cluster;
    std::vector<std::string> schedulers{"hfsp"};
    HfspConfig hfsp;
    FairConfig fair;
    std::vector<std::uint64_t> seeds{1};
    std::string output_dir = "out";
    bool record_events = false;
    bool record_decisions = false;
};

// Exactly one workload source, non-empty seeds, known scheduler names.
void validate(const RunConfig& cfg);

nlohmann::json to_json(const ClusterConfig& cfg);
ClusterConfig cluster_from_json(const nlohmann::json& doc, ClusterConfig base = {});
nlohmann::json to_json(const FairConfig& cfg);
FairConfig fair_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const GeneratorSource& src);
nlohmann::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& doc);

// "3", "1..10" (inclusive), or "1,4,9".
std::vector<std::uint64_t> parse_seeds(const std::string& text);

std::unique_ptr<Scheduler> make_scheduler(const std::string& name, const RunConfig& cfg);

// Trace for one seed: read from disk, or generated with that seed.
WorkloadTrace resolve_trace(const RunConfig& cfg, std::uint64_t seed);

struct SchedulerRuns {
    std::string scheduler;
    std::vector<SimulationResult> results;
};

std::vector<SchedulerRuns> run_experiment(const RunConfig& cfg);

// CSV renderers with stable headers.
std::string sojourns_csv(const SimulationResult& result);
std::string ecdf_csv(const EcdfSeries& series);
std::string timeline_csv(const SimulationResult& result);

// Per-run files: sojourns.csv, ecdf_{aggregate,map,reduce}.csv, timeline.csv,
// plus events.ndjson / decisions.ndjson when recorded.
void write_run_outputs(const std::filesystem::path& dir, const SimulationResult& result);

// <dir>/<scheduler>/seed_<n>/..., <dir>/<scheduler>/summary.json,
// <dir>/summary.json (side by side) and <dir>/config.json.
void write_experiment_outputs(const std::filesystem::path& dir, const RunConfig& cfg,
                              const std::vector<SchedulerRuns>& runs);

nlohmann::json comparison_summary(const RunConfig& cfg, const std::vector<SchedulerRuns>& runs);

}  // namespace hfsp
