#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hfsp/sim.hpp"

namespace hfsp {

class IncompleteSimulation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SojournKind : std::uint8_t { Map, Reduce, Aggregate };

std::string_view to_string(SojournKind kind);

struct SojournRecord {
    std::string job_id;
    SojournKind kind = SojournKind::Aggregate;
    double arrival = 0.0;
    double completion = 0.0;
    double sojourn = 0.0;
};

// Per-phase records followed by one aggregate record per job, in job order.
// Throws IncompleteSimulation listing unfinished jobs.
std::vector<SojournRecord> compute_sojourns(const SimulationResult& result);

std::vector<double> sojourn_values(std::span<const SojournRecord> records, SojournKind kind);

struct EcdfPoint {
    double value = 0.0;
    double fraction = 0.0;
};

using EcdfSeries = std::vector<EcdfPoint>;

EcdfSeries ecdf(std::span<const double> values);

// Fraction of completed map tasks that ran on a replica holder.
double locality_fraction(const SimulationResult& result);

struct TimelineStep {
    double time = 0.0;
    int slots = 0;
};

struct JobTimeline {
    std::string job_id;
    Phase kind = Phase::Map;
    std::vector<TimelineStep> steps;
};

std::vector<JobTimeline> allocation_timeline(const SimulationResult& result);

// Slot count held by a job's phase at time t (right-continuous step function).
int slots_at(const JobTimeline& timeline, double t);

struct Stats {
    std::size_t count = 0;
    double mean = 0.0;
    double median = 0.0;
    double p95 = 0.0;
};

Stats describe(std::span<const double> values);

struct RunSummary {
    std::string scheduler;
    std::uint64_t seed = 0;
    Stats aggregate;
    Stats map;
    Stats reduce;
    double locality = 0.0;
    double end_time = 0.0;
};

struct Summary {
    std::vector<RunSummary> runs;
    // Pooled over all jobs of all runs.
    Stats aggregate;
    Stats map;
    Stats reduce;
    double locality = 0.0;
    // Mean and sample standard deviation of the per-run aggregate means.
    double across_seed_mean = 0.0;
    double across_seed_std = 0.0;
};

RunSummary summarize_run(const SimulationResult& result);
Summary summarize(std::span<const SimulationResult> results);

nlohmann::json to_json(const Stats& s);
nlohmann::json to_json(const RunSummary& s);
nlohmann::json to_json(const Summary& s);

}  // namespace hfsp
