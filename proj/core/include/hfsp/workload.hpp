#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hfsp/model.hpp"

namespace hfsp {

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Range {
    double lo = 0.0;
    double hi = 0.0;

    bool operator==(const Range&) const = default;
};

struct JobClass {
    std::string label;
    double probability = 1.0;
    Range map_tasks{1, 1};
    Range reduce_tasks{0, 0};
    Range map_duration{40, 80};
    Range reduce_duration{60, 600};
    Range shuffle_bytes{100 * kMB, 1 * kGB};
    double reduce_memory = kGB;

    bool operator==(const JobClass&) const = default;
};

struct WorkloadSpec {
    std::string name = "custom";
    int num_jobs = 100;
    double mean_interarrival = 13.0;
    std::vector<JobClass> job_classes;

    bool operator==(const WorkloadSpec&) const = default;
};

void validate(const WorkloadSpec& spec);

struct TraceMetadata {
    std::string name;
    std::uint64_t seed = 0;
    nlohmann::json generator_spec;  // null for hand-written traces

    bool operator==(const TraceMetadata&) const = default;
};

struct WorkloadTrace {
    std::vector<JobSpec> jobs;
    TraceMetadata metadata;

    bool operator==(const WorkloadTrace&) const = default;
};

// Throws ValidationError on empty traces, unsorted submits, duplicate ids or bad jobs.
void validate(const WorkloadTrace& trace);

WorkloadTrace generate_workload(const WorkloadSpec& spec, std::uint64_t seed);

nlohmann::json to_json(const WorkloadTrace& trace);
WorkloadTrace trace_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const WorkloadSpec& spec);
WorkloadSpec workload_spec_from_json(const nlohmann::json& doc);

WorkloadTrace parse_trace(const std::filesystem::path& path);
void write_trace(const WorkloadTrace& trace, const std::filesystem::path& path);

// Task counts multiplied by ratio, rounded up, at least 1 (zero reduce counts stay zero).
WorkloadTrace scale_trace(const WorkloadTrace& trace, double machine_ratio);

// Drops every reduce phase.
WorkloadTrace map_only(const WorkloadTrace& trace);

// Class structures at the 100-node scale of the original traces.
WorkloadSpec fb2009_spec();
WorkloadSpec fb2010_spec();
// Throws ConfigError for an unknown name.
WorkloadSpec preset_spec(const std::string& name);

}  // namespace hfsp
