#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hfsp {

inline constexpr double kMB = 1e6;
inline constexpr double kGB = 1e9;

using Rng = std::mt19937_64;

class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class LookupError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

enum class Phase : std::uint8_t { Map = 0, Reduce = 1 };

std::string_view to_string(Phase kind);

// Phase ids are dense: job index * 2 + (0 for map, 1 for reduce).
enum class PhaseId : std::uint32_t {};
enum class MachineId : std::uint32_t {};

inline PhaseId make_phase_id(std::size_t job_index, Phase kind) {
    return PhaseId(static_cast<std::uint32_t>(job_index * 2 + (kind == Phase::Reduce ? 1 : 0)));
}
inline std::size_t job_of(PhaseId id) { return static_cast<std::uint32_t>(id) / 2; }
inline Phase kind_of(PhaseId id) {
    return (static_cast<std::uint32_t>(id) & 1U) ? Phase::Reduce : Phase::Map;
}
inline std::uint32_t raw(PhaseId id) { return static_cast<std::uint32_t>(id); }
inline std::uint32_t raw(MachineId id) { return static_cast<std::uint32_t>(id); }

struct TaskRef {
    PhaseId phase{};
    int index = 0;

    auto operator<=>(const TaskRef&) const = default;
};

struct JobSpec {
    std::string job_id;
    double submit_time = 0.0;
    int num_map_tasks = 1;
    int num_reduce_tasks = 0;
    double map_task_duration = 60.0;
    double reduce_task_duration = 0.0;
    // Optional per-task durations; when non-empty they override the scalar.
    std::vector<double> map_task_durations;
    std::vector<double> reduce_task_durations;
    double shuffle_bytes_per_reduce = 0.0;
    double reduce_task_memory = kGB;
    double weight = 1.0;
    int priority = 0;
    std::string job_class_label;

    double task_duration(Phase kind, int index) const;
    int num_tasks(Phase kind) const {
        return kind == Phase::Map ? num_map_tasks : num_reduce_tasks;
    }

    bool operator==(const JobSpec&) const = default;
};

// Throws ValidationError naming the violated invariant.
void validate(const JobSpec& spec);

enum class PhaseState : std::uint8_t { Training, Estimated, Completed };

std::string_view to_string(PhaseState state);

struct PhaseJob {
    PhaseId phase_id{};
    std::string parent_job;
    Phase kind = Phase::Map;
    int num_tasks = 0;
    // Unset for a reduce phase until its activation condition is met.
    std::optional<double> arrival_time;
    PhaseState state = PhaseState::Training;

    // Monotonic Training -> Estimated -> Completed; throws std::logic_error otherwise.
    void advance(PhaseState next);
};

struct SplitJob {
    PhaseJob map;
    std::optional<PhaseJob> reduce;
};

SplitJob split_job(const JobSpec& spec, std::size_t job_index);

struct ClusterConfig {
    int num_machines = 20;
    int map_slots_per_machine = 4;
    int reduce_slots_per_machine = 2;
    int replication_factor = 3;
    double disk_bandwidth = 100 * kMB;
    double heartbeat_interval = 3.0;
    double remote_read_penalty = 1.3;
    double slowstart_fraction = 0.05;
    double shuffle_bandwidth = 50 * kMB;
    // A machine reports immediately when one of its slots frees up.
    bool out_of_band_heartbeat = true;
    double degrade_threshold = 5 * kGB;
    double degrade_factor = 1.2;
    double time_cap = 1e6;

    int slots_per_machine(Phase kind) const {
        return kind == Phase::Map ? map_slots_per_machine : reduce_slots_per_machine;
    }
    int capacity(Phase kind) const { return num_machines * slots_per_machine(kind); }
};

// Throws ConfigError naming the violated invariant.
void validate(const ClusterConfig& cfg);

enum class TaskState : std::uint8_t { Pending, Running, Suspended, Completed, Killed };

std::string_view to_string(TaskState state);
bool is_valid_transition(TaskState from, TaskState to);

struct TaskAttempt {
    TaskRef task;
    int machine = -1;
    double launch_time = 0.0;
    TaskState state = TaskState::Pending;
    double progress = 0.0;
    bool is_sample = false;
    bool is_local = true;
    std::optional<double> suspended_at;
    double memory_footprint = 0.0;

    // Throws std::logic_error on a transition the state machine does not admit.
    void transition(TaskState to);
};

class BlockPlacement {
public:
    void assign(std::size_t job_index, int task_index, std::vector<MachineId> replicas);
    const std::vector<MachineId>& replicas(std::size_t job_index, int task_index) const;
    bool contains(std::size_t job_index, int task_index) const;
    std::size_t num_jobs() const { return tasks_.size(); }

    bool operator==(const BlockPlacement&) const = default;

private:
    std::vector<std::vector<std::vector<MachineId>>> tasks_;
};

// Replica sets for every map task of one job, uniform without replacement.
void place_blocks(const JobSpec& spec, std::size_t job_index, const ClusterConfig& cfg,
                  Rng& rng, BlockPlacement& out);

BlockPlacement place_blocks(std::span<const JobSpec> jobs, const ClusterConfig& cfg,
                            std::uint64_t seed);

bool is_local(const BlockPlacement& placement, std::size_t job_index, int task_index,
              MachineId machine);

}  // namespace hfsp
