#include "hfsp/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace hfsp {

std::string_view to_string(Phase kind) {
    return kind == Phase::Map ? "map" : "reduce";
}

std::string_view to_string(PhaseState state) {
    switch (state) {
        case PhaseState::Training: return "training";
        case PhaseState::Estimated: return "estimated";
        case PhaseState::Completed: return "completed";
    }
    return "unknown";
}

std::string_view to_string(TaskState state) {
    switch (state) {
        case TaskState::Pending: return "pending";
        case TaskState::Running: return "running";
        case TaskState::Suspended: return "suspended";
        case TaskState::Completed: return "completed";
        case TaskState::Killed: return "killed";
    }
    return "unknown";
}

double JobSpec::task_duration(Phase kind, int index) const {
    const auto& per_task = kind == Phase::Map ? map_task_durations : reduce_task_durations;
    if (!per_task.empty()) {
        return per_task.at(static_cast<std::size_t>(index));
    }
    return kind == Phase::Map ? map_task_duration : reduce_task_duration;
}

namespace {

void require(bool ok, const JobSpec& spec, std::string_view what) {
    if (!ok) {
        throw ValidationError(fmt::format("job '{}': {}", spec.job_id, what));
    }
}

bool all_positive(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double d) { return d > 0 && std::isfinite(d); });
}

}  // namespace

void validate(const JobSpec& spec) {
    require(!spec.job_id.empty(), spec, "job_id must be non-empty");
    require(std::isfinite(spec.submit_time) && spec.submit_time >= 0, spec,
            "submit_time must be >= 0");
    require(spec.num_map_tasks >= 1, spec, "num_map_tasks must be >= 1");
    require(spec.num_reduce_tasks >= 0, spec, "num_reduce_tasks must be >= 0");
    require(spec.map_task_durations.empty() ||
                spec.map_task_durations.size() == static_cast<std::size_t>(spec.num_map_tasks),
            spec, "map_task_durations must have num_map_tasks entries");
    require(spec.reduce_task_durations.empty() ||
                spec.reduce_task_durations.size() ==
                    static_cast<std::size_t>(spec.num_reduce_tasks),
            spec, "reduce_task_durations must have num_reduce_tasks entries");
    if (spec.map_task_durations.empty()) {
        require(spec.map_task_duration > 0 && std::isfinite(spec.map_task_duration), spec,
                "map_task_duration must be > 0");
    } else {
        require(all_positive(spec.map_task_durations), spec, "map_task_durations must be > 0");
    }
    if (spec.num_reduce_tasks > 0) {
        if (spec.reduce_task_durations.empty()) {
            require(spec.reduce_task_duration > 0 && std::isfinite(spec.reduce_task_duration),
                    spec, "reduce_task_duration must be > 0");
        } else {
            require(all_positive(spec.reduce_task_durations), spec,
                    "reduce_task_durations must be > 0");
        }
    }
    require(spec.shuffle_bytes_per_reduce >= 0, spec, "shuffle_bytes_per_reduce must be >= 0");
    require(spec.reduce_task_memory >= 0, spec, "reduce_task_memory must be >= 0");
    require(spec.weight > 0 && std::isfinite(spec.weight), spec, "weight must be > 0");
}

void PhaseJob::advance(PhaseState next) {
    if (static_cast<int>(next) < static_cast<int>(state)) {
        throw std::logic_error(fmt::format("phase {}: state cannot move from {} to {}",
                                           raw(phase_id), to_string(state), to_string(next)));
    }
    state = next;
}

SplitJob split_job(const JobSpec& spec, std::size_t job_index) {
    validate(spec);
    SplitJob out;
    out.map.phase_id = make_phase_id(job_index, Phase::Map);
    out.map.parent_job = spec.job_id;
    out.map.kind = Phase::Map;
    out.map.num_tasks = spec.num_map_tasks;
    out.map.arrival_time = spec.submit_time;
    if (spec.num_reduce_tasks > 0) {
        PhaseJob reduce;
        reduce.phase_id = make_phase_id(job_index, Phase::Reduce);
        reduce.parent_job = spec.job_id;
        reduce.kind = Phase::Reduce;
        reduce.num_tasks = spec.num_reduce_tasks;
        out.reduce = reduce;
    }
    return out;
}

void validate(const ClusterConfig& cfg) {
    auto require_cfg = [](bool ok, std::string_view what) {
        if (!ok) throw ConfigError(std::string("cluster: ") + std::string(what));
    };
    require_cfg(cfg.num_machines >= 1, "num_machines must be >= 1");
    require_cfg(cfg.map_slots_per_machine >= 1, "map_slots_per_machine must be >= 1");
    require_cfg(cfg.reduce_slots_per_machine >= 1, "reduce_slots_per_machine must be >= 1");
    require_cfg(cfg.replication_factor >= 1, "replication_factor must be >= 1");
    require_cfg(cfg.replication_factor <= cfg.num_machines,
                "replication_factor must be <= num_machines");
    require_cfg(cfg.disk_bandwidth > 0, "disk_bandwidth must be > 0");
    require_cfg(cfg.heartbeat_interval > 0, "heartbeat_interval must be > 0");
    require_cfg(cfg.remote_read_penalty >= 1, "remote_read_penalty must be >= 1");
    require_cfg(cfg.slowstart_fraction >= 0 && cfg.slowstart_fraction <= 1,
                "slowstart_fraction must be in [0, 1]");
    require_cfg(cfg.shuffle_bandwidth > 0, "shuffle_bandwidth must be > 0");
    require_cfg(cfg.degrade_threshold >= 0, "degrade_threshold must be >= 0");
    require_cfg(cfg.degrade_factor >= 1, "degrade_factor must be >= 1");
    require_cfg(cfg.time_cap > 0, "time_cap must be > 0");
}

bool is_valid_transition(TaskState from, TaskState to) {
    switch (from) {
        case TaskState::Pending:
            return to == TaskState::Running;
        case TaskState::Running:
            return to == TaskState::Suspended || to == TaskState::Completed ||
                   to == TaskState::Killed;
        case TaskState::Suspended:
            return to == TaskState::Running || to == TaskState::Killed;
        case TaskState::Completed:
        case TaskState::Killed:
            return false;
    }
    return false;
}

void TaskAttempt::transition(TaskState to) {
    if (!is_valid_transition(state, to)) {
        throw std::logic_error(fmt::format("task {}:{} invalid transition {} -> {}",
                                           raw(task.phase), task.index, to_string(state),
                                           to_string(to)));
    }
    state = to;
}

void BlockPlacement::assign(std::size_t job_index, int task_index,
                            std::vector<MachineId> replicas) {
    if (tasks_.size() <= job_index) tasks_.resize(job_index + 1);
    auto& job = tasks_[job_index];
    const auto t = static_cast<std::size_t>(task_index);
    if (job.size() <= t) job.resize(t + 1);
    job[t] = std::move(replicas);
}

bool BlockPlacement::contains(std::size_t job_index, int task_index) const {
    return task_index >= 0 && job_index < tasks_.size() &&
           static_cast<std::size_t>(task_index) < tasks_[job_index].size() &&
           !tasks_[job_index][static_cast<std::size_t>(task_index)].empty();
}

const std::vector<MachineId>& BlockPlacement::replicas(std::size_t job_index,
                                                       int task_index) const {
    if (!contains(job_index, task_index)) {
        throw LookupError(fmt::format("no placement for job {} map task {}", job_index,
                                      task_index));
    }
    return tasks_[job_index][static_cast<std::size_t>(task_index)];
}

void place_blocks(const JobSpec& spec, std::size_t job_index, const ClusterConfig& cfg, Rng& rng,
                  BlockPlacement& out) {
    if (cfg.replication_factor > cfg.num_machines || cfg.replication_factor < 1) {
        throw ConfigError(fmt::format("replication_factor {} incompatible with {} machines",
                                      cfg.replication_factor, cfg.num_machines));
    }
    std::vector<std::uint32_t> pool(static_cast<std::size_t>(cfg.num_machines));
    const auto r = static_cast<std::size_t>(cfg.replication_factor);
    for (int t = 0; t < spec.num_map_tasks; ++t) {
        std::iota(pool.begin(), pool.end(), 0U);
        // Partial Fisher-Yates: the first r entries are a uniform sample.
        std::vector<MachineId> replicas;
        replicas.reserve(r);
        for (std::size_t i = 0; i < r; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
            std::swap(pool[i], pool[pick(rng)]);
            replicas.push_back(MachineId(pool[i]));
        }
        out.assign(job_index, t, std::move(replicas));
    }
}

BlockPlacement place_blocks(std::span<const JobSpec> jobs, const ClusterConfig& cfg,
                            std::uint64_t seed) {
    Rng rng(seed);
    BlockPlacement placement;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        place_blocks(jobs[j], j, cfg, rng, placement);
    }
    return placement;
}

bool is_local(const BlockPlacement& placement, std::size_t job_index, int task_index,
              MachineId machine) {
    const auto& set = placement.replicas(job_index, task_index);
    return std::find(set.begin(), set.end(), machine) != set.end();
}

}  // namespace hfsp
