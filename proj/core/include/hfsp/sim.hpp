#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hfsp/model.hpp"
#include "hfsp/workload.hpp"

namespace hfsp {

enum class EventKind : std::uint8_t {
    JobArrival,
    Heartbeat,
    TaskCompletion,
    ShuffleComplete,
    SuspendComplete,
    ResumeComplete,
    SimulationEnd,
};

std::string_view to_string(EventKind kind);

// Arrivals before heartbeats before completions.
int kind_priority(EventKind kind);

struct Event {
    double time = 0.0;
    EventKind kind = EventKind::SimulationEnd;
    std::uint64_t seq = 0;
    std::uint32_t a = 0;  // job index, machine, or phase id
    std::int32_t b = 0;   // task index or slot kind
    std::uint64_t epoch = 0;
};

// Strict weak order for a min-heap: true when x should be processed after y.
struct EventAfter {
    bool operator()(const Event& x, const Event& y) const;
};

enum class ActionKind : std::uint8_t { LaunchTask, SuspendTask, ResumeTask, KillTask, NoOp };

std::string_view to_string(ActionKind kind);

struct SchedulerAction {
    ActionKind kind = ActionKind::NoOp;
    TaskRef task{};
    MachineId machine{};
    bool sample = false;
    bool training = false;

    static SchedulerAction launch(TaskRef task, MachineId machine, bool sample = false,
                                  bool training = false);
    static SchedulerAction suspend(TaskRef task);
    static SchedulerAction resume(TaskRef task);
    static SchedulerAction kill(TaskRef task);
    static SchedulerAction noop() { return {}; }

    std::string describe() const;
    bool operator==(const SchedulerAction&) const = default;
};

class ProtocolError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct PreemptionCostModel {
    double disk_bandwidth = 100 * kMB;
    double degrade_threshold = 5 * kGB;
    double degrade_factor = 1.2;

    static PreemptionCostModel from(const ClusterConfig& cfg);
};

// Seconds to write out a footprint; resuming costs the same to read it back.
double suspend_cost(double memory_footprint, const PreemptionCostModel& model);
double resume_cost(double memory_footprint, const PreemptionCostModel& model);

double effective_task_duration(double nominal, Phase kind, bool is_local, const ClusterConfig& cfg);
double remaining_duration(double nominal, double progress);

enum class ReduceStage : std::uint8_t { Shuffle, Exec };

struct TaskStatus {
    TaskAttempt attempt;
    // Map: work seconds including any remote penalty. Reduce: execution seconds.
    double nominal = 0.0;
    double shuffle_duration = 0.0;
    double work_done = 0.0;
    double shuffle_done = 0.0;
    ReduceStage stage = ReduceStage::Shuffle;
    double exec_start = -1.0;
    double segment_start = 0.0;
    bool segment_open = false;
    bool in_transfer = false;
    bool training = false;
    int attempts = 0;
    int suspensions = 0;
    double first_launch = -1.0;
    double attempt_occupied = 0.0;
    double total_occupied = 0.0;
    std::uint64_t epoch = 0;
};

struct PhaseStatus {
    PhaseId id{};
    std::size_t job = 0;
    Phase kind = Phase::Map;
    int num_tasks = 0;
    bool arrived = false;
    double arrival = 0.0;
    bool complete = false;
    double completion = 0.0;
    int completed_tasks = 0;
    std::set<int> pending;
    std::set<int> running;
    std::set<int> suspended;
    std::vector<TaskStatus> tasks;
    // Map phases: task indices whose blocks live on each machine.
    std::vector<std::vector<int>> local_tasks;

    bool exists() const { return num_tasks > 0; }
};

class SchedulerContext {
public:
    virtual ~SchedulerContext() = default;

    virtual double now() const = 0;
    virtual const ClusterConfig& cluster() const = 0;
    virtual const JobSpec& job(std::size_t job_index) const = 0;
    virtual const PhaseStatus& phase(PhaseId id) const = 0;
    // Arrived, incomplete phases of a kind, in arrival order.
    virtual const std::vector<PhaseId>& active_phases(Phase kind) const = 0;
    virtual int free_slots(MachineId machine, Phase kind) const = 0;
    virtual int suspended_count(MachineId machine) const = 0;
    // Lowest-index pending task below `limit` with a replica on `machine` (any task for reduces).
    virtual std::optional<int> local_pending_task(PhaseId id, MachineId machine,
                                                  int limit) const = 0;
    virtual std::optional<int> first_pending_task(PhaseId id, int limit) const = 0;
    // Oldest launch first.
    virtual std::vector<int> suspended_on(PhaseId id, MachineId machine) const = 0;
    // Fraction of the execution stage done (reduce) or of the work (map).
    virtual double progress(TaskRef task) const = 0;
    virtual void apply(const SchedulerAction& action) = 0;
    virtual bool decisions_enabled() const = 0;
    virtual void log_decision(nlohmann::json record) = 0;
};

class Scheduler {
public:
    virtual ~Scheduler() = default;

    virtual std::string name() const = 0;
    virtual nlohmann::json config() const = 0;
    // Called once before a simulation starts; clears all per-run state.
    virtual void reset(std::uint64_t seed) = 0;
    virtual void on_job_arrival(SchedulerContext& ctx, PhaseId phase) = 0;
    virtual void on_heartbeat(SchedulerContext& ctx, MachineId machine) = 0;
    virtual void on_task_completion(SchedulerContext& ctx, TaskRef task) = 0;
};

struct TaskRecord {
    TaskRef task;
    std::size_t job = 0;
    Phase kind = Phase::Map;
    int machine = -1;
    double first_launch = 0.0;
    double launch_time = 0.0;
    double completion = 0.0;
    bool is_local = true;
    bool is_sample = false;
    int attempts = 0;
    int suspensions = 0;
    double occupied = 0.0;
    double nominal_work = 0.0;
    double processed_fraction = 0.0;
};

struct PhaseRecord {
    PhaseId id{};
    std::size_t job = 0;
    Phase kind = Phase::Map;
    int num_tasks = 0;
    bool arrived = false;
    double arrival = 0.0;
    bool completed = false;
    double completion = 0.0;
};

struct JobRecord {
    std::string job_id;
    std::string label;
    double submit = 0.0;
    bool completed = false;
    double completion = 0.0;
};

struct TimelinePoint {
    double time = 0.0;
    std::size_t job = 0;
    Phase kind = Phase::Map;
    int slots = 0;
};

struct SimulationCounters {
    std::uint64_t events = 0;
    std::uint64_t heartbeats = 0;
    std::uint64_t launches = 0;
    std::uint64_t suspends = 0;
    std::uint64_t resumes = 0;
    std::uint64_t kills = 0;
    double occupied_slot_seconds = 0.0;
    double wasted_slot_seconds = 0.0;
    double swap_seconds = 0.0;
};

struct SimulationResult {
    std::string scheduler;
    std::uint64_t seed = 0;
    double end_time = 0.0;
    bool hit_time_cap = false;
    std::vector<JobRecord> jobs;
    std::vector<PhaseRecord> phases;
    std::vector<TaskRecord> tasks;
    std::vector<TimelinePoint> timeline;
    SimulationCounters counters;
    std::vector<std::string> event_log;  // newline-delimited JSON records
    std::vector<nlohmann::json> decisions;
};

struct SimOptions {
    bool record_events = false;
    bool record_decisions = false;
};

SimulationResult run_simulation(const WorkloadTrace& trace, const ClusterConfig& cfg,
                                Scheduler& scheduler, std::uint64_t seed,
                                const SimOptions& options = {});

}  // namespace hfsp
