#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "hfsp/sim.hpp"

namespace hfsp {

// One job's view for a single slot offer on one machine.
struct JobCandidate {
    PhaseId id{};
    int priority = 0;
    double submit_time = 0.0;
    std::uint64_t arrival_seq = 0;
    std::optional<int> local_task;
    std::optional<int> any_task;
};

struct DelayState {
    int max_skips = 2;
    std::map<PhaseId, int> counters;

    int counter(PhaseId id) const;
};

enum class DelayDecision : std::uint8_t { LaunchLocal, Skip, LaunchNonLocal };

std::string_view to_string(DelayDecision d);

// Map offers only: a local task launches; otherwise skip until the counter reaches max_skips.
DelayDecision delay_decide(DelayState& state, PhaseId id, bool has_local_task);

SchedulerAction fifo_select(std::span<const JobCandidate> jobs, MachineId machine);

struct FairShareState {
    double capacity = 0.0;
    double min_share = 0.0;
    std::map<PhaseId, double> deficit;
    std::map<PhaseId, int> running;
};

// deficit += (capacity / |active| - running) * dt for every active job.
void update_deficits(FairShareState& state, double dt, std::span<const PhaseId> active_jobs);

// Below-min-share jobs first, then largest deficit, ties by submit time.
// Map offers go through delay scheduling when `delay` is given.
SchedulerAction fair_select(const FairShareState& state, std::span<const JobCandidate> jobs,
                            MachineId machine, DelayState* delay);

class FifoScheduler final : public Scheduler {
public:
    std::string name() const override { return "fifo"; }
    nlohmann::json config() const override;
    void reset(std::uint64_t seed) override;
    void on_job_arrival(SchedulerContext& ctx, PhaseId phase) override;
    void on_heartbeat(SchedulerContext& ctx, MachineId machine) override;
    void on_task_completion(SchedulerContext& ctx, TaskRef task) override;

private:
    std::map<PhaseId, std::uint64_t> arrival_seq_;
    std::uint64_t next_seq_ = 0;
};

struct FairConfig {
    int delay_max_skips = 2;
    double min_share = 0.0;
    bool delay_scheduling = true;
};

class FairScheduler final : public Scheduler {
public:
    explicit FairScheduler(FairConfig cfg = {}) : cfg_(cfg) {}

    std::string name() const override { return "fair"; }
    nlohmann::json config() const override;
    void reset(std::uint64_t seed) override;
    void on_job_arrival(SchedulerContext& ctx, PhaseId phase) override;
    void on_heartbeat(SchedulerContext& ctx, MachineId machine) override;
    void on_task_completion(SchedulerContext& ctx, TaskRef task) override;

    const FairShareState& state(Phase kind) const { return share_[kind == Phase::Map ? 0 : 1]; }

private:
    void advance(SchedulerContext& ctx);

    FairConfig cfg_;
    FairShareState share_[2];
    DelayState delay_;
    std::map<PhaseId, std::uint64_t> arrival_seq_;
    std::uint64_t next_seq_ = 0;
    double last_update_ = 0.0;
};

}  // namespace hfsp
