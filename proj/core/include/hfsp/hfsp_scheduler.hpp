#pragma once

#include <map>
#include <set>
#include <span>
#include <vector>

#include "hfsp/baselines.hpp"
#include "hfsp/estimator.hpp"
#include "hfsp/sim.hpp"
#include "hfsp/virtual_cluster.hpp"

namespace hfsp {

enum class ReducePreemption : std::uint8_t { Eager, Wait, Kill };

std::string_view to_string(ReducePreemption p);
ReducePreemption reduce_preemption_from(std::string_view name);

struct HfspConfig {
    EstimatorConfig estimator;
    int training_map_slots = -1;  // -1: 10% of the kind's slots, at least 1
    int training_reduce_slots = -1;
    int max_suspended_tasks = 4;  // per machine
    ReducePreemption reduce_preemption = ReducePreemption::Eager;
    int delay_max_skips = 2;
    bool delay_scheduling = true;
    Granularity granularity = Granularity::Slot;
    // Hand exact phase sizes to the virtual cluster and skip training.
    bool size_oracle = false;
};

void validate(const HfspConfig& cfg);
nlohmann::json to_json(const HfspConfig& cfg);
HfspConfig hfsp_config_from_json(const nlohmann::json& doc);

int resolve_training_slots(int configured, int capacity);

// Slots granted job by job in rank order, each up to its demand.
std::map<PhaseId, int> compute_entitlements(std::span<const PhaseId> rank,
                                            const std::map<PhaseId, int>& demand, int capacity);

struct TaskView {
    TaskRef task;
    int machine = -1;
    double launch_time = 0.0;
};

// The last launched tasks go first.
std::vector<TaskRef> select_preemption_victims(std::span<const TaskView> running, int excess);
// Oldest launch first; nullopt when empty.
std::optional<TaskRef> select_resume(std::span<const TaskView> suspended);

class HfspScheduler final : public Scheduler {
public:
    explicit HfspScheduler(HfspConfig cfg = {});

    std::string name() const override { return "hfsp"; }
    nlohmann::json config() const override { return to_json(cfg_); }
    void reset(std::uint64_t seed) override;
    void on_job_arrival(SchedulerContext& ctx, PhaseId phase) override;
    void on_heartbeat(SchedulerContext& ctx, MachineId machine) override;
    void on_task_completion(SchedulerContext& ctx, TaskRef task) override;

    const std::vector<PhaseId>& rank(Phase kind) const { return rank_[idx(kind)]; }
    const SizeEstimate& estimate(PhaseId id) const { return info_.at(id).estimate; }
    PhaseState phase_state(PhaseId id) const { return info_.at(id).state; }
    int samples(PhaseId id) const { return info_.at(id).samples; }
    const VirtualCluster& virtual_cluster(Phase kind) const { return vc_[idx(kind)]; }
    const AverageTaskSizeState& average_task_size() const { return avg_; }

private:
    struct PhaseInfo {
        Phase kind = Phase::Map;
        int num_tasks = 0;
        int samples = 0;
        int completed = 0;
        PhaseState state = PhaseState::Training;
        SizeEstimate estimate;
        std::vector<SampleRecord> records;
        // Tasks tagged as samples when launched, mapped to "measured".
        std::map<int, bool> sample_tasks;
        bool done = false;
    };

    static int idx(Phase kind) { return kind == Phase::Map ? 0 : 1; }

    void ensure_init(const SchedulerContext& ctx);
    double exact_size(const SchedulerContext& ctx, PhaseId id) const;
    void hand_to_virtual_cluster(PhaseId id, PhaseInfo& info, bool first);
    void record_sample(SchedulerContext& ctx, PhaseId id, PhaseInfo& info, SampleRecord rec);
    void finalize_estimate(SchedulerContext& ctx, PhaseId id, PhaseInfo& info);
    void check_reduce_timeouts(SchedulerContext& ctx);
    void rerank(SchedulerContext& ctx, Phase kind);
    std::map<PhaseId, int> entitlements(const SchedulerContext& ctx, Phase kind) const;
    int training_running(Phase kind) const {
        return static_cast<int>(training_running_[idx(kind)].size());
    }
    int training_in(PhaseId id) const;
    static bool sample_open(const PhaseInfo& info) {
        return info.state == PhaseState::Training &&
               static_cast<int>(info.sample_tasks.size()) < info.samples;
    }
    static bool unmeasured_sample(const PhaseInfo& info, int task);
    void launch(SchedulerContext& ctx, TaskRef ref, MachineId m, bool training);
    int reserved_slots(const SchedulerContext& ctx, Phase kind) const;
    bool is_sample(PhaseId id, int task) const;
    void preempt(SchedulerContext& ctx);
    void assign_training(SchedulerContext& ctx, MachineId m, Phase kind,
                         std::set<PhaseId>& declined);
    void assign_maps(SchedulerContext& ctx, MachineId m, std::set<PhaseId>& declined);
    void assign_reduces(SchedulerContext& ctx, MachineId m);
    bool offer_map(SchedulerContext& ctx, MachineId m, PhaseId id, bool training,
                   std::set<PhaseId>& declined);

    HfspConfig cfg_;
    AverageTaskSizeState avg_;
    Rng rng_;
    bool initialized_ = false;
    int capacity_[2] = {0, 0};
    int training_slots_[2] = {0, 0};
    VirtualCluster vc_[2];
    std::vector<PhaseId> rank_[2];
    std::map<PhaseId, PhaseInfo> info_;
    std::set<TaskRef> training_running_[2];
    DelayState delay_;
};

}  // namespace hfsp
