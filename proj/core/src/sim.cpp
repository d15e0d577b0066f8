#include "hfsp/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <utility>

#include <fmt/format.h>

namespace hfsp {

using nlohmann::json;

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::JobArrival: return "job_arrival";
        case EventKind::Heartbeat: return "heartbeat";
        case EventKind::TaskCompletion: return "task_completion";
        case EventKind::ShuffleComplete: return "shuffle_complete";
        case EventKind::SuspendComplete: return "suspend_complete";
        case EventKind::ResumeComplete: return "resume_complete";
        case EventKind::SimulationEnd: return "simulation_end";
    }
    return "unknown";
}

int kind_priority(EventKind kind) {
    switch (kind) {
        case EventKind::JobArrival: return 0;
        case EventKind::Heartbeat: return 1;
        case EventKind::TaskCompletion:
        case EventKind::ShuffleComplete:
        case EventKind::SuspendComplete:
        case EventKind::ResumeComplete: return 2;
        case EventKind::SimulationEnd: return 3;
    }
    return 3;
}

bool EventAfter::operator()(const Event& x, const Event& y) const {
    if (x.time != y.time) return x.time > y.time;
    const int px = kind_priority(x.kind);
    const int py = kind_priority(y.kind);
    if (px != py) return px > py;
    return x.seq > y.seq;
}

std::string_view to_string(ActionKind kind) {
    switch (kind) {
        case ActionKind::LaunchTask: return "launch";
        case ActionKind::SuspendTask: return "suspend";
        case ActionKind::ResumeTask: return "resume";
        case ActionKind::KillTask: return "kill";
        case ActionKind::NoOp: return "noop";
    }
    return "unknown";
}

SchedulerAction SchedulerAction::launch(TaskRef task, MachineId machine, bool sample,
                                        bool training) {
    return {ActionKind::LaunchTask, task, machine, sample, training};
}
SchedulerAction SchedulerAction::suspend(TaskRef task) {
    return {ActionKind::SuspendTask, task, {}, false, false};
}
SchedulerAction SchedulerAction::resume(TaskRef task) {
    return {ActionKind::ResumeTask, task, {}, false, false};
}
SchedulerAction SchedulerAction::kill(TaskRef task) {
    return {ActionKind::KillTask, task, {}, false, false};
}

std::string SchedulerAction::describe() const {
    if (kind == ActionKind::NoOp) return "noop";
    auto s = fmt::format("{} job={} {} task={}", to_string(kind), job_of(task.phase),
                         to_string(kind_of(task.phase)), task.index);
    if (kind == ActionKind::LaunchTask) s += fmt::format(" machine={}", raw(machine));
    return s;
}

PreemptionCostModel PreemptionCostModel::from(const ClusterConfig& cfg) {
    return {cfg.disk_bandwidth, cfg.degrade_threshold, cfg.degrade_factor};
}

double suspend_cost(double memory_footprint, const PreemptionCostModel& model) {
    if (memory_footprint <= 0) return 0.0;
    const double base = std::min(memory_footprint, model.degrade_threshold);
    const double excess = std::max(0.0, memory_footprint - model.degrade_threshold);
    return (base + excess * model.degrade_factor) / model.disk_bandwidth;
}

double resume_cost(double memory_footprint, const PreemptionCostModel& model) {
    return suspend_cost(memory_footprint, model);
}

double effective_task_duration(double nominal, Phase kind, bool is_local,
                               const ClusterConfig& cfg) {
    if (kind == Phase::Map && !is_local) return nominal * cfg.remote_read_penalty;
    return nominal;
}

double remaining_duration(double nominal, double progress) {
    return nominal * (1.0 - std::clamp(progress, 0.0, 1.0));
}

namespace {

struct MachineState {
    int running[2] = {0, 0};
    int swapping[2] = {0, 0};
    int suspended = 0;
    bool oob_pending = false;
};

int slot_index(Phase kind) { return kind == Phase::Map ? 0 : 1; }

class Engine final : public SchedulerContext {
public:
    Engine(const WorkloadTrace& trace, const ClusterConfig& cfg, Scheduler& scheduler,
           std::uint64_t seed, const SimOptions& options)
        : trace_(trace), cfg_(cfg), scheduler_(scheduler), options_(options),
          cost_(PreemptionCostModel::from(cfg)) {
        validate(cfg_);
        validate(trace_);
        placement_ = place_blocks(trace_.jobs, cfg_, seed);
        machines_.resize(static_cast<std::size_t>(cfg_.num_machines));
        phases_.resize(trace_.jobs.size() * 2);
        for (std::size_t j = 0; j < trace_.jobs.size(); ++j) {
            const auto& spec = trace_.jobs[j];
            for (Phase kind : {Phase::Map, Phase::Reduce}) {
                auto& ph = phases_[raw(make_phase_id(j, kind))];
                ph.id = make_phase_id(j, kind);
                ph.job = j;
                ph.kind = kind;
                ph.num_tasks = spec.num_tasks(kind);
            }
        }
        result_.scheduler = scheduler_.name();
        result_.seed = seed;
        scheduler_.reset(seed ^ 0x5DEECE66DULL);
    }

    SimulationResult run() {
        for (std::size_t j = 0; j < trace_.jobs.size(); ++j) {
            push(trace_.jobs[j].submit_time, EventKind::JobArrival, static_cast<std::uint32_t>(j));
        }
        const double hb = cfg_.heartbeat_interval;
        for (int m = 0; m < cfg_.num_machines; ++m) {
            push(hb * m / cfg_.num_machines, EventKind::Heartbeat, static_cast<std::uint32_t>(m), 1);
        }

        while (!queue_.empty()) {
            Event ev = queue_.top();
            queue_.pop();
            if (ev.time > cfg_.time_cap) {
                result_.hit_time_cap = true;
                now_ = cfg_.time_cap;
                break;
            }
            now_ = ev.time;
            if (!dispatch(ev)) continue;
            ++result_.counters.events;
            flush_timeline();
            if (jobs_done_ == trace_.jobs.size()) {
                log_event({now_, EventKind::SimulationEnd, next_seq_++});
                break;
            }
        }
        result_.end_time = now_;
        finish_records();
        return std::move(result_);
    }

    // SchedulerContext
    double now() const override { return now_; }
    const ClusterConfig& cluster() const override { return cfg_; }
    const JobSpec& job(std::size_t j) const override { return trace_.jobs.at(j); }
    const PhaseStatus& phase(PhaseId id) const override {
        if (raw(id) >= phases_.size() || !phases_[raw(id)].exists()) {
            throw LookupError(fmt::format("unknown phase {}", raw(id)));
        }
        return phases_[raw(id)];
    }
    const std::vector<PhaseId>& active_phases(Phase kind) const override {
        return active_[slot_index(kind)];
    }
    int free_slots(MachineId m, Phase kind) const override {
        const auto& ms = machine(m);
        const int k = slot_index(kind);
        return cfg_.slots_per_machine(kind) - ms.running[k] - ms.swapping[k];
    }
    int suspended_count(MachineId m) const override { return machine(m).suspended; }

    std::optional<int> local_pending_task(PhaseId id, MachineId m, int limit) const override {
        const auto& ph = phase(id);
        if (ph.kind == Phase::Reduce) return first_pending_task(id, limit);
        if (ph.local_tasks.empty()) return std::nullopt;
        for (int t : ph.local_tasks[raw(m)]) {
            if (t >= limit) break;
            if (ph.tasks[static_cast<std::size_t>(t)].attempt.state == TaskState::Pending) return t;
        }
        return std::nullopt;
    }

    std::optional<int> first_pending_task(PhaseId id, int limit) const override {
        const auto& ph = phase(id);
        if (ph.pending.empty() || *ph.pending.begin() >= limit) return std::nullopt;
        return *ph.pending.begin();
    }

    std::vector<int> suspended_on(PhaseId id, MachineId m) const override {
        const auto& ph = phase(id);
        std::vector<int> out;
        for (int t : ph.suspended) {
            if (ph.tasks[static_cast<std::size_t>(t)].attempt.machine == static_cast<int>(raw(m))) {
                out.push_back(t);
            }
        }
        std::stable_sort(out.begin(), out.end(), [&](int x, int y) {
            return ph.tasks[static_cast<std::size_t>(x)].attempt.launch_time <
                   ph.tasks[static_cast<std::size_t>(y)].attempt.launch_time;
        });
        return out;
    }

    double progress(TaskRef ref) const override {
        const auto& ts = task(ref);
        double done = ts.work_done;
        const bool counting = ts.segment_open &&
                              (kind_of(ref.phase) == Phase::Map || ts.stage == ReduceStage::Exec);
        if (counting) done += now_ - ts.segment_start;
        if (ts.nominal <= 0) return 0.0;
        return std::clamp(done / ts.nominal, 0.0, 1.0);
    }

    void apply(const SchedulerAction& action) override {
        switch (action.kind) {
            case ActionKind::NoOp: return;
            case ActionKind::LaunchTask: launch(action); break;
            case ActionKind::SuspendTask: suspend(action); break;
            case ActionKind::ResumeTask: resume(action); break;
            case ActionKind::KillTask: kill(action); break;
        }
    }

    bool decisions_enabled() const override { return options_.record_decisions; }
    void log_decision(json record) override {
        if (!options_.record_decisions) return;
        record["time"] = now_;
        result_.decisions.push_back(std::move(record));
    }

private:
    const MachineState& machine(MachineId m) const {
        if (raw(m) >= machines_.size()) throw LookupError(fmt::format("unknown machine {}", raw(m)));
        return machines_[raw(m)];
    }
    MachineState& machine(MachineId m) {
        return const_cast<MachineState&>(std::as_const(*this).machine(m));
    }
    PhaseStatus& phase_mut(PhaseId id) { return const_cast<PhaseStatus&>(phase(id)); }
    const TaskStatus& task(TaskRef ref) const {
        const auto& ph = phase(ref.phase);
        if (ref.index < 0 || ref.index >= ph.num_tasks) {
            throw LookupError(fmt::format("unknown task {} of phase {}", ref.index, raw(ref.phase)));
        }
        return ph.tasks[static_cast<std::size_t>(ref.index)];
    }
    TaskStatus& task_mut(TaskRef ref) { return const_cast<TaskStatus&>(task(ref)); }

    void push(double t, EventKind kind, std::uint32_t a, std::int32_t b = 0,
              std::uint64_t epoch = 0) {
        queue_.push(Event{t, kind, next_seq_++, a, b, epoch});
    }

    void push_task_event(double t, EventKind kind, TaskRef ref, std::uint64_t epoch) {
        push(t, kind, raw(ref.phase), ref.index, epoch);
    }

    void log_event(const Event& ev) {
        if (!options_.record_events) return;
        json rec = {{"time", ev.time}, {"kind", to_string(ev.kind)}, {"seq", ev.seq}};
        json ids = json::object();
        switch (ev.kind) {
            case EventKind::JobArrival: ids["job"] = ev.a; break;
            case EventKind::Heartbeat: ids["machine"] = ev.a; ids["periodic"] = ev.b == 1; break;
            case EventKind::SuspendComplete: ids["machine"] = ev.a; ids["slot"] = ev.b; break;
            case EventKind::SimulationEnd: break;
            default: ids["phase"] = ev.a; ids["task"] = ev.b; break;
        }
        rec["ids"] = ids;
        result_.event_log.push_back(rec.dump());
    }

    void request_heartbeat(int m) {
        if (!cfg_.out_of_band_heartbeat) return;
        auto& ms = machines_[static_cast<std::size_t>(m)];
        if (ms.oob_pending) return;
        ms.oob_pending = true;
        push(now_, EventKind::Heartbeat, static_cast<std::uint32_t>(m), 0);
    }

    // Returns false for stale events that are dropped silently.
    bool dispatch(const Event& ev) {
        switch (ev.kind) {
            case EventKind::JobArrival: {
                log_event(ev);
                arrive(make_phase_id(ev.a, Phase::Map));
                return true;
            }
            case EventKind::Heartbeat: {
                log_event(ev);
                ++result_.counters.heartbeats;
                auto& ms = machines_[ev.a];
                if (ev.b == 1) {
                    push(now_ + cfg_.heartbeat_interval, EventKind::Heartbeat, ev.a, 1);
                } else {
                    ms.oob_pending = false;
                }
                scheduler_.on_heartbeat(*this, MachineId(ev.a));
                return true;
            }
            case EventKind::SuspendComplete: {
                log_event(ev);
                auto& ms = machines_[ev.a];
                --ms.swapping[ev.b];
                request_heartbeat(static_cast<int>(ev.a));
                return true;
            }
            case EventKind::TaskCompletion:
            case EventKind::ShuffleComplete:
            case EventKind::ResumeComplete: {
                const TaskRef ref{PhaseId(ev.a), ev.b};
                auto& ts = task_mut(ref);
                if (ts.epoch != ev.epoch) return false;
                log_event(ev);
                if (ev.kind == EventKind::TaskCompletion) {
                    complete(ref);
                } else if (ev.kind == EventKind::ShuffleComplete) {
                    close_segment(ts, ref);
                    ts.shuffle_done = ts.shuffle_duration;
                    open_segment(ts, ref);
                } else {
                    ts.in_transfer = false;
                    open_segment(ts, ref);
                }
                return true;
            }
            case EventKind::SimulationEnd:
                log_event(ev);
                return true;
        }
        return false;
    }

    void arrive(PhaseId id) {
        auto& ph = phase_mut(id);
        const auto& spec = trace_.jobs[ph.job];
        ph.arrived = true;
        ph.arrival = now_;
        ph.tasks.resize(static_cast<std::size_t>(ph.num_tasks));
        for (int t = 0; t < ph.num_tasks; ++t) {
            auto& ts = ph.tasks[static_cast<std::size_t>(t)];
            ts.attempt.task = TaskRef{id, t};
            if (ph.kind == Phase::Reduce) ts.attempt.memory_footprint = spec.reduce_task_memory;
            ph.pending.insert(t);
        }
        if (ph.kind == Phase::Map) {
            ph.local_tasks.assign(static_cast<std::size_t>(cfg_.num_machines), {});
            for (int t = 0; t < ph.num_tasks; ++t) {
                for (MachineId m : placement_.replicas(ph.job, t)) {
                    ph.local_tasks[raw(m)].push_back(t);
                }
            }
        }
        active_[slot_index(ph.kind)].push_back(id);
        timeline_dirty_.push_back(id);
        scheduler_.on_job_arrival(*this, id);
        if (ph.kind == Phase::Map) maybe_activate_reduce(ph.job);
    }

    void maybe_activate_reduce(std::size_t j) {
        const auto& spec = trace_.jobs[j];
        if (spec.num_reduce_tasks == 0) return;
        auto& red = phases_[raw(make_phase_id(j, Phase::Reduce))];
        if (red.arrived) return;
        const auto& map = phases_[raw(make_phase_id(j, Phase::Map))];
        const double need = std::ceil(cfg_.slowstart_fraction * map.num_tasks - 1e-9);
        if (map.completed_tasks >= static_cast<int>(need)) arrive(red.id);
    }

    void check_launch(bool ok, const SchedulerAction& action, std::string_view why) const {
        if (!ok) {
            throw ProtocolError(fmt::format("invalid action [{}] at t={}: {}", action.describe(),
                                            now_, why));
        }
    }

    void launch(const SchedulerAction& action) {
        const TaskRef ref = action.task;
        check_launch(raw(ref.phase) < phases_.size() && phases_[raw(ref.phase)].exists(), action,
                     "unknown phase");
        auto& ph = phase_mut(ref.phase);
        check_launch(ph.arrived && !ph.complete, action, "phase not active");
        check_launch(ref.index >= 0 && ref.index < ph.num_tasks, action, "unknown task");
        check_launch(raw(action.machine) < machines_.size(), action, "unknown machine");
        auto& ts = ph.tasks[static_cast<std::size_t>(ref.index)];
        check_launch(ts.attempt.state == TaskState::Pending, action, "task not pending");
        check_launch(free_slots(action.machine, ph.kind) > 0, action, "no free slot");

        const auto& spec = trace_.jobs[ph.job];
        ts.attempt.transition(TaskState::Running);
        ts.attempt.machine = static_cast<int>(raw(action.machine));
        ts.attempt.launch_time = now_;
        ts.attempt.is_sample = action.sample;
        ts.attempt.progress = 0.0;
        ts.training = action.training;
        ts.attempt.is_local =
            ph.kind == Phase::Reduce || is_local(placement_, ph.job, ref.index, action.machine);
        const double base = spec.task_duration(ph.kind, ref.index);
        ts.nominal = effective_task_duration(base, ph.kind, ts.attempt.is_local, cfg_);
        ts.shuffle_duration =
            ph.kind == Phase::Reduce ? spec.shuffle_bytes_per_reduce / cfg_.shuffle_bandwidth : 0.0;
        ts.work_done = 0.0;
        ts.shuffle_done = 0.0;
        ts.stage = ReduceStage::Shuffle;
        ts.exec_start = -1.0;
        ts.attempt_occupied = 0.0;
        if (ts.first_launch < 0) ts.first_launch = now_;
        ++ts.attempts;
        ph.pending.erase(ref.index);
        ph.running.insert(ref.index);
        ++machine(action.machine).running[slot_index(ph.kind)];
        ++result_.counters.launches;
        timeline_dirty_.push_back(ref.phase);
        open_segment(ts, ref);
    }

    void suspend(const SchedulerAction& action) {
        const TaskRef ref = action.task;
        auto& ph = phase_mut(ref.phase);
        auto& ts = task_mut(ref);
        check_launch(ts.attempt.state == TaskState::Running, action, "task not running");
        check_launch(!ts.in_transfer, action, "task is being resumed");
        close_segment(ts, ref);
        ts.attempt.transition(TaskState::Suspended);
        ts.attempt.suspended_at = now_;
        ++ts.suspensions;
        ph.running.erase(ref.index);
        ph.suspended.insert(ref.index);
        const int m = ts.attempt.machine;
        auto& ms = machines_[static_cast<std::size_t>(m)];
        const int k = slot_index(ph.kind);
        --ms.running[k];
        ++ms.suspended;
        ++result_.counters.suspends;
        timeline_dirty_.push_back(ref.phase);
        const double cost = suspend_cost(ts.attempt.memory_footprint, cost_);
        result_.counters.swap_seconds += cost;
        if (cost > 0) {
            ++ms.swapping[k];
            push(now_ + cost, EventKind::SuspendComplete, static_cast<std::uint32_t>(m), k);
        } else {
            request_heartbeat(m);
        }
    }

    void resume(const SchedulerAction& action) {
        const TaskRef ref = action.task;
        auto& ph = phase_mut(ref.phase);
        auto& ts = task_mut(ref);
        check_launch(ts.attempt.state == TaskState::Suspended, action, "task not suspended");
        const auto m = static_cast<MachineId>(ts.attempt.machine);
        check_launch(free_slots(m, ph.kind) > 0, action, "no free slot on its machine");
        ts.attempt.transition(TaskState::Running);
        ts.attempt.suspended_at.reset();
        ph.suspended.erase(ref.index);
        ph.running.insert(ref.index);
        auto& ms = machine(m);
        ++ms.running[slot_index(ph.kind)];
        --ms.suspended;
        ++result_.counters.resumes;
        timeline_dirty_.push_back(ref.phase);
        const double cost = resume_cost(ts.attempt.memory_footprint, cost_);
        result_.counters.swap_seconds += cost;
        if (cost > 0) {
            ts.in_transfer = true;
            ++ts.epoch;
            push_task_event(now_ + cost, EventKind::ResumeComplete, ref, ts.epoch);
        } else {
            open_segment(ts, ref);
        }
    }

    void kill(const SchedulerAction& action) {
        const TaskRef ref = action.task;
        auto& ph = phase_mut(ref.phase);
        auto& ts = task_mut(ref);
        const bool running = ts.attempt.state == TaskState::Running;
        check_launch(running || ts.attempt.state == TaskState::Suspended, action,
                     "task neither running nor suspended");
        check_launch(!ts.in_transfer, action, "task is being resumed");
        const int m = ts.attempt.machine;
        auto& ms = machines_[static_cast<std::size_t>(m)];
        if (running) {
            close_segment(ts, ref);
            ph.running.erase(ref.index);
            --ms.running[slot_index(ph.kind)];
            request_heartbeat(m);
        } else {
            ph.suspended.erase(ref.index);
            --ms.suspended;
        }
        ts.attempt.transition(TaskState::Killed);
        result_.counters.wasted_slot_seconds += ts.attempt_occupied;
        ++result_.counters.kills;
        ++ts.epoch;
        TaskAttempt fresh;
        fresh.task = ref;
        fresh.memory_footprint = ts.attempt.memory_footprint;
        ts.attempt = fresh;
        ts.work_done = 0.0;
        ts.shuffle_done = 0.0;
        ts.exec_start = -1.0;
        ts.stage = ReduceStage::Shuffle;
        ts.attempt_occupied = 0.0;
        ph.pending.insert(ref.index);
        timeline_dirty_.push_back(ref.phase);
    }

    bool map_phase_done(std::size_t j) const {
        return phases_[raw(make_phase_id(j, Phase::Map))].complete;
    }

    void close_segment(TaskStatus& ts, TaskRef ref) {
        if (!ts.segment_open) return;
        const double el = now_ - ts.segment_start;
        ts.attempt_occupied += el;
        ts.total_occupied += el;
        result_.counters.occupied_slot_seconds += el;
        if (kind_of(ref.phase) == Phase::Map || ts.stage == ReduceStage::Exec) {
            ts.work_done = std::min(ts.nominal, ts.work_done + el);
        } else {
            ts.shuffle_done = std::min(ts.shuffle_duration, ts.shuffle_done + el);
        }
        ts.attempt.progress = ts.nominal > 0 ? ts.work_done / ts.nominal : 0.0;
        ts.segment_open = false;
        ++ts.epoch;
    }

    void open_segment(TaskStatus& ts, TaskRef ref) {
        ts.segment_open = true;
        ts.segment_start = now_;
        ++ts.epoch;
        if (kind_of(ref.phase) == Phase::Reduce && ts.stage == ReduceStage::Shuffle) {
            if (!map_phase_done(job_of(ref.phase))) return;  // stalls until the maps finish
            const double rem = ts.shuffle_duration - ts.shuffle_done;
            if (rem > 0) {
                push_task_event(now_ + rem, EventKind::ShuffleComplete, ref, ts.epoch);
                return;
            }
            ts.stage = ReduceStage::Exec;
            if (ts.exec_start < 0) ts.exec_start = now_;
        }
        if (kind_of(ref.phase) == Phase::Reduce && ts.exec_start < 0) ts.exec_start = now_;
        push_task_event(now_ + (ts.nominal - ts.work_done), EventKind::TaskCompletion, ref,
                        ts.epoch);
    }

    void complete(TaskRef ref) {
        auto& ph = phase_mut(ref.phase);
        auto& ts = task_mut(ref);
        close_segment(ts, ref);
        ts.work_done = ts.nominal;
        ts.attempt.progress = 1.0;
        ts.attempt.transition(TaskState::Completed);
        ph.running.erase(ref.index);
        ++ph.completed_tasks;
        const int m = ts.attempt.machine;
        --machines_[static_cast<std::size_t>(m)].running[slot_index(ph.kind)];
        timeline_dirty_.push_back(ref.phase);

        TaskRecord rec;
        rec.task = ref;
        rec.job = ph.job;
        rec.kind = ph.kind;
        rec.machine = m;
        rec.first_launch = ts.first_launch;
        rec.launch_time = ts.attempt.launch_time;
        rec.completion = now_;
        rec.is_local = ts.attempt.is_local;
        rec.is_sample = ts.attempt.is_sample;
        rec.attempts = ts.attempts;
        rec.suspensions = ts.suspensions;
        rec.occupied = ts.total_occupied;
        rec.nominal_work = ts.nominal + ts.shuffle_duration;
        const double processed = ts.work_done + ts.shuffle_done;
        rec.processed_fraction = rec.nominal_work > 0 ? processed / rec.nominal_work : 1.0;
        result_.tasks.push_back(rec);

        bool phase_finished = false;
        if (ph.completed_tasks == ph.num_tasks) {
            ph.complete = true;
            ph.completion = now_;
            phase_finished = true;
            auto& act = active_[slot_index(ph.kind)];
            act.erase(std::find(act.begin(), act.end(), ref.phase));
            if (ph.kind == Phase::Map) release_shuffles(ph.job);
        }
        if (phase_finished) {
            const auto& spec = trace_.jobs[ph.job];
            const bool map_ok = map_phase_done(ph.job);
            const bool red_ok = spec.num_reduce_tasks == 0 ||
                                phases_[raw(make_phase_id(ph.job, Phase::Reduce))].complete;
            if (map_ok && red_ok) ++jobs_done_;
        }
        request_heartbeat(m);
        scheduler_.on_task_completion(*this, ref);
        if (ph.kind == Phase::Map) maybe_activate_reduce(ph.job);
    }

    // Reducers waiting on the map phase can now finish their shuffle.
    void release_shuffles(std::size_t j) {
        if (trace_.jobs[j].num_reduce_tasks == 0) return;
        auto& red = phases_[raw(make_phase_id(j, Phase::Reduce))];
        if (!red.arrived) return;
        for (int t : red.running) {
            auto& ts = red.tasks[static_cast<std::size_t>(t)];
            if (!ts.segment_open || ts.stage != ReduceStage::Shuffle) continue;
            const TaskRef ref{red.id, t};
            close_segment(ts, ref);
            open_segment(ts, ref);
        }
    }

    void flush_timeline() {
        if (timeline_dirty_.empty()) return;
        std::sort(timeline_dirty_.begin(), timeline_dirty_.end());
        timeline_dirty_.erase(std::unique(timeline_dirty_.begin(), timeline_dirty_.end()),
                              timeline_dirty_.end());
        for (PhaseId id : timeline_dirty_) {
            const auto& ph = phases_[raw(id)];
            const int slots = static_cast<int>(ph.running.size());
            auto& last = last_slots_[id];
            if (last.has_value() && *last == slots) continue;
            last = slots;
            result_.timeline.push_back({now_, ph.job, ph.kind, slots});
        }
        timeline_dirty_.clear();
    }

    void finish_records() {
        for (std::size_t j = 0; j < trace_.jobs.size(); ++j) {
            const auto& spec = trace_.jobs[j];
            JobRecord jr;
            jr.job_id = spec.job_id;
            jr.label = spec.job_class_label;
            jr.submit = spec.submit_time;
            jr.completed = true;
            for (Phase kind : {Phase::Map, Phase::Reduce}) {
                const auto& ph = phases_[raw(make_phase_id(j, kind))];
                if (!ph.exists()) continue;
                PhaseRecord pr;
                pr.id = ph.id;
                pr.job = j;
                pr.kind = kind;
                pr.num_tasks = ph.num_tasks;
                pr.arrived = ph.arrived;
                pr.arrival = ph.arrival;
                pr.completed = ph.complete;
                pr.completion = ph.completion;
                result_.phases.push_back(pr);
                jr.completed = jr.completed && ph.complete;
                jr.completion = std::max(jr.completion, ph.completion);
            }
            result_.jobs.push_back(jr);
        }
    }

    const WorkloadTrace& trace_;
    const ClusterConfig& cfg_;
    Scheduler& scheduler_;
    SimOptions options_;
    PreemptionCostModel cost_;
    BlockPlacement placement_;
    std::vector<MachineState> machines_;
    std::vector<PhaseStatus> phases_;
    std::vector<PhaseId> active_[2];
    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
    std::uint64_t next_seq_ = 0;
    double now_ = 0.0;
    std::size_t jobs_done_ = 0;
    std::vector<PhaseId> timeline_dirty_;
    std::map<PhaseId, std::optional<int>> last_slots_;
    SimulationResult result_;
};

}  // namespace

SimulationResult run_simulation(const WorkloadTrace& trace, const ClusterConfig& cfg,
                                Scheduler& scheduler, std::uint64_t seed,
                                const SimOptions& options) {
    Engine engine(trace, cfg, scheduler, seed, options);
    return engine.run();
}

}  // namespace hfsp
