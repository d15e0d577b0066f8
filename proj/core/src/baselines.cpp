#include "hfsp/baselines.hpp"

#include <algorithm>
#include <climits>
#include <set>

namespace hfsp {

using nlohmann::json;

int DelayState::counter(PhaseId id) const {
    auto it = counters.find(id);
    return it == counters.end() ? 0 : it->second;
}

std::string_view to_string(DelayDecision d) {
    switch (d) {
        case DelayDecision::LaunchLocal: return "launch_local";
        case DelayDecision::Skip: return "skip";
        case DelayDecision::LaunchNonLocal: return "launch_non_local";
    }
    return "unknown";
}

DelayDecision delay_decide(DelayState& state, PhaseId id, bool has_local_task) {
    int& c = state.counters[id];
    if (has_local_task) {
        c = 0;
        return DelayDecision::LaunchLocal;
    }
    if (c < state.max_skips) {
        ++c;
        return DelayDecision::Skip;
    }
    c = 0;
    return DelayDecision::LaunchNonLocal;
}

namespace {

bool fifo_before(const JobCandidate& x, const JobCandidate& y) {
    if (x.priority != y.priority) return x.priority > y.priority;
    if (x.submit_time != y.submit_time) return x.submit_time < y.submit_time;
    return x.arrival_seq < y.arrival_seq;
}

std::vector<JobCandidate> candidates(SchedulerContext& ctx, MachineId m, Phase kind,
                                     const std::map<PhaseId, std::uint64_t>& seq,
                                     const std::set<PhaseId>& exclude) {
    std::vector<JobCandidate> out;
    for (PhaseId id : ctx.active_phases(kind)) {
        if (exclude.count(id)) continue;
        const auto& ph = ctx.phase(id);
        if (ph.pending.empty()) continue;
        const auto& spec = ctx.job(ph.job);
        JobCandidate c;
        c.id = id;
        c.priority = spec.priority;
        c.submit_time = spec.submit_time;
        c.arrival_seq = seq.at(id);
        c.any_task = ctx.first_pending_task(id, INT_MAX);
        c.local_task = ctx.local_pending_task(id, m, INT_MAX);
        out.push_back(c);
    }
    return out;
}

}  // namespace

SchedulerAction fifo_select(std::span<const JobCandidate> jobs, MachineId machine) {
    const JobCandidate* best = nullptr;
    for (const auto& j : jobs) {
        if (!j.any_task && !j.local_task) continue;
        if (!best || fifo_before(j, *best)) best = &j;
    }
    if (!best) return SchedulerAction::noop();
    const int t = best->local_task ? *best->local_task : *best->any_task;
    return SchedulerAction::launch({best->id, t}, machine);
}

void update_deficits(FairShareState& state, double dt, std::span<const PhaseId> active_jobs) {
    if (active_jobs.empty() || dt <= 0) return;
    const double share = state.capacity / static_cast<double>(active_jobs.size());
    for (PhaseId id : active_jobs) {
        auto it = state.running.find(id);
        const int running = it == state.running.end() ? 0 : it->second;
        state.deficit[id] += (share - running) * dt;
    }
}

SchedulerAction fair_select(const FairShareState& state, std::span<const JobCandidate> jobs,
                            MachineId machine, DelayState* delay) {
    std::vector<const JobCandidate*> order;
    for (const auto& j : jobs) {
        if (j.any_task || j.local_task) order.push_back(&j);
    }
    auto running = [&](PhaseId id) {
        auto it = state.running.find(id);
        return it == state.running.end() ? 0 : it->second;
    };
    auto deficit = [&](PhaseId id) {
        auto it = state.deficit.find(id);
        return it == state.deficit.end() ? 0.0 : it->second;
    };
    std::stable_sort(order.begin(), order.end(), [&](const JobCandidate* x, const JobCandidate* y) {
        const bool nx = running(x->id) < state.min_share;
        const bool ny = running(y->id) < state.min_share;
        if (nx != ny) return nx;
        const double dx = deficit(x->id), dy = deficit(y->id);
        if (dx != dy) return dx > dy;
        if (x->submit_time != y->submit_time) return x->submit_time < y->submit_time;
        return x->arrival_seq < y->arrival_seq;
    });
    for (const auto* j : order) {
        if (!delay) {
            const int t = j->local_task ? *j->local_task : *j->any_task;
            return SchedulerAction::launch({j->id, t}, machine);
        }
        switch (delay_decide(*delay, j->id, j->local_task.has_value())) {
            case DelayDecision::LaunchLocal:
                return SchedulerAction::launch({j->id, *j->local_task}, machine);
            case DelayDecision::LaunchNonLocal:
                return SchedulerAction::launch({j->id, *j->any_task}, machine);
            case DelayDecision::Skip:
                break;
        }
    }
    return SchedulerAction::noop();
}

json FifoScheduler::config() const { return {{"name", "fifo"}}; }

void FifoScheduler::reset(std::uint64_t) {
    arrival_seq_.clear();
    next_seq_ = 0;
}

void FifoScheduler::on_job_arrival(SchedulerContext&, PhaseId phase) {
    if (!arrival_seq_.emplace(phase, next_seq_++).second) {
        throw ProtocolError("fifo: duplicate arrival of phase " + std::to_string(raw(phase)));
    }
}

void FifoScheduler::on_heartbeat(SchedulerContext& ctx, MachineId machine) {
    const std::set<PhaseId> none;
    for (Phase kind : {Phase::Map, Phase::Reduce}) {
        while (ctx.free_slots(machine, kind) > 0) {
            const auto jobs = candidates(ctx, machine, kind, arrival_seq_, none);
            const auto action = fifo_select(jobs, machine);
            if (action.kind == ActionKind::NoOp) break;
            ctx.apply(action);
        }
    }
}

void FifoScheduler::on_task_completion(SchedulerContext&, TaskRef) {}

json FairScheduler::config() const {
    return {{"name", "fair"},
            {"delay_max_skips", cfg_.delay_max_skips},
            {"delay_scheduling", cfg_.delay_scheduling},
            {"min_share", cfg_.min_share}};
}

void FairScheduler::reset(std::uint64_t) {
    for (auto& s : share_) s = FairShareState{};
    delay_ = DelayState{};
    delay_.max_skips = cfg_.delay_max_skips;
    arrival_seq_.clear();
    next_seq_ = 0;
    last_update_ = 0.0;
}

void FairScheduler::advance(SchedulerContext& ctx) {
    const double now = ctx.now();
    const double dt = now - last_update_;
    for (Phase kind : {Phase::Map, Phase::Reduce}) {
        auto& s = share_[kind == Phase::Map ? 0 : 1];
        s.capacity = ctx.cluster().capacity(kind);
        s.min_share = cfg_.min_share;
        const auto& active = ctx.active_phases(kind);
        // Running counts held over the elapsed interval, then refreshed.
        update_deficits(s, dt, active);
        std::map<PhaseId, double> kept;
        s.running.clear();
        for (PhaseId id : active) {
            kept[id] = s.deficit[id];
            s.running[id] = static_cast<int>(ctx.phase(id).running.size());
        }
        s.deficit.swap(kept);
    }
    last_update_ = now;
}

void FairScheduler::on_job_arrival(SchedulerContext& ctx, PhaseId phase) {
    if (!arrival_seq_.emplace(phase, next_seq_++).second) {
        throw ProtocolError("fair: duplicate arrival of phase " + std::to_string(raw(phase)));
    }
    advance(ctx);
}

void FairScheduler::on_task_completion(SchedulerContext& ctx, TaskRef) { advance(ctx); }

void FairScheduler::on_heartbeat(SchedulerContext& ctx, MachineId machine) {
    advance(ctx);
    for (Phase kind : {Phase::Map, Phase::Reduce}) {
        auto& s = share_[kind == Phase::Map ? 0 : 1];
        // A job declining this heartbeat's offer is not asked again until the next one.
        std::set<PhaseId> declined;
        const bool use_delay = kind == Phase::Map && cfg_.delay_scheduling;
        while (ctx.free_slots(machine, kind) > 0) {
            const auto jobs = candidates(ctx, machine, kind, arrival_seq_, declined);
            if (jobs.empty()) break;
            std::map<PhaseId, int> before;
            if (use_delay) {
                for (const auto& j : jobs) before[j.id] = delay_.counter(j.id);
            }
            const auto action = fair_select(s, jobs, machine, use_delay ? &delay_ : nullptr);
            if (use_delay) {
                for (const auto& j : jobs) {
                    if (delay_.counter(j.id) > before[j.id]) declined.insert(j.id);
                }
            }
            if (action.kind == ActionKind::NoOp) break;
            ctx.apply(action);
            ++s.running[action.task.phase];
        }
    }
}

}  // namespace hfsp
