#include "hfsp/hfsp_scheduler.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace hfsp {

using nlohmann::json;

std::string_view to_string(ReducePreemption p) {
    switch (p) {
        case ReducePreemption::Eager: return "eager";
        case ReducePreemption::Wait: return "wait";
        case ReducePreemption::Kill: return "kill";
    }
    return "unknown";
}

ReducePreemption reduce_preemption_from(std::string_view name) {
    if (name == "eager") return ReducePreemption::Eager;
    if (name == "wait") return ReducePreemption::Wait;
    if (name == "kill") return ReducePreemption::Kill;
    throw ConfigError(fmt::format("unknown preemption mode '{}'", name));
}

void validate(const HfspConfig& cfg) {
    validate(cfg.estimator);
    if (cfg.max_suspended_tasks < 0) throw ConfigError("hfsp: max_suspended_tasks must be >= 0");
    if (cfg.delay_max_skips < 0) throw ConfigError("hfsp: delay_max_skips must be >= 0");
}

namespace {

json xi_json(double xi) {
    if (std::isinf(xi)) return "inf";
    return xi;
}

double xi_from(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
        throw ConfigError("hfsp.estimator.xi: expected a number or \"inf\"");
    }
    return j.get<double>();
}

}  // namespace

json to_json(const HfspConfig& cfg) {
    const auto& e = cfg.estimator;
    return {
        {"name", "hfsp"},
        {"estimator",
         {{"sample_count", e.sample_count},
          {"xi", xi_json(e.xi)},
          {"delta", e.delta},
          {"fit_distribution", "uniform"},
          {"alpha", e.alpha},
          {"bootstrap_map", e.bootstrap_map},
          {"bootstrap_reduce", e.bootstrap_reduce}}},
        {"training_map_slots", cfg.training_map_slots},
        {"training_reduce_slots", cfg.training_reduce_slots},
        {"max_suspended_tasks", cfg.max_suspended_tasks},
        {"map_preemption", "wait"},
        {"reduce_preemption", to_string(cfg.reduce_preemption)},
        {"delay_max_skips", cfg.delay_max_skips},
        {"delay_scheduling", cfg.delay_scheduling},
        {"granularity", to_string(cfg.granularity)},
        {"size_oracle", cfg.size_oracle},
    };
}

HfspConfig hfsp_config_from_json(const json& doc) {
    HfspConfig cfg;
    if (doc.is_null()) return cfg;
    try {
        if (doc.contains("estimator")) {
            const auto& e = doc["estimator"];
            auto& out = cfg.estimator;
            out.sample_count = e.value("sample_count", out.sample_count);
            if (e.contains("xi")) out.xi = xi_from(e["xi"]);
            out.delta = e.value("delta", out.delta);
            out.alpha = e.value("alpha", out.alpha);
            out.bootstrap_map = e.value("bootstrap_map", out.bootstrap_map);
            out.bootstrap_reduce = e.value("bootstrap_reduce", out.bootstrap_reduce);
            if (e.value("fit_distribution", std::string("uniform")) != "uniform") {
                throw ConfigError("hfsp.estimator.fit_distribution: only \"uniform\" is supported");
            }
        }
        cfg.training_map_slots = doc.value("training_map_slots", cfg.training_map_slots);
        cfg.training_reduce_slots = doc.value("training_reduce_slots", cfg.training_reduce_slots);
        cfg.max_suspended_tasks = doc.value("max_suspended_tasks", cfg.max_suspended_tasks);
        if (doc.contains("reduce_preemption")) {
            cfg.reduce_preemption =
                reduce_preemption_from(doc["reduce_preemption"].get<std::string>());
        }
        cfg.delay_max_skips = doc.value("delay_max_skips", cfg.delay_max_skips);
        cfg.delay_scheduling = doc.value("delay_scheduling", cfg.delay_scheduling);
        if (doc.contains("granularity")) {
            const auto g = doc["granularity"].get<std::string>();
            if (g == "slot") cfg.granularity = Granularity::Slot;
            else if (g == "fluid") cfg.granularity = Granularity::Fluid;
            else throw ConfigError("hfsp.granularity: expected \"slot\" or \"fluid\"");
        }
        cfg.size_oracle = doc.value("size_oracle", cfg.size_oracle);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("hfsp config: ") + e.what());
    }
    validate(cfg);
    return cfg;
}

int resolve_training_slots(int configured, int capacity) {
    int t = configured;
    if (t < 0) t = std::max(1, static_cast<int>(std::floor(0.1 * capacity)));
    return std::clamp(t, 0, std::max(0, capacity - 1));
}

std::map<PhaseId, int> compute_entitlements(std::span<const PhaseId> rank,
                                            const std::map<PhaseId, int>& demand, int capacity) {
    std::map<PhaseId, int> out;
    int left = std::max(0, capacity);
    for (PhaseId id : rank) {
        auto it = demand.find(id);
        const int d = it == demand.end() ? 0 : std::max(0, it->second);
        const int grant = std::min(d, left);
        out[id] = grant;
        left -= grant;
    }
    return out;
}

std::vector<TaskRef> select_preemption_victims(std::span<const TaskView> running, int excess) {
    std::vector<TaskView> order(running.begin(), running.end());
    std::stable_sort(order.begin(), order.end(), [](const TaskView& x, const TaskView& y) {
        if (x.launch_time != y.launch_time) return x.launch_time > y.launch_time;
        return x.task.index > y.task.index;
    });
    std::vector<TaskRef> out;
    for (std::size_t i = 0; i < order.size() && static_cast<int>(i) < excess; ++i) {
        out.push_back(order[i].task);
    }
    return out;
}

std::optional<TaskRef> select_resume(std::span<const TaskView> suspended) {
    const TaskView* best = nullptr;
    for (const auto& v : suspended) {
        if (!best || v.launch_time < best->launch_time ||
            (v.launch_time == best->launch_time && v.task.index < best->task.index)) {
            best = &v;
        }
    }
    if (!best) return std::nullopt;
    return best->task;
}

HfspScheduler::HfspScheduler(HfspConfig cfg) : cfg_(cfg) {
    validate(cfg_);
    reset(0);
}

void HfspScheduler::reset(std::uint64_t seed) {
    avg_ = AverageTaskSizeState(cfg_.estimator.bootstrap_map, cfg_.estimator.bootstrap_reduce);
    rng_.seed(seed);
    initialized_ = false;
    for (int k = 0; k < 2; ++k) {
        rank_[k].clear();
        training_running_[k].clear();
    }
    info_.clear();
    delay_ = DelayState{};
    delay_.max_skips = cfg_.delay_max_skips;
}

void HfspScheduler::ensure_init(const SchedulerContext& ctx) {
    if (initialized_) return;
    const auto& cluster = ctx.cluster();
    for (Phase kind : {Phase::Map, Phase::Reduce}) {
        const int k = idx(kind);
        capacity_[k] = cluster.capacity(kind);
        const int configured =
            kind == Phase::Map ? cfg_.training_map_slots : cfg_.training_reduce_slots;
        training_slots_[k] = cfg_.size_oracle ? 0 : resolve_training_slots(configured, capacity_[k]);
        vc_[k] = VirtualCluster(capacity_[k], cfg_.granularity);
    }
    initialized_ = true;
}

double HfspScheduler::exact_size(const SchedulerContext& ctx, PhaseId id) const {
    const auto& spec = ctx.job(job_of(id));
    const Phase kind = kind_of(id);
    double total = 0.0;
    for (int t = 0; t < spec.num_tasks(kind); ++t) total += spec.task_duration(kind, t);
    if (kind == Phase::Reduce) {
        total += spec.num_reduce_tasks * spec.shuffle_bytes_per_reduce /
                 ctx.cluster().shuffle_bandwidth;
    }
    return total;
}

int HfspScheduler::training_in(PhaseId id) const {
    const auto& set = training_running_[idx(kind_of(id))];
    auto lo = set.lower_bound(TaskRef{id, INT_MIN});
    int n = 0;
    for (auto it = lo; it != set.end() && it->phase == id; ++it) ++n;
    return n;
}

bool HfspScheduler::is_sample(PhaseId id, int task) const {
    auto it = info_.find(id);
    return it != info_.end() && it->second.sample_tasks.count(task) > 0;
}

bool HfspScheduler::unmeasured_sample(const PhaseInfo& info, int task) {
    const auto it = info.sample_tasks.find(task);
    return it != info.sample_tasks.end() && !it->second;
}

void HfspScheduler::launch(SchedulerContext& ctx, TaskRef ref, MachineId m, bool training) {
    auto& info = info_.at(ref.phase);
    // The first tasks to start become the samples, whichever blocks they read.
    if (sample_open(info)) info.sample_tasks.emplace(ref.index, false);
    ctx.apply(SchedulerAction::launch(ref, m, is_sample(ref.phase, ref.index), training));
    if (training) training_running_[idx(info.kind)].insert(ref);
}

void HfspScheduler::hand_to_virtual_cluster(PhaseId id, PhaseInfo& info, bool first) {
    auto& vc = vc_[idx(info.kind)];
    const SizeEstimate seen = inject_error(info.estimate, cfg_.estimator.alpha, rng_);
    const int demand = info.num_tasks - info.completed;
    if (first) {
        vc.add_job(id, seen.serialized_size, demand, 1.0, seen.infinite_propensity);
    } else {
        vc.set_size(id, seen.serialized_size, seen.infinite_propensity);
    }
}

void HfspScheduler::on_job_arrival(SchedulerContext& ctx, PhaseId id) {
    ensure_init(ctx);
    if (info_.count(id)) {
        throw ProtocolError(fmt::format("hfsp: duplicate arrival of phase {}", raw(id)));
    }
    const auto& ph = ctx.phase(id);
    PhaseInfo info;
    info.kind = ph.kind;
    info.num_tasks = ph.num_tasks;
    info.samples = cfg_.size_oracle ? 0 : std::min(cfg_.estimator.sample_count, ph.num_tasks);
    if (cfg_.size_oracle) {
        info.state = PhaseState::Estimated;
        info.estimate.phase = id;
        info.estimate.provenance = Provenance::Trained;
        info.estimate.serialized_size = exact_size(ctx, id);
        info.estimate.per_task_expected = info.estimate.serialized_size / ph.num_tasks;
    } else {
        info.estimate = initial_estimate(id, ph.kind, ph.num_tasks, avg_, cfg_.estimator);
    }
    if (ctx.decisions_enabled()) {
        ctx.log_decision({{"type", "initial_estimate"},
                          {"job", job_of(id)},
                          {"phase", to_string(ph.kind)},
                          {"size", info.estimate.infinite_propensity
                                       ? json("inf")
                                       : json(info.estimate.serialized_size)},
                          {"provenance", to_string(info.estimate.provenance)},
                          {"samples", info.samples}});
    }
    auto& stored = info_.emplace(id, std::move(info)).first->second;
    vc_[idx(ph.kind)].age_jobs(ctx.now());
    hand_to_virtual_cluster(id, stored, true);
    rerank(ctx, ph.kind);
    preempt(ctx);
}

void HfspScheduler::record_sample(SchedulerContext& ctx, PhaseId id, PhaseInfo& info,
                                  SampleRecord rec) {
    auto& flag = info.sample_tasks.at(rec.task.index);
    if (flag) return;
    flag = true;
    if (ctx.decisions_enabled()) {
        ctx.log_decision({{"type", "sample"},
                          {"job", job_of(id)},
                          {"phase", to_string(info.kind)},
                          {"task", rec.task.index},
                          {"execution_time", rec.execution_time},
                          {"shuffle_time", rec.shuffle_time},
                          {"extrapolated", rec.extrapolated}});
    }
    info.records.push_back(rec);
    if (static_cast<int>(info.records.size()) == info.samples &&
        info.state == PhaseState::Training) {
        finalize_estimate(ctx, id, info);
    }
}

void HfspScheduler::finalize_estimate(SchedulerContext& ctx, PhaseId id, PhaseInfo& info) {
    SizeEstimate est = fit_phase_size(id, info.records, info.num_tasks);
    if (info.kind == Phase::Reduce) {
        est.serialized_size += estimate_shuffle(info.records, info.num_tasks).seconds;
    }
    info.estimate = est;
    info.state = PhaseState::Estimated;
    if (ctx.decisions_enabled()) {
        ctx.log_decision({{"type", "trained_estimate"},
                          {"job", job_of(id)},
                          {"phase", to_string(info.kind)},
                          {"size", est.serialized_size},
                          {"per_task_expected", est.per_task_expected}});
    }
    if (info.done) return;
    vc_[idx(info.kind)].age_jobs(ctx.now());
    hand_to_virtual_cluster(id, info, false);
    rerank(ctx, info.kind);
    preempt(ctx);
}

void HfspScheduler::on_task_completion(SchedulerContext& ctx, TaskRef ref) {
    ensure_init(ctx);
    auto it = info_.find(ref.phase);
    if (it == info_.end()) {
        throw ProtocolError(fmt::format("hfsp: completion of unknown task {} of phase {}",
                                        ref.index, raw(ref.phase)));
    }
    auto& info = it->second;
    const auto& ph = ctx.phase(ref.phase);
    const auto& ts = ph.tasks.at(static_cast<std::size_t>(ref.index));
    training_running_[idx(info.kind)].erase(ref);
    ++info.completed;
    if (ts.attempt_occupied > 0) avg_.add(info.kind, ts.attempt_occupied);

    auto& vc = vc_[idx(info.kind)];
    vc.age_jobs(ctx.now());
    if (info.completed >= info.num_tasks) {
        info.done = true;
        info.state = PhaseState::Completed;
        vc.remove_job(ref.phase);
    } else {
        vc.set_demand(ref.phase, info.num_tasks - info.completed);
    }

    if (unmeasured_sample(info, ref.index)) {
        SampleRecord rec;
        rec.task = ref;
        if (info.kind == Phase::Map) {
            rec.execution_time = ts.attempt_occupied;
        } else {
            rec.execution_time = ts.work_done;
            rec.shuffle_time = std::max(0.0, ts.exec_start - ts.attempt.launch_time);
            rec.input_bytes = ctx.job(ph.job).shuffle_bytes_per_reduce;
        }
        if (rec.execution_time > 0) record_sample(ctx, ref.phase, info, rec);
    }
    rerank(ctx, info.kind);
    preempt(ctx);
}

void HfspScheduler::check_reduce_timeouts(SchedulerContext& ctx) {
    const double now = ctx.now();
    for (PhaseId id : ctx.active_phases(Phase::Reduce)) {
        auto it = info_.find(id);
        if (it == info_.end()) continue;
        auto& info = it->second;
        if (info.state != PhaseState::Training || info.done) continue;
        const auto& ph = ctx.phase(id);
        std::vector<int> pending;
        for (const auto& [task, measured] : info.sample_tasks) {
            if (!measured) pending.push_back(task);
        }
        for (int i : pending) {
            const auto& ts = ph.tasks[static_cast<std::size_t>(i)];
            // Extrapolate only uninterrupted first attempts.
            if (ts.attempt.state != TaskState::Running || ts.in_transfer || ts.exec_start < 0 ||
                ts.suspensions > 0 || ts.attempts != 1) {
                continue;
            }
            const double elapsed = now - ts.exec_start;
            if (elapsed < cfg_.estimator.delta) continue;
            const auto size = progress_based_size(elapsed, ctx.progress({id, i}));
            if (!size) {
                if (ctx.decisions_enabled()) {
                    ctx.log_decision({{"type", "sample_zero_progress"},
                                      {"job", job_of(id)},
                                      {"task", i}});
                }
                continue;
            }
            SampleRecord rec;
            rec.task = {id, i};
            rec.execution_time = *size;
            rec.shuffle_time = std::max(0.0, ts.exec_start - ts.attempt.launch_time);
            rec.input_bytes = ctx.job(ph.job).shuffle_bytes_per_reduce;
            rec.extrapolated = true;
            record_sample(ctx, id, info, rec);
            if (info.state != PhaseState::Training) break;
        }
    }
}

void HfspScheduler::rerank(SchedulerContext& ctx, Phase kind) {
    auto& rank = rank_[idx(kind)];
    rank.clear();
    const auto proj = vc_[idx(kind)].project_completions();
    for (const auto& p : proj) rank.push_back(p.id);
    if (ctx.decisions_enabled()) {
        json snapshot = json::array();
        for (const auto& p : proj) {
            snapshot.push_back({{"job", job_of(p.id)},
                                {"finish", std::isfinite(p.finish) ? json(p.finish) : json("inf")}});
        }
        ctx.log_decision({{"type", "rank"}, {"phase", to_string(kind)}, {"order", snapshot}});
    }
}

int HfspScheduler::reserved_slots(const SchedulerContext& ctx, Phase kind) const {
    const int running = training_running(kind);
    for (PhaseId id : rank_[idx(kind)]) {
        const auto& info = info_.at(id);
        if (sample_open(info) && ctx.first_pending_task(id, INT_MAX)) {
            return std::max(training_slots_[idx(kind)], running);
        }
    }
    return running;
}

std::map<PhaseId, int> HfspScheduler::entitlements(const SchedulerContext& ctx,
                                                   Phase kind) const {
    std::map<PhaseId, int> demand;
    for (PhaseId id : rank_[idx(kind)]) {
        const auto& ph = ctx.phase(id);
        demand[id] = ph.num_tasks - ph.completed_tasks - training_in(id);
    }
    const int cap = capacity_[idx(kind)] - reserved_slots(ctx, kind);
    return compute_entitlements(rank_[idx(kind)], demand, cap);
}

void HfspScheduler::preempt(SchedulerContext& ctx) {
    if (cfg_.reduce_preemption == ReducePreemption::Wait) return;
    const auto ent = entitlements(ctx, Phase::Reduce);
    const auto& rank = rank_[idx(Phase::Reduce)];
    for (auto it = rank.rbegin(); it != rank.rend(); ++it) {
        const PhaseId id = *it;
        const auto& ph = ctx.phase(id);
        const int holding = static_cast<int>(ph.running.size()) - training_in(id);
        const int excess = holding - ent.at(id);
        if (excess <= 0) continue;
        const auto& info = info_.at(id);
        std::vector<TaskView> views;
        for (int t : ph.running) {
            const auto& ts = ph.tasks[static_cast<std::size_t>(t)];
            if (ts.training || ts.in_transfer) continue;
            // An unmeasured sample would hold the estimate back until it resumes.
            if (info.state == PhaseState::Training && unmeasured_sample(info, t)) continue;
            views.push_back({{id, t}, ts.attempt.machine, ts.attempt.launch_time});
        }
        for (const TaskRef& victim : select_preemption_victims(views, excess)) {
            const int m = ph.tasks[static_cast<std::size_t>(victim.index)].attempt.machine;
            SchedulerAction action;
            if (cfg_.reduce_preemption == ReducePreemption::Kill) {
                action = SchedulerAction::kill(victim);
            } else {
                // Too many suspended tasks here: fall back to waiting.
                if (ctx.suspended_count(MachineId(static_cast<std::uint32_t>(m))) >=
                    cfg_.max_suspended_tasks) {
                    continue;
                }
                action = SchedulerAction::suspend(victim);
            }
            if (ctx.decisions_enabled()) {
                ctx.log_decision({{"type", "preempt"},
                                  {"action", to_string(action.kind)},
                                  {"job", job_of(id)},
                                  {"task", victim.index},
                                  {"machine", m}});
            }
            ctx.apply(action);
        }
    }
}

bool HfspScheduler::offer_map(SchedulerContext& ctx, MachineId m, PhaseId id, bool training,
                              std::set<PhaseId>& declined) {
    if (declined.count(id)) return false;
    const auto any = ctx.first_pending_task(id, INT_MAX);
    if (!any) return false;
    const auto local = ctx.local_pending_task(id, m, INT_MAX);
    int task = local ? *local : *any;
    if (cfg_.delay_scheduling) {
        switch (delay_decide(delay_, id, local.has_value())) {
            case DelayDecision::Skip:
                declined.insert(id);
                return false;
            case DelayDecision::LaunchLocal: task = *local; break;
            case DelayDecision::LaunchNonLocal: task = *any; break;
        }
    }
    launch(ctx, {id, task}, m, training);
    return true;
}

void HfspScheduler::assign_training(SchedulerContext& ctx, MachineId m, Phase kind,
                                    std::set<PhaseId>& declined) {
    const int k = idx(kind);
    while (ctx.free_slots(m, kind) > 0 && training_running(kind) < training_slots_[k]) {
        bool launched = false;
        for (PhaseId id : rank_[k]) {
            const auto& info = info_.at(id);
            if (!sample_open(info)) continue;
            if (kind == Phase::Map) {
                launched = offer_map(ctx, m, id, true, declined);
            } else if (const auto t = ctx.first_pending_task(id, INT_MAX)) {
                launch(ctx, {id, *t}, m, true);
                launched = true;
            }
            if (launched) break;
        }
        if (!launched) break;
    }
}

void HfspScheduler::assign_maps(SchedulerContext& ctx, MachineId m, std::set<PhaseId>& declined) {
    const int k = idx(Phase::Map);
    const int limit = capacity_[k] - reserved_slots(ctx, Phase::Map);
    int regular = -training_running(Phase::Map);
    for (PhaseId id : ctx.active_phases(Phase::Map)) {
        regular += static_cast<int>(ctx.phase(id).running.size());
    }
    for (PhaseId id : rank_[k]) {
        if (ctx.free_slots(m, Phase::Map) == 0 || regular >= limit) return;
        while (ctx.free_slots(m, Phase::Map) > 0 && regular < limit &&
               offer_map(ctx, m, id, false, declined)) {
            ++regular;
        }
    }
}

void HfspScheduler::assign_reduces(SchedulerContext& ctx, MachineId m) {
    const auto ent = entitlements(ctx, Phase::Reduce);
    for (PhaseId id : rank_[idx(Phase::Reduce)]) {
        if (ctx.free_slots(m, Phase::Reduce) == 0) return;
        const auto& ph = ctx.phase(id);
        while (ctx.free_slots(m, Phase::Reduce) > 0) {
            const int holding = static_cast<int>(ph.running.size()) - training_in(id);
            if (holding >= ent.at(id)) break;
            const auto suspended = ctx.suspended_on(id, m);
            if (!suspended.empty()) {
                ctx.apply(SchedulerAction::resume({id, suspended.front()}));
            } else if (const auto t = ctx.first_pending_task(id, INT_MAX)) {
                launch(ctx, {id, *t}, m, false);
            } else {
                break;
            }
        }
    }
}

void HfspScheduler::on_heartbeat(SchedulerContext& ctx, MachineId m) {
    ensure_init(ctx);
    check_reduce_timeouts(ctx);
    preempt(ctx);
    std::set<PhaseId> declined;
    assign_training(ctx, m, Phase::Map, declined);
    assign_maps(ctx, m, declined);
    assign_training(ctx, m, Phase::Reduce, declined);
    assign_reduces(ctx, m);
}

}  // namespace hfsp
