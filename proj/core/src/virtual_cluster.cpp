#include "hfsp/virtual_cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

#include <fmt/format.h>

namespace hfsp {

std::string_view to_string(Granularity g) { return g == Granularity::Slot ? "slot" : "fluid"; }

VirtualAllocation allocate_max_min(std::span<const DemandEntry> jobs, int capacity) {
    VirtualAllocation out;
    long total = 0;
    for (const auto& j : jobs) {
        out[j.id] = 0.0;
        total += std::max(0, j.demand);
    }
    if (total <= capacity) {
        for (const auto& j : jobs) out[j.id] = std::max(0, j.demand);
        return out;
    }
    struct Turn {
        double key;
        int demand;
        std::uint64_t seq;
        std::uint32_t id;
        int alloc;
        std::size_t idx;
    };
    auto later = [](const Turn& x, const Turn& y) {
        return std::tie(x.key, x.demand, x.seq, x.id) > std::tie(y.key, y.demand, y.seq, y.id);
    };
    std::priority_queue<Turn, std::vector<Turn>, decltype(later)> turns(later);
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (jobs[i].demand > 0) {
            turns.push({1.0 / jobs[i].weight, jobs[i].demand, jobs[i].arrival_seq,
                        raw(jobs[i].id), 0, i});
        }
    }
    for (int left = capacity; left > 0 && !turns.empty(); --left) {
        Turn t = turns.top();
        turns.pop();
        ++t.alloc;
        out[jobs[t.idx].id] = t.alloc;
        if (t.alloc < t.demand) {
            t.key = (t.alloc + 1) / jobs[t.idx].weight;
            turns.push(t);
        }
    }
    return out;
}

VirtualAllocation allocate_max_min_fluid(std::span<const DemandEntry> jobs, double capacity) {
    VirtualAllocation out;
    std::vector<const DemandEntry*> order;
    for (const auto& j : jobs) {
        out[j.id] = 0.0;
        if (j.demand > 0) order.push_back(&j);
    }
    std::stable_sort(order.begin(), order.end(), [](const DemandEntry* x, const DemandEntry* y) {
        return x->demand / x->weight < y->demand / y->weight;
    });
    double cap = capacity;
    double wsum = 0.0;
    for (const auto* j : order) wsum += j->weight;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto* j = order[i];
        const double level = cap / wsum;
        if (j->demand / j->weight <= level) {
            out[j->id] = j->demand;
            cap -= j->demand;
            wsum -= j->weight;
        } else {
            for (std::size_t r = i; r < order.size(); ++r) {
                out[order[r]->id] = order[r]->weight * level;
            }
            break;
        }
    }
    return out;
}

VirtualAllocation allocate(std::span<const DemandEntry> jobs, double capacity, Granularity g) {
    if (g == Granularity::Slot) return allocate_max_min(jobs, static_cast<int>(capacity));
    return allocate_max_min_fluid(jobs, capacity);
}

const VirtualCluster::Job& VirtualCluster::get(PhaseId id) const {
    auto it = jobs_.find(id);
    if (it == jobs_.end()) throw LookupError(fmt::format("virtual cluster: unknown phase {}", raw(id)));
    return it->second;
}

void VirtualCluster::add_job(PhaseId id, double size, int demand, double weight, bool unbounded) {
    if (jobs_.count(id)) throw std::logic_error(fmt::format("phase {} already present", raw(id)));
    Job j;
    j.size = size;
    j.remaining = unbounded ? std::numeric_limits<double>::infinity() : std::max(0.0, size);
    j.demand = demand;
    j.weight = weight;
    j.arrival_seq = next_seq_++;
    j.unbounded = unbounded;
    jobs_.emplace(id, j);
}

void VirtualCluster::remove_job(PhaseId id) { jobs_.erase(id); }

void VirtualCluster::set_demand(PhaseId id, int demand) {
    get(id);
    jobs_[id].demand = demand;
}

void VirtualCluster::set_size(PhaseId id, double size, bool unbounded) {
    get(id);
    auto& j = jobs_[id];
    j.size = size;
    j.unbounded = unbounded;
    j.remaining = unbounded ? std::numeric_limits<double>::infinity()
                            : std::max(0.0, size - j.served);
}

double VirtualCluster::remaining(PhaseId id) const { return get(id).remaining; }
double VirtualCluster::served(PhaseId id) const { return get(id).served; }

std::vector<DemandEntry> VirtualCluster::bounded_demands() const {
    std::vector<DemandEntry> out;
    for (const auto& [id, j] : jobs_) {
        if (j.unbounded || j.remaining <= 0) continue;
        out.push_back({id, j.demand, j.weight, j.arrival_seq});
    }
    return out;
}

VirtualAllocation VirtualCluster::allocation() const {
    return allocate(bounded_demands(), capacity_, granularity_);
}

void VirtualCluster::age_jobs(double now) {
    if (now < last_update_) throw std::logic_error("age_jobs: time went backwards");
    const double dt = now - last_update_;
    if (dt > 0) {
        for (const auto& [id, slots] : allocation()) {
            auto& j = jobs_[id];
            const double work = std::min(j.remaining, slots * dt);
            j.remaining -= work;
            j.served += work;
        }
    }
    last_update_ = now;
}

std::vector<ProjectedCompletion> VirtualCluster::project_completions() const {
    struct Sim {
        PhaseId id;
        double remaining;
        DemandEntry entry;
    };
    std::vector<Sim> live;
    std::vector<ProjectedCompletion> done;
    std::vector<std::pair<std::uint64_t, PhaseId>> unbounded;
    for (const auto& [id, j] : jobs_) {
        if (j.unbounded) {
            unbounded.emplace_back(j.arrival_seq, id);
        } else if (j.remaining <= 0) {
            done.push_back({id, last_update_});
        } else {
            live.push_back({id, j.remaining, {id, j.demand, j.weight, j.arrival_seq}});
        }
    }
    double t = last_update_;
    std::vector<DemandEntry> entries;
    while (!live.empty()) {
        entries.clear();
        for (const auto& s : live) entries.push_back(s.entry);
        const auto alloc = allocate(entries, capacity_, granularity_);
        double dt = std::numeric_limits<double>::infinity();
        for (const auto& s : live) {
            const double a = alloc.at(s.id);
            if (a > 0) dt = std::min(dt, s.remaining / a);
        }
        if (!std::isfinite(dt)) {
            // No capacity at all: nothing can progress.
            for (const auto& s : live) done.push_back({s.id, std::numeric_limits<double>::infinity()});
            break;
        }
        t += dt;
        std::vector<Sim> next;
        for (auto& s : live) {
            const double a = alloc.at(s.id);
            const double left = s.remaining - a * dt;
            if (a > 0 && left <= 1e-12 * std::max(1.0, s.remaining)) {
                done.push_back({s.id, t});
            } else {
                s.remaining = left;
                next.push_back(s);
            }
        }
        live.swap(next);
    }
    std::stable_sort(done.begin(), done.end(), [&](const auto& x, const auto& y) {
        if (x.finish != y.finish) return x.finish < y.finish;
        return jobs_.at(x.id).arrival_seq < jobs_.at(y.id).arrival_seq;
    });
    std::sort(unbounded.begin(), unbounded.end());
    for (const auto& [seq, id] : unbounded) {
        done.push_back({id, std::numeric_limits<double>::infinity()});
    }
    return done;
}

}  // namespace hfsp
