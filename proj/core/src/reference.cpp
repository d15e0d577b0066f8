#include "hfsp/reference.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace hfsp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Capped weighted water filling over the jobs flagged in `active`.
std::vector<double> water_fill(std::span<const FluidJob> jobs, const std::vector<bool>& active,
                               double capacity) {
    std::vector<double> rate(jobs.size(), 0.0);
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (active[i]) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return jobs[x].max_rate / jobs[x].weight < jobs[y].max_rate / jobs[y].weight;
    });
    double cap = capacity;
    double wsum = 0.0;
    for (auto i : order) wsum += jobs[i].weight;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto i = order[k];
        const double level = cap / wsum;
        if (jobs[i].max_rate / jobs[i].weight <= level) {
            rate[i] = jobs[i].max_rate;
            cap -= rate[i];
            wsum -= jobs[i].weight;
        } else {
            for (std::size_t r = k; r < order.size(); ++r) {
                rate[order[r]] = jobs[order[r]].weight * level;
            }
            break;
        }
    }
    return rate;
}

bool finished(double remaining, double work) { return remaining <= 1e-12 * std::max(1.0, work); }

// Projected processor-sharing completions from a given state, with no further arrivals.
std::vector<double> project_ps(std::span<const FluidJob> jobs, std::vector<double> remaining,
                               std::vector<bool> active, double t, double capacity) {
    std::vector<double> done(jobs.size(), kInf);
    while (std::any_of(active.begin(), active.end(), [](bool a) { return a; })) {
        const auto rate = water_fill(jobs, active, capacity);
        double dt = kInf;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            if (active[i] && rate[i] > 0) dt = std::min(dt, remaining[i] / rate[i]);
        }
        if (dt == kInf) break;
        t += dt;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            if (!active[i]) continue;
            remaining[i] -= rate[i] * dt;
            if (rate[i] > 0 && finished(remaining[i], jobs[i].work)) {
                remaining[i] = 0;
                active[i] = false;
                done[i] = t;
            }
        }
    }
    return done;
}

}  // namespace

std::vector<double> processor_sharing_schedule(std::span<const FluidJob> jobs, double capacity) {
    const std::size_t n = jobs.size();
    std::vector<double> remaining(n), done(n, kInf);
    std::vector<bool> arrived(n, false), active(n, false);
    for (std::size_t i = 0; i < n; ++i) remaining[i] = jobs[i].work;
    double t = jobs.empty() ? 0.0 : jobs[0].arrival;
    for (const auto& j : jobs) t = std::min(t, j.arrival);
    std::size_t left = n;
    while (left > 0) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!arrived[i] && jobs[i].arrival <= t) {
                arrived[i] = true;
                active[i] = true;
            }
        }
        const auto rate = water_fill(jobs, active, capacity);
        double dt = kInf;
        for (std::size_t i = 0; i < n; ++i) {
            if (active[i] && rate[i] > 0) dt = std::min(dt, remaining[i] / rate[i]);
            if (!arrived[i]) dt = std::min(dt, jobs[i].arrival - t);
        }
        if (dt == kInf) break;
        t += dt;
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            remaining[i] -= rate[i] * dt;
            if (rate[i] > 0 && finished(remaining[i], jobs[i].work)) {
                active[i] = false;
                done[i] = t;
                --left;
            }
        }
    }
    return done;
}

std::vector<double> fsp_schedule(std::span<const FluidJob> jobs, double capacity) {
    const std::size_t n = jobs.size();
    std::vector<double> real(n), virt(n), done(n, kInf);
    std::vector<bool> arrived(n, false), real_active(n, false), virt_active(n, false);
    for (std::size_t i = 0; i < n; ++i) real[i] = virt[i] = jobs[i].work;
    double t = kInf;
    for (const auto& j : jobs) t = std::min(t, j.arrival);
    std::size_t left = n;
    while (left > 0) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!arrived[i] && jobs[i].arrival <= t) {
                arrived[i] = true;
                real_active[i] = virt_active[i] = true;
            }
        }
        // Rank by projected PS completion; virtually finished jobs keep their finish time.
        auto projected = project_ps(jobs, virt, virt_active, t, capacity);
        std::vector<std::size_t> rank;
        for (std::size_t i = 0; i < n; ++i) {
            if (real_active[i]) rank.push_back(i);
        }
        std::vector<double> key(n, kInf);
        for (auto i : rank) key[i] = virt_active[i] ? projected[i] : -1.0;
        std::stable_sort(rank.begin(), rank.end(), [&](std::size_t x, std::size_t y) {
            if (key[x] != key[y]) return key[x] < key[y];
            return jobs[x].arrival < jobs[y].arrival;
        });
        std::vector<double> real_rate(n, 0.0);
        double cap = capacity;
        for (auto i : rank) {
            real_rate[i] = std::min(jobs[i].max_rate, cap);
            cap -= real_rate[i];
        }
        const auto virt_rate = water_fill(jobs, virt_active, capacity);

        double dt = kInf;
        for (std::size_t i = 0; i < n; ++i) {
            if (real_active[i] && real_rate[i] > 0) dt = std::min(dt, real[i] / real_rate[i]);
            if (virt_active[i] && virt_rate[i] > 0) dt = std::min(dt, virt[i] / virt_rate[i]);
            if (!arrived[i]) dt = std::min(dt, jobs[i].arrival - t);
        }
        if (dt == kInf) break;
        t += dt;
        for (std::size_t i = 0; i < n; ++i) {
            if (virt_active[i]) {
                virt[i] -= virt_rate[i] * dt;
                if (virt_rate[i] > 0 && finished(virt[i], jobs[i].work)) {
                    virt[i] = 0;
                    virt_active[i] = false;
                }
            }
            if (real_active[i]) {
                real[i] -= real_rate[i] * dt;
                if (real_rate[i] > 0 && finished(real[i], jobs[i].work)) {
                    real[i] = 0;
                    real_active[i] = false;
                    done[i] = t;
                    --left;
                }
            }
        }
    }
    return done;
}

}  // namespace hfsp
