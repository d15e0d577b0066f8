#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

struct PsJob {
    double remaining = 0.0;
    double cap = 1.0;  // maximum rate
    double weight = 1.0;
};

// Rates of capped weighted processor sharing, found by bisection on the
// water level instead of by sorting: sum_i min(cap_i, w_i * level) = capacity.
inline std::vector<double> ps_rates(const std::vector<PsJob>& jobs, const std::vector<bool>& active,
                                    double capacity) {
    std::vector<double> rate(jobs.size(), 0.0);
    double total_cap = 0.0;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (active[i]) total_cap += jobs[i].cap;
    }
    if (total_cap <= capacity) {
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            if (active[i]) rate[i] = jobs[i].cap;
        }
        return rate;
    }
    auto used = [&](double level) {
        double s = 0.0;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            if (active[i]) s += std::min(jobs[i].cap, jobs[i].weight * level);
        }
        return s;
    };
    double lo = 0.0, hi = 1.0;
    while (used(hi) < capacity) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (used(mid) < capacity ? lo : hi) = mid;
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (active[i]) rate[i] = std::min(jobs[i].cap, jobs[i].weight * hi);
    }
    return rate;
}

// Completion times (from t0) of all jobs with no further arrivals.
inline std::vector<double> ps_completions(std::vector<PsJob> jobs, double capacity, double t0) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> done(jobs.size(), inf);
    std::vector<bool> active(jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) active[i] = jobs[i].remaining > 0;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (!active[i]) done[i] = t0;
    }
    double t = t0;
    while (std::count(active.begin(), active.end(), true) > 0) {
        const auto rate = ps_rates(jobs, active, capacity);
        double dt = inf;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            if (active[i] && rate[i] > 0) dt = std::min(dt, jobs[i].remaining / rate[i]);
        }
        t += dt;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            if (!active[i]) continue;
            jobs[i].remaining -= rate[i] * dt;
            if (jobs[i].remaining <= 1e-9 * std::max(1.0, rate[i] * dt)) {
                active[i] = false;
                done[i] = t;
            }
        }
    }
    return done;
}

}  // namespace oracle
