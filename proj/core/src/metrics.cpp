#include "hfsp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

namespace hfsp {

using nlohmann::json;

std::string_view to_string(SojournKind kind) {
    switch (kind) {
        case SojournKind::Map: return "map";
        case SojournKind::Reduce: return "reduce";
        case SojournKind::Aggregate: return "aggregate";
    }
    return "unknown";
}

std::vector<SojournRecord> compute_sojourns(const SimulationResult& result) {
    std::vector<std::string> unfinished;
    for (const auto& j : result.jobs) {
        if (!j.completed) unfinished.push_back(j.job_id);
    }
    if (!unfinished.empty()) {
        throw IncompleteSimulation(
            fmt::format("simulation incomplete; unfinished jobs: {}", fmt::join(unfinished, ", ")));
    }
    std::vector<SojournRecord> out;
    for (const auto& p : result.phases) {
        const auto& job = result.jobs.at(p.job);
        out.push_back({job.job_id, p.kind == Phase::Map ? SojournKind::Map : SojournKind::Reduce,
                       p.arrival, p.completion, p.completion - p.arrival});
    }
    for (const auto& j : result.jobs) {
        out.push_back({j.job_id, SojournKind::Aggregate, j.submit, j.completion,
                       j.completion - j.submit});
    }
    return out;
}

std::vector<double> sojourn_values(std::span<const SojournRecord> records, SojournKind kind) {
    std::vector<double> out;
    for (const auto& r : records) {
        if (r.kind == kind) out.push_back(r.sojourn);
    }
    return out;
}

EcdfSeries ecdf(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("ecdf: empty input");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    EcdfSeries out;
    const auto n = static_cast<double>(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
        out.push_back({v[i], static_cast<double>(i + 1) / n});
    }
    return out;
}

double locality_fraction(const SimulationResult& result) {
    std::size_t maps = 0, local = 0;
    for (const auto& t : result.tasks) {
        if (t.kind != Phase::Map) continue;
        ++maps;
        if (t.is_local) ++local;
    }
    if (maps == 0) throw std::invalid_argument("locality_fraction: no map tasks");
    return static_cast<double>(local) / static_cast<double>(maps);
}

std::vector<JobTimeline> allocation_timeline(const SimulationResult& result) {
    std::map<std::pair<std::size_t, int>, std::size_t> index;
    std::vector<JobTimeline> out;
    for (const auto& p : result.timeline) {
        const auto key = std::make_pair(p.job, p.kind == Phase::Map ? 0 : 1);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, out.size()).first;
            out.push_back({result.jobs.at(p.job).job_id, p.kind, {}});
        }
        auto& steps = out[it->second].steps;
        if (!steps.empty() && steps.back().time == p.time) {
            steps.back().slots = p.slots;
        } else {
            steps.push_back({p.time, p.slots});
        }
    }
    return out;
}

int slots_at(const JobTimeline& timeline, double t) {
    int value = 0;
    for (const auto& s : timeline.steps) {
        if (s.time > t) break;
        value = s.slots;
    }
    return value;
}

namespace {

double quantile(const std::vector<double>& sorted, double q) {
    if (sorted.size() == 1) return sorted.front();
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

Stats describe(std::span<const double> values) {
    Stats s;
    s.count = values.size();
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    s.median = quantile(sorted, 0.5);
    s.p95 = quantile(sorted, 0.95);
    return s;
}

RunSummary summarize_run(const SimulationResult& result) {
    const auto records = compute_sojourns(result);
    RunSummary s;
    s.scheduler = result.scheduler;
    s.seed = result.seed;
    s.aggregate = describe(sojourn_values(records, SojournKind::Aggregate));
    s.map = describe(sojourn_values(records, SojournKind::Map));
    s.reduce = describe(sojourn_values(records, SojournKind::Reduce));
    s.locality = locality_fraction(result);
    s.end_time = result.end_time;
    return s;
}

Summary summarize(std::span<const SimulationResult> results) {
    if (results.empty()) throw std::invalid_argument("summarize: no results");
    Summary out;
    std::vector<double> agg, map, red, means;
    std::size_t maps = 0, local = 0;
    for (const auto& r : results) {
        out.runs.push_back(summarize_run(r));
        means.push_back(out.runs.back().aggregate.mean);
        const auto records = compute_sojourns(r);
        for (const auto& rec : records) {
            switch (rec.kind) {
                case SojournKind::Aggregate: agg.push_back(rec.sojourn); break;
                case SojournKind::Map: map.push_back(rec.sojourn); break;
                case SojournKind::Reduce: red.push_back(rec.sojourn); break;
            }
        }
        for (const auto& t : r.tasks) {
            if (t.kind != Phase::Map) continue;
            ++maps;
            local += t.is_local ? 1 : 0;
        }
    }
    out.aggregate = describe(agg);
    out.map = describe(map);
    out.reduce = describe(red);
    out.locality = maps ? static_cast<double>(local) / static_cast<double>(maps) : 0.0;
    const auto across = describe(means);
    out.across_seed_mean = across.mean;
    if (means.size() > 1) {
        double ss = 0.0;
        for (double m : means) ss += (m - across.mean) * (m - across.mean);
        out.across_seed_std = std::sqrt(ss / static_cast<double>(means.size() - 1));
    }
    return out;
}

json to_json(const Stats& s) {
    return {{"count", s.count}, {"mean", s.mean}, {"median", s.median}, {"p95", s.p95}};
}

json to_json(const RunSummary& s) {
    return {{"scheduler", s.scheduler},  {"seed", s.seed},
            {"aggregate", to_json(s.aggregate)}, {"map", to_json(s.map)},
            {"reduce", to_json(s.reduce)},       {"locality", s.locality},
            {"end_time", s.end_time}};
}

json to_json(const Summary& s) {
    json runs = json::array();
    for (const auto& r : s.runs) runs.push_back(to_json(r));
    return {{"aggregate", to_json(s.aggregate)},
            {"map", to_json(s.map)},
            {"reduce", to_json(s.reduce)},
            {"locality", s.locality},
            {"across_seed_mean", s.across_seed_mean},
            {"across_seed_std", s.across_seed_std},
            {"runs", runs}};
}

}  // namespace hfsp
