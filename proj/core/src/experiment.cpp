#include "hfsp/experiment.hpp"

#include <charconv>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "hfsp/io.hpp"

namespace hfsp {

using nlohmann::json;

namespace {

const std::set<std::string> kSchedulers = {"fifo", "fair", "hfsp"};

}  // namespace

void validate(const RunConfig& cfg) {
    if (cfg.trace_path.has_value() == cfg.generator.has_value()) {
        throw ConfigError("run config: exactly one of trace and generator must be given");
    }
    if (cfg.seeds.empty()) throw ConfigError("run config: seeds must be non-empty");
    if (cfg.schedulers.empty()) throw ConfigError("run config: no scheduler selected");
    for (const auto& s : cfg.schedulers) {
        if (!kSchedulers.count(s)) {
            throw ConfigError(fmt::format("unknown scheduler '{}' (expected fifo, fair or hfsp)", s));
        }
    }
    if (cfg.generator) {
        if (!(cfg.generator->scale > 0)) throw ConfigError("generator.scale must be > 0");
        if (!cfg.generator->spec) preset_spec(cfg.generator->preset);
    }
    validate(cfg.cluster);
    validate(cfg.hfsp);
}

json to_json(const ClusterConfig& c) {
    return {{"num_machines", c.num_machines},
            {"map_slots_per_machine", c.map_slots_per_machine},
            {"reduce_slots_per_machine", c.reduce_slots_per_machine},
            {"replication_factor", c.replication_factor},
            {"disk_bandwidth", c.disk_bandwidth},
            {"heartbeat_interval", c.heartbeat_interval},
            {"remote_read_penalty", c.remote_read_penalty},
            {"slowstart_fraction", c.slowstart_fraction},
            {"shuffle_bandwidth", c.shuffle_bandwidth},
            {"out_of_band_heartbeat", c.out_of_band_heartbeat},
            {"degrade_threshold", c.degrade_threshold},
            {"degrade_factor", c.degrade_factor},
            {"time_cap", c.time_cap}};
}

ClusterConfig cluster_from_json(const json& doc, ClusterConfig c) {
    if (doc.is_null()) return c;
    try {
        c.num_machines = doc.value("num_machines", c.num_machines);
        c.map_slots_per_machine = doc.value("map_slots_per_machine", c.map_slots_per_machine);
        c.reduce_slots_per_machine =
            doc.value("reduce_slots_per_machine", c.reduce_slots_per_machine);
        c.replication_factor = doc.value("replication_factor", c.replication_factor);
        c.disk_bandwidth = doc.value("disk_bandwidth", c.disk_bandwidth);
        c.heartbeat_interval = doc.value("heartbeat_interval", c.heartbeat_interval);
        c.remote_read_penalty = doc.value("remote_read_penalty", c.remote_read_penalty);
        c.slowstart_fraction = doc.value("slowstart_fraction", c.slowstart_fraction);
        c.shuffle_bandwidth = doc.value("shuffle_bandwidth", c.shuffle_bandwidth);
        c.out_of_band_heartbeat = doc.value("out_of_band_heartbeat", c.out_of_band_heartbeat);
        c.degrade_threshold = doc.value("degrade_threshold", c.degrade_threshold);
        c.degrade_factor = doc.value("degrade_factor", c.degrade_factor);
        c.time_cap = doc.value("time_cap", c.time_cap);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("cluster config: ") + e.what());
    }
    validate(c);
    return c;
}

json to_json(const FairConfig& cfg) {
    return {{"delay_max_skips", cfg.delay_max_skips},
            {"min_share", cfg.min_share},
            {"delay_scheduling", cfg.delay_scheduling}};
}

FairConfig fair_config_from_json(const json& doc) {
    FairConfig cfg;
    if (doc.is_null()) return cfg;
    try {
        cfg.delay_max_skips = doc.value("delay_max_skips", cfg.delay_max_skips);
        cfg.min_share = doc.value("min_share", cfg.min_share);
        cfg.delay_scheduling = doc.value("delay_scheduling", cfg.delay_scheduling);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("fair config: ") + e.what());
    }
    return cfg;
}

json to_json(const GeneratorSource& src) {
    json out = {{"scale", src.scale}, {"map_only", src.map_only}};
    if (src.spec) {
        out["spec"] = to_json(*src.spec);
    } else {
        out["preset"] = src.preset;
        // Materialize the preset so the echo documents the class ranges in use.
        out["spec"] = to_json(preset_spec(src.preset));
    }
    return out;
}

json to_json(const RunConfig& cfg) {
    return {{"trace", cfg.trace_path ? json(*cfg.trace_path) : json(nullptr)},
            {"generator", cfg.generator ? to_json(*cfg.generator) : json(nullptr)},
            {"cluster", to_json(cfg.cluster)},
            {"schedulers", cfg.schedulers},
            {"hfsp", to_json(cfg.hfsp)},
            {"fair", to_json(cfg.fair)},
            {"seeds", cfg.seeds},
            {"record_events", cfg.record_events},
            {"record_decisions", cfg.record_decisions}};
}

RunConfig run_config_from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("run config: expected a JSON object");
    RunConfig cfg;
    try {
        if (doc.contains("trace") && !doc["trace"].is_null()) {
            cfg.trace_path = doc["trace"].get<std::string>();
        }
        if (doc.contains("generator") && !doc["generator"].is_null()) {
            const auto& g = doc["generator"];
            GeneratorSource src;
            src.scale = g.value("scale", 1.0);
            src.map_only = g.value("map_only", false);
            if (g.contains("preset")) {
                src.preset = g["preset"].get<std::string>();
            } else if (g.contains("spec")) {
                src.spec = workload_spec_from_json(g["spec"]);
            } else {
                throw ConfigError("run config: generator needs a preset or a spec");
            }
            cfg.generator = src;
        }
        cfg.cluster = cluster_from_json(doc.value("cluster", json(nullptr)));
        if (doc.contains("schedulers")) {
            cfg.schedulers = doc["schedulers"].get<std::vector<std::string>>();
        } else if (doc.contains("scheduler")) {
            cfg.schedulers = {doc["scheduler"].get<std::string>()};
        }
        cfg.hfsp = hfsp_config_from_json(doc.value("hfsp", json(nullptr)));
        cfg.fair = fair_config_from_json(doc.value("fair", json(nullptr)));
        if (doc.contains("seeds")) {
            const auto& s = doc["seeds"];
            cfg.seeds = s.is_string() ? parse_seeds(s.get<std::string>())
                                      : s.get<std::vector<std::uint64_t>>();
        }
        cfg.output_dir = doc.value("output", cfg.output_dir);
        cfg.record_events = doc.value("record_events", cfg.record_events);
        cfg.record_decisions = doc.value("record_decisions", cfg.record_decisions);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("run config: ") + e.what());
    } catch (const ParseError& e) {
        throw ConfigError(std::string("run config: ") + e.what());
    }
    return cfg;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    auto number = [&](std::string_view s) {
        std::uint64_t v = 0;
        const auto* end = s.data() + s.size();
        auto [p, ec] = std::from_chars(s.data(), end, v);
        if (ec != std::errc() || p != end || s.empty()) {
            throw ConfigError(fmt::format("bad seed list '{}'", text));
        }
        return v;
    };
    std::vector<std::uint64_t> out;
    if (auto pos = text.find(".."); pos != std::string::npos) {
        const auto lo = number(std::string_view(text).substr(0, pos));
        const auto hi = number(std::string_view(text).substr(pos + 2));
        if (hi < lo) throw ConfigError(fmt::format("bad seed range '{}'", text));
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(number(item));
    if (out.empty()) throw ConfigError("empty seed list");
    return out;
}

std::unique_ptr<Scheduler> make_scheduler(const std::string& name, const RunConfig& cfg) {
    if (name == "fifo") return std::make_unique<FifoScheduler>();
    if (name == "fair") return std::make_unique<FairScheduler>(cfg.fair);
    if (name == "hfsp") return std::make_unique<HfspScheduler>(cfg.hfsp);
    throw ConfigError(fmt::format("unknown scheduler '{}' (expected fifo, fair or hfsp)", name));
}

WorkloadTrace resolve_trace(const RunConfig& cfg, std::uint64_t seed) {
    if (cfg.trace_path) return parse_trace(*cfg.trace_path);
    const auto& g = *cfg.generator;
    const WorkloadSpec spec = g.spec ? *g.spec : preset_spec(g.preset);
    WorkloadTrace trace = generate_workload(spec, seed);
    if (g.scale != 1.0) trace = scale_trace(trace, g.scale);
    if (g.map_only) trace = map_only(trace);
    return trace;
}

std::vector<SchedulerRuns> run_experiment(const RunConfig& cfg) {
    validate(cfg);
    SimOptions options;
    options.record_events = cfg.record_events;
    options.record_decisions = cfg.record_decisions;
    std::vector<SchedulerRuns> out;
    for (const auto& name : cfg.schedulers) out.push_back({name, {}});
    for (auto seed : cfg.seeds) {
        const auto trace = resolve_trace(cfg, seed);
        for (auto& runs : out) {
            auto scheduler = make_scheduler(runs.scheduler, cfg);
            runs.results.push_back(run_simulation(trace, cfg.cluster, *scheduler, seed, options));
        }
    }
    return out;
}

std::string sojourns_csv(const SimulationResult& result) {
    std::string out = "job_id,phase,arrival,completion,sojourn\n";
    for (const auto& r : compute_sojourns(result)) {
        out += fmt::format("{},{},{},{},{}\n", r.job_id, to_string(r.kind), r.arrival,
                           r.completion, r.sojourn);
    }
    return out;
}

std::string ecdf_csv(const EcdfSeries& series) {
    std::string out = "value,fraction\n";
    for (const auto& p : series) out += fmt::format("{},{}\n", p.value, p.fraction);
    return out;
}

std::string timeline_csv(const SimulationResult& result) {
    std::string out = "time,job_id,phase,slots\n";
    for (const auto& p : result.timeline) {
        out += fmt::format("{},{},{},{}\n", p.time, result.jobs.at(p.job).job_id,
                           to_string(p.kind), p.slots);
    }
    return out;
}

void write_run_outputs(const std::filesystem::path& dir, const SimulationResult& result) {
    const auto records = compute_sojourns(result);
    write_file_atomic(dir / "sojourns.csv", sojourns_csv(result));
    for (SojournKind kind : {SojournKind::Aggregate, SojournKind::Map, SojournKind::Reduce}) {
        const auto values = sojourn_values(records, kind);
        const auto file = dir / fmt::format("ecdf_{}.csv", to_string(kind));
        write_file_atomic(file, values.empty() ? std::string("value,fraction\n")
                                               : ecdf_csv(ecdf(values)));
    }
    write_file_atomic(dir / "timeline.csv", timeline_csv(result));
    if (!result.event_log.empty()) {
        std::string lines;
        for (const auto& l : result.event_log) lines += l + "\n";
        write_file_atomic(dir / "events.ndjson", lines);
    }
    if (!result.decisions.empty()) {
        std::string lines;
        for (const auto& d : result.decisions) lines += d.dump() + "\n";
        write_file_atomic(dir / "decisions.ndjson", lines);
    }
}

json comparison_summary(const RunConfig& cfg, const std::vector<SchedulerRuns>& runs) {
    json per = json::object();
    for (const auto& r : runs) {
        auto s = to_json(summarize(r.results));
        s["hit_time_cap"] = std::any_of(r.results.begin(), r.results.end(),
                                        [](const auto& x) { return x.hit_time_cap; });
        per[r.scheduler] = s;
    }
    return {{"seeds", cfg.seeds}, {"config", to_json(cfg)}, {"schedulers", per}};
}

void write_experiment_outputs(const std::filesystem::path& dir, const RunConfig& cfg,
                              const std::vector<SchedulerRuns>& runs) {
    const auto config_text = to_json(cfg).dump(2) + "\n";
    write_file_atomic(dir / "config.json", config_text);
    for (const auto& r : runs) {
        const auto sdir = dir / r.scheduler;
        for (const auto& result : r.results) {
            write_run_outputs(sdir / fmt::format("seed_{}", result.seed), result);
        }
        json s = to_json(summarize(r.results));
        s["scheduler"] = r.scheduler;
        s["seeds"] = cfg.seeds;
        s["config"] = to_json(cfg);
        write_file_atomic(sdir / "summary.json", s.dump(2) + "\n");
    }
    write_file_atomic(dir / "summary.json", comparison_summary(cfg, runs).dump(2) + "\n");
}

}  // namespace hfsp
