#include "commands.hpp"

#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "hfsp/io.hpp"
#include "hfsp/scenarios.hpp"

namespace hfsp::cli {

using nlohmann::json;

namespace {

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open '{}'", path.string()));
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_xi(const std::string& text) {
    if (text == "inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(fmt::format("bad --xi value '{}'", text));
}

void print_summary_table(const json& summary, std::ostream& log) {
    fmt::print(log, "{:<8} {:>5} {:>12} {:>12} {:>12} {:>12} {:>12} {:>9}\n", "sched", "runs",
               "mean", "median", "p95", "seed-std", "reduce-mean", "locality");
    for (const auto& [name, s] : summary.at("schedulers").items()) {
        const auto& agg = s.at("aggregate");
        fmt::print(log, "{:<8} {:>5} {:>12.2f} {:>12.2f} {:>12.2f} {:>12.2f} {:>12.2f} {:>9.4f}\n",
                   name, s.at("runs").size(), agg.at("mean").get<double>(),
                   agg.at("median").get<double>(), agg.at("p95").get<double>(),
                   s.at("across_seed_std").get<double>(),
                   s.at("reduce").at("mean").get<double>(), s.at("locality").get<double>());
    }
}

}  // namespace

RunConfig build_run_config(const RunOverrides& o) {
    RunConfig cfg;
    if (o.config_file) cfg = run_config_from_json(read_json(*o.config_file));

    const bool new_source = o.trace || o.preset || o.spec_file;
    if (new_source) {
        cfg.trace_path.reset();
        cfg.generator.reset();
    }
    if (o.trace) cfg.trace_path = *o.trace;
    if (o.preset || o.spec_file) {
        GeneratorSource src;
        if (o.spec_file) {
            src.spec = workload_spec_from_json(read_json(*o.spec_file));
        } else {
            src.preset = *o.preset;
        }
        cfg.generator = src;
    }
    if (o.trace && (o.preset || o.spec_file)) {
        throw ConfigError("give either --trace or a generator (--preset/--spec), not both");
    }
    if (o.scale || o.map_only) {
        if (!cfg.generator) throw ConfigError("--scale and --map-only need a generator source");
        if (o.scale) cfg.generator->scale = *o.scale;
        if (o.map_only) cfg.generator->map_only = *o.map_only;
    }
    if (o.schedulers) cfg.schedulers = split_list(*o.schedulers);
    if (o.seeds) cfg.seeds = parse_seeds(*o.seeds);
    if (o.output) cfg.output_dir = *o.output;
    if (o.machines) cfg.cluster.num_machines = *o.machines;
    if (o.preemption) cfg.hfsp.reduce_preemption = reduce_preemption_from(*o.preemption);
    if (o.alpha) cfg.hfsp.estimator.alpha = *o.alpha;
    if (o.xi) cfg.hfsp.estimator.xi = parse_xi(*o.xi);
    if (o.record_events) cfg.record_events = *o.record_events;
    if (o.record_decisions) cfg.record_decisions = *o.record_decisions;
    validate(cfg);
    return cfg;
}

std::filesystem::path resolve_output(const std::string& dir) {
    std::filesystem::path p(dir);
    if (p.is_relative()) {
        if (const char* root = std::getenv("HFSP_OUTPUT_ROOT"); root && *root) {
            return std::filesystem::path(root) / p;
        }
    }
    return p;
}

int cmd_generate(const GenerateOptions& o, std::ostream& log) {
    const WorkloadSpec spec =
        o.spec_file ? workload_spec_from_json(read_json(*o.spec_file)) : preset_spec(o.preset);
    WorkloadTrace trace = generate_workload(spec, o.seed);
    if (o.scale != 1.0) trace = scale_trace(trace, o.scale);
    if (o.map_only) trace = map_only(trace);
    const auto out = resolve_output(o.out);
    write_trace(trace, out);
    fmt::print(log, "wrote {} jobs to {}\n", trace.jobs.size(), out.string());
    return 0;
}

int cmd_run(const RunConfig& cfg, std::ostream& log) {
    if (cfg.schedulers.size() != 1) {
        throw ConfigError("run takes exactly one scheduler; use compare for several");
    }
    return cmd_compare(cfg, log);
}

int cmd_compare(const RunConfig& cfg, std::ostream& log) {
    const auto runs = run_experiment(cfg);
    const auto dir = resolve_output(cfg.output_dir);
    write_experiment_outputs(dir, cfg, runs);
    print_summary_table(comparison_summary(cfg, runs), log);
    for (const auto& r : runs) {
        for (const auto& res : r.results) {
            if (res.hit_time_cap) {
                fmt::print(log, "warning: {} seed {} stopped at the time cap\n", r.scheduler,
                           res.seed);
            }
        }
    }
    fmt::print(log, "outputs in {}\n", dir.string());
    return 0;
}

int cmd_scenario(const std::string& name, const std::string& preemption,
                 const std::optional<std::string>& output, std::ostream& log) {
    SimOptions options;
    options.record_decisions = output.has_value();
    const auto report = run_scenario(name, reduce_preemption_from(preemption), options);
    json doc = {{"scenario", report.name}, {"config", report.config}, {"runs", json::array()}};
    for (const auto& run : report.runs) {
        fmt::print(log, "{}\n", run.label);
        json jobs = json::array();
        for (const auto& j : run.jobs) {
            fmt::print(log, "  {:<6} arrival {:>9.2f}  completion {:>9.2f}  sojourn {:>9.2f}\n",
                       j.job_id, j.arrival, j.completion, j.sojourn);
            jobs.push_back({{"job_id", j.job_id},
                            {"arrival", j.arrival},
                            {"completion", j.completion},
                            {"sojourn", j.sojourn}});
        }
        fmt::print(log, "  mean sojourn {:.2f} s ({:.2f} min)\n", run.mean_sojourn,
                   run.mean_sojourn / 60.0);
        doc["runs"].push_back({{"label", run.label}, {"mean_sojourn", run.mean_sojourn}, {"jobs", jobs}});
    }
    if (output) {
        const auto dir = resolve_output(*output);
        write_file_atomic(dir / "scenario.json", doc.dump(2) + "\n");
        for (const auto& sim : report.simulations) write_run_outputs(dir / "engine", sim);
        fmt::print(log, "outputs in {}\n", dir.string());
    }
    return 0;
}

int cmd_report(const std::string& dir, std::ostream& log) {
    const auto path = resolve_output(dir) / "summary.json";
    const json summary = read_json(path);
    fmt::print(log, "seeds: {}\n", summary.at("seeds").dump());
    print_summary_table(summary, log);
    return 0;
}

}  // namespace hfsp::cli
