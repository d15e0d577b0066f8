#include "hfsp/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "hfsp/io.hpp"

namespace hfsp {

using nlohmann::json;

void validate(const WorkloadSpec& spec) {
    if (spec.num_jobs < 1) throw ValidationError("workload spec: num_jobs must be >= 1");
    if (!(spec.mean_interarrival > 0)) {
        throw ValidationError("workload spec: mean_interarrival must be > 0");
    }
    if (spec.job_classes.empty()) throw ValidationError("workload spec: no job classes");
    double total = 0.0;
    for (const auto& c : spec.job_classes) {
        auto bad = [&](std::string_view what) {
            return ValidationError(fmt::format("job class '{}': {}", c.label, what));
        };
        if (c.probability < 0) throw bad("probability must be >= 0");
        if (c.map_tasks.lo < 1 || c.map_tasks.hi < c.map_tasks.lo) throw bad("bad map_tasks range");
        if (c.reduce_tasks.lo < 0 || c.reduce_tasks.hi < c.reduce_tasks.lo) {
            throw bad("bad reduce_tasks range");
        }
        if (c.map_duration.lo <= 0 || c.map_duration.hi < c.map_duration.lo) {
            throw bad("bad map_duration range");
        }
        if (c.reduce_tasks.hi > 0 &&
            (c.reduce_duration.lo <= 0 || c.reduce_duration.hi < c.reduce_duration.lo)) {
            throw bad("bad reduce_duration range");
        }
        if (c.shuffle_bytes.lo < 0 || c.shuffle_bytes.hi < c.shuffle_bytes.lo) {
            throw bad("bad shuffle_bytes range");
        }
        if (c.reduce_memory < 0) throw bad("reduce_memory must be >= 0");
        total += c.probability;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ValidationError(
            fmt::format("workload spec: class probabilities sum to {}, expected 1", total));
    }
}

void validate(const WorkloadTrace& trace) {
    if (trace.jobs.empty()) throw ValidationError("empty trace");
    std::set<std::string> ids;
    double last = 0.0;
    for (std::size_t i = 0; i < trace.jobs.size(); ++i) {
        const auto& job = trace.jobs[i];
        validate(job);
        if (!ids.insert(job.job_id).second) {
            throw ValidationError(fmt::format("jobs[{}]: duplicate job_id '{}'", i, job.job_id));
        }
        if (i > 0 && job.submit_time < last) {
            throw ValidationError(fmt::format("jobs[{}].submit_time: not sorted", i));
        }
        last = job.submit_time;
    }
}

namespace {

int draw_count(const Range& r, Rng& rng) {
    const auto lo = static_cast<long>(std::llround(r.lo));
    const auto hi = static_cast<long>(std::llround(r.hi));
    if (lo == hi) return static_cast<int>(lo);
    return static_cast<int>(std::uniform_int_distribution<long>(lo, hi)(rng));
}

double draw_real(const Range& r, Rng& rng) {
    if (r.lo == r.hi) return r.lo;
    return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

std::vector<double> draw_durations(int n, const Range& r, Rng& rng, double& scalar) {
    std::vector<double> out;
    if (r.lo == r.hi || n == 0) {
        scalar = r.lo;
        return out;
    }
    out.reserve(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        out.push_back(draw_real(r, rng));
        sum += out.back();
    }
    scalar = sum / n;
    return out;
}

}  // namespace

WorkloadTrace generate_workload(const WorkloadSpec& spec, std::uint64_t seed) {
    validate(spec);
    Rng rng(seed);
    std::exponential_distribution<double> gap(1.0 / spec.mean_interarrival);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    WorkloadTrace trace;
    trace.metadata.name = spec.name;
    trace.metadata.seed = seed;
    trace.metadata.generator_spec = to_json(spec);

    double t = 0.0;
    for (int i = 0; i < spec.num_jobs; ++i) {
        if (i > 0) t += gap(rng);
        const double u = unit(rng);
        std::size_t ci = 0;
        double acc = 0.0;
        for (; ci + 1 < spec.job_classes.size(); ++ci) {
            acc += spec.job_classes[ci].probability;
            if (u < acc) break;
        }
        const auto& cls = spec.job_classes[ci];

        JobSpec job;
        job.job_id = fmt::format("job{:04d}", i);
        job.submit_time = t;
        job.job_class_label = cls.label;
        job.num_map_tasks = std::max(1, draw_count(cls.map_tasks, rng));
        job.num_reduce_tasks = std::max(0, draw_count(cls.reduce_tasks, rng));
        job.map_task_durations =
            draw_durations(job.num_map_tasks, cls.map_duration, rng, job.map_task_duration);
        if (job.num_reduce_tasks > 0) {
            job.reduce_task_durations = draw_durations(job.num_reduce_tasks, cls.reduce_duration,
                                                       rng, job.reduce_task_duration);
            job.shuffle_bytes_per_reduce = draw_real(cls.shuffle_bytes, rng);
        }
        job.reduce_task_memory = cls.reduce_memory;
        trace.jobs.push_back(std::move(job));
    }
    return trace;
}

namespace {

json range_json(const Range& r) { return json::array({r.lo, r.hi}); }

Range range_from(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ParseError(where + ": expected [lo, hi]");
    }
    return Range{j[0].get<double>(), j[1].get<double>()};
}

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(fmt::format("{}.{}: missing field", where, key));
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ParseError(fmt::format("{}.{}: wrong type", where, key));
    }
}

template <typename T>
T field_or(const json& obj, const char* key, T fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    return field<T>(obj, key, where);
}

json job_to_json(const JobSpec& j) {
    json out = {
        {"job_id", j.job_id},
        {"submit_time", j.submit_time},
        {"num_map_tasks", j.num_map_tasks},
        {"num_reduce_tasks", j.num_reduce_tasks},
        {"map_task_duration", j.map_task_duration},
        {"reduce_task_duration", j.reduce_task_duration},
        {"shuffle_bytes_per_reduce", j.shuffle_bytes_per_reduce},
        {"reduce_task_memory", j.reduce_task_memory},
        {"weight", j.weight},
        {"priority", j.priority},
        {"job_class_label", j.job_class_label},
    };
    if (!j.map_task_durations.empty()) out["map_task_durations"] = j.map_task_durations;
    if (!j.reduce_task_durations.empty()) out["reduce_task_durations"] = j.reduce_task_durations;
    return out;
}

JobSpec job_from_json(const json& obj, const std::string& where) {
    if (!obj.is_object()) throw ParseError(where + ": expected object");
    JobSpec j;
    j.job_id = field<std::string>(obj, "job_id", where);
    j.submit_time = field<double>(obj, "submit_time", where);
    if (!(j.submit_time >= 0)) throw ParseError(where + ".submit_time: must be >= 0");
    j.num_map_tasks = field<int>(obj, "num_map_tasks", where);
    j.num_reduce_tasks = field_or<int>(obj, "num_reduce_tasks", 0, where);
    j.map_task_duration = field<double>(obj, "map_task_duration", where);
    j.reduce_task_duration = field_or<double>(obj, "reduce_task_duration", 0.0, where);
    j.map_task_durations = field_or<std::vector<double>>(obj, "map_task_durations", {}, where);
    j.reduce_task_durations =
        field_or<std::vector<double>>(obj, "reduce_task_durations", {}, where);
    j.shuffle_bytes_per_reduce = field_or<double>(obj, "shuffle_bytes_per_reduce", 0.0, where);
    j.reduce_task_memory = field_or<double>(obj, "reduce_task_memory", kGB, where);
    j.weight = field_or<double>(obj, "weight", 1.0, where);
    j.priority = field_or<int>(obj, "priority", 0, where);
    j.job_class_label = field_or<std::string>(obj, "job_class_label", "", where);
    try {
        validate(j);
    } catch (const ValidationError& e) {
        throw ParseError(fmt::format("{}: {}", where, e.what()));
    }
    return j;
}

}  // namespace

json to_json(const WorkloadSpec& spec) {
    json classes = json::array();
    for (const auto& c : spec.job_classes) {
        classes.push_back({
            {"label", c.label},
            {"probability", c.probability},
            {"map_tasks", range_json(c.map_tasks)},
            {"reduce_tasks", range_json(c.reduce_tasks)},
            {"map_duration", range_json(c.map_duration)},
            {"reduce_duration", range_json(c.reduce_duration)},
            {"shuffle_bytes", range_json(c.shuffle_bytes)},
            {"reduce_memory", c.reduce_memory},
        });
    }
    return {{"name", spec.name},
            {"num_jobs", spec.num_jobs},
            {"mean_interarrival", spec.mean_interarrival},
            {"job_classes", classes}};
}

WorkloadSpec workload_spec_from_json(const json& doc) {
    const std::string where = "spec";
    if (!doc.is_object()) throw ParseError("spec: expected object");
    WorkloadSpec spec;
    spec.name = field_or<std::string>(doc, "name", "custom", where);
    spec.num_jobs = field<int>(doc, "num_jobs", where);
    spec.mean_interarrival = field<double>(doc, "mean_interarrival", where);
    const auto& classes = doc.at("job_classes");
    if (!classes.is_array()) throw ParseError("spec.job_classes: expected array");
    for (std::size_t i = 0; i < classes.size(); ++i) {
        const auto w = fmt::format("spec.job_classes[{}]", i);
        const auto& c = classes[i];
        JobClass jc;
        jc.label = field_or<std::string>(c, "label", "", w);
        jc.probability = field<double>(c, "probability", w);
        jc.map_tasks = range_from(c.at("map_tasks"), w + ".map_tasks");
        if (c.contains("reduce_tasks")) {
            jc.reduce_tasks = range_from(c["reduce_tasks"], w + ".reduce_tasks");
        }
        if (c.contains("map_duration")) {
            jc.map_duration = range_from(c["map_duration"], w + ".map_duration");
        }
        if (c.contains("reduce_duration")) {
            jc.reduce_duration = range_from(c["reduce_duration"], w + ".reduce_duration");
        }
        if (c.contains("shuffle_bytes")) {
            jc.shuffle_bytes = range_from(c["shuffle_bytes"], w + ".shuffle_bytes");
        }
        jc.reduce_memory = field_or<double>(c, "reduce_memory", kGB, w);
        spec.job_classes.push_back(jc);
    }
    validate(spec);
    return spec;
}

json to_json(const WorkloadTrace& trace) {
    json jobs = json::array();
    for (const auto& j : trace.jobs) jobs.push_back(job_to_json(j));
    return {{"format_version", 1},
            {"name", trace.metadata.name},
            {"seed", trace.metadata.seed},
            {"generator_spec", trace.metadata.generator_spec},
            {"jobs", jobs}};
}

WorkloadTrace trace_from_json(const json& doc) {
    if (!doc.is_object()) throw ParseError("trace: expected a JSON object");
    const auto version = field<int>(doc, "format_version", "trace");
    if (version != 1) throw ParseError(fmt::format("trace.format_version: unsupported {}", version));
    WorkloadTrace trace;
    trace.metadata.name = field_or<std::string>(doc, "name", "", "trace");
    trace.metadata.seed = field_or<std::uint64_t>(doc, "seed", 0, "trace");
    if (doc.contains("generator_spec")) trace.metadata.generator_spec = doc["generator_spec"];
    if (!doc.contains("jobs") || !doc["jobs"].is_array()) {
        throw ParseError("trace.jobs: missing or not an array");
    }
    const auto& jobs = doc["jobs"];
    if (jobs.empty()) throw ParseError("empty trace");
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        trace.jobs.push_back(job_from_json(jobs[i], fmt::format("jobs[{}]", i)));
    }
    try {
        validate(trace);
    } catch (const ValidationError& e) {
        throw ParseError(e.what());
    }
    return trace;
}

WorkloadTrace parse_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(fmt::format("{}: cannot open", path.string()));
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
    }
    try {
        return trace_from_json(doc);
    } catch (const ParseError& e) {
        throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

void write_trace(const WorkloadTrace& trace, const std::filesystem::path& path) {
    write_file_atomic(path, to_json(trace).dump(2) + "\n");
}

WorkloadTrace scale_trace(const WorkloadTrace& trace, double machine_ratio) {
    if (!(machine_ratio > 0)) throw ValidationError("scale_trace: machine_ratio must be > 0");
    auto scaled = [&](int n) {
        if (n == 0) return 0;
        const double x = static_cast<double>(n) * machine_ratio;
        return std::max(1, static_cast<int>(std::ceil(x - 1e-9)));
    };
    auto resize = [](std::vector<double>& v, int n, double& scalar) {
        if (v.empty()) return;
        const auto old = v.size();
        v.resize(static_cast<std::size_t>(n));
        for (std::size_t i = old; i < v.size(); ++i) v[i] = v[i % old];
        double sum = 0.0;
        for (double d : v) sum += d;
        scalar = sum / static_cast<double>(v.size());
    };
    WorkloadTrace out = trace;
    for (auto& j : out.jobs) {
        j.num_map_tasks = scaled(j.num_map_tasks);
        j.num_reduce_tasks = scaled(j.num_reduce_tasks);
        resize(j.map_task_durations, j.num_map_tasks, j.map_task_duration);
        resize(j.reduce_task_durations, j.num_reduce_tasks, j.reduce_task_duration);
    }
    return out;
}

WorkloadTrace map_only(const WorkloadTrace& trace) {
    WorkloadTrace out = trace;
    for (auto& j : out.jobs) {
        j.num_reduce_tasks = 0;
        j.reduce_task_durations.clear();
        j.reduce_task_duration = 0.0;
        j.shuffle_bytes_per_reduce = 0.0;
    }
    return out;
}

WorkloadSpec fb2009_spec() {
    WorkloadSpec s;
    s.name = "fb2009";
    s.num_jobs = 100;
    s.mean_interarrival = 13.0;
    JobClass small{.label = "select", .probability = 0.53, .map_tasks = {1, 2},
                   .reduce_tasks = {0, 0}};
    JobClass medium{.label = "aggregate", .probability = 0.41, .map_tasks = {3, 500},
                    .reduce_tasks = {1, 100}, .reduce_duration = {60, 180}};
    JobClass big{.label = "transform", .probability = 0.06, .map_tasks = {500, 1000},
                 .reduce_tasks = {500, 600}, .reduce_duration = {60, 120}};
    s.job_classes = {small, medium, big};
    return s;
}

WorkloadSpec fb2010_spec() {
    WorkloadSpec s;
    s.name = "fb2010";
    s.num_jobs = 93;
    s.mean_interarrival = 38.0;
    const double total = 39 + 16 + 11 + 10 + 7 + 10;
    auto cls = [&](const char* label, double pct, Range maps, Range reduces) {
        return JobClass{.label = label, .probability = pct / total, .map_tasks = maps,
                        .reduce_tasks = reduces, .reduce_duration = {60, 180}};
    };
    s.job_classes = {
        cls("expand", 39, {1, 1500}, {10, 10}),
        cls("expand and transform", 16, {1, 1500}, {11, 100}),
        cls("transform", 11, {1, 1500}, {101, 200}),
        cls("aggregate", 10, {1501, 2500}, {10, 100}),
        cls("transform", 7, {1501, 2500}, {101, 200}),
        cls("transform", 10, {2501, 3500}, {101, 200}),
    };
    // Re-normalize so the sum is exactly one after floating-point division.
    double sum = 0.0;
    for (const auto& c : s.job_classes) sum += c.probability;
    s.job_classes.back().probability += 1.0 - sum;
    return s;
}

WorkloadSpec preset_spec(const std::string& name) {
    if (name == "fb2009") return fb2009_spec();
    if (name == "fb2010") return fb2010_spec();
    throw ConfigError(fmt::format("unknown workload preset '{}'", name));
}

}  // namespace hfsp
