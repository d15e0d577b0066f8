#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "hfsp/experiment.hpp"

using namespace hfsp;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("hfsp_experiment_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig small_config() {
    RunConfig cfg;
    GeneratorSource src;
    src.preset = "fb2009";
    src.scale = 0.1;
    cfg.generator = src;
    cfg.cluster.num_machines = 10;
    cfg.schedulers = {"fifo", "fair", "hfsp"};
    cfg.seeds = {1, 2};
    return cfg;
}

}  // namespace

TEST(ParseSeedsTest, SingleRangeAndList) {
    EXPECT_EQ(parse_seeds("3"), (std::vector<std::uint64_t>{3}));
    EXPECT_EQ(parse_seeds("1..4"), (std::vector<std::uint64_t>{1, 2, 3, 4}));
    EXPECT_EQ(parse_seeds("1,4,9"), (std::vector<std::uint64_t>{1, 4, 9}));
    EXPECT_THROW(parse_seeds(""), ConfigError);
    EXPECT_THROW(parse_seeds("5..2"), ConfigError);
    EXPECT_THROW(parse_seeds("x"), ConfigError);
}

TEST(RunConfigTest, JsonRoundTrip) {
    auto cfg = small_config();
    cfg.hfsp.reduce_preemption = ReducePreemption::Wait;
    cfg.fair.delay_max_skips = 4;
    cfg.record_decisions = true;
    const auto doc = to_json(cfg);
    EXPECT_EQ(to_json(run_config_from_json(doc)), doc);
}

TEST(RunConfigTest, ValidationErrors) {
    auto cfg = small_config();
    cfg.schedulers = {"lifo"};
    EXPECT_THROW(validate(cfg), ConfigError);
    cfg = small_config();
    cfg.trace_path = "x.json";
    EXPECT_THROW(validate(cfg), ConfigError);
    cfg = small_config();
    cfg.generator.reset();
    EXPECT_THROW(validate(cfg), ConfigError);
    cfg = small_config();
    cfg.seeds.clear();
    EXPECT_THROW(validate(cfg), ConfigError);
    EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"seeds": 3, "cluster": 1})")),
                 ConfigError);
}

TEST(BuildRunConfigTest, FlagsOverrideTheConfigFile) {
    const auto dir = fresh_dir("overrides");
    fs::create_directories(dir);
    const auto file = dir / "run.json";
    std::ofstream(file) << to_json(small_config()).dump();
    cli::RunOverrides o;
    o.config_file = file.string();
    o.schedulers = "hfsp,fair";
    o.seeds = "5..6";
    o.machines = 30;
    o.xi = "inf";
    o.preemption = "kill";
    const auto cfg = cli::build_run_config(o);
    EXPECT_EQ(cfg.schedulers, (std::vector<std::string>{"hfsp", "fair"}));
    EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{5, 6}));
    EXPECT_EQ(cfg.cluster.num_machines, 30);
    EXPECT_TRUE(std::isinf(cfg.hfsp.estimator.xi));
    EXPECT_EQ(cfg.hfsp.reduce_preemption, ReducePreemption::Kill);
    ASSERT_TRUE(cfg.generator.has_value());
    EXPECT_EQ(cfg.generator->scale, 0.1);

    cli::RunOverrides bad;
    bad.preset = "fb2009";
    bad.xi = "lots";
    EXPECT_THROW(cli::build_run_config(bad), ConfigError);
    cli::RunOverrides scale_only;
    scale_only.trace = "t.json";
    scale_only.scale = 0.5;
    EXPECT_THROW(cli::build_run_config(scale_only), ConfigError);
    fs::remove_all(dir);
}

TEST(ResolveOutputTest, RelativePathsUseTheOutputRoot) {
    ::setenv("HFSP_OUTPUT_ROOT", "/tmp/root", 1);
    EXPECT_EQ(cli::resolve_output("runs/a"), fs::path("/tmp/root/runs/a"));
    EXPECT_EQ(cli::resolve_output("/abs/b"), fs::path("/abs/b"));
    ::unsetenv("HFSP_OUTPUT_ROOT");
    EXPECT_EQ(cli::resolve_output("runs/a"), fs::path("runs/a"));
}

TEST(MakeSchedulerTest, KnownNames) {
    const auto cfg = small_config();
    for (const std::string name : {"fifo", "fair", "hfsp"}) {
        EXPECT_EQ(make_scheduler(name, cfg)->name(), name);
    }
    EXPECT_THROW(make_scheduler("lifo", cfg), ConfigError);
}

TEST(CsvTest, StableHeaders) {
    const auto runs = run_experiment([] {
        auto c = small_config();
        c.schedulers = {"fifo"};
        c.seeds = {1};
        return c;
    }());
    const auto& r = runs.at(0).results.at(0);
    EXPECT_EQ(sojourns_csv(r).substr(0, 40), "job_id,phase,arrival,completion,sojourn\n");
    EXPECT_EQ(timeline_csv(r).substr(0, 24), "time,job_id,phase,slots\n");
    EXPECT_EQ(ecdf_csv(ecdf(std::vector<double>{1, 2})), "value,fraction\n1,0.5\n2,1\n");
}

TEST(CompareTest, WritesOutputsAndIsDeterministic) {
    const auto a = fresh_dir("cmp_a");
    const auto b = fresh_dir("cmp_b");
    auto cfg = small_config();
    std::ostringstream log;
    cfg.output_dir = a.string();
    ASSERT_EQ(cli::cmd_compare(cfg, log), 0);
    cfg.output_dir = b.string();
    ASSERT_EQ(cli::cmd_compare(cfg, log), 0);
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), a);
        ASSERT_TRUE(fs::exists(b / rel)) << rel;
        EXPECT_EQ(slurp(e.path()), slurp(b / rel)) << rel;
        ++files;
    }
    EXPECT_GE(files, 2u + 3u * (1 + 2 * 5));
    const auto summary = nlohmann::json::parse(slurp(a / "summary.json"));
    EXPECT_EQ(summary.at("seeds"), nlohmann::json::array({1, 2}));
    for (const char* s : {"fifo", "fair", "hfsp"}) {
        EXPECT_TRUE(summary.at("schedulers").contains(s));
        EXPECT_TRUE(fs::exists(a / s / "seed_2" / "sojourns.csv"));
    }
    std::ostringstream report;
    EXPECT_EQ(cli::cmd_report(a.string(), report), 0);
    EXPECT_NE(report.str().find("hfsp"), std::string::npos);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(GenerateCommandTest, WritesAParsableTrace) {
    const auto dir = fresh_dir("gen");
    cli::GenerateOptions o;
    o.seed = 4;
    o.scale = 0.2;
    o.out = (dir / "t.json").string();
    std::ostringstream log;
    ASSERT_EQ(cli::cmd_generate(o, log), 0);
    const auto t = parse_trace(dir / "t.json");
    EXPECT_EQ(t.jobs.size(), 100u);
    EXPECT_EQ(t, scale_trace(generate_workload(fb2009_spec(), 4), 0.2));
    fs::remove_all(dir);
}

TEST(RunCommandTest, RequiresExactlyOneScheduler) {
    auto cfg = small_config();
    std::ostringstream log;
    EXPECT_THROW(cli::cmd_run(cfg, log), ConfigError);
}
