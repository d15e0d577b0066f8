#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "commands.hpp"

namespace {

using hfsp::cli::RunOverrides;

// Shared flags of `run` and `compare`.
void add_run_flags(CLI::App* cmd, RunOverrides& o, bool many_schedulers) {
    cmd->add_option("-c,--config", o.config_file, "JSON run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--trace", o.trace, "Trace file to replay")->check(CLI::ExistingFile);
    cmd->add_option("--preset", o.preset, "Generate the workload from a preset (fb2009, fb2010)");
    cmd->add_option("--spec", o.spec_file, "Generate the workload from a spec file")
        ->check(CLI::ExistingFile);
    cmd->add_option("--scale", o.scale, "Scale task counts of the generated trace");
    cmd->add_flag_callback("--map-only", [&o] { o.map_only = true; }, "Drop reduce phases");
    if (many_schedulers) {
        cmd->add_option("--schedulers", o.schedulers, "Comma-separated list of fifo, fair, hfsp (default: all three)");
    } else {
        cmd->add_option("--scheduler", o.schedulers, "fifo, fair or hfsp");
    }
    cmd->add_option("--seeds", o.seeds, "Seed list: 3, 1..10 or 1,4,9");
    cmd->add_option("-o,--output", o.output, "Output directory");
    cmd->add_option("--machines", o.machines, "Number of machines");
    cmd->add_option("--preemption", o.preemption, "Reduce preemption: eager, wait or kill");
    cmd->add_option("--alpha", o.alpha, "Size estimation error");
    cmd->add_option("--xi", o.xi, "Initial size multiplier (number or inf)");
    cmd->add_flag_callback("--record-events", [&o] { o.record_events = true; },
                           "Write events.ndjson per run");
    cmd->add_flag_callback("--record-decisions", [&o] { o.record_decisions = true; },
                           "Write decisions.ndjson per run");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hfspsim: MapReduce cluster scheduling simulator"};
    app.require_subcommand(1);

    hfsp::cli::GenerateOptions gen;
    auto* generate = app.add_subcommand("generate", "Generate a workload trace");
    generate->add_option("--spec", gen.spec_file, "Workload spec file")->check(CLI::ExistingFile);
    generate->add_option("--preset", gen.preset, "Preset name when no spec is given")
        ->capture_default_str();
    generate->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
    generate->add_option("--scale", gen.scale, "Scale task counts")->capture_default_str();
    generate->add_flag("--map-only", gen.map_only, "Drop reduce phases");
    generate->add_option("-o,--out", gen.out, "Output trace file")->required();

    RunOverrides run_opts;
    auto* run = app.add_subcommand("run", "Simulate one scheduler over one or more seeds");
    add_run_flags(run, run_opts, false);

    RunOverrides compare_opts;
    auto* compare = app.add_subcommand("compare", "Run several schedulers on the same traces");
    add_run_flags(compare, compare_opts, true);

    std::string scenario_name;
    std::string preemption = "eager";
    std::optional<std::string> scenario_out;
    auto* scenario = app.add_subcommand("scenario", "Replay a built-in scenario");
    scenario->add_option("name", scenario_name, "fig1, fig2 or micro44")->required();
    scenario->add_option("--preemption", preemption, "eager, wait or kill")->capture_default_str();
    scenario->add_option("-o,--output", scenario_out, "Write scenario.json and engine outputs");

    std::string report_dir;
    auto* report = app.add_subcommand("report", "Print the summary of a compare/run output");
    report->add_option("dir", report_dir, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) return hfsp::cli::cmd_generate(gen, std::cout);
        if (run->parsed()) return hfsp::cli::cmd_run(hfsp::cli::build_run_config(run_opts), std::cout);
        if (compare->parsed()) {
            if (!compare_opts.schedulers && !compare_opts.config_file) compare_opts.schedulers = "fifo,fair,hfsp";
            return hfsp::cli::cmd_compare(hfsp::cli::build_run_config(compare_opts), std::cout);
        }
        if (scenario->parsed()) {
            return hfsp::cli::cmd_scenario(scenario_name, preemption, scenario_out, std::cout);
        }
        if (report->parsed()) return hfsp::cli::cmd_report(report_dir, std::cout);
    } catch (const hfsp::ConfigError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    } catch (const hfsp::ValidationError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    } catch (const hfsp::ParseError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 0;
}
