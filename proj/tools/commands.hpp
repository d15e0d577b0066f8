#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "hfsp/experiment.hpp"

namespace hfsp::cli {

// Every field is optional so that only flags the user actually passed
// override values from the config file.
struct RunOverrides {
    std::optional<std::string> config_file;
    std::optional<std::string> trace;
    std::optional<std::string> preset;
    std::optional<std::string> spec_file;
    std::optional<double> scale;
    std::optional<bool> map_only;
    std::optional<std::string> schedulers;  // comma separated
    std::optional<std::string> seeds;
    std::optional<std::string> output;
    std::optional<int> machines;
    std::optional<std::string> preemption;
    std::optional<double> alpha;
    std::optional<std::string> xi;  // number or "inf"
    std::optional<bool> record_events;
    std::optional<bool> record_decisions;
};

RunConfig build_run_config(const RunOverrides& o);

// Relative output paths land under $HFSP_OUTPUT_ROOT when it is set.
std::filesystem::path resolve_output(const std::string& dir);

struct GenerateOptions {
    std::optional<std::string> spec_file;
    std::string preset = "fb2009";
    std::uint64_t seed = 1;
    double scale = 1.0;
    bool map_only = false;
    std::string out;
};

int cmd_generate(const GenerateOptions& o, std::ostream& log);
// Single scheduler; one simulation per seed.
int cmd_run(const RunConfig& cfg, std::ostream& log);
int cmd_compare(const RunConfig& cfg, std::ostream& log);
int cmd_scenario(const std::string& name, const std::string& preemption,
                 const std::optional<std::string>& output, std::ostream& log);
// Prints the side-by-side table stored in <dir>/summary.json.
int cmd_report(const std::string& dir, std::ostream& log);

}  // namespace hfsp::cli
