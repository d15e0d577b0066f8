// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: hfsp_acceptance [criterion...]   (no arguments runs all of them)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "commands.hpp"
#include "hfsp/estimator.hpp"
#include "hfsp/experiment.hpp"
#include "hfsp/metrics.hpp"
#include "hfsp/reference.hpp"
#include "hfsp/scenarios.hpp"
#include "hfsp/virtual_cluster.hpp"
#include "oracles/allocation_oracle.hpp"
#include "oracles/fluid_ps_oracle.hpp"
#include "oracles/uniform_fit_oracle.hpp"

using namespace hfsp;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr double kExact = 1e-9;
constexpr double kFig1RuntimeS = 1.0;
constexpr double kFig2RuntimeS = 1.0;
constexpr double kMicroEagerMin = 9.0;
constexpr double kMicroWaitMin = 15.0;
constexpr double kMicroBand = 0.20;
constexpr double kMicroRatio = 1.3;
constexpr double kMicroRuntimeS = 5.0;
constexpr double kDeskScale = 0.2;
constexpr int kDeskMachines = 20;
constexpr int kMacroSeeds = 10;
constexpr int kMacroWins = 8;
constexpr double kFifoFactor = 2.0;
constexpr double kMacroRuntimeS = 120.0;
constexpr int kSweepSeeds = 5;
constexpr double kRobustFactor = 1.5;
constexpr int kRobustSeeds = 20;
constexpr double kRobustRuntimeS = 180.0;
constexpr double kSwapSeconds = 40.0;
constexpr double kOracleTime = 1e-6;
constexpr int kOracleInstances = 200;
constexpr int kExchangeInstances = 1000;
constexpr double kHfspLocality = 0.99;
constexpr double kFairLocality = 0.95;
constexpr int kLocalitySeeds = 5;

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, std::string what) {
        if (!ok) pass = false;
        notes.push_back((ok ? "" : "!") + std::move(what));
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool close(double a, double b, double tol = kExact) {
    return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double mean_sojourn(const std::vector<FluidJob>& jobs, const std::vector<double>& done) {
    double s = 0.0;
    for (std::size_t i = 0; i < jobs.size(); ++i) s += done[i] - jobs[i].arrival;
    return s / static_cast<double>(jobs.size());
}

RunConfig desk_config(std::vector<std::string> schedulers, int seeds) {
    RunConfig cfg;
    GeneratorSource src;
    src.preset = "fb2009";
    src.scale = kDeskScale;
    cfg.generator = src;
    cfg.cluster.num_machines = kDeskMachines;
    cfg.schedulers = std::move(schedulers);
    cfg.seeds.clear();
    for (int s = 1; s <= seeds; ++s) cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    return cfg;
}

// Per-seed mean aggregate sojourn, keyed by scheduler.
std::map<std::string, std::vector<double>> per_seed_means(const std::vector<SchedulerRuns>& runs) {
    std::map<std::string, std::vector<double>> out;
    for (const auto& r : runs) {
        for (const auto& res : r.results) out[r.scheduler].push_back(summarize_run(res).aggregate.mean);
    }
    return out;
}

bool any_capped(const std::vector<SchedulerRuns>& runs) {
    for (const auto& r : runs) {
        for (const auto& res : r.results) {
            if (res.hit_time_cap) return true;
        }
    }
    return false;
}

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    const auto rx = ranks(x), ry = ranks(y);
    const double mx = mean_of(rx), my = mean_of(ry);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome fig1_replay() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto jobs = fig1_jobs();
    const auto ps = processor_sharing_schedule(jobs, 1.0);
    const auto fsp = fsp_schedule(jobs, 1.0);
    o.check(close(ps[1], 37.5) && close(ps[2], 42.5) && close(ps[0], 50.0),
            fmt::format("PS completions {:.4g}/{:.4g}/{:.4g} (want 37.5/42.5/50)", ps[1], ps[2], ps[0]));
    o.check(close(mean_sojourn(jobs, ps), 35.0),
            fmt::format("PS mean {:.4g} (want 35)", mean_sojourn(jobs, ps)));
    o.check(close(fsp[1], 20.0) && close(fsp[2], 30.0) && close(fsp[0], 50.0),
            fmt::format("FSP completions {:.4g}/{:.4g}/{:.4g} (want 20/30/50)", fsp[1], fsp[2], fsp[0]));
    o.check(close(mean_sojourn(jobs, fsp), 25.0),
            fmt::format("FSP mean {:.4g} (want 25)", mean_sojourn(jobs, fsp)));
    const auto report = run_scenario("fig1", ReducePreemption::Eager);
    const auto& engine = report.runs.at(2);
    const double hb = fig1_cluster().heartbeat_interval;
    const std::vector<double> want = {50.0, 20.0, 30.0};
    bool within = true;
    for (std::size_t i = 0; i < 3; ++i) within &= std::abs(engine.jobs[i].completion - want[i]) <= hb;
    o.check(within && engine.jobs[1].completion < engine.jobs[2].completion &&
                engine.jobs[2].completion < engine.jobs[0].completion,
            fmt::format("engine {:.2f}/{:.2f}/{:.2f} within {} s", engine.jobs[1].completion,
                        engine.jobs[2].completion, engine.jobs[0].completion, hb));
    const double rt = seconds_since(t0);
    o.check(rt < kFig1RuntimeS, fmt::format("runtime {:.3f} s", rt));
    return o;
}

Outcome fig2_replay() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto jobs = fig2_jobs();
    const auto ps = processor_sharing_schedule(jobs, kFig2Capacity);
    const auto fsp = fsp_schedule(jobs, kFig2Capacity);
    const double ps_mean = mean_sojourn(jobs, ps), fsp_mean = mean_sojourn(jobs, fsp);
    o.check(fsp_mean < ps_mean, fmt::format("FSP mean {:.4g} < PS mean {:.4g}", fsp_mean, ps_mean));
    o.check(fsp[1] < fsp[0] && fsp[2] < fsp[0],
            fmt::format("j2 {:.4g}, j3 {:.4g} before j1 {:.4g}", fsp[1], fsp[2], fsp[0]));
    // j1 finishes when all work is done only if it used every slot j2 and j3 left over.
    double work = 0.0;
    for (const auto& j : jobs) work += j.work;
    o.check(close(fsp[0], work / kFig2Capacity),
            fmt::format("j1 done at {:.4g} = total work / capacity {:.4g}", fsp[0], work / kFig2Capacity));
    const double rt = seconds_since(t0);
    o.check(rt < kFig2RuntimeS, fmt::format("runtime {:.3f} s", rt));
    return o;
}

Outcome micro_benchmark() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto eager = run_scenario("micro44", ReducePreemption::Eager);
    const auto wait = run_scenario("micro44", ReducePreemption::Wait);
    const auto kill = run_scenario("micro44", ReducePreemption::Kill);
    const double em = eager.runs[0].mean_sojourn / 60.0;
    const double wm = wait.runs[0].mean_sojourn / 60.0;
    o.check(std::abs(em - kMicroEagerMin) <= kMicroBand * kMicroEagerMin,
            fmt::format("eager mean {:.2f} min (want {} +-{:.0f}%)", em, kMicroEagerMin, kMicroBand * 100));
    o.check(std::abs(wm - kMicroWaitMin) <= kMicroBand * kMicroWaitMin,
            fmt::format("wait mean {:.2f} min (want {} +-{:.0f}%)", wm, kMicroWaitMin, kMicroBand * 100));
    o.check(wm / em >= kMicroRatio, fmt::format("wait/eager {:.3f} (want >= {})", wm / em, kMicroRatio));
    const double ej1 = eager.runs[0].jobs[0].completion;
    const double kj1 = kill.runs[0].jobs[0].completion;
    o.check(kj1 > ej1, fmt::format("kill j1 done {:.2f} s vs eager {:.2f} s ({} kills)", kj1, ej1,
                                   kill.simulations[0].counters.kills));
    const double rt = seconds_since(t0);
    o.check(rt < kMicroRuntimeS, fmt::format("runtime {:.3f} s", rt));
    return o;
}

Outcome macro_comparison() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto cfg = desk_config({"fifo", "fair", "hfsp"}, kMacroSeeds);
    const auto runs = run_experiment(cfg);
    o.check(!any_capped(runs), "no run hit the time cap");
    auto means = per_seed_means(runs);
    int wins = 0;
    for (int s = 0; s < kMacroSeeds; ++s) wins += means["hfsp"][s] < means["fair"][s];
    o.check(wins >= kMacroWins, fmt::format("HFSP < FAIR in {}/{} seeds (want >= {})", wins, kMacroSeeds, kMacroWins));
    const double h = mean_of(means["hfsp"]), f = mean_of(means["fifo"]);
    o.check(f >= kFifoFactor * h, fmt::format("FIFO/HFSP {:.3f} (FIFO {:.1f} s, HFSP {:.1f} s, FAIR {:.1f} s; want >= {})",
                                              f / h, f, h, mean_of(means["fair"]), kFifoFactor));
    const double rt = seconds_since(t0);
    o.check(rt < kMacroRuntimeS, fmt::format("runtime {:.1f} s", rt));
    return o;
}

Outcome cluster_sweep() {
    Outcome o;
    std::vector<double> machines, gaps;
    std::string detail;
    for (int m : {50, 40, 30, 20, 10}) {
        auto cfg = desk_config({"fair", "hfsp"}, kSweepSeeds);
        cfg.cluster.num_machines = m;
        const auto runs = run_experiment(cfg);
        if (any_capped(runs)) o.check(false, fmt::format("{} machines hit the time cap", m));
        auto means = per_seed_means(runs);
        const double gap = mean_of(means["fair"]) - mean_of(means["hfsp"]);
        machines.push_back(m);
        gaps.push_back(gap);
        detail += fmt::format("{}:{:.1f} ", m, gap);
    }
    const double rho = spearman(machines, gaps);
    o.check(rho < 0, fmt::format("FAIR-HFSP gap by machines [{}] Spearman rho {:.2f} (want < 0)",
                                 detail.substr(0, detail.size() - 1), rho));
    return o;
}

Outcome error_robustness() {
    Outcome o;
    const auto t0 = Clock::now();
    std::vector<double> means;
    std::string detail;
    for (double alpha : {0.0, 0.2, 0.5, 1.0}) {
        auto cfg = desk_config({"hfsp"}, kRobustSeeds);
        cfg.generator->map_only = true;
        cfg.hfsp.estimator.alpha = alpha;
        const auto runs = run_experiment(cfg);
        if (any_capped(runs)) o.check(false, fmt::format("alpha {} hit the time cap", alpha));
        means.push_back(mean_of(per_seed_means(runs)["hfsp"]));
        detail += fmt::format("{}:{:.1f} ", alpha, means.back());
    }
    double worst = 1.0;
    for (double m : means) worst = std::max({worst, m / means[0], means[0] / m});
    o.check(worst <= kRobustFactor, fmt::format("means by alpha [{}] worst ratio {:.3f} (want <= {})",
                                                detail.substr(0, detail.size() - 1), worst, kRobustFactor));
    const double rt = seconds_since(t0);
    o.check(rt < kRobustRuntimeS, fmt::format("runtime {:.1f} s", rt));
    return o;
}

Outcome swap_cost() {
    Outcome o;
    const PreemptionCostModel model;
    const double total = suspend_cost(2 * kGB, model) + resume_cost(2 * kGB, model);
    o.check(total == kSwapSeconds, fmt::format("2 GB suspend+resume {} s (want {})", total, kSwapSeconds));
    // Slopes over 0.1 GB segments up to 12 GB: constant on each side, one change at 5 GB.
    const double step = 0.1 * kGB;
    bool monotone = true;
    int changes = 0;
    double kink = -1.0;
    double prev_slope = -1.0;
    for (int i = 0; i < 120; ++i) {
        const double x = i * step;
        const double slope = (suspend_cost(x + step, model) - suspend_cost(x, model)) / step;
        monotone &= slope > 0;
        if (prev_slope >= 0 && std::abs(slope - prev_slope) > 1e-9 * prev_slope) {
            ++changes;
            kink = x;
        }
        prev_slope = slope;
    }
    o.check(monotone, "monotone");
    o.check(changes == 1 && close(kink, model.degrade_threshold),
            fmt::format("{} slope change(s), at {:.3g} GB", changes, kink / kGB));
    return o;
}

Outcome oracle_equivalence() {
    Outcome o;
    std::mt19937_64 rng(2013);
    double worst = 0.0;
    {
        std::uniform_int_distribution<int> njobs(1, 5), cap(1, 10), demand(1, 10), w(1, 3);
        std::uniform_real_distribution<double> size(1, 400), age(0, 30);
        for (int trial = 0; trial < kOracleInstances; ++trial) {
            const int capacity = cap(rng);
            VirtualCluster vc(capacity, Granularity::Fluid);
            const auto n = static_cast<std::size_t>(njobs(rng));
            std::vector<oracle::PsJob> ps;
            for (std::size_t j = 0; j < n; ++j) {
                const double s = size(rng);
                const int d = demand(rng);
                const double weight = w(rng);
                vc.add_job(make_phase_id(j, Phase::Map), s, d, weight);
                ps.push_back({s, static_cast<double>(d), weight});
            }
            const double t = age(rng);
            vc.age_jobs(t);
            for (std::size_t j = 0; j < n; ++j) ps[j].remaining = vc.remaining(make_phase_id(j, Phase::Map));
            const auto want = oracle::ps_completions(ps, capacity, t);
            for (const auto& c : vc.project_completions()) {
                worst = std::max(worst, std::abs(c.finish - want[job_of(c.id)]));
            }
        }
    }
    o.check(worst <= kOracleTime, fmt::format("{} projections, max |dt| {:.2e} s", kOracleInstances, worst));
    int violations = 0, wrong_total = 0;
    {
        std::uniform_int_distribution<int> njobs(1, 8), demand(0, 12), cap(0, 40), w(1, 4);
        for (int trial = 0; trial < kExchangeInstances; ++trial) {
            std::vector<oracle::SlotDemand> jobs(static_cast<std::size_t>(njobs(rng)));
            std::vector<DemandEntry> entries;
            for (std::size_t i = 0; i < jobs.size(); ++i) {
                jobs[i] = {demand(rng), static_cast<double>(w(rng))};
                entries.push_back({make_phase_id(i, Phase::Map), jobs[i].demand, jobs[i].weight, i});
            }
            const int capacity = cap(rng);
            const auto alloc = allocate_max_min(entries, capacity);
            std::vector<int> got;
            int total = 0;
            for (const auto& e : entries) {
                const auto it = alloc.find(e.id);
                got.push_back(it == alloc.end() ? 0 : static_cast<int>(it->second));
                total += got.back();
            }
            wrong_total += total != oracle::expected_total(jobs, capacity);
            violations += oracle::exchange_violations(jobs, got);
        }
    }
    o.check(violations == 0 && wrong_total == 0,
            fmt::format("{} allocations, {} exchange violations, {} wrong totals", kExchangeInstances,
                        violations, wrong_total));
    return o;
}

Outcome estimator_suite() {
    Outcome o;
    const PhaseId id = make_phase_id(0, Phase::Map);
    const AverageTaskSizeState l(30.0, 30.0);
    EstimatorConfig cfg;
    const double s1 = initial_estimate(id, Phase::Map, 10, l, cfg).serialized_size;
    cfg.xi = 2.0;
    const double s2 = initial_estimate(id, Phase::Map, 10, l, cfg).serialized_size;
    o.check(close(s1, 300) && close(s2, 600), fmt::format("xi*k*l {} / {} (want 300 / 600)", s1, s2));

    const double p1 = *progress_based_size(60, 0.5), p2 = *progress_based_size(60, 1.0),
                 p3 = *progress_based_size(60, 0.1);
    o.check(close(p1, 120) && close(p2, 60) && close(p3, 600),
            fmt::format("delta/p {} / {} / {} (want 120 / 60 / 600)", p1, p2, p3));

    auto shuffle = [](double s, double b) {
        SampleRecord r;
        r.execution_time = 1;
        r.shuffle_time = s;
        r.input_bytes = b;
        return r;
    };
    const std::vector<SampleRecord> eq = {shuffle(10, kGB), shuffle(20, kGB)};
    const std::vector<SampleRecord> wt = {shuffle(10, 3 * kGB), shuffle(20, kGB)};
    const std::vector<SampleRecord> one = {shuffle(7, kGB)};
    const double h1 = estimate_shuffle(eq, 4).seconds, h2 = estimate_shuffle(wt, 4).seconds,
                 h3 = estimate_shuffle(one, 1).seconds;
    o.check(close(h1, 60) && close(h2, 50) && close(h3, 7),
            fmt::format("weighted shuffle {} / {} / {} (want 60 / 50 / 7)", h1, h2, h3));

    double worst = 0.0;
    for (const std::vector<double>& samples :
         {std::vector<double>{8, 10, 12}, std::vector<double>{10, 10, 10, 10, 10}, std::vector<double>{42}}) {
        const auto fit = fit_uniform_least_squares(samples);
        const auto [a, b] = oracle::grid_fit(samples);
        worst = std::max({worst, std::abs(fit.lower - a) / std::max(1.0, std::abs(a)),
                          std::abs(fit.upper - b) / std::max(1.0, std::abs(b))});
    }
    auto rec = [&](std::vector<double> v) {
        std::vector<SampleRecord> out;
        for (double x : v) {
            SampleRecord r;
            r.execution_time = x;
            out.push_back(r);
        }
        return out;
    };
    const double f1 = fit_phase_size(id, rec({8, 10, 12}), 3).serialized_size;
    const double f2 = fit_phase_size(id, rec({10, 10, 10, 10, 10}), 20).serialized_size;
    const double f3 = fit_phase_size(id, rec({42}), 1).serialized_size;
    o.check(worst <= kExact && close(f1, 30) && close(f2, 200) && close(f3, 42),
            fmt::format("uniform fit vs grid oracle max rel err {:.1e}; sizes {} / {} / {} (want 30 / 200 / 42)",
                        worst, f1, f2, f3));
    return o;
}

Outcome determinism() {
    Outcome o;
    const auto root = fs::temp_directory_path() / "hfsp_acceptance_determinism";
    fs::remove_all(root);
    auto cfg = desk_config({"fifo", "fair", "hfsp"}, 2);
    cfg.record_decisions = true;
    std::ostringstream log;
    cfg.output_dir = (root / "a").string();
    cli::cmd_compare(cfg, log);
    cfg.output_dir = (root / "b").string();
    cli::cmd_compare(cfg, log);
    int files = 0, differing = 0;
    for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
        if (!e.is_regular_file()) continue;
        ++files;
        const auto other = root / "b" / fs::relative(e.path(), root / "a");
        if (!fs::exists(other) || slurp(e.path()) != slurp(other)) ++differing;
    }
    o.check(files > 0 && differing == 0,
            fmt::format("{} files compared, {} differ", files, differing));
    fs::remove_all(root);
    return o;
}

Outcome locality() {
    Outcome o;
    const auto runs = run_experiment(desk_config({"fair", "hfsp"}, kLocalitySeeds));
    for (const auto& r : runs) {
        const double frac = summarize(r.results).locality;
        const double want = r.scheduler == "hfsp" ? kHfspLocality : kFairLocality;
        o.check(frac >= want, fmt::format("{} locality {:.4f} (want >= {})", r.scheduler, frac, want));
    }
    return o;
}

struct Criterion {
    int number;
    std::string name;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all = {
        {1, "single-slot replay", fig1_replay},
        {2, "multi-slot replay", fig2_replay},
        {3, "reduce preemption micro-benchmark", micro_benchmark},
        {4, "desk-scale comparison", macro_comparison},
        {5, "cluster-size sweep", cluster_sweep},
        {6, "estimation-error robustness", error_robustness},
        {7, "swap-cost model", swap_cost},
        {8, "oracle equivalence", oracle_equivalence},
        {9, "estimator suite", estimator_suite},
        {10, "determinism", determinism},
        {11, "locality", locality},
    };
    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
    int failed = 0;
    for (const auto& c : all) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.number) == wanted.end()) continue;
        const auto t0 = Clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out.check(false, std::string("exception: ") + e.what());
        }
        failed += !out.pass;
        std::string notes;
        for (const auto& n : out.notes) notes += (notes.empty() ? "" : "; ") + n;
        std::cout << fmt::format("{} {:>2} {} [{:.2f} s]: {}\n", out.pass ? "PASS" : "FAIL", c.number,
                                 c.name, seconds_since(t0), notes)
                  << std::flush;
    }
    return failed == 0 ? 0 : 1;
}
