#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "hfsp/reference.hpp"
#include "hfsp/scenarios.hpp"
#include "oracles/fluid_ps_oracle.hpp"

using namespace hfsp;

namespace {

// Capped processor sharing with arrivals, stepping the oracle's rates between events.
std::vector<double> ps_with_arrivals(const std::vector<FluidJob>& jobs, double capacity) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<oracle::PsJob> ps;
    for (const auto& j : jobs) ps.push_back({j.work, j.max_rate, j.weight});
    std::vector<double> done(jobs.size(), inf);
    std::vector<bool> active(jobs.size(), false);
    double t = 0.0;
    std::size_t finished = 0;
    while (finished < jobs.size()) {
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            if (!active[i] && done[i] == inf && jobs[i].arrival <= t) active[i] = true;
        }
        const auto rate = oracle::ps_rates(ps, active, capacity);
        double dt = inf;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            if (active[i] && rate[i] > 0) dt = std::min(dt, ps[i].remaining / rate[i]);
            if (!active[i] && done[i] == inf) dt = std::min(dt, jobs[i].arrival - t);
        }
        t += dt;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            if (!active[i]) continue;
            ps[i].remaining -= rate[i] * dt;
            if (ps[i].remaining <= 1e-9 * std::max(1.0, jobs[i].work)) {
                active[i] = false;
                done[i] = t;
                ++finished;
            }
        }
    }
    return done;
}

double mean_sojourn(const std::vector<FluidJob>& jobs, const std::vector<double>& done) {
    double s = 0.0;
    for (std::size_t i = 0; i < jobs.size(); ++i) s += done[i] - jobs[i].arrival;
    return s / static_cast<double>(jobs.size());
}

}  // namespace

TEST(ReferenceScheduleTest, SingleSlotProcessorSharing) {
    const auto jobs = fig1_jobs();
    const auto ps = processor_sharing_schedule(jobs, 1.0);
    const auto want = ps_with_arrivals(jobs, 1.0);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(ps[i], want[i], 1e-9);
    EXPECT_NEAR(ps[0], 50.0, 1e-9);
    EXPECT_NEAR(ps[1], 37.5, 1e-9);
    EXPECT_NEAR(ps[2], 42.5, 1e-9);
    EXPECT_NEAR(mean_sojourn(jobs, ps), 35.0, 1e-9);
}

TEST(ReferenceScheduleTest, SingleSlotFsp) {
    const auto jobs = fig1_jobs();
    const auto fsp = fsp_schedule(jobs, 1.0);
    EXPECT_NEAR(fsp[1], 20.0, 1e-9);
    EXPECT_NEAR(fsp[2], 30.0, 1e-9);
    EXPECT_NEAR(fsp[0], 50.0, 1e-9);
    EXPECT_NEAR(mean_sojourn(jobs, fsp), 25.0, 1e-9);
}

TEST(ReferenceScheduleTest, MultiSlotFspBeatsProcessorSharing) {
    const auto jobs = fig2_jobs();
    const auto ps = processor_sharing_schedule(jobs, kFig2Capacity);
    const auto want = ps_with_arrivals(jobs, kFig2Capacity);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(ps[i], want[i], 1e-9);
    const auto fsp = fsp_schedule(jobs, kFig2Capacity);
    EXPECT_LT(fsp[1], fsp[0]);
    EXPECT_LT(fsp[2], fsp[0]);
    EXPECT_LT(mean_sojourn(jobs, fsp), mean_sojourn(jobs, ps));
    // j1 keeps the 2 slots that j2 and j3 leave over, so it still ends at 39 s.
    EXPECT_NEAR(fsp[0], 39.0, 1e-9);
    EXPECT_NEAR(fsp[1], 20.0, 1e-9);
    EXPECT_NEAR(fsp[2], 23.0, 1e-9);
}

TEST(ReferenceScheduleTest, ProcessorSharingMatchesOracleWithArrivals) {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> njobs(1, 6), cap(1, 10), w(1, 3);
    std::uniform_real_distribution<double> work(1, 300), arrival(0, 100), rate(0.5, 8);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<FluidJob> jobs(static_cast<std::size_t>(njobs(rng)));
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            jobs[i] = {"j" + std::to_string(i), arrival(rng), work(rng), rate(rng),
                       static_cast<double>(w(rng))};
        }
        std::sort(jobs.begin(), jobs.end(),
                  [](const FluidJob& a, const FluidJob& b) { return a.arrival < b.arrival; });
        const double capacity = cap(rng);
        const auto got = processor_sharing_schedule(jobs, capacity);
        const auto want = ps_with_arrivals(jobs, capacity);
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            EXPECT_NEAR(got[i], want[i], 1e-6) << "trial " << trial;
        }
    }
}

TEST(ReferenceScheduleTest, FspNeverLosesToProcessorSharingOnSingleSlot) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> work(1, 100), arrival(0, 100);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<FluidJob> jobs(5);
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            jobs[i] = {"j" + std::to_string(i), arrival(rng), work(rng), 1.0, 1.0};
        }
        std::sort(jobs.begin(), jobs.end(),
                  [](const FluidJob& a, const FluidJob& b) { return a.arrival < b.arrival; });
        const auto ps = processor_sharing_schedule(jobs, 1.0);
        const auto fsp = fsp_schedule(jobs, 1.0);
        // Each job finishes no later under FSP than under processor sharing.
        for (std::size_t i = 0; i < jobs.size(); ++i) EXPECT_LE(fsp[i], ps[i] + 1e-6);
    }
}

TEST(ScenarioTest, SingleSlotEngineReplayWithinOneHeartbeat) {
    const auto report = run_scenario("fig1", ReducePreemption::Eager);
    ASSERT_EQ(report.runs.size(), 3u);
    const auto& engine = report.runs[2];
    const double hb = fig1_cluster().heartbeat_interval;
    const std::vector<double> want = {50.0, 20.0, 30.0};
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(engine.jobs[i].completion, want[i], hb) << engine.jobs[i].job_id;
    }
    EXPECT_LT(engine.jobs[1].completion, engine.jobs[2].completion);
    EXPECT_LT(engine.jobs[2].completion, engine.jobs[0].completion);
    EXPECT_THROW(run_scenario("fig9", ReducePreemption::Eager), ConfigError);
}
