#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "hfsp/metrics.hpp"

using namespace hfsp;

namespace {

SimulationResult two_jobs() {
    SimulationResult r;
    r.scheduler = "test";
    r.jobs = {{"a", "", 0.0, true, 25.0}, {"b", "", 5.0, true, 12.0}};
    PhaseRecord am{make_phase_id(0, Phase::Map), 0, Phase::Map, 2, true, 0.0, true, 10.0};
    PhaseRecord ar{make_phase_id(0, Phase::Reduce), 0, Phase::Reduce, 1, true, 8.0, true, 25.0};
    PhaseRecord bm{make_phase_id(1, Phase::Map), 1, Phase::Map, 1, true, 5.0, true, 12.0};
    r.phases = {am, ar, bm};
    TaskRecord t;
    t.kind = Phase::Map;
    t.is_local = true;
    r.tasks = {t, t};
    t.is_local = false;
    r.tasks.push_back(t);
    t.kind = Phase::Reduce;
    r.tasks.push_back(t);
    return r;
}

}  // namespace

TEST(ComputeSojournsTest, PhaseAndAggregateRecords) {
    const auto recs = compute_sojourns(two_jobs());
    ASSERT_EQ(recs.size(), 5u);
    EXPECT_EQ(sojourn_values(recs, SojournKind::Map), (std::vector<double>{10.0, 7.0}));
    EXPECT_EQ(sojourn_values(recs, SojournKind::Reduce), (std::vector<double>{17.0}));
    EXPECT_EQ(sojourn_values(recs, SojournKind::Aggregate), (std::vector<double>{25.0, 7.0}));
    // Map-only job: aggregate equals map sojourn.
    EXPECT_EQ(recs[2].sojourn, recs[4].sojourn);
}

TEST(ComputeSojournsTest, IncompleteListsUnfinishedJobs) {
    auto r = two_jobs();
    r.jobs[1].completed = false;
    try {
        compute_sojourns(r);
        FAIL() << "expected IncompleteSimulation";
    } catch (const IncompleteSimulation& e) {
        EXPECT_NE(std::string(e.what()).find("b"), std::string::npos);
    }
}

TEST(EcdfTest, StepsAndErrors) {
    const std::vector<double> v = {1, 2, 2, 4};
    const auto e = ecdf(v);
    ASSERT_EQ(e.size(), 3u);
    EXPECT_EQ(e[0].value, 1);
    EXPECT_DOUBLE_EQ(e[0].fraction, 0.25);
    EXPECT_EQ(e[1].value, 2);
    EXPECT_DOUBLE_EQ(e[1].fraction, 0.75);
    EXPECT_EQ(e[2].value, 4);
    EXPECT_DOUBLE_EQ(e[2].fraction, 1.0);
    EXPECT_THROW(ecdf(std::vector<double>{}), std::invalid_argument);
}

TEST(EcdfTest, PermutationInvariantAndMonotone) {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> val(0, 50);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> v(40);
        for (double& x : v) x = val(rng);
        const auto base = ecdf(v);
        std::shuffle(v.begin(), v.end(), rng);
        const auto again = ecdf(v);
        ASSERT_EQ(base.size(), again.size());
        for (std::size_t i = 0; i < base.size(); ++i) {
            EXPECT_EQ(base[i].value, again[i].value);
            EXPECT_EQ(base[i].fraction, again[i].fraction);
            if (i > 0) {
                EXPECT_GT(base[i].value, base[i - 1].value);
                EXPECT_GT(base[i].fraction, base[i - 1].fraction);
            }
        }
        EXPECT_EQ(base.back().fraction, 1.0);
        EXPECT_LE(base.size(), v.size());
    }
}

TEST(LocalityTest, CountsMapTasksOnly) {
    EXPECT_DOUBLE_EQ(locality_fraction(two_jobs()), 2.0 / 3.0);
    auto r = two_jobs();
    for (auto& t : r.tasks) t.is_local = true;
    EXPECT_DOUBLE_EQ(locality_fraction(r), 1.0);
    r.tasks.clear();
    EXPECT_THROW(locality_fraction(r), std::invalid_argument);
}

TEST(DescribeTest, MeanMedianP95) {
    std::vector<double> v(100);
    std::iota(v.begin(), v.end(), 1.0);
    const auto s = describe(v);
    EXPECT_EQ(s.count, 100u);
    EXPECT_DOUBLE_EQ(s.mean, 50.5);
    EXPECT_DOUBLE_EQ(s.median, 50.5);
    EXPECT_NEAR(s.p95, 95.05, 1e-12);
}

TEST(SummarizeTest, MeanEqualsArithmeticMeanOfRecords) {
    auto a = two_jobs();
    auto b = two_jobs();
    b.jobs[0].completion = 40.0;
    b.phases[1].completion = 40.0;
    b.seed = 2;
    const std::vector<SimulationResult> runs = {a, b};
    const auto s = summarize(runs);
    double sum = 0.0;
    int n = 0;
    for (const auto& r : runs) {
        for (double x : sojourn_values(compute_sojourns(r), SojournKind::Aggregate)) {
            sum += x;
            ++n;
        }
    }
    EXPECT_EQ(s.aggregate.mean, sum / n);
    EXPECT_EQ(s.runs.size(), 2u);
    EXPECT_DOUBLE_EQ(s.runs[0].aggregate.mean, 16.0);
    EXPECT_DOUBLE_EQ(s.runs[1].aggregate.mean, 23.5);
    EXPECT_DOUBLE_EQ(s.across_seed_mean, 19.75);
    EXPECT_NEAR(s.across_seed_std, std::sqrt(2 * 3.75 * 3.75), 1e-12);
    EXPECT_THROW(summarize(std::vector<SimulationResult>{}), std::invalid_argument);
}

TEST(TimelineTest, StepFunctionPerPhase) {
    SimulationResult r = two_jobs();
    r.timeline = {{0.0, 0, Phase::Map, 2}, {5.0, 1, Phase::Map, 1}, {10.0, 0, Phase::Map, 0},
                  {10.0, 0, Phase::Reduce, 1}, {12.0, 1, Phase::Map, 0}};
    const auto tl = allocation_timeline(r);
    ASSERT_EQ(tl.size(), 3u);
    EXPECT_EQ(tl[0].job_id, "a");
    EXPECT_EQ(slots_at(tl[0], 0.0), 2);
    EXPECT_EQ(slots_at(tl[0], 9.99), 2);
    EXPECT_EQ(slots_at(tl[0], 10.0), 0);
    EXPECT_EQ(slots_at(tl[1], 4.0), 0);
    EXPECT_EQ(slots_at(tl[1], 6.0), 1);
}
