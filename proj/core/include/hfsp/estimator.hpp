#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hfsp/model.hpp"

namespace hfsp {

enum class FitDistribution : std::uint8_t { Uniform };

struct EstimatorConfig {
    int sample_count = 5;
    double xi = 1.0;  // +infinity allowed
    double delta = 60.0;
    FitDistribution fit = FitDistribution::Uniform;
    double alpha = 0.0;
    double bootstrap_map = 60.0;
    double bootstrap_reduce = 60.0;
};

void validate(const EstimatorConfig& cfg);

struct SampleRecord {
    TaskRef task;
    double execution_time = 0.0;
    double shuffle_time = 0.0;
    double input_bytes = 0.0;
    bool extrapolated = false;
};

enum class Provenance : std::uint8_t { Initial, Trained };

std::string_view to_string(Provenance p);

struct SizeEstimate {
    PhaseId phase{};
    double serialized_size = 0.0;
    Provenance provenance = Provenance::Initial;
    double per_task_expected = 0.0;
    // Untrained job under xi = infinity: ranks after every estimated job.
    bool infinite_propensity = false;
};

class AverageTaskSizeState {
public:
    AverageTaskSizeState() = default;
    AverageTaskSizeState(double bootstrap_map, double bootstrap_reduce)
        : bootstrap_{bootstrap_map, bootstrap_reduce} {}

    double mean(Phase kind) const;
    long count(Phase kind) const { return count_[index(kind)]; }
    void add(Phase kind, double duration);

private:
    static int index(Phase kind) { return kind == Phase::Map ? 0 : 1; }

    double bootstrap_[2] = {60.0, 60.0};
    double mean_[2] = {0.0, 0.0};
    long count_[2] = {0, 0};
};

SizeEstimate initial_estimate(PhaseId phase, Phase kind, int k, const AverageTaskSizeState& state,
                              const EstimatorConfig& cfg);

struct UniformFit {
    double lower = 0.0;
    double upper = 0.0;

    double mean() const { return 0.5 * (lower + upper); }
};

// Least squares of the sorted samples against ECDF ordinates (i - 0.5) / n.
UniformFit fit_uniform_least_squares(std::span<const double> samples);

// Throws std::invalid_argument on an empty sample set.
SizeEstimate fit_phase_size(PhaseId phase, std::span<const SampleRecord> samples, int k);

struct ShuffleEstimate {
    double seconds = 0.0;
    bool unweighted_fallback = false;
};

ShuffleEstimate estimate_shuffle(std::span<const SampleRecord> samples, int k_reduce);

// Delta / p; nullopt while p == 0 (not yet estimable).
std::optional<double> progress_based_size(double delta, double progress);

// Size scaled by a Uniform[1 - alpha, 1 + alpha] draw; alpha == 0 draws nothing.
SizeEstimate inject_error(SizeEstimate estimate, double alpha, Rng& rng);

void update_average_task_size(AverageTaskSizeState& state, double duration, Phase kind);

}  // namespace hfsp
