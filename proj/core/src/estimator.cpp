#include "hfsp/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hfsp {

namespace {
constexpr double kMinSize = 1e-9;
}

void validate(const EstimatorConfig& cfg) {
    if (cfg.sample_count < 1) throw ConfigError("estimator: sample_count must be >= 1");
    if (!(cfg.xi >= 1)) throw ConfigError("estimator: xi must be >= 1");
    if (!(cfg.delta > 0)) throw ConfigError("estimator: delta must be > 0");
    if (!(cfg.alpha >= 0 && cfg.alpha <= 1)) throw ConfigError("estimator: alpha must be in [0, 1]");
    if (!(cfg.bootstrap_map > 0) || !(cfg.bootstrap_reduce > 0)) {
        throw ConfigError("estimator: bootstrap task sizes must be > 0");
    }
}

std::string_view to_string(Provenance p) {
    return p == Provenance::Initial ? "initial" : "trained";
}

double AverageTaskSizeState::mean(Phase kind) const {
    const int i = index(kind);
    return count_[i] == 0 ? bootstrap_[i] : mean_[i];
}

void AverageTaskSizeState::add(Phase kind, double duration) {
    if (!(duration > 0)) throw std::invalid_argument("task duration must be > 0");
    const int i = index(kind);
    ++count_[i];
    mean_[i] += (duration - mean_[i]) / static_cast<double>(count_[i]);
}

void update_average_task_size(AverageTaskSizeState& state, double duration, Phase kind) {
    state.add(kind, duration);
}

SizeEstimate initial_estimate(PhaseId phase, Phase kind, int k, const AverageTaskSizeState& state,
                              const EstimatorConfig& cfg) {
    if (k < 1) throw std::invalid_argument("initial_estimate: k must be >= 1");
    SizeEstimate est;
    est.phase = phase;
    est.provenance = Provenance::Initial;
    est.per_task_expected = state.mean(kind);
    if (std::isinf(cfg.xi)) {
        est.infinite_propensity = true;
        est.serialized_size = std::numeric_limits<double>::infinity();
    } else {
        est.serialized_size = cfg.xi * k * est.per_task_expected;
    }
    return est;
}

UniformFit fit_uniform_least_squares(std::span<const double> samples) {
    if (samples.empty()) throw std::invalid_argument("fit_uniform_least_squares: no samples");
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    const auto n = static_cast<double>(x.size());
    double qbar = 0.0, xbar = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        qbar += (static_cast<double>(i) + 0.5) / n;
        xbar += x[i];
    }
    qbar /= n;
    xbar /= n;
    double sqq = 0.0, sqx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dq = (static_cast<double>(i) + 0.5) / n - qbar;
        sqq += dq * dq;
        sqx += dq * (x[i] - xbar);
    }
    const double slope = sqq > 0 ? sqx / sqq : 0.0;
    const double a = xbar - slope * qbar;
    return UniformFit{a, a + slope};
}

SizeEstimate fit_phase_size(PhaseId phase, std::span<const SampleRecord> samples, int k) {
    if (samples.empty()) throw std::invalid_argument("fit_phase_size: empty sample set");
    std::vector<double> x;
    x.reserve(samples.size());
    for (const auto& s : samples) x.push_back(s.execution_time);
    const UniformFit fit = fit_uniform_least_squares(x);
    SizeEstimate est;
    est.phase = phase;
    est.provenance = Provenance::Trained;
    est.per_task_expected = std::max(fit.mean(), kMinSize);
    est.serialized_size = k * est.per_task_expected;
    return est;
}

ShuffleEstimate estimate_shuffle(std::span<const SampleRecord> samples, int k_reduce) {
    if (samples.empty()) throw std::invalid_argument("estimate_shuffle: empty sample set");
    double wsum = 0.0, weighted = 0.0, plain = 0.0;
    for (const auto& s : samples) {
        wsum += s.input_bytes;
        weighted += s.shuffle_time * s.input_bytes;
        plain += s.shuffle_time;
    }
    if (wsum > 0) return {k_reduce * (weighted / wsum), false};
    return {k_reduce * (plain / static_cast<double>(samples.size())), true};
}

std::optional<double> progress_based_size(double delta, double progress) {
    if (!(progress > 0)) return std::nullopt;
    if (progress > 1) throw std::invalid_argument("progress_based_size: progress must be <= 1");
    return delta / progress;
}

SizeEstimate inject_error(SizeEstimate estimate, double alpha, Rng& rng) {
    if (!(alpha >= 0 && alpha <= 1)) throw std::invalid_argument("inject_error: alpha in [0, 1]");
    if (alpha == 0 || estimate.infinite_propensity) return estimate;
    std::uniform_real_distribution<double> factor(1.0 - alpha, 1.0 + alpha);
    const double f = factor(rng);
    estimate.serialized_size = std::max(estimate.serialized_size * f, kMinSize);
    estimate.per_task_expected = std::max(estimate.per_task_expected * f, kMinSize);
    return estimate;
}

}  // namespace hfsp
