#ifndef SAGTWIN_DETECT_HPP
#define SAGTWIN_DETECT_HPP

#include <array>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "sagtwin/narx.hpp"
#include "sagtwin/pipeline.hpp"
#include "sagtwin/types.hpp"

namespace sagtwin::detect {

/// Statistical characterization of one CV's one-step proportional training
/// residuals.
struct ResidualFingerprint {
    double mean = 0.0;
    double variance = 0.0;
    double acf1 = 0.0;
    std::size_t sample_size = 0;
    std::vector<double> ecdf_sample;  // decimated to <= 2000 points
};

struct DetectionConfig {
    int window_length = 30;   // N_D
    double alpha = 0.01;      // significance level per test
    std::array<int, kNumCV> trigger_threshold = {103, 181};  // M_D
    int retrain_horizon = 2000;  // N_E used for retraining
};

struct TestOutcome {
    double mean_p = 1.0;
    double variance_p = 1.0;
    double ks_p = 1.0;
    double acf_p = 1.0;
    bool all_pass(double alpha) const {
        return mean_p >= alpha && variance_p >= alpha && ks_p >= alpha && acf_p >= alpha;
    }
};

struct ChannelState {
    ResidualFingerprint baseline;
    std::deque<double> window;
    int counter = 0;  // M
    bool triggered = false;
    TestOutcome last_tests;
};

struct DetectionState {
    std::array<ChannelState, kNumCV> channels;
};

ResidualFingerprint fingerprint(const std::vector<double>& training_residuals);

DetectionState init_state(const std::array<std::vector<double>, kNumCV>& training_residuals);

/// Runs the four two-sided tests (Welch t on means, F on variances,
/// two-sample KS on distributions, Fisher z on lag-1 autocorrelations)
/// between the baseline fingerprint and a full recent window.
TestOutcome test_battery(const ResidualFingerprint& baseline,
                         const std::vector<double>& window, double alpha);

/// One sampling instant: pushes the residuals, and once the window is full
/// runs the battery; an all-pass resets M to 0, any failure increments it,
/// and M > M_D latches the trigger.
void update(DetectionState& state, const Vec2& residuals, const DetectionConfig& config);

using NarxTrainer = std::function<narx::NarxModel(const SampledSeries&)>;

/// Computes one-step proportional residuals of the model over a series
/// (after the lag burn-in), per CV.
std::array<std::vector<double>, kNumCV> one_step_residuals(const narx::NarxModel& model,
                                                           const SampledSeries& data);

/// If any channel is triggered: retrains on the most recent valid records,
/// refits the baseline from the new residuals, and resets the state. Returns
/// nothing when no channel is triggered. Throws RetrainDeferred (leaving the
/// trigger latched) when too little valid data is available.
std::optional<narx::NarxModel> retrain_if_triggered(
    DetectionState& state, const SampledSeries& recent_data,
    const pipeline::ValidityCriteria& criteria, const NarxTrainer& trainer,
    const DetectionConfig& config);

}  // namespace sagtwin::detect

#endif  // SAGTWIN_DETECT_HPP
