#include "sagtwin/detect.hpp"

#include <algorithm>
#include <cmath>

#include "sagtwin/stats.hpp"

namespace sagtwin::detect {

ResidualFingerprint fingerprint(const std::vector<double>& training_residuals) {
    if (training_residuals.size() < 100)
        throw InsufficientData("fingerprint: need at least 100 residuals");

    ResidualFingerprint fp;
    fp.sample_size = training_residuals.size();
    fp.mean = stats::mean(training_residuals);
    fp.variance = stats::variance(training_residuals);
    fp.acf1 = stats::lag1_autocorrelation(training_residuals);

    constexpr std::size_t kMaxEcdf = 2000;
    const std::size_t stride =
        (training_residuals.size() + kMaxEcdf - 1) / kMaxEcdf;
    fp.ecdf_sample.reserve(training_residuals.size() / stride + 1);
    for (std::size_t i = 0; i < training_residuals.size(); i += stride)
        fp.ecdf_sample.push_back(training_residuals[i]);
    return fp;
}

DetectionState init_state(const std::array<std::vector<double>, kNumCV>& training_residuals) {
    DetectionState state;
    for (int cv = 0; cv < kNumCV; ++cv)
        state.channels[static_cast<std::size_t>(cv)].baseline =
            fingerprint(training_residuals[static_cast<std::size_t>(cv)]);
    return state;
}

TestOutcome test_battery(const ResidualFingerprint& baseline,
                         const std::vector<double>& window, double alpha) {
    (void)alpha;  // thresholds are applied by the caller; p-values returned raw
    // The smallest supported analysis window (DetectionConfig requires
    // window_length >= 10).
    if (window.size() < 10) throw WindowNotFull("test_battery: window not full");

    TestOutcome out;
    const double w_mean = stats::mean(window);
    const double w_var = stats::variance(window);
    out.mean_p = stats::welch_t_test(w_mean, w_var, window.size(), baseline.mean,
                                     baseline.variance, baseline.sample_size)
                     .p_value;
    out.variance_p = stats::f_test(w_var, window.size(), baseline.variance,
                                   baseline.sample_size)
                         .p_value;
    out.ks_p = stats::ks_test(window, baseline.ecdf_sample).p_value;
    out.acf_p = stats::fisher_z_test(stats::lag1_autocorrelation(window), window.size(),
                                     baseline.acf1, baseline.sample_size)
                    .p_value;
    return out;
}

void update(DetectionState& state, const Vec2& residuals, const DetectionConfig& config) {
    for (int cv = 0; cv < kNumCV; ++cv) {
        auto& ch = state.channels[static_cast<std::size_t>(cv)];
        ch.window.push_back(residuals[cv]);
        while (static_cast<int>(ch.window.size()) > config.window_length)
            ch.window.pop_front();
        if (static_cast<int>(ch.window.size()) < config.window_length) continue;

        const std::vector<double> window(ch.window.begin(), ch.window.end());
        ch.last_tests = test_battery(ch.baseline, window, config.alpha);
        if (ch.last_tests.all_pass(config.alpha)) {
            ch.counter = 0;
        } else {
            ++ch.counter;
            if (ch.counter > config.trigger_threshold[static_cast<std::size_t>(cv)])
                ch.triggered = true;
        }
    }
}

std::array<std::vector<double>, kNumCV> one_step_residuals(const narx::NarxModel& model,
                                                           const SampledSeries& data) {
    std::array<std::vector<double>, kNumCV> out;
    const int start = std::max(model.m, model.n - 1);
    for (int k = start; k < static_cast<int>(data.size()); ++k) {
        narx::RegressorWindow window;
        for (int i = 1; i <= model.m; ++i)
            window.past_y.push_back(data[static_cast<std::size_t>(k - i)].y);
        for (int i = 0; i < model.n; ++i)
            window.past_u.push_back(data[static_cast<std::size_t>(k - i)].u);
        const Vec2 y_hat = narx::forward(model, window);
        for (int cv = 0; cv < kNumCV; ++cv)
            out[static_cast<std::size_t>(cv)].push_back(
                (y_hat[cv] - data[static_cast<std::size_t>(k)].y[cv]) /
                data[static_cast<std::size_t>(k)].y[cv]);
    }
    return out;
}

std::optional<narx::NarxModel> retrain_if_triggered(
    DetectionState& state, const SampledSeries& recent_data,
    const pipeline::ValidityCriteria& criteria, const NarxTrainer& trainer,
    const DetectionConfig& config) {
    const bool any_triggered =
        std::any_of(state.channels.begin(), state.channels.end(),
                    [](const ChannelState& ch) { return ch.triggered; });
    if (!any_triggered) return std::nullopt;

    // Most recent contiguous run of valid records, newest-first requirement.
    const auto segments = pipeline::filter_valid(recent_data.records, criteria,
                                                 recent_data.sample_period);
    if (segments.empty() ||
        static_cast<int>(segments.back().size()) < config.retrain_horizon)
        throw RetrainDeferred("retrain: not enough recent valid data");

    SampledSeries window;
    window.sample_period = recent_data.sample_period;
    const auto& last = segments.back();
    window.records.assign(
        last.records.end() - config.retrain_horizon, last.records.end());

    narx::NarxModel retrained = trainer(window);
    const auto residuals = one_step_residuals(retrained, window);
    for (int cv = 0; cv < kNumCV; ++cv) {
        auto& ch = state.channels[static_cast<std::size_t>(cv)];
        ch.baseline = fingerprint(residuals[static_cast<std::size_t>(cv)]);
        ch.window.clear();
        ch.counter = 0;
        ch.triggered = false;
    }
    return retrained;
}

}  // namespace sagtwin::detect
