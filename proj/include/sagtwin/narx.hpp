#ifndef SAGTWIN_NARX_HPP
#define SAGTWIN_NARX_HPP

#include <cstdint>
#include <deque>
#include <string>
#include <tuple>
#include <vector>

#include "sagtwin/types.hpp"

namespace sagtwin::narx {

/// Per-channel affine normalization for the 2 CVs and 3 MVs.
struct Scaler {
    Vec2 y_mean = Vec2::Zero();
    Vec2 y_std = Vec2::Ones();
    Vec3 u_mean = Vec3::Zero();
    Vec3 u_std = Vec3::Ones();

    Vec2 scale_y(const Vec2& y) const { return (y - y_mean).cwiseQuotient(y_std); }
    Vec2 unscale_y(const Vec2& y) const { return y.cwiseProduct(y_std) + y_mean; }
    Vec3 scale_u(const Vec3& u) const { return (u - u_mean).cwiseQuotient(u_std); }
};

/// One-hidden-layer NARX network over m lagged CVs and n lagged MVs
/// (newest-first; the MV window includes the current instant as lag 0).
struct NarxModel {
    int m = 12;  // CV lag count
    int n = 12;  // MV lag count
    int hidden_width = 2;
    Mat W_in;       // hidden_width x (2m + 3n)
    Vec b_hidden;   // hidden_width
    Mat W_out;      // 2 x hidden_width
    Vec2 b_out = Vec2::Zero();
    std::string activation = "tanh";
    Scaler scaler;
    std::uint64_t seed = 0;

    int input_dim() const { return 2 * m + 3 * n; }
    void check_shapes() const;
};

/// Regressor contents, newest-first: past_y[0] is the most recent CV value
/// (lag 1 relative to the predicted instant), past_u[0] the MV value at the
/// predicted instant itself (lag 0).
struct RegressorWindow {
    std::deque<Vec2> past_y;  // length m
    std::deque<Vec3> past_u;  // length n
};

struct TrainConfig {
    int restarts = 5;
    int max_iterations = 250;
    double tolerance = 1e-14;
    std::uint64_t seed = 7;
};

Vec2 forward(const NarxModel& model, const RegressorWindow& window);

/// Recursive N-step prediction: step i feeds back the i most recent
/// predictions and keeps the remaining slots filled with measured history;
/// future_u supplies the MV trajectory at instants k..k+N.
std::vector<Vec2> rollout(const NarxModel& model, const SampledSeries& history,
                          const std::vector<Vec3>& future_u, int N);

/// Series-parallel (one-step, teacher-forced) training minimizing the sum of
/// prediction-error norms, damped Gauss-Newton with analytic Jacobian and
/// seeded random restarts.
NarxModel train(const SampledSeries& train_data, int m, int n, int hidden_width,
                const TrainConfig& config = {});

/// Reported training cost: sum over samples of ||y_k - y_hat_k||_2 in scaled
/// units.
double training_cost(const NarxModel& model, const SampledSeries& data);

/// Gradient of the squared one-step cost wrt the packed parameter vector;
/// used both by the optimizer and the finite-difference check.
double squared_cost(const NarxModel& model, const SampledSeries& data);
Vec squared_cost_gradient(const NarxModel& model, const SampledSeries& data);

Vec pack_params(const NarxModel& model);
void unpack_params(NarxModel& model, const Vec& theta);

/// Smallest (lags, width), lags first, whose validation cost is within
/// improvement_threshold of the best among lexicographically larger
/// combinations. Returns (m, n, hidden_width) with m = n = lags.
std::tuple<int, int, int> select_structure(const SampledSeries& train_data,
                                           const std::vector<int>& candidate_lags,
                                           const std::vector<int>& candidate_widths,
                                           double improvement_threshold,
                                           const TrainConfig& config = {});

}  // namespace sagtwin::narx

#endif  // SAGTWIN_NARX_HPP
