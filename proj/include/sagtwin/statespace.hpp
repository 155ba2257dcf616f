#ifndef SAGTWIN_STATESPACE_HPP
#define SAGTWIN_STATESPACE_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "sagtwin/types.hpp"

namespace sagtwin::regulatory {

/// Per-channel affine standardization applied before the model's linear
/// algebra. Identity by default so hand-built models work in raw units.
struct ChannelScaler {
    Vec mean;
    Vec std;

    static ChannelScaler identity(int dims);
    Vec scale(const Vec& v) const { return ((v - mean).array() / std.array()).matrix(); }
    Vec unscale(const Vec& v) const { return (v.array() * std.array() + mean.array()).matrix(); }
};

/// Discrete linear emulator of the MV control loops:
///   x[k+1] = A x[k] + B u_sp[k] + K e
///   u[k]   = C x[k] + D u_sp[k] + e
/// Matrices live in standardized space; the scalers are part of the model.
struct StateSpaceModel {
    int order = 1;      // output/input lag count used at identification
    int state_dim = 3;  // rows of A; 3 * order for identified models
    Mat A, B, C, D, K;
    Vec x0;
    Vec3 e = Vec3::Zero();
    // Reproduces the literal published form where B doubles as the
    // feedthrough; only valid when state_dim == 3.
    bool tie_feedthrough_to_B = false;
    ChannelScaler u_scaler = ChannelScaler::identity(3);
    ChannelScaler usp_scaler = ChannelScaler::identity(3);

    static StateSpaceModel zero(int state_dim);
    void check_shapes() const;  // throws ShapeMismatch
};

struct EstimationConfig {
    int horizon = 30;  // N_E, number of past instants
};

struct IdentifyConfig {
    int restarts = 5;       // random restarts beyond the least-squares start
    int max_iterations = 200;
    double tolerance = 1e-12;
    std::uint64_t seed = 1;
};

/// Free-run simulation from model.x0: returns u_hat[0..steps-1] in raw units,
/// where u_hat[i] = C x[i] + D u_sp[i] + e.
std::vector<Vec3> simulate(const StateSpaceModel& model,
                           const std::vector<Vec3>& u_sp_sequence, int steps);

/// Simulation-error cost sum ||u_k - u_hat_k||_2 over the series, computed in
/// standardized space.
double simulation_cost(const StateSpaceModel& model, const SampledSeries& data);

/// Fits A, B, C, D and x0 by minimizing the free-run simulation error over
/// the whole training horizon with e = 0 (K is left zero: the disturbance
/// path carries no information when e is pinned to zero during
/// identification). Seeded by an exact ARX least-squares realization, then
/// refined with damped Gauss-Newton from multiple starts.
StateSpaceModel identify(const SampledSeries& train, int order,
                         const IdentifyConfig& config = {});

/// Smallest order whose cost is within `improvement_threshold` (relative) of
/// the best cost among all larger candidates.
int select_order(const SampledSeries& train, const std::vector<int>& candidate_orders,
                 double improvement_threshold, const IdentifyConfig& config = {});

/// Re-estimates (x0, e) by linear least squares over the last N_E records,
/// with the identified matrices frozen. `recent` is ordered oldest-first and
/// x0 refers to the state at the start of the window.
std::pair<Vec, Vec3> estimate_online(const StateSpaceModel& model,
                                     const std::vector<std::pair<Vec3, Vec3>>& recent_u_usp,
                                     const EstimationConfig& config);

}  // namespace sagtwin::regulatory

#endif  // SAGTWIN_STATESPACE_HPP
