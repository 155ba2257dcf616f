#ifndef SAGTWIN_SCENARIO_HPP
#define SAGTWIN_SCENARIO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sagtwin/fuzzy.hpp"
#include "sagtwin/statespace.hpp"
#include "sagtwin/types.hpp"

namespace sagtwin::scenario {

/// Ground-truth stand-in for the mill: a nonlinear hold-up model (fill level
/// drives pressure through a concave curve; power follows speed, solids and a
/// slowly varying ore-property disturbance) with additive Gaussian
/// measurement noise.
struct SyntheticPlant {
    // Hold-up dynamics
    double fill_init = 0.5;
    double feed_gain = 1.0e-5;        // fill per (t/h * 30 s)
    double solids_gain = 0.004;       // solids % contribution to inflow
    double discharge_gain = 4.297e-3; // outflow per rpm at unit fill
    double discharge_exponent = 1.2;

    // Pressure curve y1 = p0 + p1 * fill / (1 + p_sat * fill), low-pass
    // filtered by the second state.
    double p0 = 3000.0;
    double p1 = 5000.0;
    double p_sat = 0.5;
    double pressure_filter = 0.13;  // update fraction of the filtered-pressure state

    // Power y2 = q0 + q1 * fill_ref * speed * (1 + q_solids * solids/100) + ore,
    // low-pass filtered like the pressure channel (motor/drive inertia).
    // fill_ref is the nominal hold-up: motor power tracks speed, solids and
    // ore properties rather than the instantaneous charge level.
    double q0 = 3000.0;
    double q1 = 1558.0;
    double q_solids = 0.3;
    double power_filter = 0.12;  // update fraction of the filtered-power state

    // Slowly varying ore-property disturbance (AR(1)) entering the power
    // channel only: torque demand drifts with feed composition.
    double ore_rho = 0.98;
    double ore_noise = 100.0;  // kW, innovation std

    // Slowly varying feed-density disturbance (AR(1) multiplier on the
    // inflow): the hold-up wanders and the expert loop visibly regulates it.
    double feed_rho = 0.99;
    double feed_noise = 0.005; // innovation std of the inflow multiplier

    double noise_y1 = 14.0;    // kPa, measurement noise std
    double noise_y2 = 260.0;   // kW
    double fill_noise = 1.5e-3; // process noise std on the hold-up state

    std::uint64_t seed = 42;
};

struct GenerateConfig {
    Vec3 u_init = Vec3(2000.0, 72.0, 9.5);
    Vec2 y_lim = Vec2(5150.0, 13500.0);
    // Seeded excitation: occasional random setpoint offsets so the data
    // carry enough information for identification.
    double dither_prob = 0.05;
    Vec3 dither_scale = Vec3(40.0, 0.5, 0.15);
};

struct DisturbanceScenario {
    std::string name;
    std::string description;
    // Piecewise-constant factor schedule per CV: (k_start, factor), sorted by
    // k_start; factor 1.0 everywhere if empty.
    std::array<std::vector<std::pair<int, double>>, kNumCV> schedule;

    double factor(int cv, int k) const;
    static DisturbanceScenario identity();
};

/// Runs the full closed loop (expert emulator -> regulatory model ->
/// synthetic plant) for `steps` samples at 30 s.
SampledSeries generate(const SyntheticPlant& plant, const expert::FuzzyRuleBase& rulebase,
                       const regulatory::StateSpaceModel& reg_model, int steps,
                       std::uint64_t seed, const GenerateConfig& config = {});

/// First-order setpoint-tracking loops, the ground truth the regulatory
/// identification should recover.
regulatory::StateSpaceModel tracking_regulatory_model(double pole = 0.55);

/// Liner wear: constant pressure factor 1 + 0.02 * months on y1 from k = 0.
DisturbanceScenario wear_scenario(double months);

/// Ore hardness: factor (1 + increase) on both CVs from `onset` onward.
DisturbanceScenario hardness_scenario(double increase, int onset = 0);

/// Multiplies the CV channels by the scenario factors; MVs and timestamps
/// untouched.
SampledSeries apply(const DisturbanceScenario& scenario, const SampledSeries& series);

void write_scenario(const std::string& path, const DisturbanceScenario& scenario);
DisturbanceScenario read_scenario(const std::string& path);

}  // namespace sagtwin::scenario

#endif  // SAGTWIN_SCENARIO_HPP
