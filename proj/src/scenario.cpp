#include "sagtwin/scenario.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

namespace sagtwin::scenario {

double DisturbanceScenario::factor(int cv, int k) const {
    double f = 1.0;
    for (const auto& [k_start, value] : schedule[static_cast<std::size_t>(cv)]) {
        if (k < k_start) break;
        f = value;
    }
    return f;
}

DisturbanceScenario DisturbanceScenario::identity() {
    DisturbanceScenario s;
    s.name = "identity";
    s.description = "no disturbance";
    return s;
}

regulatory::StateSpaceModel tracking_regulatory_model(double pole) {
    auto m = regulatory::StateSpaceModel::zero(3);
    m.order = 1;
    m.A = pole * Mat::Identity(3, 3);
    m.B = (1.0 - pole) * Mat::Identity(3, 3);
    m.C = Mat::Identity(3, 3);
    return m;
}

namespace {

double pressure_curve(const SyntheticPlant& plant, double fill) {
    return plant.p0 + plant.p1 * fill / (1.0 + plant.p_sat * fill);
}

double power_curve(const SyntheticPlant& plant, const Vec3& u) {
    return plant.q0 +
           plant.q1 * plant.fill_init * u[2] * (1.0 + plant.q_solids * u[1] / 100.0);
}

}  // namespace

SampledSeries generate(const SyntheticPlant& plant, const expert::FuzzyRuleBase& rulebase,
                       const regulatory::StateSpaceModel& reg_model, int steps,
                       std::uint64_t seed, const GenerateConfig& config) {
    reg_model.check_shapes();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    const double dt = 30.0;
    const Mat& feedthrough = reg_model.tie_feedthrough_to_B ? reg_model.B : reg_model.D;
    Vec x = Vec::Zero(reg_model.state_dim);
    // Start the loops at the initial MV values (first-order tracking model
    // carries them directly in its state).
    if (reg_model.state_dim == 3) x = config.u_init;

    double fill = plant.fill_init;
    Vec3 u_sp = config.u_init;
    Vec3 u = config.u_init;
    double pressure_state = pressure_curve(plant, fill);
    double power_state = power_curve(plant, u);
    double ore = 0.0;
    double feed_dist = 0.0;

    const double y1_cap = 10.0 * (plant.p0 + plant.p1);
    const double y2_cap = 10.0 * (plant.q0 + plant.q1 * 2.0 * 15.0);

    SampledSeries out;
    out.sample_period = dt;
    out.records.reserve(static_cast<std::size_t>(steps));

    // Warm history so the expert's slope window is defined from the start.
    std::vector<PlantRecord> recent;
    for (int i = 0; i < rulebase.slope_window; ++i) {
        PlantRecord r;
        r.timestamp = static_cast<double>(i - rulebase.slope_window) * dt;
        r.u = u;
        r.u_sp = u_sp;
        r.y = Vec2(pressure_state, power_state);
        recent.push_back(r);
    }

    for (int k = 0; k < steps; ++k) {
        const expert::SetpointCommand cmd = expert::step(rulebase, recent, config.y_lim);
        u_sp += cmd.delta_u_sp;
        if (coin(rng) < config.dither_prob)
            for (int c = 0; c < kNumMV; ++c)
                u_sp[c] += unif(rng) * config.dither_scale[c];

        const Vec3 usp_scaled = reg_model.usp_scaler.scale(u_sp);
        u = reg_model.u_scaler.unscale(reg_model.C * x + feedthrough * usp_scaled +
                                       Vec(reg_model.e));
        x = reg_model.A * x + reg_model.B * usp_scaled + reg_model.K * reg_model.e;

        feed_dist = plant.feed_rho * feed_dist + plant.feed_noise * gauss(rng);
        const double inflow = plant.feed_gain * u[0] *
                              (0.6 + plant.solids_gain * u[1]) * (1.0 + feed_dist);
        const double outflow =
            plant.discharge_gain * u[2] * std::pow(std::max(fill, 1e-6),
                                                   plant.discharge_exponent);
        fill = std::max(fill + inflow - outflow + plant.fill_noise * gauss(rng), 0.01);
        pressure_state += plant.pressure_filter *
                          (pressure_curve(plant, fill) - pressure_state);
        ore = plant.ore_rho * ore + plant.ore_noise * gauss(rng);
        power_state +=
            plant.power_filter * (power_curve(plant, u) + ore - power_state);

        PlantRecord rec;
        rec.timestamp = static_cast<double>(k) * dt;
        rec.u = u;
        rec.u_sp = u_sp;
        rec.y[0] = pressure_state + plant.noise_y1 * gauss(rng);
        rec.y[1] = power_state + plant.noise_y2 * gauss(rng);

        if (!std::isfinite(rec.y[0]) || !std::isfinite(rec.y[1]) ||
            std::abs(rec.y[0]) > y1_cap || std::abs(rec.y[1]) > y2_cap)
            throw UnstablePlantConfig("generate: output exceeded 10x operating range at step " +
                                      std::to_string(k));

        out.records.push_back(rec);
        recent.erase(recent.begin());
        recent.push_back(rec);
    }
    return out;
}

DisturbanceScenario wear_scenario(double months) {
    DisturbanceScenario s;
    s.name = "wear-" + std::to_string(months) + "mo";
    s.description = "liner wear, +2% pressure per month";
    s.schedule[0].emplace_back(0, 1.0 + 0.02 * months);
    return s;
}

DisturbanceScenario hardness_scenario(double increase, int onset) {
    DisturbanceScenario s;
    s.name = "hardness";
    s.description = "ore hardness increase on pressure and power";
    s.schedule[0].emplace_back(onset, 1.0 + increase);
    s.schedule[1].emplace_back(onset, 1.0 + increase);
    return s;
}

SampledSeries apply(const DisturbanceScenario& scenario, const SampledSeries& series) {
    SampledSeries out = series;
    for (std::size_t k = 0; k < out.records.size(); ++k)
        for (int cv = 0; cv < kNumCV; ++cv)
            out.records[k].y[cv] *= scenario.factor(cv, static_cast<int>(k));
    return out;
}

void write_scenario(const std::string& path, const DisturbanceScenario& scenario) {
    nlohmann::json j;
    j["name"] = scenario.name;
    j["description"] = scenario.description;
    const char* keys[kNumCV] = {"y1", "y2"};
    for (int cv = 0; cv < kNumCV; ++cv) {
        auto& arr = j["schedule"][keys[cv]];
        arr = nlohmann::json::array();
        for (const auto& [k, f] : scenario.schedule[static_cast<std::size_t>(cv)])
            arr.push_back({k, f});
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << '\n';
}

DisturbanceScenario read_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    DisturbanceScenario s;
    s.name = j.value("name", "");
    s.description = j.value("description", "");
    const char* keys[kNumCV] = {"y1", "y2"};
    for (int cv = 0; cv < kNumCV; ++cv) {
        if (!j.contains("schedule") || !j["schedule"].contains(keys[cv])) continue;
        for (const auto& entry : j["schedule"][keys[cv]])
            s.schedule[static_cast<std::size_t>(cv)].emplace_back(
                entry.at(0).get<int>(), entry.at(1).get<double>());
    }
    for (auto& sched : s.schedule)
        for (const auto& [k, f] : sched)
            if (f <= 0.0) throw Error("scenario: factors must be positive");
    return s;
}

}  // namespace sagtwin::scenario
