#include <cmath>
#include <cstdio>
#include <vector>

#include <doctest.h>

#include "sagtwin/scenario.hpp"
#include "sagtwin/stats.hpp"

using namespace sagtwin;

TEST_CASE("wear_scenario factors") {
    const auto five = scenario::wear_scenario(5.0);
    CHECK(five.factor(0, 0) == doctest::Approx(1.10));
    CHECK(five.factor(0, 9999) == doctest::Approx(1.10));
    CHECK(five.factor(1, 100) == doctest::Approx(1.0));

    const auto one = scenario::wear_scenario(1.0);
    CHECK(one.factor(0, 0) == doctest::Approx(1.02));

    const auto zero = scenario::wear_scenario(0.0);
    CHECK(zero.factor(0, 0) == doctest::Approx(1.0));
    CHECK(zero.factor(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("hardness_scenario factors and onset") {
    const auto h = scenario::hardness_scenario(0.10, 250);
    for (int k : {0, 100, 249}) {
        CHECK(h.factor(0, k) == doctest::Approx(1.0));
        CHECK(h.factor(1, k) == doctest::Approx(1.0));
    }
    for (int k : {250, 251, 900}) {
        CHECK(h.factor(0, k) == doctest::Approx(1.10));
        CHECK(h.factor(1, k) == doctest::Approx(1.10));
    }
    const auto none = scenario::hardness_scenario(0.0, 0);
    CHECK(none.factor(0, 10) == doctest::Approx(1.0));
}

TEST_CASE("apply: identity scenario is bit-exact; factors multiply y only") {
    SampledSeries data;
    data.sample_period = 30.0;
    for (int i = 0; i < 50; ++i) {
        PlantRecord rec;
        rec.timestamp = 30.0 * i;
        rec.u = Vec3(2000.0 + i, 72.0, 9.5);
        rec.u_sp = rec.u;
        rec.y = Vec2(5000.0 + 2.0 * i, 12000.0 - i);
        data.records.push_back(rec);
    }

    const auto same = scenario::apply(scenario::DisturbanceScenario::identity(), data);
    REQUIRE(same.size() == data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK((same[i].y - data[i].y).norm() == 0.0);
        CHECK((same[i].u - data[i].u).norm() == 0.0);
        CHECK(same[i].timestamp == data[i].timestamp);
    }

    const auto worn = scenario::apply(scenario::wear_scenario(5.0), data);
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK(worn[i].y[0] == data[i].y[0] * 1.10);
        CHECK(worn[i].y[1] == data[i].y[1]);
        CHECK((worn[i].u - data[i].u).norm() == 0.0);
        CHECK((worn[i].u_sp - data[i].u_sp).norm() == 0.0);
    }

    // Composition equals the factor product.
    const auto a = scenario::wear_scenario(2.0);
    const auto b = scenario::hardness_scenario(0.05, 10);
    const auto composed = scenario::apply(b, scenario::apply(a, data));
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double f0 = a.factor(0, static_cast<int>(i)) * b.factor(0, static_cast<int>(i));
        const double f1 = a.factor(1, static_cast<int>(i)) * b.factor(1, static_cast<int>(i));
        CHECK(composed[i].y[0] == doctest::Approx(data[i].y[0] * f0).epsilon(1e-14));
        CHECK(composed[i].y[1] == doctest::Approx(data[i].y[1] * f1).epsilon(1e-14));
    }
}

TEST_CASE("scenario file round-trip") {
    const auto h = scenario::hardness_scenario(0.10, 333);
    const std::string path = "test_scenario.json";
    scenario::write_scenario(path, h);
    const auto back = scenario::read_scenario(path);
    CHECK(back.name == h.name);
    for (int cv = 0; cv < kNumCV; ++cv)
        for (int k : {0, 332, 333, 1000})
            CHECK(back.factor(cv, k) == h.factor(cv, k));
    std::remove(path.c_str());
}

TEST_CASE("generate: determinism under a fixed seed") {
    scenario::SyntheticPlant plant;
    const auto rb = expert::default_rulebase();
    const auto reg = scenario::tracking_regulatory_model();
    const auto a = scenario::generate(plant, rb, reg, 300, 7);
    const auto b = scenario::generate(plant, rb, reg, 300, 7);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK((a[i].y - b[i].y).norm() == 0.0);
        CHECK((a[i].u - b[i].u).norm() == 0.0);
        CHECK((a[i].u_sp - b[i].u_sp).norm() == 0.0);
    }
    const auto c = scenario::generate(plant, rb, reg, 300, 8);
    bool any_different = false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if ((a[i].y - c[i].y).norm() != 0.0) any_different = true;
    CHECK(any_different);
}

TEST_CASE("generate: noise-free loop settles near a fixed point") {
    scenario::SyntheticPlant plant;
    plant.noise_y1 = 0.0;
    plant.noise_y2 = 0.0;
    plant.fill_noise = 0.0;
    plant.feed_noise = 0.0;
    plant.ore_noise = 0.0;
    // Constant-delta rulebase would creep; use a zero-consequent rulebase so
    // the loop has a true equilibrium.
    expert::FuzzyRuleBase rb;
    rb.variables.push_back({"y1", {{"any", -1e12, 0.0, 1e12, false, -1}}});
    rb.states.push_back({"normal", 1, {}, Vec3::Zero()});
    rb.slope_window = 4;
    scenario::GenerateConfig cfg;
    cfg.dither_prob = 0.0;
    const auto series = scenario::generate(plant, rb, scenario::tracking_regulatory_model(),
                                           2000, 3, cfg);
    const std::size_t L = series.size();
    for (std::size_t i = L - 50; i + 1 < L; ++i) {
        CHECK(std::abs(series[i + 1].y[0] - series[i].y[0]) < 1e-6);
        CHECK(std::abs(series[i + 1].y[1] - series[i].y[1]) < 1e-6);
    }
}

TEST_CASE("generate: measurement noise shows up at the configured scale") {
    scenario::SyntheticPlant plant;
    plant.noise_y1 = 18.0;
    plant.fill_noise = 0.0;
    plant.feed_noise = 0.0;
    plant.ore_noise = 0.0;
    expert::FuzzyRuleBase rb;
    rb.variables.push_back({"y1", {{"any", -1e12, 0.0, 1e12, false, -1}}});
    rb.states.push_back({"normal", 1, {}, Vec3::Zero()});
    rb.slope_window = 4;
    scenario::GenerateConfig cfg;
    cfg.dither_prob = 0.0;
    const auto series = scenario::generate(plant, rb, scenario::tracking_regulatory_model(),
                                           2500, 5, cfg);
    // Steady state after burn-in: y1 variation is dominated by the
    // measurement noise (the filtered pressure state is essentially fixed).
    std::vector<double> tail;
    for (std::size_t i = series.size() - 2000; i < series.size(); ++i)
        tail.push_back(series[i].y[0]);
    const double sd = std::sqrt(stats::variance(tail));
    CHECK(sd > 18.0 * 0.8);
    CHECK(sd < 18.0 * 1.2);
}

TEST_CASE("generate: runaway configuration reported as unstable") {
    scenario::SyntheticPlant plant;
    plant.ore_rho = 1.05;  // explosive disturbance, power ramps without bound
    const auto rb = expert::default_rulebase();
    CHECK_THROWS_AS((void)scenario::generate(plant, rb,
                                             scenario::tracking_regulatory_model(), 2000, 7),
                    UnstablePlantConfig);
}

TEST_CASE("tracking regulatory model converges to its setpoint") {
    const auto reg = scenario::tracking_regulatory_model(0.55);
    const std::vector<Vec3> usp(60, Vec3(2100.0, 70.0, 10.0));
    auto model = reg;
    model.x0 = model.u_scaler.scale(Vec3(2000.0, 72.0, 9.5));
    const auto out = regulatory::simulate(model, usp, 60);
    CHECK((out.back() - Vec3(2100.0, 70.0, 10.0)).norm() < 1e-6);
}
