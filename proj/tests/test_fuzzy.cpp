#include <vector>

#include <doctest.h>

#include "sagtwin/artifacts.hpp"
#include "sagtwin/fuzzy.hpp"

using namespace sagtwin;
using expert::TriangularMF;

namespace {

PlantRecord record_at(double y1, double y2, double u1 = 2000.0, double u2 = 72.0,
                      double u3 = 9.5) {
    PlantRecord rec;
    rec.y = Vec2(y1, y2);
    rec.u = Vec3(u1, u2, u3);
    rec.u_sp = rec.u;
    return rec;
}

// Flat history of `n` identical records (zero slopes).
std::vector<PlantRecord> flat_history(double y1, double y2, int n = 4) {
    return std::vector<PlantRecord>(static_cast<std::size_t>(n), record_at(y1, y2));
}

}  // namespace

TEST_CASE("triangular membership shape") {
    TriangularMF mf{"mid", 0.0, 5.0, 10.0, false, -1};
    CHECK(mf.membership(5.0) == doctest::Approx(1.0));
    CHECK(mf.membership(2.5) == doctest::Approx(0.5));
    CHECK(mf.membership(7.5) == doctest::Approx(0.5));
    CHECK(mf.membership(11.0) == 0.0);
    CHECK(mf.membership(-0.1) == 0.0);
    CHECK(mf.membership(0.0) == 0.0);
}

TEST_CASE("degenerate breakpoints behave as one-sided ramps") {
    TriangularMF left{"edge", 0.0, 0.0, 10.0, false, -1};
    CHECK(left.membership(0.0) == doctest::Approx(1.0));
    CHECK(left.membership(5.0) == doctest::Approx(0.5));
    TriangularMF right{"edge", 0.0, 10.0, 10.0, false, -1};
    CHECK(right.membership(10.0) == doctest::Approx(1.0));
    CHECK(right.membership(5.0) == doctest::Approx(0.5));
}

TEST_CASE("fuzzify resolves limit-relative breakpoints") {
    std::vector<TriangularMF> mfs{
        {"near-limit", -100.0, 0.0, 100.0, true, 0},
    };
    const Vec2 y_lim(5150.0, 13500.0);
    const auto at_limit = expert::fuzzify(5150.0, mfs, y_lim);
    REQUIRE(at_limit.size() == 1);
    CHECK(at_limit[0].first == "near-limit");
    CHECK(at_limit[0].second == doctest::Approx(1.0));
    const auto below = expert::fuzzify(5100.0, mfs, y_lim);
    CHECK(below[0].second == doctest::Approx(0.5));
}

TEST_CASE("slope examples") {
    CHECK(expert::slope(std::vector<double>{1, 2, 3, 4}) == doctest::Approx(1.0));
    CHECK(expert::slope(std::vector<double>{3, 3, 3, 3}) == doctest::Approx(0.0));
    CHECK(expert::slope(std::vector<double>{0, 1, 0, 1}) == doctest::Approx(0.2));
}

TEST_CASE("infer_state: criticality dominates degree") {
    expert::FuzzyRuleBase rb;
    rb.variables.push_back(
        {"y1", {{"high", 0.0, 1.0, 2.0, false, -1}, {"ok", 0.0, 1.0, 2.0, false, -1}}});
    rb.states.push_back({"overload", 1, {{"y1", "high"}}, Vec3(-10, 0, 0)});
    rb.states.push_back({"normal", 5, {}, Vec3(2, 0, 0)});
    rb.rate_limit = Vec3(50, 1, 0.5);
    rb.validate();

    expert::FuzzifiedInputs inputs;
    inputs.degrees.push_back({"y1", {{"high", 0.6}, {"ok", 0.9}}});
    const auto [state, degree] = expert::infer_state(rb, inputs);
    REQUIRE(state != nullptr);
    CHECK(state->name == "overload");
    CHECK(degree == doctest::Approx(0.6));
}

TEST_CASE("infer_state: equal rank broken by higher degree") {
    expert::FuzzyRuleBase rb;
    rb.variables.push_back(
        {"y1", {{"a", 0.0, 1.0, 2.0, false, -1}, {"b", 0.0, 1.0, 2.0, false, -1}}});
    rb.states.push_back({"s1", 1, {{"y1", "a"}}, Vec3::Zero()});
    rb.states.push_back({"s2", 1, {{"y1", "b"}}, Vec3::Zero()});
    rb.states.push_back({"normal", 9, {}, Vec3::Zero()});

    expert::FuzzifiedInputs inputs;
    inputs.degrees.push_back({"y1", {{"a", 0.4}, {"b", 0.7}}});
    const auto [state, degree] = expert::infer_state(rb, inputs);
    CHECK(state->name == "s2");
    CHECK(degree == doctest::Approx(0.7));
}

TEST_CASE("infer_state: below-threshold states fall through to the default") {
    expert::FuzzyRuleBase rb;
    rb.activation_threshold = 0.3;
    rb.variables.push_back({"y1", {{"high", 0.0, 1.0, 2.0, false, -1}}});
    rb.states.push_back({"overload", 1, {{"y1", "high"}}, Vec3(-10, 0, 0)});
    rb.states.push_back({"normal", 5, {}, Vec3(2, 0, 0)});

    expert::FuzzifiedInputs inputs;
    inputs.degrees.push_back({"y1", {{"high", 0.2}}});
    const auto [state, degree] = expert::infer_state(rb, inputs);
    CHECK(state->name == "normal");
    CHECK(degree == doctest::Approx(1.0));
}

TEST_CASE("defuzzify: zero-order Sugeno scaling and clamping") {
    expert::FuzzyRuleBase rb;
    rb.rate_limit = Vec3(50.0, 1.0, 0.5);
    expert::OperatingState st{"s", 1, {}, Vec3(-50.0, 0.0, 0.2)};

    auto cmd = expert::defuzzify(st, 1.0, rb);
    CHECK((cmd.delta_u_sp - Vec3(-50.0, 0.0, 0.2)).norm() < 1e-12);
    cmd = expert::defuzzify(st, 0.5, rb);
    CHECK((cmd.delta_u_sp - Vec3(-25.0, 0.0, 0.1)).norm() < 1e-12);

    expert::OperatingState big{"b", 1, {}, Vec3(-500.0, 3.0, -2.0)};
    cmd = expert::defuzzify(big, 1.0, rb);
    CHECK(cmd.delta_u_sp[0] == doctest::Approx(-50.0));
    CHECK(cmd.delta_u_sp[1] == doctest::Approx(1.0));
    CHECK(cmd.delta_u_sp[2] == doctest::Approx(-0.5));
}

TEST_CASE("default rulebase validates and covers every input") {
    const auto rb = expert::default_rulebase();
    rb.validate();
    // Any y1 across a wide range must activate some state.
    const Vec2 y_lim(5150.0, 13500.0);
    for (double y1 = 3000.0; y1 <= 7000.0; y1 += 50.0) {
        const auto cmd = expert::step(rb, flat_history(y1, 12000.0), y_lim);
        CHECK(!cmd.state_name.empty());
    }
}

TEST_CASE("step: far below limit increases feed, above limit decreases") {
    const auto rb = expert::default_rulebase();
    const Vec2 y_lim(5150.0, 13500.0);

    const auto low = expert::step(rb, flat_history(4400.0, 12000.0), y_lim);
    CHECK(low.delta_u_sp[0] > 0.0);

    const auto high = expert::step(rb, flat_history(5300.0, 12000.0), y_lim);
    CHECK(high.delta_u_sp[0] < 0.0);
    CHECK(high.state_name == "critical-overload");
}

TEST_CASE("step: power overload cuts feed even at comfortable pressure") {
    const auto rb = expert::default_rulebase();
    const Vec2 y_lim(5150.0, 13500.0);
    const auto cmd = expert::step(rb, flat_history(5000.0, 13700.0), y_lim);
    CHECK(cmd.state_name == "power-overload");
    CHECK(cmd.delta_u_sp[0] < 0.0);
}

TEST_CASE("monotone limit response over a grid sweep") {
    const auto rb = expert::default_rulebase();
    const Vec2 y_lim(5150.0, 13500.0);
    double previous = std::numeric_limits<double>::infinity();
    for (double y1 = y_lim[0] - 300.0; y1 <= y_lim[0] + 90.0; y1 += 3.0) {
        const auto cmd = expert::step(rb, flat_history(y1, 12000.0), y_lim);
        CHECK(cmd.delta_u_sp[0] <= previous + 1e-9);
        previous = cmd.delta_u_sp[0];
    }
}

TEST_CASE("scale coupling: shifting limit and measurement together is a no-op") {
    const auto rb = expert::default_rulebase();
    for (double delta : {-200.0, 0.0, 150.0}) {
        const Vec2 lim_a(5150.0, 13500.0);
        const Vec2 lim_b(5150.0 + delta, 13500.0 + delta);
        const auto a = expert::step(rb, flat_history(5080.0, 12900.0), lim_a);
        const auto b =
            expert::step(rb, flat_history(5080.0 + delta, 12900.0 + delta), lim_b);
        CHECK(a.state_name == b.state_name);
        CHECK((a.delta_u_sp - b.delta_u_sp).norm() < 1e-9);
    }
}

TEST_CASE("output deltas always within rate limits") {
    const auto rb = expert::default_rulebase();
    const Vec2 y_lim(5150.0, 13500.0);
    for (double y1 = 3000.0; y1 <= 7500.0; y1 += 137.0)
        for (double y2 = 9000.0; y2 <= 16000.0; y2 += 911.0) {
            const auto cmd = expert::step(rb, flat_history(y1, y2), y_lim);
            for (int j = 0; j < 3; ++j)
                CHECK(std::abs(cmd.delta_u_sp[j]) <= rb.rate_limit[j] + 1e-12);
        }
}

TEST_CASE("rising pressure near the limit triggers the trend rule") {
    const auto rb = expert::default_rulebase();
    const Vec2 y_lim(5150.0, 13500.0);
    std::vector<PlantRecord> rising;
    for (int i = 0; i < 4; ++i)
        rising.push_back(record_at(5000.0 + 25.0 * i, 12000.0));
    const auto cmd = expert::step(rb, rising, y_lim);
    CHECK(cmd.state_name == "trending-overload");
    CHECK(cmd.delta_u_sp[0] < 0.0);
}

TEST_CASE("rulebase validation failures") {
    expert::FuzzyRuleBase dup;
    dup.variables.push_back({"y1", {{"x", 0, 1, 2, false, -1}}});
    dup.states.push_back({"a", 1, {}, Vec3::Zero()});
    dup.states.push_back({"b", 1, {}, Vec3::Zero()});
    CHECK_THROWS_AS(dup.validate(), Error);

    expert::FuzzyRuleBase orphan;
    orphan.variables.push_back({"y1", {{"x", 0, 1, 2, false, -1}}});
    orphan.states.push_back({"a", 1, {{"y1", "missing"}}, Vec3::Zero()});
    orphan.states.push_back({"normal", 2, {}, Vec3::Zero()});
    CHECK_THROWS_AS(orphan.validate(), Error);

    expert::FuzzyRuleBase no_default;
    no_default.variables.push_back({"y1", {{"x", 0, 1, 2, false, -1}}});
    no_default.states.push_back({"a", 1, {{"y1", "x"}}, Vec3::Zero()});
    CHECK_THROWS_AS(no_default.validate(), Error);
}

TEST_CASE("rulebase artifact round-trip") {
    const auto rb = expert::default_rulebase();
    const std::string path = "test_rulebase.json";
    artifacts::save_rulebase(path, rb);
    const auto back = artifacts::load_rulebase(path);
    CHECK(back.states.size() == rb.states.size());
    CHECK(back.variables.size() == rb.variables.size());
    CHECK((back.rate_limit - rb.rate_limit).norm() == 0.0);
    CHECK(back.activation_threshold == rb.activation_threshold);
    // Behavioral equivalence over a sweep.
    const Vec2 y_lim(5150.0, 13500.0);
    for (double y1 = 4700.0; y1 <= 5400.0; y1 += 37.0) {
        const auto a = expert::step(rb, flat_history(y1, 12500.0), y_lim);
        const auto b = expert::step(back, flat_history(y1, 12500.0), y_lim);
        CHECK(a.state_name == b.state_name);
        CHECK((a.delta_u_sp - b.delta_u_sp).norm() == 0.0);
    }
    std::remove(path.c_str());
}
