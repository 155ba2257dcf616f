#include "sagtwin/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sagtwin/stats.hpp"

namespace sagtwin::expert {

double TriangularMF::membership(double x) const {
    if (x <= a || x >= c) return x == b ? 1.0 : 0.0;
    if (x == b) return 1.0;
    if (x < b) return (x - a) / (b - a);
    return (c - x) / (c - b);
}

void FuzzyRuleBase::validate() const {
    std::set<int> ranks;
    bool has_default = false;
    for (const auto& state : states) {
        if (!ranks.insert(state.rank).second)
            throw Error("rulebase: duplicate criticality rank " + std::to_string(state.rank));
        if (state.when.empty()) has_default = true;
        for (const auto& [var, label] : state.when) {
            const auto it = std::find_if(variables.begin(), variables.end(),
                                         [&](const FuzzyVariable& v) { return v.name == var; });
            if (it == variables.end())
                throw Error("rulebase: state '" + state.name + "' references unknown variable '" +
                            var + "'");
            const bool found = std::any_of(it->mfs.begin(), it->mfs.end(),
                                           [&](const TriangularMF& mf) { return mf.label == label; });
            if (!found)
                throw Error("rulebase: state '" + state.name + "' references unknown label '" +
                            label + "' of '" + var + "'");
        }
    }
    if (!has_default)
        throw Error("rulebase: no unconditional default state; coverage not guaranteed");
}

std::vector<std::pair<std::string, double>> fuzzify(double value,
                                                    std::span<const TriangularMF> mfs,
                                                    const Vec2& y_lim) {
    std::vector<std::pair<std::string, double>> out;
    out.reserve(mfs.size());
    for (const auto& mf : mfs) {
        double x = value;
        if (mf.relative_to_limit) {
            if (mf.limit_cv < 0 || mf.limit_cv >= kNumCV)
                throw Error("fuzzify: relative MF '" + mf.label + "' has no valid limit CV");
            x -= y_lim[mf.limit_cv];
        }
        out.emplace_back(mf.label, mf.membership(x));
    }
    return out;
}

double slope(std::span<const double> series) { return stats::slope(series); }

double FuzzifiedInputs::lookup(const std::string& variable, const std::string& label) const {
    for (const auto& [var, labels] : degrees) {
        if (var != variable) continue;
        for (const auto& [lbl, deg] : labels)
            if (lbl == label) return deg;
    }
    return 0.0;
}

std::pair<const OperatingState*, double> infer_state(const FuzzyRuleBase& rulebase,
                                                     const FuzzifiedInputs& inputs) {
    const OperatingState* best = nullptr;
    double best_degree = 0.0;
    for (const auto& state : rulebase.states) {
        double degree = 1.0;
        for (const auto& [var, label] : state.when)
            degree = std::min(degree, inputs.lookup(var, label));
        if (degree <= rulebase.activation_threshold) continue;
        if (best == nullptr || state.rank < best->rank ||
            (state.rank == best->rank && degree > best_degree)) {
            best = &state;
            best_degree = degree;
        }
    }
    if (best == nullptr)
        throw Error("infer_state: no state active; rulebase lacks default coverage");
    return {best, best_degree};
}

SetpointCommand defuzzify(const OperatingState& state, double degree,
                          const FuzzyRuleBase& rulebase) {
    SetpointCommand cmd;
    cmd.state_name = state.name;
    for (int j = 0; j < kNumMV; ++j) {
        const double raw = degree * state.consequent[j];
        cmd.delta_u_sp[j] = std::clamp(raw, -rulebase.rate_limit[j], rulebase.rate_limit[j]);
    }
    return cmd;
}

namespace {

double variable_value(const std::string& name, const std::vector<PlantRecord>& recent,
                      int slope_window) {
    const bool is_slope = name.size() > 6 && name.substr(name.size() - 6) == "_slope";
    const std::string base = is_slope ? name.substr(0, name.size() - 6) : name;

    auto channel = [&](const PlantRecord& r) -> double {
        if (base == "y1") return r.y[0];
        if (base == "y2") return r.y[1];
        if (base == "u1") return r.u[0];
        if (base == "u2") return r.u[1];
        if (base == "u3") return r.u[2];
        throw Error("rulebase: unknown variable '" + name + "'");
    };

    if (!is_slope) return channel(recent.back());

    std::vector<double> window;
    window.reserve(static_cast<std::size_t>(slope_window));
    for (std::size_t i = recent.size() - static_cast<std::size_t>(slope_window);
         i < recent.size(); ++i)
        window.push_back(channel(recent[i]));
    return stats::slope(window);
}

}  // namespace

SetpointCommand step(const FuzzyRuleBase& rulebase, const std::vector<PlantRecord>& recent,
                     const Vec2& y_lim) {
    if (static_cast<int>(recent.size()) < rulebase.slope_window)
        throw WindowTooShort("expert step: history shorter than the slope window");

    FuzzifiedInputs inputs;
    for (const auto& var : rulebase.variables) {
        const double value = variable_value(var.name, recent, rulebase.slope_window);
        inputs.degrees.emplace_back(var.name, fuzzify(value, var.mfs, y_lim));
    }
    const auto [state, degree] = infer_state(rulebase, inputs);
    return defuzzify(*state, degree, rulebase);
}

FuzzyRuleBase default_rulebase() {
    FuzzyRuleBase rb;
    rb.rate_limit = Vec3(50.0, 1.0, 0.5);
    rb.activation_threshold = 0.3;
    rb.slope_window = 4;

    auto rel = [](const std::string& label, double a, double b, double c, int cv) {
        TriangularMF mf{label, a, b, c, true, cv};
        return mf;
    };

    // Pressure breakpoints are offsets from y1^LIM; the handoff points are
    // matched so the degree-scaled feed delta is non-increasing in y1 over
    // the [-300, +90] band around the limit.
    FuzzyVariable y1{"y1",
                     {rel("very-low", -1000.0, -300.0, -180.0, 0),
                      rel("low", -1000.0, -240.0, -180.0, 0),
                      rel("ok", -240.0, -90.0, 30.0, 0),
                      rel("high", 0.0, 60.0, 1000.0, 0),
                      rel("very-high", 30.0, 90.0, 1000.0, 0)}};
    FuzzyVariable y1_slope{"y1_slope",
                           {{"falling", -1e6, -12.0, -3.0},
                            {"flat", -6.0, 0.0, 6.0},
                            {"rising", 3.0, 12.0, 1e6}}};
    FuzzyVariable y2{"y2", {rel("very-high", 0.0, 150.0, 1e6, 1)}};
    rb.variables = {y1, y1_slope, y2};

    rb.states = {
        {"critical-overload", 1, {{"y1", "very-high"}}, Vec3(-40.0, 0.0, 0.3)},
        {"critical-underload", 2, {{"y1", "very-low"}}, Vec3(20.0, 0.0, -0.2)},
        {"power-overload", 3, {{"y2", "very-high"}}, Vec3(-20.0, 0.0, -0.2)},
        {"overload", 4, {{"y1", "high"}}, Vec3(-15.0, 0.0, 0.0)},
        {"trending-overload", 5, {{"y1", "ok"}, {"y1_slope", "rising"}}, Vec3(-8.0, 0.0, 0.0)},
        {"underload", 6, {{"y1", "low"}}, Vec3(10.0, 0.0, 0.0)},
        {"normal", 7, {}, Vec3(2.0, 0.0, 0.0)},
    };
    rb.validate();
    return rb;
}

}  // namespace sagtwin::expert
