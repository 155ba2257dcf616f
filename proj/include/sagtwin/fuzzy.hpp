#ifndef SAGTWIN_FUZZY_HPP
#define SAGTWIN_FUZZY_HPP

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sagtwin/types.hpp"

namespace sagtwin::expert {

/// Triangular membership function with breakpoints a <= b <= c. When
/// relative_to_limit is set the breakpoints are offsets from the current
/// operating limit of `limit_cv` (0 = pressure, 1 = power).
struct TriangularMF {
    std::string label;
    double a = 0.0, b = 0.0, c = 0.0;
    bool relative_to_limit = false;
    int limit_cv = -1;

    double membership(double x) const;
};

/// One fuzzified input: y1, y2, u1, u2, u3, or their slopes (suffix
/// "_slope").
struct FuzzyVariable {
    std::string name;
    std::vector<TriangularMF> mfs;
};

/// Operating state with a conjunction (min) of (variable, label) conditions.
/// An empty condition list activates with degree 1 (the default state).
/// Lower rank = higher criticality.
struct OperatingState {
    std::string name;
    int rank = 0;
    std::vector<std::pair<std::string, std::string>> when;
    Vec3 consequent = Vec3::Zero();  // setpoint delta per decision cycle
};

struct FuzzyRuleBase {
    std::vector<FuzzyVariable> variables;
    std::vector<OperatingState> states;
    Vec3 rate_limit = Vec3::Ones();
    double activation_threshold = 0.3;
    int slope_window = 4;

    void validate() const;  // unique ranks, declared labels, default coverage
};

struct SetpointCommand {
    Vec3 delta_u_sp = Vec3::Zero();
    std::string state_name;
};

/// Degrees of every MF of the variable at x, with limit-relative breakpoints
/// resolved against y_lim.
std::vector<std::pair<std::string, double>> fuzzify(double value,
                                                    std::span<const TriangularMF> mfs,
                                                    const Vec2& y_lim = Vec2::Zero());

/// Least-squares linear trend of the window, units per sample.
double slope(std::span<const double> series);

struct FuzzifiedInputs {
    // degree[variable][label]
    std::vector<std::pair<std::string, std::vector<std::pair<std::string, double>>>> degrees;
    double lookup(const std::string& variable, const std::string& label) const;
};

/// Most critical state whose activation degree exceeds the threshold; ties on
/// rank broken by degree, then declaration order. Returns (state, degree).
std::pair<const OperatingState*, double> infer_state(const FuzzyRuleBase& rulebase,
                                                     const FuzzifiedInputs& inputs);

/// Zero-order Sugeno: degree-scaled consequent, clamped to the rate limits.
SetpointCommand defuzzify(const OperatingState& state, double degree,
                          const FuzzyRuleBase& rulebase);

/// Full decision cycle over the recent history (oldest-first, covering at
/// least slope_window samples).
SetpointCommand step(const FuzzyRuleBase& rulebase,
                     const std::vector<PlantRecord>& recent, const Vec2& y_lim);

/// Illustrative five-state rulebase; the proprietary plant rules are not
/// public, so this stands in and is fully replaceable through the config
/// file.
FuzzyRuleBase default_rulebase();

}  // namespace sagtwin::expert

#endif  // SAGTWIN_FUZZY_HPP
