#ifndef SAGTWIN_TWIN_HPP
#define SAGTWIN_TWIN_HPP

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "sagtwin/fuzzy.hpp"
#include "sagtwin/narx.hpp"
#include "sagtwin/statespace.hpp"
#include "sagtwin/types.hpp"

namespace sagtwin::twin {

struct HorizonConfig {
    int N = 5;  // default 2.5 minutes at 30 s sampling
    double sample_period = 30.0;
};

/// Feasibility boxes for CVs and MVs; unbounded by default.
struct FeasibleBoxes {
    Vec2 y_min = Vec2::Constant(-std::numeric_limits<double>::infinity());
    Vec2 y_max = Vec2::Constant(std::numeric_limits<double>::infinity());
    Vec3 u_min = Vec3::Constant(-std::numeric_limits<double>::infinity());
    Vec3 u_max = Vec3::Constant(std::numeric_limits<double>::infinity());
};

struct Bounds {
    std::vector<double> y1_lim_grid;
    std::vector<double> y2_lim_grid;
    FeasibleBoxes boxes;
};

struct TwinPrediction {
    std::vector<Vec2> y_hat;     // N+1 entries, instants k..k+N
    std::vector<Vec3> u_hat;     // N+1
    std::vector<Vec3> u_sp_hat;  // N+1
    std::vector<bool> feasible;  // per step, Y/U box membership
    bool all_feasible() const;
};

struct Components {
    expert::FuzzyRuleBase rulebase;
    regulatory::StateSpaceModel reg;
    narx::NarxModel sag;
};

/// Closed-loop N-step prediction: per step the expert emulator proposes a
/// setpoint change, the regulatory model advances the MVs, and the NARX
/// model predicts the CVs; predictions are fed back into the next step's
/// windows. The regulatory model's (x0, e) are expected to have been
/// re-estimated at instant k.
TwinPrediction rollout_closed_loop(const Components& twin, const SampledSeries& history,
                                   const Vec2& y_lim, const HorizonConfig& horizon,
                                   const FeasibleBoxes& boxes = {});

struct ScoreRow {
    Vec2 y_lim;
    double score;
    bool feasible;
};

struct SupervisorResult {
    Vec2 best_y_lim;
    double best_score;
    std::vector<ScoreRow> table;
};

struct AllInfeasibleWithTable : AllInfeasible {
    std::vector<ScoreRow> table;
    AllInfeasibleWithTable(const std::string& msg, std::vector<ScoreRow> t)
        : AllInfeasible(msg), table(std::move(t)) {}
};

using Objective = std::function<double(const TwinPrediction&)>;

/// Demo objective: negative mean predicted tonnage (throughput proxy).
double negative_mean_tonnage(const TwinPrediction& pred);

/// Exhaustive evaluation of the candidate limit grid (y1 outer, y2 inner);
/// candidates with any infeasible step are discarded, ties broken by grid
/// order.
SupervisorResult evaluate_supervisor(const Components& twin, const SampledSeries& history,
                                     const Bounds& bounds, const Objective& objective,
                                     const HorizonConfig& horizon);

// ---- error reporting --------------------------------------------------------

/// pairs[h] holds the (predicted, measured) CV pairs collected at horizon h.
using HorizonPairs = std::vector<std::vector<std::pair<Vec2, Vec2>>>;

struct ErrorStats {
    int horizon;
    int cv;
    double mean;
    double std_dev;
    double p005;  // central 99% interval of the proportional error
    double p995;
    double acf1;
    std::vector<double> bin_edges;  // 42 edges, 41 bins spanning mean +- 5 std
    std::vector<int> bin_counts;
};

std::vector<ErrorStats> error_report(const HorizonPairs& pairs,
                                     std::size_t min_pairs_per_horizon = 30);

void write_report_csv(const std::string& path, const std::vector<ErrorStats>& stats);
void write_histogram_csv(const std::string& path, const std::vector<ErrorStats>& stats);

}  // namespace sagtwin::twin

#endif  // SAGTWIN_TWIN_HPP
