#include "sagtwin/twin.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "sagtwin/csv.hpp"
#include "sagtwin/stats.hpp"

namespace sagtwin::twin {

bool TwinPrediction::all_feasible() const {
    return std::all_of(feasible.begin(), feasible.end(), [](bool f) { return f; });
}

namespace {

bool in_box(const Vec2& y, const Vec3& u, const FeasibleBoxes& boxes) {
    for (int c = 0; c < kNumCV; ++c)
        if (y[c] < boxes.y_min[c] || y[c] > boxes.y_max[c]) return false;
    for (int c = 0; c < kNumMV; ++c)
        if (u[c] < boxes.u_min[c] || u[c] > boxes.u_max[c]) return false;
    return true;
}

}  // namespace

TwinPrediction rollout_closed_loop(const Components& twin, const SampledSeries& history,
                                   const Vec2& y_lim, const HorizonConfig& horizon,
                                   const FeasibleBoxes& boxes) {
    const auto& sag = twin.sag;
    const auto& reg = twin.reg;
    reg.check_shapes();
    sag.check_shapes();

    const int needed = std::max({sag.m, sag.n - 1, twin.rulebase.slope_window});
    if (static_cast<int>(history.size()) < needed)
        throw WindowTooShort("rollout_closed_loop: history shorter than component lags");

    // Rolling window of records seen by the expert emulator; predictions are
    // appended as synthetic records.
    std::vector<PlantRecord> recent(history.records.end() - needed, history.records.end());

    narx::RegressorWindow window;
    for (int i = 1; i <= sag.m; ++i)
        window.past_y.push_back(history[history.size() - static_cast<std::size_t>(i)].y);
    for (int i = 1; i < sag.n; ++i)
        window.past_u.push_back(history[history.size() - static_cast<std::size_t>(i)].u);

    const Mat& feedthrough = reg.tie_feedthrough_to_B ? reg.B : reg.D;
    Vec x = reg.x0;
    const Vec ke = reg.K * reg.e;
    Vec3 u_sp = history.records.back().u_sp;

    TwinPrediction pred;
    pred.y_hat.reserve(static_cast<std::size_t>(horizon.N) + 1);
    for (int i = 0; i <= horizon.N; ++i) {
        const expert::SetpointCommand cmd = expert::step(twin.rulebase, recent, y_lim);
        u_sp += cmd.delta_u_sp;

        const Vec3 usp_scaled = reg.usp_scaler.scale(u_sp);
        const Vec3 u_hat =
            reg.u_scaler.unscale(reg.C * x + feedthrough * usp_scaled + Vec(reg.e));
        x = reg.A * x + reg.B * usp_scaled + ke;

        window.past_u.push_front(u_hat);
        const Vec2 y_hat = narx::forward(sag, window);
        window.past_u.pop_back();

        pred.u_sp_hat.push_back(u_sp);
        pred.u_hat.push_back(u_hat);
        pred.y_hat.push_back(y_hat);
        pred.feasible.push_back(in_box(y_hat, u_hat, boxes));

        if (i == horizon.N) break;
        window.past_y.pop_back();
        window.past_y.push_front(y_hat);

        PlantRecord synthetic = recent.back();
        synthetic.timestamp += horizon.sample_period;
        synthetic.u = u_hat;
        synthetic.u_sp = u_sp;
        synthetic.y = y_hat;
        recent.erase(recent.begin());
        recent.push_back(synthetic);
    }
    return pred;
}

double negative_mean_tonnage(const TwinPrediction& pred) {
    double sum = 0.0;
    for (const auto& u : pred.u_hat) sum += u[0];
    return -sum / static_cast<double>(pred.u_hat.size());
}

SupervisorResult evaluate_supervisor(const Components& twin, const SampledSeries& history,
                                     const Bounds& bounds, const Objective& objective,
                                     const HorizonConfig& horizon) {
    if (bounds.y1_lim_grid.empty() || bounds.y2_lim_grid.empty())
        throw AllInfeasible("evaluate_supervisor: empty candidate grid");

    SupervisorResult result;
    bool found = false;
    for (double y1_lim : bounds.y1_lim_grid) {
        for (double y2_lim : bounds.y2_lim_grid) {
            const Vec2 y_lim(y1_lim, y2_lim);
            const TwinPrediction pred =
                rollout_closed_loop(twin, history, y_lim, horizon, bounds.boxes);
            const bool feasible = pred.all_feasible();
            const double score = objective(pred);
            result.table.push_back({y_lim, score, feasible});
            if (feasible && (!found || score < result.best_score)) {
                found = true;
                result.best_y_lim = y_lim;
                result.best_score = score;
            }
        }
    }
    if (!found)
        throw AllInfeasibleWithTable("evaluate_supervisor: every candidate infeasible",
                                     result.table);
    return result;
}

// ---- error reporting --------------------------------------------------------

namespace {

double quantile(std::vector<double> sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

std::vector<ErrorStats> error_report(const HorizonPairs& pairs,
                                     std::size_t min_pairs_per_horizon) {
    std::vector<ErrorStats> out;
    for (std::size_t h = 0; h < pairs.size(); ++h) {
        if (pairs[h].size() < min_pairs_per_horizon)
            throw InsufficientData("error_report: fewer than " +
                                   std::to_string(min_pairs_per_horizon) +
                                   " pairs at horizon " + std::to_string(h));
        for (int cv = 0; cv < kNumCV; ++cv) {
            std::vector<double> err;
            err.reserve(pairs[h].size());
            for (const auto& [predicted, measured] : pairs[h])
                err.push_back((predicted[cv] - measured[cv]) / measured[cv]);

            ErrorStats s;
            s.horizon = static_cast<int>(h);
            s.cv = cv;
            s.mean = stats::mean(err);
            s.std_dev = std::sqrt(stats::variance(err));
            s.acf1 = stats::lag1_autocorrelation(err);

            std::vector<double> sorted = err;
            std::sort(sorted.begin(), sorted.end());
            s.p005 = quantile(sorted, 0.005);
            s.p995 = quantile(sorted, 0.995);

            constexpr int kBins = 41;
            const double half_span = 5.0 * s.std_dev;
            const double lo = s.mean - half_span;
            const double width = half_span > 0.0 ? 2.0 * half_span / kBins : 1.0;
            s.bin_edges.resize(kBins + 1);
            for (int b = 0; b <= kBins; ++b)
                s.bin_edges[static_cast<std::size_t>(b)] = lo + width * b;
            s.bin_counts.assign(kBins, 0);
            for (double e : err) {
                const int b = std::clamp(
                    static_cast<int>(std::floor((e - lo) / width)), 0, kBins - 1);
                ++s.bin_counts[static_cast<std::size_t>(b)];
            }
            out.push_back(std::move(s));
        }
    }
    return out;
}

void write_report_csv(const std::string& path, const std::vector<ErrorStats>& stats) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "horizon,cv,mean,std,p005,p995,acf1\n";
    for (const auto& s : stats)
        out << s.horizon << ',' << s.cv << ',' << csv::format_double(s.mean) << ','
            << csv::format_double(s.std_dev) << ',' << csv::format_double(s.p005) << ','
            << csv::format_double(s.p995) << ',' << csv::format_double(s.acf1) << '\n';
}

void write_histogram_csv(const std::string& path, const std::vector<ErrorStats>& stats) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "horizon,cv,bin_lo,bin_hi,count\n";
    for (const auto& s : stats)
        for (std::size_t b = 0; b < s.bin_counts.size(); ++b)
            out << s.horizon << ',' << s.cv << ',' << csv::format_double(s.bin_edges[b])
                << ',' << csv::format_double(s.bin_edges[b + 1]) << ','
                << s.bin_counts[b] << '\n';
}

}  // namespace sagtwin::twin
