#include "sagtwin/narx.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sagtwin::narx {

void NarxModel::check_shapes() const {
    const int d = input_dim();
    if (W_in.rows() != hidden_width || W_in.cols() != d ||
        b_hidden.size() != hidden_width || W_out.rows() != kNumCV ||
        W_out.cols() != hidden_width)
        throw ShapeMismatch("NarxModel: inconsistent weight dimensions");
}

namespace {

// Scaled regressor layout: y lags 1..m, then u lags 0..n-1, newest first.
Vec build_input(const NarxModel& model, const RegressorWindow& window) {
    if (static_cast<int>(window.past_y.size()) != model.m ||
        static_cast<int>(window.past_u.size()) != model.n)
        throw ShapeMismatch("forward: regressor window does not match model lags");
    Vec z(model.input_dim());
    int idx = 0;
    for (const auto& y : window.past_y) {
        z.segment<2>(idx) = model.scaler.scale_y(y);
        idx += 2;
    }
    for (const auto& u : window.past_u) {
        z.segment<3>(idx) = model.scaler.scale_u(u);
        idx += 3;
    }
    return z;
}

Vec2 forward_scaled(const NarxModel& model, const Vec& z) {
    const Vec h = ((model.W_in * z + model.b_hidden).array().tanh()).matrix();
    return Vec2(model.W_out * h + model.b_out);
}

struct Dataset {
    Mat inputs;   // d x N, scaled
    Mat targets;  // 2 x N, scaled
};

Scaler fit_scaler(const SampledSeries& data) {
    Scaler s;
    const double n = static_cast<double>(data.size());
    Vec2 ym = Vec2::Zero();
    Vec3 um = Vec3::Zero();
    for (const auto& r : data.records) {
        ym += r.y;
        um += r.u;
    }
    ym /= n;
    um /= n;
    Vec2 yv = Vec2::Zero();
    Vec3 uv = Vec3::Zero();
    for (const auto& r : data.records) {
        yv += (r.y - ym).cwiseProduct(r.y - ym);
        uv += (r.u - um).cwiseProduct(r.u - um);
    }
    yv /= n;
    uv /= n;
    s.y_mean = ym;
    s.u_mean = um;
    for (int c = 0; c < kNumCV; ++c) s.y_std[c] = yv[c] > 1e-24 ? std::sqrt(yv[c]) : 1.0;
    for (int c = 0; c < kNumMV; ++c) s.u_std[c] = uv[c] > 1e-24 ? std::sqrt(uv[c]) : 1.0;
    return s;
}

Dataset build_dataset(const SampledSeries& data, int m, int n, const Scaler& scaler) {
    const int start = std::max(m, n - 1);
    const int count = static_cast<int>(data.size()) - start;
    if (count <= 0) throw WindowTooShort("narx: series shorter than the lag burn-in");
    Dataset ds;
    ds.inputs = Mat(2 * m + 3 * n, count);
    ds.targets = Mat(2, count);
    for (int s = 0; s < count; ++s) {
        const int k = start + s;
        int idx = 0;
        for (int i = 1; i <= m; ++i) {
            ds.inputs.col(s).segment<2>(idx) =
                scaler.scale_y(data[static_cast<std::size_t>(k - i)].y);
            idx += 2;
        }
        for (int i = 0; i < n; ++i) {
            ds.inputs.col(s).segment<3>(idx) =
                scaler.scale_u(data[static_cast<std::size_t>(k - i)].u);
            idx += 3;
        }
        ds.targets.col(s) = scaler.scale_y(data[static_cast<std::size_t>(k)].y);
    }
    return ds;
}

double dataset_squared_cost(const NarxModel& model, const Dataset& ds) {
    double cost = 0.0;
    for (int s = 0; s < ds.inputs.cols(); ++s) {
        const Vec2 r = Vec2(ds.targets.col(s)) - forward_scaled(model, ds.inputs.col(s));
        cost += r.squaredNorm();
    }
    return cost;
}

// Accumulates J^T J and J^T r for the one-step residuals r = y - y_hat,
// where J = d y_hat / d theta.
void accumulate_normal_equations(const NarxModel& model, const Dataset& ds, Mat& jtj,
                                 Vec& jtr, double& cost) {
    const int h = model.hidden_width;
    const int d = model.input_dim();
    const int n_params = h * d + h + kNumCV * h + kNumCV;
    jtj = Mat::Zero(n_params, n_params);
    jtr = Vec::Zero(n_params);
    cost = 0.0;
    Mat jac(kNumCV, n_params);
    for (int s = 0; s < ds.inputs.cols(); ++s) {
        const Vec z = ds.inputs.col(s);
        const Vec act = ((model.W_in * z + model.b_hidden).array().tanh()).matrix();
        const Vec dact = (1.0 - act.array().square()).matrix();
        const Vec2 y_hat = Vec2(model.W_out * act + model.b_out);
        const Vec2 r = Vec2(ds.targets.col(s)) - y_hat;
        cost += r.squaredNorm();

        jac.setZero();
        for (int c = 0; c < kNumCV; ++c) {
            for (int j = 0; j < h; ++j) {
                const double chain = model.W_out(c, j) * dact[j];
                jac.row(c).segment(j * d, d) = chain * z.transpose();  // W_in row j
                jac(c, h * d + j) = chain;                             // b_hidden j
                jac(c, h * d + h + c * h + j) = act[j];                // W_out(c, j)
            }
            jac(c, h * d + h + kNumCV * h + c) = 1.0;                  // b_out c
        }
        jtj.noalias() += jac.transpose() * jac;
        jtr.noalias() += jac.transpose() * Eigen::Vector2d(r);
    }
}

double levenberg_fit(NarxModel& model, const Dataset& ds, const TrainConfig& cfg) {
    Vec theta = pack_params(model);
    Mat jtj;
    Vec jtr;
    double cost;
    accumulate_normal_equations(model, ds, jtj, jtr, cost);
    double lambda = 1e-2;

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        if (cost < cfg.tolerance) break;
        bool improved = false;
        for (int attempt = 0; attempt < 14; ++attempt) {
            Mat damped = jtj;
            damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
            const Vec step = damped.ldlt().solve(jtr);
            NarxModel trial = model;
            unpack_params(trial, theta + step);
            const double trial_cost = dataset_squared_cost(trial, ds);
            if (std::isfinite(trial_cost) && trial_cost < cost) {
                const double rel = (cost - trial_cost) / std::max(cost, 1e-300);
                theta += step;
                model = trial;
                lambda = std::max(lambda * 0.3, 1e-13);
                improved = true;
                accumulate_normal_equations(model, ds, jtj, jtr, cost);
                if (rel < 1e-13) return cost;
                break;
            }
            lambda *= 6.0;
        }
        if (!improved) break;
    }
    return cost;
}

}  // namespace

Vec pack_params(const NarxModel& model) {
    const int h = model.hidden_width;
    const int d = model.input_dim();
    Vec theta(h * d + h + kNumCV * h + kNumCV);
    int idx = 0;
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < d; ++i) theta[idx++] = model.W_in(j, i);
    for (int j = 0; j < h; ++j) theta[idx++] = model.b_hidden[j];
    for (int c = 0; c < kNumCV; ++c)
        for (int j = 0; j < h; ++j) theta[idx++] = model.W_out(c, j);
    for (int c = 0; c < kNumCV; ++c) theta[idx++] = model.b_out[c];
    return theta;
}

void unpack_params(NarxModel& model, const Vec& theta) {
    const int h = model.hidden_width;
    const int d = model.input_dim();
    int idx = 0;
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < d; ++i) model.W_in(j, i) = theta[idx++];
    for (int j = 0; j < h; ++j) model.b_hidden[j] = theta[idx++];
    for (int c = 0; c < kNumCV; ++c)
        for (int j = 0; j < h; ++j) model.W_out(c, j) = theta[idx++];
    for (int c = 0; c < kNumCV; ++c) model.b_out[c] = theta[idx++];
}

Vec2 forward(const NarxModel& model, const RegressorWindow& window) {
    model.check_shapes();
    const Vec z = build_input(model, window);
    return model.scaler.unscale_y(forward_scaled(model, z));
}

std::vector<Vec2> rollout(const NarxModel& model, const SampledSeries& history,
                          const std::vector<Vec3>& future_u, int N) {
    model.check_shapes();
    const std::size_t hist = history.size();
    if (static_cast<int>(hist) < model.m || static_cast<int>(hist) < model.n - 1)
        throw WindowTooShort("rollout: history shorter than the model lags");
    if (static_cast<int>(future_u.size()) < N + 1)
        throw ShapeMismatch("rollout: future MV trajectory shorter than N+1");

    RegressorWindow window;
    for (int i = 1; i <= model.m; ++i) window.past_y.push_back(history[hist - i].y);
    window.past_u.push_back(future_u[0]);
    for (int i = 1; i < model.n; ++i) window.past_u.push_back(history[hist - i].u);

    std::vector<Vec2> predictions;
    predictions.reserve(static_cast<std::size_t>(N) + 1);
    for (int i = 0; i <= N; ++i) {
        const Vec2 y_hat = forward(model, window);
        predictions.push_back(y_hat);
        if (i == N) break;
        window.past_y.pop_back();
        window.past_y.push_front(y_hat);
        window.past_u.pop_back();
        window.past_u.push_front(future_u[static_cast<std::size_t>(i) + 1]);
    }
    return predictions;
}

double training_cost(const NarxModel& model, const SampledSeries& data) {
    const Dataset ds = build_dataset(data, model.m, model.n, model.scaler);
    double cost = 0.0;
    for (int s = 0; s < ds.inputs.cols(); ++s)
        cost += (Vec2(ds.targets.col(s)) - forward_scaled(model, ds.inputs.col(s))).norm();
    return cost;
}

double squared_cost(const NarxModel& model, const SampledSeries& data) {
    const Dataset ds = build_dataset(data, model.m, model.n, model.scaler);
    return dataset_squared_cost(model, ds);
}

Vec squared_cost_gradient(const NarxModel& model, const SampledSeries& data) {
    const Dataset ds = build_dataset(data, model.m, model.n, model.scaler);
    Mat jtj;
    Vec jtr;
    double cost;
    accumulate_normal_equations(model, ds, jtj, jtr, cost);
    return -2.0 * jtr;  // d/dtheta sum ||y - y_hat||^2
}

NarxModel train(const SampledSeries& train_data, int m, int n, int hidden_width,
                const TrainConfig& config) {
    if (m < 1 || n < 1 || hidden_width < 1)
        throw ShapeMismatch("train: lags and width must be positive");
    const int burn_in = std::max(m, n);
    if (static_cast<int>(train_data.size()) <= 10 * (2 * m + 3 * n) + burn_in)
        throw WindowTooShort("train: series too short for the requested structure");

    NarxModel proto;
    proto.m = m;
    proto.n = n;
    proto.hidden_width = hidden_width;
    proto.scaler = fit_scaler(train_data);
    proto.seed = config.seed;
    const int d = proto.input_dim();

    const Dataset ds = build_dataset(train_data, m, n, proto.scaler);
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);

    NarxModel best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(1, config.restarts); ++r) {
        NarxModel candidate = proto;
        candidate.W_in = Mat::Zero(hidden_width, d);
        candidate.b_hidden = Vec::Zero(hidden_width);
        candidate.W_out = Mat::Zero(kNumCV, hidden_width);
        candidate.b_out = Vec2::Zero();
        for (int j = 0; j < hidden_width; ++j) {
            for (int i = 0; i < d; ++i) candidate.W_in(j, i) = unif(rng);
            candidate.b_hidden[j] = unif(rng);
            for (int c = 0; c < kNumCV; ++c) candidate.W_out(c, j) = unif(rng);
        }
        const double cost = levenberg_fit(candidate, ds, config);
        if (std::isfinite(cost) && cost < best_cost) {
            best_cost = cost;
            best = candidate;
        }
    }
    if (!std::isfinite(best_cost))
        throw TrainingDiverged("train: all restarts diverged");
    return best;
}

std::tuple<int, int, int> select_structure(const SampledSeries& train_data,
                                           const std::vector<int>& candidate_lags,
                                           const std::vector<int>& candidate_widths,
                                           double improvement_threshold,
                                           const TrainConfig& config) {
    if (candidate_lags.empty() || candidate_widths.empty())
        throw TrainingDiverged("select_structure: empty candidate lists");

    // Hold out the last quarter for validation.
    const std::size_t split = train_data.size() - train_data.size() / 4;
    SampledSeries fit, val;
    fit.sample_period = val.sample_period = train_data.sample_period;
    fit.records.assign(train_data.records.begin(),
                       train_data.records.begin() + static_cast<long>(split));
    val.records.assign(train_data.records.begin() + static_cast<long>(split),
                       train_data.records.end());

    std::vector<std::pair<int, int>> combos;
    for (int lags : candidate_lags)
        for (int width : candidate_widths) combos.emplace_back(lags, width);
    std::sort(combos.begin(), combos.end());

    std::vector<double> costs;
    costs.reserve(combos.size());
    for (const auto& [lags, width] : combos) {
        const NarxModel model = train(fit, lags, lags, width, config);
        const double per_sample =
            training_cost(model, val) /
            static_cast<double>(val.size() - static_cast<std::size_t>(
                                                 std::max(lags, lags - 1)));
        costs.push_back(per_sample);
    }

    const double abs_tol = 1e-9;
    for (std::size_t i = 0; i + 1 < combos.size(); ++i) {
        double best_larger = costs[i + 1];
        for (std::size_t j = i + 2; j < costs.size(); ++j)
            best_larger = std::min(best_larger, costs[j]);
        if (costs[i] <= best_larger * (1.0 + improvement_threshold) + abs_tol)
            return {combos[i].first, combos[i].first, combos[i].second};
    }
    return {combos.back().first, combos.back().first, combos.back().second};
}

}  // namespace sagtwin::narx
