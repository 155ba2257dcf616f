#include "sagtwin/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sagtwin::regulatory {

ChannelScaler ChannelScaler::identity(int dims) {
    ChannelScaler s;
    s.mean = Vec::Zero(dims);
    s.std = Vec::Ones(dims);
    return s;
}

StateSpaceModel StateSpaceModel::zero(int state_dim) {
    StateSpaceModel m;
    m.order = (state_dim + 2) / 3;
    m.state_dim = state_dim;
    m.A = Mat::Zero(state_dim, state_dim);
    m.B = Mat::Zero(state_dim, kNumMV);
    m.C = Mat::Zero(kNumMV, state_dim);
    m.D = Mat::Zero(kNumMV, kNumMV);
    m.K = Mat::Zero(state_dim, kNumMV);
    m.x0 = Vec::Zero(state_dim);
    return m;
}

void StateSpaceModel::check_shapes() const {
    const int n = state_dim;
    if (A.rows() != n || A.cols() != n || B.rows() != n || B.cols() != kNumMV ||
        C.rows() != kNumMV || C.cols() != n || D.rows() != kNumMV ||
        D.cols() != kNumMV || K.rows() != n || K.cols() != kNumMV || x0.size() != n)
        throw ShapeMismatch("StateSpaceModel: inconsistent matrix dimensions");
    if (tie_feedthrough_to_B && n != kNumMV)
        throw ShapeMismatch("tie_feedthrough_to_B requires a 3-dimensional state");
}

namespace {

// Free-run recurrence in standardized space. Returns false if the state
// diverges.
bool simulate_scaled(const StateSpaceModel& m, const std::vector<Vec3>& usp_scaled,
                     int steps, std::vector<Vec3>& out) {
    const Mat& feedthrough = m.tie_feedthrough_to_B ? m.B : m.D;
    Vec x = m.x0;
    const Vec ke = m.K * m.e;
    out.resize(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        out[static_cast<std::size_t>(i)] =
            m.C * x + feedthrough * usp_scaled[static_cast<std::size_t>(i)] +
            Vec3(m.e);
        x = m.A * x + m.B * usp_scaled[static_cast<std::size_t>(i)] + ke;
        if (!x.allFinite() || x.lpNorm<Eigen::Infinity>() > 1e9) return false;
    }
    return true;
}

struct ScaledData {
    std::vector<Vec3> u;
    std::vector<Vec3> usp;
};

ScaledData scale_series(const SampledSeries& data, const ChannelScaler& u_scaler,
                        const ChannelScaler& usp_scaler) {
    ScaledData out;
    out.u.reserve(data.size());
    out.usp.reserve(data.size());
    for (const auto& rec : data.records) {
        out.u.push_back(u_scaler.scale(rec.u));
        out.usp.push_back(usp_scaler.scale(rec.u_sp));
    }
    return out;
}

ChannelScaler fit_scaler(const std::vector<Vec3>& values) {
    ChannelScaler s = ChannelScaler::identity(kNumMV);
    const double n = static_cast<double>(values.size());
    Vec3 mean = Vec3::Zero();
    for (const auto& v : values) mean += v;
    mean /= n;
    Vec3 var = Vec3::Zero();
    for (const auto& v : values) var += (v - mean).cwiseProduct(v - mean);
    var /= n;
    for (int c = 0; c < kNumMV; ++c) {
        s.mean[c] = mean[c];
        s.std[c] = var[c] > 1e-24 ? std::sqrt(var[c]) : 1.0;
    }
    return s;
}

// Parameter vector for the canonical-form model: denominator coefficients
// a_1..a_p (shared across channels), numerator matrices B_0..B_p (row-major),
// and the initial state.
struct ArxParams {
    int order;
    Vec a;               // p
    std::vector<Mat> b;  // p+1 matrices, 3x3
    Vec x0;              // 3p

    int count() const { return order + 9 * (order + 1) + 3 * order; }

    Vec pack() const {
        Vec theta(count());
        int idx = 0;
        for (int i = 0; i < order; ++i) theta[idx++] = a[i];
        for (const auto& m : b)
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) theta[idx++] = m(r, c);
        for (int i = 0; i < 3 * order; ++i) theta[idx++] = x0[i];
        return theta;
    }

    static ArxParams unpack(const Vec& theta, int order) {
        ArxParams p;
        p.order = order;
        p.a = Vec(order);
        int idx = 0;
        for (int i = 0; i < order; ++i) p.a[i] = theta[idx++];
        p.b.assign(static_cast<std::size_t>(order + 1), Mat::Zero(3, 3));
        for (auto& m : p.b)
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) m(r, c) = theta[idx++];
        p.x0 = Vec(3 * order);
        for (int i = 0; i < 3 * order; ++i) p.x0[i] = theta[idx++];
        return p;
    }
};

// Observable canonical realization of
//   u_k = sum_i a_i u_{k-i} + sum_i B_i usp_{k-i}.
StateSpaceModel realize(const ArxParams& p, const ChannelScaler& u_scaler,
                        const ChannelScaler& usp_scaler) {
    const int ord = p.order;
    StateSpaceModel m = StateSpaceModel::zero(3 * ord);
    m.order = ord;
    for (int i = 0; i < ord; ++i) {
        m.A.block<3, 3>(3 * i, 0) = p.a[i] * Mat::Identity(3, 3);
        if (i + 1 < ord) m.A.block<3, 3>(3 * i, 3 * (i + 1)) = Mat::Identity(3, 3);
        m.B.block<3, 3>(3 * i, 0) = p.b[static_cast<std::size_t>(i + 1)] + p.a[i] * p.b[0];
    }
    m.C.block<3, 3>(0, 0) = Mat::Identity(3, 3);
    m.D = p.b[0];
    m.x0 = p.x0;
    m.u_scaler = u_scaler;
    m.usp_scaler = usp_scaler;
    return m;
}

// Sum of squared simulation residuals in scaled space; huge if divergent.
double residuals_sq(const ArxParams& p, const ScaledData& data,
                    const ChannelScaler& us, const ChannelScaler& usps,
                    Vec* residuals = nullptr) {
    const StateSpaceModel m = realize(p, us, usps);
    const int n = static_cast<int>(data.u.size());
    std::vector<Vec3> pred;
    if (!simulate_scaled(m, data.usp, n, pred)) return 1e30;
    double cost = 0.0;
    if (residuals) residuals->resize(3 * n);
    for (int k = 0; k < n; ++k) {
        const Vec3 r = data.u[static_cast<std::size_t>(k)] - pred[static_cast<std::size_t>(k)];
        cost += r.squaredNorm();
        if (residuals) residuals->segment<3>(3 * k) = r;
    }
    return cost;
}

double norm_cost_from_sim(const StateSpaceModel& m, const ScaledData& data) {
    const int n = static_cast<int>(data.u.size());
    std::vector<Vec3> pred;
    if (!simulate_scaled(m, data.usp, n, pred)) return 1e30;
    double cost = 0.0;
    for (int k = 0; k < n; ++k)
        cost += (data.u[static_cast<std::size_t>(k)] - pred[static_cast<std::size_t>(k)]).norm();
    return cost;
}

// ARX least squares with a shared scalar denominator; exact for any linear
// system of order <= p on noise-free data (Cayley-Hamilton). An intercept is
// fitted alongside the dynamic terms: centering the channels introduces a
// constant the homogeneous model class cannot carry, and the intercept is
// folded back into the output scaler afterwards.
ArxParams arx_least_squares(const ScaledData& data, int order, Vec3& intercept) {
    const int p = order;
    const int n = static_cast<int>(data.u.size());
    const int q = p + 9 * (p + 1) + 3;
    const int rows = 3 * (n - p);
    Mat X = Mat::Zero(rows, q);
    Vec t(rows);
    int row = 0;
    for (int k = p; k < n; ++k) {
        for (int j = 0; j < 3; ++j) {
            t[row] = data.u[static_cast<std::size_t>(k)][j];
            for (int i = 1; i <= p; ++i)
                X(row, i - 1) = data.u[static_cast<std::size_t>(k - i)][j];
            for (int i = 0; i <= p; ++i)
                for (int c = 0; c < 3; ++c)
                    X(row, p + 9 * i + 3 * j + c) = data.usp[static_cast<std::size_t>(k - i)][c];
            X(row, q - 3 + j) = 1.0;
            ++row;
        }
    }
    const Vec theta = X.colPivHouseholderQr().solve(t);

    ArxParams out;
    out.order = p;
    out.a = theta.head(p);
    out.b.assign(static_cast<std::size_t>(p + 1), Mat::Zero(3, 3));
    for (int i = 0; i <= p; ++i)
        for (int j = 0; j < 3; ++j)
            for (int c = 0; c < 3; ++c)
                out.b[static_cast<std::size_t>(i)](j, c) = theta[p + 9 * i + 3 * j + c];
    intercept = theta.tail<3>();
    out.x0 = Vec::Zero(3 * p);
    return out;
}

// Given fixed dynamics, x0 enters the simulated output linearly; solve it in
// closed form before the nonlinear refinement.
void refit_x0(ArxParams& p, const ScaledData& data, const ChannelScaler& us,
              const ChannelScaler& usps) {
    StateSpaceModel m = realize(p, us, usps);
    const int n = static_cast<int>(data.u.size());
    const int nx = m.state_dim;
    Mat X = Mat::Zero(3 * n, nx);
    Vec t(3 * n);
    m.x0 = Vec::Zero(nx);
    std::vector<Vec3> base;
    if (!simulate_scaled(m, data.usp, n, base)) return;
    Mat obs = Mat::Identity(nx, nx);
    for (int k = 0; k < n; ++k) {
        X.block(3 * k, 0, 3, nx) = m.C * obs;
        obs = m.A * obs;
        if (!obs.allFinite()) return;
        t.segment<3>(3 * k) =
            data.u[static_cast<std::size_t>(k)] - base[static_cast<std::size_t>(k)];
    }
    const Vec x0 = X.colPivHouseholderQr().solve(t);
    if (x0.allFinite()) p.x0 = x0;
}

// Damped Gauss-Newton on the free-run residuals, forward-difference Jacobian.
double levenberg_refine(ArxParams& p, const ScaledData& data, const ChannelScaler& us,
                        const ChannelScaler& usps, const IdentifyConfig& cfg) {
    const int n_res = 3 * static_cast<int>(data.u.size());
    const int q = p.count();
    Vec theta = p.pack();
    Vec r(n_res);
    double cost = residuals_sq(ArxParams::unpack(theta, p.order), data, us, usps, &r);
    double lambda = 1e-3;

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        if (cost < cfg.tolerance || cost >= 1e30) break;
        Mat J(n_res, q);
        Vec r_pert(n_res);
        for (int j = 0; j < q; ++j) {
            const double h = 1e-7 * (1.0 + std::abs(theta[j]));
            Vec theta_j = theta;
            theta_j[j] += h;
            residuals_sq(ArxParams::unpack(theta_j, p.order), data, us, usps, &r_pert);
            J.col(j) = (r_pert - r) / h;
        }
        const Mat jtj = J.transpose() * J;
        const Vec jtr = J.transpose() * r;

        bool improved = false;
        for (int attempt = 0; attempt < 12; ++attempt) {
            Mat damped = jtj;
            damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
            const Vec step = damped.ldlt().solve(jtr);
            const Vec theta_new = theta + step;
            Vec r_new(n_res);
            const double cost_new =
                residuals_sq(ArxParams::unpack(theta_new, p.order), data, us, usps, &r_new);
            if (cost_new < cost) {
                const double rel = (cost - cost_new) / std::max(cost, 1e-300);
                theta = theta_new;
                r = r_new;
                cost = cost_new;
                lambda = std::max(lambda * 0.3, 1e-12);
                improved = true;
                if (rel < 1e-12) iter = cfg.max_iterations;  // converged
                break;
            }
            lambda *= 8.0;
        }
        if (!improved) break;
    }
    p = ArxParams::unpack(theta, p.order);
    return cost;
}

}  // namespace

std::vector<Vec3> simulate(const StateSpaceModel& model,
                           const std::vector<Vec3>& u_sp_sequence, int steps) {
    model.check_shapes();
    if (static_cast<int>(u_sp_sequence.size()) < steps)
        throw ShapeMismatch("simulate: fewer setpoints than steps");
    std::vector<Vec3> usp_scaled(u_sp_sequence.size());
    for (std::size_t i = 0; i < u_sp_sequence.size(); ++i)
        usp_scaled[i] = model.usp_scaler.scale(u_sp_sequence[i]);
    std::vector<Vec3> out;
    simulate_scaled(model, usp_scaled, steps, out);
    for (auto& v : out) v = model.u_scaler.unscale(v);
    return out;
}

double simulation_cost(const StateSpaceModel& model, const SampledSeries& data) {
    const ScaledData scaled = scale_series(data, model.u_scaler, model.usp_scaler);
    return norm_cost_from_sim(model, scaled);
}

StateSpaceModel identify(const SampledSeries& train, int order,
                         const IdentifyConfig& config) {
    if (order < 1) throw ShapeMismatch("identify: order must be >= 1");
    const int n = static_cast<int>(train.size());
    if (n <= 10 * order)
        throw IdentificationFailed("identify: training series too short", 0.0);

    ScaledData raw;
    raw.u.reserve(train.size());
    raw.usp.reserve(train.size());
    for (const auto& rec : train.records) {
        raw.u.push_back(rec.u);
        raw.usp.push_back(rec.u_sp);
    }
    ChannelScaler us = fit_scaler(raw.u);
    const ChannelScaler usps = fit_scaler(raw.usp);
    ScaledData data;
    data.u.reserve(raw.u.size());
    data.usp.reserve(raw.usp.size());
    for (std::size_t i = 0; i < raw.u.size(); ++i) {
        data.u.push_back(us.scale(raw.u[i]));
        data.usp.push_back(usps.scale(raw.usp[i]));
    }

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unif(-0.3, 0.3);

    Vec3 intercept = Vec3::Zero();
    ArxParams first = arx_least_squares(data, order, intercept);
    // Absorb the intercept into the output scaler: shifting the scaled
    // output by delta = c / (1 - sum(a_i)) leaves a homogeneous relation
    // (the denominator is scalar, so the shift cancels exactly). Near-unit
    // denominator sums (integrating dynamics) are left alone.
    const double denom = 1.0 - first.a.sum();
    if (std::abs(denom) > 1e-6 && intercept.norm() > 0.0) {
        const Vec3 delta = intercept / denom;
        us.mean += us.std.cwiseProduct(Vec(delta));
        for (std::size_t i = 0; i < raw.u.size(); ++i) data.u[i] = us.scale(raw.u[i]);
        Vec3 dummy;
        first = arx_least_squares(data, order, dummy);
    }

    ArxParams best = first;
    refit_x0(best, data, us, usps);
    double best_cost = levenberg_refine(best, data, us, usps, config);

    const double good_enough = 1e-16 * static_cast<double>(n);
    for (int s = 0; s < config.restarts && best_cost > good_enough; ++s) {
        ArxParams start;
        start.order = order;
        start.a = Vec(order);
        for (int i = 0; i < order; ++i) start.a[i] = unif(rng) / (i + 1);
        start.b.assign(static_cast<std::size_t>(order + 1), Mat::Zero(3, 3));
        for (auto& m : start.b)
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) m(r, c) = unif(rng);
        start.x0 = Vec::Zero(3 * order);
        refit_x0(start, data, us, usps);
        ArxParams candidate = start;
        const double cost = levenberg_refine(candidate, data, us, usps, config);
        if (cost < best_cost) {
            best_cost = cost;
            best = candidate;
        }
    }

    if (best_cost >= 1e30)
        throw IdentificationFailed("identify: simulation diverged for all starts",
                                   best_cost);

    StateSpaceModel model = realize(best, us, usps);
    // Fitted residuals must beat the zero-matrices baseline.
    const double zero_cost = norm_cost_from_sim(StateSpaceModel::zero(3 * order), data);
    const double fit_cost = norm_cost_from_sim(model, data);
    if (!(fit_cost <= zero_cost))
        throw IdentificationFailed("identify: no improvement over zero baseline",
                                   fit_cost);
    return model;
}

int select_order(const SampledSeries& train, const std::vector<int>& candidate_orders,
                 double improvement_threshold, const IdentifyConfig& config) {
    if (candidate_orders.empty())
        throw IdentificationFailed("select_order: no candidates", 0.0);

    std::vector<double> costs;
    costs.reserve(candidate_orders.size());
    for (int order : candidate_orders) {
        const StateSpaceModel m = identify(train, order, config);
        costs.push_back(simulation_cost(m, train));
    }

    // Costs at numerical zero are treated as ties.
    const double abs_tol = 1e-8 * static_cast<double>(train.size());
    for (std::size_t i = 0; i + 1 < candidate_orders.size(); ++i) {
        double best_larger = costs[i + 1];
        for (std::size_t j = i + 2; j < costs.size(); ++j)
            best_larger = std::min(best_larger, costs[j]);
        if (costs[i] <= best_larger * (1.0 + improvement_threshold) + abs_tol)
            return candidate_orders[i];
    }
    return candidate_orders.back();
}

std::pair<Vec, Vec3> estimate_online(const StateSpaceModel& model,
                                     const std::vector<std::pair<Vec3, Vec3>>& recent_u_usp,
                                     const EstimationConfig& config) {
    model.check_shapes();
    const int ne = config.horizon;
    if (ne < model.state_dim)
        throw WindowTooShort("estimate_online: N_E below model state dimension");
    if (static_cast<int>(recent_u_usp.size()) < ne)
        throw WindowTooShort("estimate_online: fewer records than N_E");

    const int nx = model.state_dim;
    const Mat& feedthrough = model.tie_feedthrough_to_B ? model.B : model.D;
    const std::size_t offset = recent_u_usp.size() - static_cast<std::size_t>(ne);

    // u_hat[j] = C A^j x0 + C (sum_{i<j} A^i) K e + e + D usp[j] + forced[j];
    // linear in (x0, e), solved as one stacked least-squares problem.
    Mat X = Mat::Zero(3 * ne, nx + 3);
    Vec t(3 * ne);
    Mat powA = Mat::Identity(nx, nx);   // A^j
    Mat sumA = Mat::Zero(nx, nx);       // sum_{i<j} A^i
    Vec forced = Vec::Zero(nx);         // sum of A^{j-1-l} B usp_l
    for (int j = 0; j < ne; ++j) {
        const auto& [u_raw, usp_raw] = recent_u_usp[offset + static_cast<std::size_t>(j)];
        const Vec3 u = model.u_scaler.scale(u_raw);
        const Vec3 usp = model.usp_scaler.scale(usp_raw);
        X.block(3 * j, 0, 3, nx) = model.C * powA;
        X.block(3 * j, nx, 3, 3) = model.C * sumA * model.K + Mat::Identity(3, 3);
        t.segment<3>(3 * j) = u - model.C * forced - feedthrough * usp;
        sumA += powA;
        powA = model.A * powA;
        forced = model.A * forced + model.B * usp;
    }
    const Vec sol = X.colPivHouseholderQr().solve(t);
    return {sol.head(nx), Vec3(sol.tail<3>())};
}

}  // namespace sagtwin::regulatory
