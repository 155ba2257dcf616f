#include "sagtwin/artifacts.hpp"

#include <fstream>

#include <json.hpp>

namespace sagtwin::artifacts {

using nlohmann::json;

namespace {

json mat_to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

Mat mat_from_json(const json& j) {
    const auto rows = j.size();
    const auto cols = rows ? j[0].size() : 0;
    Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                j[r][c].get<double>();
    return m;
}

json vec_to_json(const Vec& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Vec vec_from_json(const json& j) {
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return v;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << '\n';
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

void check_version(const json& j, const std::string& kind) {
    if (j.value("format_version", -1) != kFormatVersion)
        throw Error(kind + " artifact: unsupported format version");
}

}  // namespace

void save_statespace(const std::string& path, const regulatory::StateSpaceModel& model) {
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "regulatory-statespace";
    j["order"] = model.order;
    j["state_dim"] = model.state_dim;
    j["A"] = mat_to_json(model.A);
    j["B"] = mat_to_json(model.B);
    j["C"] = mat_to_json(model.C);
    j["D"] = mat_to_json(model.D);
    j["K"] = mat_to_json(model.K);
    j["x0"] = vec_to_json(model.x0);
    j["e"] = vec_to_json(model.e);
    j["tie_feedthrough_to_B"] = model.tie_feedthrough_to_B;
    j["u_scaler"] = {{"mean", vec_to_json(model.u_scaler.mean)},
                     {"std", vec_to_json(model.u_scaler.std)}};
    j["usp_scaler"] = {{"mean", vec_to_json(model.usp_scaler.mean)},
                       {"std", vec_to_json(model.usp_scaler.std)}};
    write_json(path, j);
}

regulatory::StateSpaceModel load_statespace(const std::string& path) {
    const json j = read_json(path);
    check_version(j, "regulatory");
    regulatory::StateSpaceModel m;
    m.order = j.at("order").get<int>();
    m.state_dim = j.at("state_dim").get<int>();
    m.A = mat_from_json(j.at("A"));
    m.B = mat_from_json(j.at("B"));
    m.C = mat_from_json(j.at("C"));
    m.D = mat_from_json(j.at("D"));
    m.K = mat_from_json(j.at("K"));
    m.x0 = vec_from_json(j.at("x0"));
    m.e = Vec3(vec_from_json(j.at("e")));
    m.tie_feedthrough_to_B = j.value("tie_feedthrough_to_B", false);
    m.u_scaler.mean = vec_from_json(j.at("u_scaler").at("mean"));
    m.u_scaler.std = vec_from_json(j.at("u_scaler").at("std"));
    m.usp_scaler.mean = vec_from_json(j.at("usp_scaler").at("mean"));
    m.usp_scaler.std = vec_from_json(j.at("usp_scaler").at("std"));
    m.check_shapes();
    return m;
}

void save_narx(const std::string& path, const narx::NarxModel& model) {
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "narx";
    j["m"] = model.m;
    j["n"] = model.n;
    j["hidden_width"] = model.hidden_width;
    j["activation"] = model.activation;
    j["seed"] = model.seed;
    j["W_in"] = mat_to_json(model.W_in);
    j["b_hidden"] = vec_to_json(model.b_hidden);
    j["W_out"] = mat_to_json(model.W_out);
    j["b_out"] = vec_to_json(model.b_out);
    j["scaler"] = {{"y_mean", vec_to_json(model.scaler.y_mean)},
                   {"y_std", vec_to_json(model.scaler.y_std)},
                   {"u_mean", vec_to_json(model.scaler.u_mean)},
                   {"u_std", vec_to_json(model.scaler.u_std)}};
    write_json(path, j);
}

narx::NarxModel load_narx(const std::string& path) {
    const json j = read_json(path);
    check_version(j, "narx");
    narx::NarxModel m;
    m.m = j.at("m").get<int>();
    m.n = j.at("n").get<int>();
    m.hidden_width = j.at("hidden_width").get<int>();
    m.activation = j.value("activation", "tanh");
    m.seed = j.value("seed", std::uint64_t{0});
    m.W_in = mat_from_json(j.at("W_in"));
    m.b_hidden = vec_from_json(j.at("b_hidden"));
    m.W_out = mat_from_json(j.at("W_out"));
    m.b_out = Vec2(vec_from_json(j.at("b_out")));
    m.scaler.y_mean = Vec2(vec_from_json(j.at("scaler").at("y_mean")));
    m.scaler.y_std = Vec2(vec_from_json(j.at("scaler").at("y_std")));
    m.scaler.u_mean = Vec3(vec_from_json(j.at("scaler").at("u_mean")));
    m.scaler.u_std = Vec3(vec_from_json(j.at("scaler").at("u_std")));
    m.check_shapes();
    return m;
}

void save_rulebase(const std::string& path, const expert::FuzzyRuleBase& rulebase) {
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "fuzzy-rulebase";
    j["activation_threshold"] = rulebase.activation_threshold;
    j["slope_window"] = rulebase.slope_window;
    j["rate_limit"] = vec_to_json(rulebase.rate_limit);
    j["variables"] = json::array();
    for (const auto& var : rulebase.variables) {
        json mfs = json::array();
        for (const auto& mf : var.mfs) {
            json m = {{"label", mf.label}, {"a", mf.a}, {"b", mf.b}, {"c", mf.c}};
            if (mf.relative_to_limit) {
                m["relative_to_limit"] = true;
                m["limit_cv"] = mf.limit_cv;
            }
            mfs.push_back(m);
        }
        j["variables"].push_back({{"name", var.name}, {"mfs", mfs}});
    }
    j["states"] = json::array();
    for (const auto& state : rulebase.states) {
        json when = json::array();
        for (const auto& [var, label] : state.when) when.push_back({var, label});
        j["states"].push_back({{"name", state.name},
                               {"rank", state.rank},
                               {"when", when},
                               {"consequent", vec_to_json(state.consequent)}});
    }
    write_json(path, j);
}

expert::FuzzyRuleBase load_rulebase(const std::string& path) {
    const json j = read_json(path);
    check_version(j, "rulebase");
    expert::FuzzyRuleBase rb;
    rb.activation_threshold = j.at("activation_threshold").get<double>();
    rb.slope_window = j.at("slope_window").get<int>();
    rb.rate_limit = Vec3(vec_from_json(j.at("rate_limit")));
    for (const auto& var : j.at("variables")) {
        expert::FuzzyVariable v;
        v.name = var.at("name").get<std::string>();
        for (const auto& mf : var.at("mfs")) {
            expert::TriangularMF m;
            m.label = mf.at("label").get<std::string>();
            m.a = mf.at("a").get<double>();
            m.b = mf.at("b").get<double>();
            m.c = mf.at("c").get<double>();
            m.relative_to_limit = mf.value("relative_to_limit", false);
            m.limit_cv = mf.value("limit_cv", -1);
            if (!(m.a <= m.b && m.b <= m.c))
                throw Error("rulebase: MF '" + m.label + "' breakpoints not ordered");
            v.mfs.push_back(m);
        }
        rb.variables.push_back(v);
    }
    for (const auto& state : j.at("states")) {
        expert::OperatingState s;
        s.name = state.at("name").get<std::string>();
        s.rank = state.at("rank").get<int>();
        for (const auto& cond : state.at("when"))
            s.when.emplace_back(cond.at(0).get<std::string>(),
                                cond.at(1).get<std::string>());
        s.consequent = Vec3(vec_from_json(state.at("consequent")));
        rb.states.push_back(s);
    }
    rb.validate();
    return rb;
}

}  // namespace sagtwin::artifacts
