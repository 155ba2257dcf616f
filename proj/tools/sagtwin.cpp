// Command-line front door: ingest raw plant data, identify/train the twin
// models, run the closed-loop twin with drift detection, generate synthetic
// datasets and disturbance scenarios, and emit error reports.
//
// Exit codes: 0 ok, 1 generic failure, 2 no valid segments, 3 malformed
// input row, 4 identification/training failure, 5 missing model artifact.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sagtwin/artifacts.hpp"
#include "sagtwin/csv.hpp"
#include "sagtwin/detect.hpp"
#include "sagtwin/fuzzy.hpp"
#include "sagtwin/narx.hpp"
#include "sagtwin/pipeline.hpp"
#include "sagtwin/scenario.hpp"
#include "sagtwin/statespace.hpp"
#include "sagtwin/twin.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sagtwin;

namespace {

json default_config() {
    return json{
        {"schema_version", 1},
        {"validity",
         {{"min_feed", 100.0},
          {"min_solids", 40.0},
          {"require_sag_running", true},
          {"require_expert_online", true}}},
        {"horizon", {{"N", 5}}},
        {"estimation", {{"horizon", 30}}},
        {"detection",
         {{"window_length", 30},
          {"alpha", 0.01},
          {"md_pressure", 103},
          {"md_power", 181},
          {"retrain_horizon", 2000}}},
        {"identify",
         {{"candidate_orders", {1, 2, 3}},
          {"improvement_threshold", 0.05},
          {"restarts", 5},
          {"max_iterations", 120},
          {"seed", 1}}},
        {"narx",
         {{"candidate_lags", {12}},
          {"candidate_widths", {2}},
          {"improvement_threshold", 0.05},
          {"restarts", 5},
          {"max_iterations", 250},
          {"seed", 7}}},
        {"run",
         {{"y_lim", {5150.0, 13500.0}},
          {"supervisor", false},
          {"y1_lim_grid", {5100.0, 5150.0, 5200.0}},
          {"y2_lim_grid", {13500.0}},
          {"y_box", {{"min", {3000.0, 5000.0}}, {"max", {6500.0, 18000.0}}}},
          {"u_box", {{"min", {500.0, 50.0, 6.0}}, {"max", {4000.0, 90.0, 13.0}}}}}},
        {"plant",
         {{"noise_y1", 14.0},
          {"noise_y2", 260.0},
          {"fill_noise", 1.5e-3},
          {"ore_rho", 0.98},
          {"ore_noise", 100.0},
          {"feed_rho", 0.99},
          {"feed_noise", 0.005},
          {"dither_prob", 0.05},
          {"y_lim", {5150.0, 13500.0}},
          {"regulatory_pole", 0.55}}},
        {"seeds", {{"generate", 42}}},
    };
}

json load_config(const std::string& path) {
    json cfg = default_config();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw Error("cannot open config " + path);
        json user;
        in >> user;
        cfg.merge_patch(user);
    }
    return cfg;
}

pipeline::ValidityCriteria validity_from(const json& cfg) {
    const auto& v = cfg.at("validity");
    pipeline::ValidityCriteria c;
    c.min_feed = v.at("min_feed").get<double>();
    c.min_solids = v.at("min_solids").get<double>();
    c.require_sag_running = v.at("require_sag_running").get<bool>();
    c.require_expert_online = v.at("require_expert_online").get<bool>();
    return c;
}

detect::DetectionConfig detection_from(const json& cfg) {
    const auto& d = cfg.at("detection");
    detect::DetectionConfig c;
    c.window_length = d.at("window_length").get<int>();
    c.alpha = d.at("alpha").get<double>();
    c.trigger_threshold = {d.at("md_pressure").get<int>(), d.at("md_power").get<int>()};
    c.retrain_horizon = d.at("retrain_horizon").get<int>();
    return c;
}

SampledSeries load_series(const std::string& path, double sample_period) {
    SampledSeries s;
    s.records = csv::read_records(path);
    s.sample_period = sample_period;
    return s;
}

void save_baseline(const std::string& path,
                   const std::array<detect::ResidualFingerprint, kNumCV>& baselines) {
    json j;
    j["format_version"] = 1;
    j["kind"] = "detection-baseline";
    j["channels"] = json::array();
    for (const auto& fp : baselines) {
        json c;
        c["mean"] = fp.mean;
        c["variance"] = fp.variance;
        c["acf1"] = fp.acf1;
        c["sample_size"] = fp.sample_size;
        c["ecdf_sample"] = fp.ecdf_sample;
        j["channels"].push_back(c);
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << '\n';
}

std::array<detect::ResidualFingerprint, kNumCV> load_baseline(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    json j;
    in >> j;
    std::array<detect::ResidualFingerprint, kNumCV> out;
    for (int cv = 0; cv < kNumCV; ++cv) {
        const auto& c = j.at("channels").at(static_cast<std::size_t>(cv));
        auto& fp = out[static_cast<std::size_t>(cv)];
        fp.mean = c.at("mean").get<double>();
        fp.variance = c.at("variance").get<double>();
        fp.acf1 = c.at("acf1").get<double>();
        fp.sample_size = c.at("sample_size").get<std::size_t>();
        fp.ecdf_sample = c.at("ecdf_sample").get<std::vector<double>>();
    }
    return out;
}

// ---- subcommands ------------------------------------------------------------

int cmd_ingest(const std::string& input, const std::string& output,
               const std::string& manifest_path, const json& cfg) {
    std::vector<PlantRecord> raw;
    try {
        raw = csv::read_records(input);
    } catch (const csv::MalformedRow& e) {
        std::cerr << "malformed row at line " << e.line << ": " << e.what() << "\n";
        return 3;
    }
    const auto segments = pipeline::filter_valid(raw, validity_from(cfg), 5.0);

    SampledSeries combined;
    combined.sample_period = 30.0;
    std::vector<csv::SegmentInfo> manifest;
    int id = 0;
    for (const auto& seg : segments) {
        if (seg.size() < 6) continue;
        const auto down = pipeline::median_downsample(seg);
        manifest.push_back({id++, combined.size(), down.size()});
        combined.records.insert(combined.records.end(), down.records.begin(),
                                down.records.end());
    }
    if (combined.empty()) {
        std::cerr << "no valid segments\n";
        return 2;
    }
    csv::write_records(output, combined);
    csv::write_manifest(manifest_path, manifest);
    std::cout << "ingested " << raw.size() << " raw records into " << combined.size()
              << " downsampled records across " << manifest.size() << " segments\n";
    return 0;
}

int cmd_train(const std::string& dataset, const std::string& manifest_path,
              const std::string& out_dir, const json& cfg) {
    const SampledSeries all = load_series(dataset, 30.0);

    SampledSeries train = all;
    if (!manifest_path.empty()) {
        const auto manifest = csv::read_manifest(manifest_path);
        std::vector<SampledSeries> segments;
        for (const auto& info : manifest) {
            SampledSeries s;
            s.sample_period = 30.0;
            s.records.assign(all.records.begin() + static_cast<long>(info.start_row),
                             all.records.begin() +
                                 static_cast<long>(info.start_row + info.length));
            segments.push_back(std::move(s));
        }
        if (segments.size() >= 2) {
            auto [tr, te] = pipeline::select_train_test(segments);
            train = tr;
        } else if (segments.size() == 1) {
            train = segments[0];
        }
    }

    fs::create_directories(out_dir);
    const auto& id_cfg = cfg.at("identify");
    regulatory::IdentifyConfig icfg;
    icfg.restarts = id_cfg.at("restarts").get<int>();
    icfg.max_iterations = id_cfg.at("max_iterations").get<int>();
    icfg.seed = id_cfg.at("seed").get<std::uint64_t>();

    const auto orders = id_cfg.at("candidate_orders").get<std::vector<int>>();
    const int order = regulatory::select_order(
        train, orders, id_cfg.at("improvement_threshold").get<double>(), icfg);
    const auto reg_model = regulatory::identify(train, order, icfg);
    const double reg_cost = regulatory::simulation_cost(reg_model, train);

    const auto& nx_cfg = cfg.at("narx");
    narx::TrainConfig ncfg;
    ncfg.restarts = nx_cfg.at("restarts").get<int>();
    ncfg.max_iterations = nx_cfg.at("max_iterations").get<int>();
    ncfg.seed = nx_cfg.at("seed").get<std::uint64_t>();

    const auto [m, n, width] = narx::select_structure(
        train, nx_cfg.at("candidate_lags").get<std::vector<int>>(),
        nx_cfg.at("candidate_widths").get<std::vector<int>>(),
        nx_cfg.at("improvement_threshold").get<double>(), ncfg);
    const auto narx_model = narx::train(train, m, n, width, ncfg);
    const double narx_cost = narx::training_cost(narx_model, train);

    const auto residuals = detect::one_step_residuals(narx_model, train);
    std::array<detect::ResidualFingerprint, kNumCV> baselines;
    for (int cv = 0; cv < kNumCV; ++cv)
        baselines[static_cast<std::size_t>(cv)] =
            detect::fingerprint(residuals[static_cast<std::size_t>(cv)]);

    artifacts::save_statespace(out_dir + "/reg_model.json", reg_model);
    artifacts::save_narx(out_dir + "/narx_model.json", narx_model);
    save_baseline(out_dir + "/baseline.json", baselines);

    json report;
    report["regulatory"] = {{"order", order}, {"cost", reg_cost}};
    report["narx"] = {{"m", m}, {"n", n}, {"hidden_width", width}, {"cost", narx_cost}};
    {
        std::ofstream out(out_dir + "/train_report.json");
        out << report.dump(2) << '\n';
    }
    std::cout << "regulatory: order " << order << ", cost " << reg_cost << "\n"
              << "narx: m=" << m << " n=" << n << " width=" << width << ", cost "
              << narx_cost << "\n";
    return 0;
}

int cmd_run(const std::string& dataset, const std::string& model_dir,
            const std::string& rulebase_path, const std::string& scenario_path,
            const std::string& out_dir, bool supervisor_flag, int horizon_override,
            const json& cfg) {
    for (const char* artifact : {"/reg_model.json", "/narx_model.json", "/baseline.json"}) {
        if (!fs::exists(model_dir + artifact)) {
            std::cerr << "missing model artifact " << model_dir << artifact << "\n";
            return 5;
        }
    }

    twin::Components components;
    components.reg = artifacts::load_statespace(model_dir + "/reg_model.json");
    components.sag = artifacts::load_narx(model_dir + "/narx_model.json");
    components.rulebase = rulebase_path.empty() ? expert::default_rulebase()
                                                : artifacts::load_rulebase(rulebase_path);

    SampledSeries data = load_series(dataset, 30.0);
    if (!scenario_path.empty())
        data = scenario::apply(scenario::read_scenario(scenario_path), data);

    const auto det_cfg = detection_from(cfg);
    detect::DetectionState det_state;
    {
        const auto baselines = load_baseline(model_dir + "/baseline.json");
        for (int cv = 0; cv < kNumCV; ++cv)
            det_state.channels[static_cast<std::size_t>(cv)].baseline =
                baselines[static_cast<std::size_t>(cv)];
    }

    const auto& run_cfg = cfg.at("run");
    twin::HorizonConfig horizon;
    horizon.N = horizon_override > 0 ? horizon_override
                                     : cfg.at("horizon").at("N").get<int>();
    const auto y_lim_vals = run_cfg.at("y_lim").get<std::vector<double>>();
    const Vec2 y_lim(y_lim_vals.at(0), y_lim_vals.at(1));

    twin::Bounds bounds;
    bounds.y1_lim_grid = run_cfg.at("y1_lim_grid").get<std::vector<double>>();
    bounds.y2_lim_grid = run_cfg.at("y2_lim_grid").get<std::vector<double>>();
    {
        const auto ymin = run_cfg.at("y_box").at("min").get<std::vector<double>>();
        const auto ymax = run_cfg.at("y_box").at("max").get<std::vector<double>>();
        const auto umin = run_cfg.at("u_box").at("min").get<std::vector<double>>();
        const auto umax = run_cfg.at("u_box").at("max").get<std::vector<double>>();
        bounds.boxes.y_min = Vec2(ymin.at(0), ymin.at(1));
        bounds.boxes.y_max = Vec2(ymax.at(0), ymax.at(1));
        bounds.boxes.u_min = Vec3(umin.at(0), umin.at(1), umin.at(2));
        bounds.boxes.u_max = Vec3(umax.at(0), umax.at(1), umax.at(2));
    }
    const bool supervisor = supervisor_flag || run_cfg.at("supervisor").get<bool>();

    regulatory::EstimationConfig est_cfg;
    est_cfg.horizon = cfg.at("estimation").at("horizon").get<int>();

    const auto& nx_cfg = cfg.at("narx");
    narx::TrainConfig retrain_cfg;
    retrain_cfg.restarts = nx_cfg.at("restarts").get<int>();
    retrain_cfg.max_iterations = nx_cfg.at("max_iterations").get<int>();
    retrain_cfg.seed = nx_cfg.at("seed").get<std::uint64_t>();

    fs::create_directories(out_dir);
    std::ofstream trace(out_dir + "/trace.csv");
    trace << "k,i,y1_hat,y2_hat,u1_hat,u2_hat,u3_hat,u1_sp_hat,u2_sp_hat,u3_sp_hat,feasible\n";
    std::ofstream det_log(out_dir + "/detection_log.csv");
    det_log << "k,cv,residual,mean_p,var_p,ks_p,acf_p,M,triggered\n";
    std::ofstream journal(out_dir + "/events.txt");
    std::ofstream sup_log;
    if (supervisor) {
        sup_log.open(out_dir + "/supervisor.csv");
        sup_log << "k,y1_lim,y2_lim,score\n";
    }

    const int start = std::max({components.sag.m, components.sag.n,
                                components.rulebase.slope_window, est_cfg.horizon});
    bool was_triggered[kNumCV] = {false, false};

    for (int k = start; k < static_cast<int>(data.size()); ++k) {
        // Eq.-6-style re-anchoring of the regulatory model at each instant.
        std::vector<std::pair<Vec3, Vec3>> recent;
        recent.reserve(static_cast<std::size_t>(est_cfg.horizon));
        for (int j = k - est_cfg.horizon; j < k; ++j)
            recent.emplace_back(data[static_cast<std::size_t>(j)].u,
                                data[static_cast<std::size_t>(j)].u_sp);
        const auto [x0, e] = regulatory::estimate_online(components.reg, recent, est_cfg);
        // Advance the estimated state to the current instant.
        Vec x = x0;
        const Vec ke = components.reg.K * e;
        for (const auto& [u_raw, usp_raw] : recent) {
            (void)u_raw;
            x = components.reg.A * x +
                components.reg.B * components.reg.usp_scaler.scale(usp_raw) + ke;
        }
        components.reg.x0 = x;
        components.reg.e = e;

        SampledSeries history;
        history.sample_period = data.sample_period;
        history.records.assign(data.records.begin(),
                               data.records.begin() + static_cast<long>(k));
        const auto pred =
            twin::rollout_closed_loop(components, history, y_lim, horizon, bounds.boxes);

        for (int i = 0; i <= horizon.N; ++i) {
            const auto s = static_cast<std::size_t>(i);
            trace << k << ',' << i << ',' << csv::format_double(pred.y_hat[s][0]) << ','
                  << csv::format_double(pred.y_hat[s][1]);
            for (int c = 0; c < kNumMV; ++c)
                trace << ',' << csv::format_double(pred.u_hat[s][c]);
            for (int c = 0; c < kNumMV; ++c)
                trace << ',' << csv::format_double(pred.u_sp_hat[s][c]);
            trace << ',' << (pred.feasible[s] ? 1 : 0) << '\n';
        }

        const Vec2 measured = data[static_cast<std::size_t>(k)].y;
        const Vec2 residual = (pred.y_hat[0] - measured).cwiseQuotient(measured);
        detect::update(det_state, residual, det_cfg);
        for (int cv = 0; cv < kNumCV; ++cv) {
            const auto& ch = det_state.channels[static_cast<std::size_t>(cv)];
            det_log << k << ',' << cv << ',' << csv::format_double(residual[cv]) << ','
                    << csv::format_double(ch.last_tests.mean_p) << ','
                    << csv::format_double(ch.last_tests.variance_p) << ','
                    << csv::format_double(ch.last_tests.ks_p) << ','
                    << csv::format_double(ch.last_tests.acf_p) << ',' << ch.counter
                    << ',' << (ch.triggered ? 1 : 0) << '\n';
            if (ch.triggered && !was_triggered[cv]) {
                journal << k << " trigger cv=" << (cv == 0 ? "pressure" : "power") << '\n';
                was_triggered[cv] = true;
            }
        }

        if (supervisor) {
            try {
                const auto result = twin::evaluate_supervisor(
                    components, history, bounds, twin::negative_mean_tonnage, horizon);
                sup_log << k << ',' << csv::format_double(result.best_y_lim[0]) << ','
                        << csv::format_double(result.best_y_lim[1]) << ','
                        << csv::format_double(result.best_score) << '\n';
            } catch (const AllInfeasible&) {
                sup_log << k << ",,,infeasible\n";
            }
        }

        const bool any_triggered = was_triggered[0] || was_triggered[1];
        if (any_triggered) {
            SampledSeries so_far;
            so_far.sample_period = data.sample_period;
            so_far.records.assign(data.records.begin(),
                                  data.records.begin() + static_cast<long>(k) + 1);
            const int mm = components.sag.m, nn = components.sag.n,
                      ww = components.sag.hidden_width;
            try {
                auto retrained = detect::retrain_if_triggered(
                    det_state, so_far, validity_from(cfg),
                    [&](const SampledSeries& window) {
                        return narx::train(window, mm, nn, ww, retrain_cfg);
                    },
                    det_cfg);
                if (retrained) {
                    components.sag = *retrained;
                    journal << k << " retrained\n";
                    was_triggered[0] = was_triggered[1] = false;
                }
            } catch (const RetrainDeferred&) {
                journal << k << " retrain-deferred\n";
            }
        }
    }
    std::cout << "run complete: " << (data.size() - static_cast<std::size_t>(start))
              << " instants processed\n";
    return 0;
}

int cmd_scenario(int generate_steps, std::uint64_t seed, const std::string& apply_path,
                 const std::string& input, const std::string& output,
                 double wear_months, double hardness_increase, int onset,
                 const std::string& scenario_out, const json& cfg) {
    if (!scenario_out.empty()) {
        if (wear_months >= 0.0)
            scenario::write_scenario(scenario_out, scenario::wear_scenario(wear_months));
        else if (hardness_increase >= 0.0)
            scenario::write_scenario(scenario_out,
                                     scenario::hardness_scenario(hardness_increase, onset));
        else
            throw Error("scenario: --write requires --wear-months or --hardness");
        std::cout << "wrote scenario " << scenario_out << "\n";
        return 0;
    }
    if (generate_steps > 0) {
        const auto& p = cfg.at("plant");
        scenario::SyntheticPlant plant;
        plant.noise_y1 = p.at("noise_y1").get<double>();
        plant.noise_y2 = p.at("noise_y2").get<double>();
        plant.fill_noise = p.at("fill_noise").get<double>();
        plant.ore_rho = p.at("ore_rho").get<double>();
        plant.ore_noise = p.at("ore_noise").get<double>();
        plant.feed_rho = p.at("feed_rho").get<double>();
        plant.feed_noise = p.at("feed_noise").get<double>();
        scenario::GenerateConfig gcfg;
        gcfg.dither_prob = p.at("dither_prob").get<double>();
        const auto yl = p.at("y_lim").get<std::vector<double>>();
        gcfg.y_lim = Vec2(yl.at(0), yl.at(1));
        const auto series = scenario::generate(
            plant, expert::default_rulebase(),
            scenario::tracking_regulatory_model(p.at("regulatory_pole").get<double>()),
            generate_steps, seed, gcfg);
        csv::write_records(output, series);
        std::cout << "generated " << series.size() << " records\n";
        return 0;
    }
    if (!apply_path.empty()) {
        const auto series = load_series(input, 30.0);
        const auto disturbed = scenario::apply(scenario::read_scenario(apply_path), series);
        csv::write_records(output, disturbed);
        std::cout << "applied scenario to " << disturbed.size() << " records\n";
        return 0;
    }
    throw Error("scenario: nothing to do (use --generate, --apply, or --write)");
}

int cmd_report(const std::string& trace_path, const std::string& dataset,
               const std::string& report_path, const std::string& histogram_path) {
    const SampledSeries data = load_series(dataset, 30.0);

    std::ifstream trace(trace_path);
    if (!trace) throw Error("cannot open " + trace_path);
    std::string line;
    std::getline(trace, line);  // header
    twin::HorizonPairs pairs;
    while (std::getline(trace, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        const int k = std::stoi(fields.at(0));
        const int i = std::stoi(fields.at(1));
        const std::size_t target = static_cast<std::size_t>(k + i);
        if (target >= data.size()) continue;
        if (pairs.size() <= static_cast<std::size_t>(i))
            pairs.resize(static_cast<std::size_t>(i) + 1);
        const Vec2 predicted(std::stod(fields.at(2)), std::stod(fields.at(3)));
        pairs[static_cast<std::size_t>(i)].emplace_back(predicted, data[target].y);
    }
    const auto stats = twin::error_report(pairs);
    twin::write_report_csv(report_path, stats);
    if (!histogram_path.empty()) twin::write_histogram_csv(histogram_path, stats);
    std::cout << "report written for " << pairs.size() << " horizons\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SAG mill digital twin"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON configuration file");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "filter and downsample raw 5 s records");
    std::string in_path, out_path, manifest_path = "manifest.csv";
    ingest->add_option("--input", in_path, "raw 5 s CSV")->required();
    ingest->add_option("--output", out_path, "30 s CSV")->required();
    ingest->add_option("--manifest", manifest_path, "segment manifest output");

    // train
    auto* train = app.add_subcommand("train", "identify regulatory and NARX models");
    std::string dataset, train_manifest, model_dir = "models";
    train->add_option("--dataset", dataset, "30 s CSV")->required();
    train->add_option("--manifest", train_manifest, "segment manifest");
    train->add_option("--out", model_dir, "artifact output directory");

    // run
    auto* run = app.add_subcommand("run", "closed-loop twin with drift detection");
    std::string run_dataset, run_models = "models", rulebase_path, scenario_path,
                run_out = "run_out";
    bool supervisor = false;
    int horizon_n = 0;
    std::uint64_t seed = 0;
    run->add_option("--dataset", run_dataset, "30 s CSV test set")->required();
    run->add_option("--models", run_models, "model artifact directory");
    run->add_option("--rulebase", rulebase_path, "rulebase config (default built-in)");
    run->add_option("--scenario", scenario_path, "disturbance scenario to apply");
    run->add_option("--out", run_out, "output directory");
    run->add_option("--horizon", horizon_n, "prediction horizon N");
    run->add_flag("--supervisor", supervisor, "evaluate the y_lim candidate grid");

    // scenario
    auto* scen = app.add_subcommand("scenario", "generate data or build/apply scenarios");
    int generate_steps = 0, onset = 0;
    double wear_months = -1.0, hardness = -1.0;
    std::string scen_in, scen_out_file, scen_apply, scen_write;
    scen->add_option("--generate", generate_steps, "generate N synthetic records");
    scen->add_option("--seed", seed, "generation seed");
    scen->add_option("--apply", scen_apply, "scenario file to apply");
    scen->add_option("--input", scen_in, "input dataset for --apply");
    scen->add_option("--output", scen_out_file, "output dataset");
    scen->add_option("--write", scen_write, "write a scenario file");
    scen->add_option("--wear-months", wear_months, "liner wear months for --write");
    scen->add_option("--hardness", hardness, "hardness increase fraction for --write");
    scen->add_option("--onset", onset, "hardness onset instant");

    // report
    auto* report = app.add_subcommand("report", "error statistics from a trace");
    std::string trace_path, report_dataset, report_out = "report.csv", hist_out;
    report->add_option("--trace", trace_path, "trace.csv from run")->required();
    report->add_option("--dataset", report_dataset, "measured 30 s CSV")->required();
    report->add_option("--output", report_out, "report CSV");
    report->add_option("--histogram", hist_out, "histogram CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        const json cfg = load_config(config_path);
        if (*ingest) return cmd_ingest(in_path, out_path, manifest_path, cfg);
        if (*train) return cmd_train(dataset, train_manifest, model_dir, cfg);
        if (*run)
            return cmd_run(run_dataset, run_models, rulebase_path, scenario_path,
                           run_out, supervisor, horizon_n, cfg);
        if (*scen)
            return cmd_scenario(generate_steps, seed, scen_apply, scen_in, scen_out_file,
                                wear_months, hardness, onset, scen_write, cfg);
        if (*report) return cmd_report(trace_path, report_dataset, report_out, hist_out);
    } catch (const csv::MalformedRow& e) {
        std::cerr << "malformed row at line " << e.line << ": " << e.what() << "\n";
        return 3;
    } catch (const IdentificationFailed& e) {
        std::cerr << "identification failed: " << e.what() << "\n";
        return 4;
    } catch (const TrainingDiverged& e) {
        std::cerr << "training diverged: " << e.what() << "\n";
        return 4;
    } catch (const WindowTooShort& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
