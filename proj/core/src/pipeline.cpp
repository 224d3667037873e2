#include "ccf/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ccf/rng.hpp"

namespace ccf {

using nlohmann::json;

int RunConfig::effective_threads() const {
    return threads > 0 ? threads : default_threads();
}

CvConfig RunConfig::cv_config() const {
    CvConfig cv;
    cv.alpha = alpha;
    cv.c_max = c_max;
    cv.k_max = k_max;
    cv.lambda_max = lambda_max;
    cv.grid = grid;
    cv.h = h;
    cv.loss = loss;
    cv.max_components = max_components;
    cv.refit = refit;
    cv.ar_max_order = ar_max_order;
    cv.threads = effective_threads();
    cv.solver.seed = seed;
    return cv;
}

SimConfig RunConfig::sim_config() const {
    SimConfig sim;
    sim.m = sim_m;
    sim.q = sim_q;
    sim.T_total = sim_T;
    sim.reps = sim_reps;
    sim.sigma_e = sim_sigma;
    sim.seed = seed;
    sim.alpha = alpha;
    sim.burn_in = sim_burn_in;
    sim.redraw_loadings = redraw_loadings;
    sim.threads = effective_threads();
    sim.cv = cv_config();
    sim.cv.threads = 1;
    return sim;
}

RunConfig config_from_json(const json& j) {
    if (!j.is_object()) throw config_error("config must be a JSON object");
    RunConfig cfg;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("data", cfg.data);
    get("y_columns", cfg.y_columns);
    get("z_columns", cfg.z_columns);
    get("horizon", cfg.h);
    if (j.contains("loss")) cfg.loss = loss_from_string(j.at("loss").get<std::string>());
    get("alpha", cfg.alpha);
    get("cmax", cfg.c_max);
    get("kmax", cfg.k_max);
    get("lambda_max", cfg.lambda_max);
    get("grid", cfg.grid);
    get("max_components", cfg.max_components);
    get("seed", cfg.seed);
    get("threads", cfg.threads);
    get("out", cfg.out_dir);
    get("refit", cfg.refit);
    get("redraw_loadings", cfg.redraw_loadings);
    get("ar_max_order", cfg.ar_max_order);
    get("model", cfg.model_path);
    if (j.contains("schedule")) {
        for (const auto& e : j.at("schedule")) {
            ScheduleEntry entry;
            entry.c = e.at("c").get<Index>();
            entry.k = e.at("k").get<Index>();
            entry.lambda = e.value("lambda", 0.0);
            cfg.schedule.push_back(entry);
        }
    }
    if (j.contains("simulate")) {
        const auto& s = j.at("simulate");
        if (s.contains("reps")) cfg.sim_reps = s.at("reps").get<int>();
        if (s.contains("sigma_e"))
            cfg.sim_sigma = s.at("sigma_e").get<std::vector<double>>();
        if (s.contains("m")) cfg.sim_m = s.at("m").get<Index>();
        if (s.contains("q")) cfg.sim_q = s.at("q").get<Index>();
        if (s.contains("T")) cfg.sim_T = s.at("T").get<Index>();
        if (s.contains("burn_in")) cfg.sim_burn_in = s.at("burn_in").get<int>();
    }
    if (cfg.h < 0) throw config_error("horizon must be >= 0");
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    return config_from_json(load_json(path));
}

std::pair<TimeSeriesPanel, TimeSeriesPanel> load_panels(const RunConfig& cfg) {
    if (cfg.data.empty()) throw config_error("no data file configured");
    if (cfg.y_columns.empty() || cfg.z_columns.empty())
        throw config_error("y_columns and z_columns must both be non-empty");
    TimeSeriesPanel all = read_csv_panel(cfg.data);
    return {all.select_columns(cfg.y_columns), all.select_columns(cfg.z_columns)};
}

namespace {

std::string out_path(const RunConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write file: " + path);
    out << text;
}

} // namespace

CvCommandResult cmd_cv(const RunConfig& cfg) {
    auto [y_panel, z_panel] = load_panels(cfg);
    CvOutcome outcome = cross_validate(y_panel, z_panel, cfg.cv_config());

    CvCommandResult res;
    res.report = std::move(outcome.report);
    res.model = std::move(outcome.model);
    res.summary = format_cv_table(res.report);

    res.report_path = out_path(cfg, "report.json");
    res.model_path = out_path(cfg, "model.json");
    res.summary_path = out_path(cfg, "summary.txt");
    save_report(res.report, res.report_path);
    save_model(res.model, res.model_path);
    write_text(res.summary_path, res.summary);
    return res;
}

FitCommandResult cmd_fit(const RunConfig& cfg) {
    if (cfg.schedule.empty())
        throw config_error("fit requires a non-empty component schedule");
    auto [y_panel, z_panel] = load_panels(cfg);
    SolverConfig solver;
    solver.seed = cfg.seed;
    CcfModel model = fit_model(y_panel, z_panel, cfg.schedule, cfg.h, cfg.loss,
                               solver);
    if (cfg.ar_max_order > 0) {
        std::vector<Index> orders(static_cast<std::size_t>(model.q()),
                                  cfg.ar_max_order);
        model = fit_ar_augment(model, y_panel, z_panel, orders);
    }
    FitCommandResult res;
    res.model_path = out_path(cfg, "model.json");
    save_model(model, res.model_path);
    res.model = std::move(model);
    return res;
}

ForecastCommandResult cmd_forecast(const RunConfig& cfg) {
    if (cfg.model_path.empty()) throw config_error("forecast requires a model file");
    if (cfg.data.empty()) throw config_error("forecast requires a data file");
    CcfModel model = load_model(cfg.model_path);
    TimeSeriesPanel all = read_csv_panel(cfg.data);

    TimeSeriesPanel y_panel, z_panel;
    try {
        y_panel = all.select_columns(model.y_labels);
        z_panel = all.select_columns(model.z_labels);
    } catch (const config_error& e) {
        // Model/data disagreement is a schema problem, not a config problem.
        throw data_error(std::string("data does not match the model: ") + e.what());
    }

    ForecastCommandResult res;
    res.labels = model.y_labels;
    res.values = forecast(model, y_panel, z_panel, y_panel.rows() - 1);

    std::ostringstream csv;
    csv << "series,forecast_standardized,forecast\n";
    for (std::size_t j = 0; j < res.labels.size(); ++j)
        csv << res.labels[j] << ','
            << format_double(res.values.standardized(static_cast<Index>(j))) << ','
            << format_double(res.values.destandardized(static_cast<Index>(j)))
            << '\n';
    res.csv_path = out_path(cfg, "forecast.csv");
    write_text(res.csv_path, csv.str());
    return res;
}

BenchCommandResult cmd_bench(const RunConfig& cfg) {
    auto [y_panel, z_panel] = load_panels(cfg);
    const Index T = y_panel.rows();
    SplitSpec split = SplitSpec::compute(T, cfg.alpha);

    CvOutcome outcome = cross_validate(y_panel, z_panel, cfg.cv_config());

    // Same leak-free protocol for the baseline: scale on train+val1, select
    // on val1, refit on train+val1, score on val2.
    auto [y_sel, y_info] = standardize(y_panel.slice_rows(0, split.T1 + split.T2));
    auto [z_sel, z_info] = standardize(z_panel.slice_rows(0, split.T1 + split.T2));
    Eigen::MatrixXd y_std = y_info.apply(y_panel.values);
    Eigen::MatrixXd z_std = z_info.apply(z_panel.values);
    SdpcaCaps caps;
    SdpcaModel sel = sdpca_fit(y_std.topRows(split.T1 + split.T2),
                               z_std.topRows(split.T1 + split.T2), cfg.h, split,
                               caps, cfg.effective_threads());
    SdpcaModel eval_model =
        cfg.refit ? sdpca_refit(sel, y_std, z_std,
                                split.T1 + split.T2 - 1 - cfg.h,
                                cfg.effective_threads())
                  : sel;
    double fmsecv_sdpca = sdpca_window_fmse(eval_model, y_std, z_std,
                                            split.T1 + split.T2,
                                            T - 1 - cfg.h);

    BenchCommandResult res;
    res.report = std::move(outcome.report);
    res.fmsecv_ccf = res.report.fmsecv;
    res.fmsecv_sdpca = fmsecv_sdpca;
    res.ratio = res.fmsecv_ccf > 0 ? res.fmsecv_sdpca / res.fmsecv_ccf : 0.0;

    std::ostringstream table;
    table << "method,fmsecv\n";
    table << "sdpca," << format_double(res.fmsecv_sdpca) << '\n';
    table << "ccf," << format_double(res.fmsecv_ccf) << '\n';
    table << "ratio_sdpca_over_ccf," << format_double(res.ratio) << '\n';
    res.table = table.str();
    res.csv_path = out_path(cfg, "bench.csv");
    write_text(res.csv_path, res.table);
    return res;
}

SimulateCommandResult cmd_simulate(const RunConfig& cfg) {
    SimulateCommandResult res;
    SimConfig sim = cfg.sim_config();
    res.result = run_experiment(sim);
    res.table = format_sim_table(res.result);
    res.table_path = out_path(cfg, "table.csv");
    res.records_path = out_path(cfg, "replications.json");
    write_text(res.table_path, res.table);
    save_json(sim_result_to_json(res.result, sim), res.records_path);
    return res;
}

} // namespace ccf
