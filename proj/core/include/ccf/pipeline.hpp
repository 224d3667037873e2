#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "ccf/csv.hpp"
#include "ccf/serialize.hpp"

namespace ccf {

/// One canonical run description: a JSON config file plus flag overrides
/// (flags win). Every command is a pure function of (input files, this
/// struct), so reruns are byte-identical.
struct RunConfig {
    std::string data;
    std::vector<std::string> y_columns, z_columns;
    Index h = 1;
    LossKind loss = LossKind::G1;
    double alpha = 0.70;
    int c_max = 3;
    int k_max = 3;
    double lambda_max = -1.0; // <= 0: auto per stage
    int grid = 10;
    int max_components = 10;
    std::uint64_t seed = 0;
    int threads = 0; // <= 0: machine parallelism
    std::string out_dir = ".";
    bool refit = true;
    bool redraw_loadings = true;
    int ar_max_order = 0;

    std::vector<ScheduleEntry> schedule; // `fit` only
    std::string model_path;              // `forecast` only

    // `simulate` only
    int sim_reps = 100;
    std::vector<double> sim_sigma{0.3, 0.7, 1.0, 2.0, 3.0};
    Index sim_m = 50;
    Index sim_q = 50;
    Index sim_T = 201;
    int sim_burn_in = 200;

    int effective_threads() const;
    CvConfig cv_config() const;
    SimConfig sim_config() const;
};

RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

/// y/z blocks of the CSV at cfg.data, selected by the configured column
/// lists (a column may appear in both blocks).
std::pair<TimeSeriesPanel, TimeSeriesPanel> load_panels(const RunConfig& cfg);

struct CvCommandResult {
    CvReport report;
    CcfModel model;
    std::string summary;
    std::string report_path, model_path, summary_path;
};
CvCommandResult cmd_cv(const RunConfig& cfg);

struct FitCommandResult {
    CcfModel model;
    std::string model_path;
};
FitCommandResult cmd_fit(const RunConfig& cfg);

struct ForecastCommandResult {
    std::vector<std::string> labels;
    ForecastResult values;
    std::string csv_path;
};
ForecastCommandResult cmd_forecast(const RunConfig& cfg);

struct BenchCommandResult {
    double fmsecv_sdpca = 0.0;
    double fmsecv_ccf = 0.0;
    double ratio = 0.0;
    CvReport report;
    std::string table;
    std::string csv_path;
};
BenchCommandResult cmd_bench(const RunConfig& cfg);

struct SimulateCommandResult {
    SimResult result;
    std::string table;
    std::string table_path, records_path;
};
SimulateCommandResult cmd_simulate(const RunConfig& cfg);

} // namespace ccf
