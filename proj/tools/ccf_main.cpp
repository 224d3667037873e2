// Command line front end for the core-components forecasting library.
//
// Subcommands: fit, forecast, cv, simulate, bench. Configuration comes from
// a JSON file (--config) with flag overrides; flags win. Exit codes:
// 0 success, 2 config error, 3 data/schema error, 4 numeric failure.

#include <CLI11.hpp>
#include <iostream>

#include "ccf/pipeline.hpp"

namespace {

struct FlagOverrides {
    std::string data, config, out, model;
    std::string loss;
    std::vector<std::string> y_columns, z_columns;
    long long horizon = -1;
    int cmax = -1, kmax = -1, grid = -1, max_components = -1;
    double lambda_max = std::numeric_limits<double>::quiet_NaN();
    double alpha = std::numeric_limits<double>::quiet_NaN();
    long long seed = -1;
    int threads = -1;
    int ar_max_order = -1;
    // simulate
    int reps = -1;
    std::vector<double> sigma_e;
    long long sim_m = -1, sim_q = -1, sim_T = -1;
};

void add_common_flags(CLI::App* cmd, FlagOverrides& f) {
    cmd->add_option("--data", f.data, "CSV data file (wide layout)");
    cmd->add_option("--config", f.config, "JSON run configuration");
    cmd->add_option("--horizon", f.horizon, "forecast horizon h >= 0");
    cmd->add_option("--loss", f.loss, "loss criterion")
        ->check(CLI::IsMember({"g1", "g2"}));
    cmd->add_option("--cmax", f.cmax, "largest explanatory lag count");
    cmd->add_option("--kmax", f.kmax, "largest component lag count");
    cmd->add_option("--lambda-max", f.lambda_max, "penalty grid upper end");
    cmd->add_option("--grid", f.grid, "penalty grid size J");
    cmd->add_option("--alpha", f.alpha, "training fraction of the split");
    cmd->add_option("--seed", f.seed, "master RNG seed");
    cmd->add_option("--threads", f.threads, "worker threads (default: all cores)");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--max-components", f.max_components, "cap on s");
    cmd->add_option("--ar-max-order", f.ar_max_order,
                    "enable per-series AR residual augmentation up to this order");
    cmd->add_option("--y-columns", f.y_columns, "target column names")
        ->delimiter(',');
    cmd->add_option("--z-columns", f.z_columns, "explanatory column names")
        ->delimiter(',');
}

ccf::RunConfig resolve_config(const FlagOverrides& f) {
    ccf::RunConfig cfg;
    if (!f.config.empty()) cfg = ccf::load_run_config(f.config);
    if (!f.data.empty()) cfg.data = f.data;
    if (!f.out.empty()) cfg.out_dir = f.out;
    if (!f.model.empty()) cfg.model_path = f.model;
    if (!f.y_columns.empty()) cfg.y_columns = f.y_columns;
    if (!f.z_columns.empty()) cfg.z_columns = f.z_columns;
    if (f.horizon >= 0) cfg.h = f.horizon;
    if (!f.loss.empty()) cfg.loss = ccf::loss_from_string(f.loss);
    if (f.cmax >= 0) cfg.c_max = f.cmax;
    if (f.kmax >= 0) cfg.k_max = f.kmax;
    if (!std::isnan(f.lambda_max)) cfg.lambda_max = f.lambda_max;
    if (f.grid >= 0) cfg.grid = f.grid;
    if (!std::isnan(f.alpha)) cfg.alpha = f.alpha;
    if (f.seed >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed);
    if (f.threads >= 0) cfg.threads = f.threads;
    if (f.max_components >= 0) cfg.max_components = f.max_components;
    if (f.ar_max_order >= 0) cfg.ar_max_order = f.ar_max_order;
    if (f.reps >= 0) cfg.sim_reps = f.reps;
    if (!f.sigma_e.empty()) cfg.sim_sigma = f.sigma_e;
    if (f.sim_m >= 0) cfg.sim_m = f.sim_m;
    if (f.sim_q >= 0) cfg.sim_q = f.sim_q;
    if (f.sim_T >= 0) cfg.sim_T = f.sim_T;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Core-components forecasting for high dimensional time series"};
    app.require_subcommand(1);

    FlagOverrides f;
    auto* cv = app.add_subcommand("cv", "cross-validated model selection and fit");
    auto* fit = app.add_subcommand("fit", "fit a fixed component schedule");
    auto* forecast = app.add_subcommand("forecast", "forecast from a saved model");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo comparison harness");
    auto* bench = app.add_subcommand("bench", "CCF vs sdPCA on one dataset");
    for (auto* cmd : {cv, fit, forecast, simulate, bench}) add_common_flags(cmd, f);

    forecast->add_option("--model", f.model, "model JSON produced by cv/fit");
    simulate->add_option("--reps", f.reps, "replication count");
    simulate->add_option("--sigma", f.sigma_e, "noise levels")->delimiter(',');
    simulate->add_option("--sim-m", f.sim_m, "explanatory dimension");
    simulate->add_option("--sim-q", f.sim_q, "target dimension");
    simulate->add_option("--sim-T", f.sim_T, "periods per replication");

    CLI11_PARSE(app, argc, argv);

    try {
        ccf::RunConfig cfg = resolve_config(f);
        if (cv->parsed()) {
            auto res = ccf::cmd_cv(cfg);
            std::cout << res.summary;
            std::cout << "wrote " << res.report_path << ", " << res.model_path
                      << ", " << res.summary_path << "\n";
        } else if (fit->parsed()) {
            auto res = ccf::cmd_fit(cfg);
            std::cout << "fitted " << res.model.components.size()
                      << " component(s), " << ccf::parameter_count(res.model)
                      << " parameters\n";
            std::cout << "wrote " << res.model_path << "\n";
        } else if (forecast->parsed()) {
            auto res = ccf::cmd_forecast(cfg);
            std::cout << "wrote " << res.csv_path << "\n";
        } else if (simulate->parsed()) {
            auto res = ccf::cmd_simulate(cfg);
            std::cout << res.table;
            std::cout << "wrote " << res.table_path << ", " << res.records_path
                      << "\n";
        } else if (bench->parsed()) {
            auto res = ccf::cmd_bench(cfg);
            std::cout << res.table;
            std::cout << "wrote " << res.csv_path << "\n";
        }
    } catch (const ccf::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return ccf::exit_config_error;
    } catch (const ccf::data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return ccf::exit_schema_error;
    } catch (const ccf::numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return ccf::exit_numeric_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ccf::exit_numeric_error;
    }
    return ccf::exit_ok;
}
