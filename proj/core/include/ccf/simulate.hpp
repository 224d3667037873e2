#pragma once

#include <cstdint>

#include "ccf/baseline.hpp"
#include "ccf/selection.hpp"

namespace ccf {

struct SimConfig {
    Index m = 50;
    Index q = 50;
    Index T_total = 201; // the last index is predicted, never fitted
    int reps = 100;
    std::vector<double> sigma_e{0.3};
    std::uint64_t seed = 20240901;
    double alpha = 0.70;
    int burn_in = 200;
    bool redraw_loadings = true; // redraw (d,g,v,b,c) per replication
    bool run_ccf = true;
    bool run_sdpca = true;
    double max_failure_rate = 0.02;
    CvConfig cv;        // inner CCF protocol (h is forced to 1)
    SdpcaCaps baseline;
    int threads = 1;
};

struct RepRecord {
    int rep = 0;
    double sigma_e = 0.0;
    bool failed = false;
    std::string error;
    double err_ccf = 0.0;   // ||y_T - yhat_T||^2 / q on the standardized scale
    double err_sdpca = 0.0;
    int s_hat = 0;          // CCF components selected
};

struct SigmaSummary {
    double sigma_e = 0.0;
    double fmse_ccf = 0.0;
    double se_ccf = 0.0;
    double fmse_sdpca = 0.0;
    double se_sdpca = 0.0;
    double ratio = 0.0; // FMSE(sdPCA) / FMSE(CCF)
    int failures = 0;
};

struct SimResult {
    std::vector<SigmaSummary> summaries; // one per sigma_e
    std::vector<RepRecord> records;      // ordered by (sigma index, rep)
};

/// The per-replication parameter draws (diagnostics and tests).
struct SimDraws {
    Eigen::VectorXd d, g, v; // VAR diagonal, superdiagonal, noise variances
    Eigen::VectorXd b1, b2;  // factor loadings on z_t, z_{t-1}
    Eigen::VectorXd c1, c2;  // y loadings on f_t, f_{t-1}
};

/// One draw of the data-generating process: z follows the stable
/// upper-bidiagonal VAR(1), y loads a single two-lag factor of z plus
/// isotropic noise. Returns raw (un-standardized) panels of T_total rows.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd>
gen_replication(const SimConfig& cfg, double sigma_e, std::uint64_t rep_seed,
                SimDraws* draws_out = nullptr);

/// Full experiment: per replication, standardize on the first T_total-1
/// rows, select hyper-parameters on the 70/15/15 protocol, refit on all
/// rows before the target, and score the prediction of the last row.
SimResult run_experiment(const SimConfig& cfg);

/// Table-1-style CSV: rows FMSE(sdPCA), FMSE(CCF), ratio; one column per
/// sigma_e value.
std::string format_sim_table(const SimResult& result);

} // namespace ccf
