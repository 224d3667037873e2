#pragma once

#include <optional>

#include "ccf/model.hpp"
#include "ccf/parallel.hpp"

namespace ccf {

struct CvConfig {
    double alpha = 0.70;
    int c_max = 3;
    int k_max = 3;
    double lambda_max = -1.0; // <= 0: scale the grid to the data per stage
    int grid = 10;            // J, lambda grid size (includes 0 and lambda_max)
    Index h = 1;
    LossKind loss = LossKind::G1;
    int max_components = 10;
    int min_effective_sample = 10; // (c,k) cells below this are skipped
    SolverConfig solver;           // grid-cell fits
    int final_restarts = 3;        // restarts for the kept per-stage fit
    bool refit = true;  // refit parameters on all data before the eval point
    int ar_max_order = 0; // 0 disables the per-series AR augmentation
    int threads = 1;
};

struct LagCell {
    int c = 0, k = 0;
    double fmse = 0.0;
    bool skipped = false;
};

struct LambdaCell {
    double lambda = 0.0;
    double fmse = 0.0;
};

struct ComponentSelection {
    int c_hat = 0, k_hat = 0;
    double lambda_hat = 0.0;
    double lambda_max = 0.0;
    std::vector<LagCell> fmse_surface;
    std::vector<LambdaCell> lambda_grid;
    double fmse = 0.0; // validation FMSE of the kept stage fit
};

struct CvReport {
    SplitSpec split;
    double alpha = 0.0;
    Index h = 0;
    LossKind loss = LossKind::G1;
    std::vector<ComponentSelection> components;          // accepted stages
    std::optional<ComponentSelection> rejected_stage;    // fired the stop rule
    std::vector<double> fmse_path; // FMSE^(1..s) (+ rejected stage when present)
    int s_hat = 0;
    double fmsecv = 0.0;
    std::vector<Index> ar_orders; // per series; empty when augmentation is off
};

struct CvOutcome {
    CvReport report;
    CcfModel model; // production model (refit per config)
};

/// Mean squared forecast-error norm over the origins [origin_lo, origin_hi];
/// residual rows are read at target time t+h. Throws config_error when no
/// valid (t, t+h) pair falls inside the residual range.
double validation_fmse(const AlignedMatrix& residuals, Index origin_lo,
                       Index origin_hi, Index h);

struct LagSelection {
    int c_hat = 0, k_hat = 0;
    std::vector<LagCell> surface;
};

/// Non-regularized fits over the (c,k) grid on the training origins,
/// scored on the first validation window. Ties break toward smaller c+k,
/// then smaller c.
LagSelection select_lags(const Eigen::MatrixXd& z_std,
                         const AlignedMatrix& targets, const SplitSpec& split,
                         const CvConfig& cfg, int stage = 1);

struct LambdaSelection {
    double lambda_hat = 0.0;
    double lambda_max = 0.0;
    std::vector<LambdaCell> grid;
    CoreComponent chosen;   // the grid fit at lambda_hat
    double chosen_fmse = 0.0;
};

/// Penalized fits over the lambda grid at fixed (c,k); ties toward larger
/// lambda (sparser).
LambdaSelection select_lambda(const Eigen::MatrixXd& z_std,
                              const AlignedMatrix& targets,
                              const SplitSpec& split, const CvConfig& cfg,
                              int c_hat, int k_hat, int stage = 1);

struct SelectionState {
    CvReport report;
    std::vector<CoreComponent> train_components; // fitted on training origins
    AlignedMatrix residuals; // chained over train+val1 after accepted stages
};

/// Full stage loop: lag selection, lambda selection, stage fit, stop rule.
/// Touches only training and first-validation rows.
SelectionState select_components(const Eigen::MatrixXd& y_std,
                                 const Eigen::MatrixXd& z_std,
                                 const SplitSpec& split, const CvConfig& cfg);

/// Unbiased FMSE on the second validation window: refits the selected
/// schedule on the rows preceding it (per cfg.refit) and averages squared
/// forecast-error norms over val2 origins.
double final_fmsecv(const Eigen::MatrixXd& y_std, const Eigen::MatrixXd& z_std,
                    const SelectionState& state, const SplitSpec& split,
                    const CvConfig& cfg);

/// End-to-end protocol on raw panels. Standardization uses train+val1 rows
/// only, so the second validation window cannot influence selection.
CvOutcome cross_validate(const TimeSeriesPanel& y_panel,
                         const TimeSeriesPanel& z_panel, const CvConfig& cfg);

/// One-line-per-component table plus the s_hat / FMSECV summary line.
std::string format_cv_table(const CvReport& report);

} // namespace ccf
