#pragma once

#include "ccf/panel.hpp"
#include "ccf/parallel.hpp"

namespace ccf {

struct SdpcaCaps {
    int q_max = 3;  // predictor lag orders searched
    int s_max = 10; // principal components searched
};

/// Predictive-scaling regressions for one target series: the scaled value
/// of predictor i at origin t is sum_r gamma(i,r) z_{t-r,i}.
struct ScaledPredictors {
    Eigen::MatrixXd gamma;      // m x q_lags
    Eigen::VectorXd intercepts; // m
    Index q_lags = 1;

    /// Scaled matrix over origins [origin_lo, origin_hi].
    AlignedMatrix scale(const Eigen::MatrixXd& z_std, Index origin_lo,
                        Index origin_hi) const;
};

/// Everything needed to forecast one target series.
struct SdpcaSeriesModel {
    int q_lags = 1;
    int s_pc = 1;
    ScaledPredictors scaling;
    Eigen::VectorXd pc_mean;    // center of the scaled matrix
    Eigen::MatrixXd directions; // m x s_pc, orthonormal
    Eigen::VectorXd coef;       // s_pc regression coefficients
    double intercept = 0.0;
    double val_fmse = 0.0; // first-validation error at the chosen (q, s)
};

struct SdpcaModel {
    Index h = 0;
    std::vector<SdpcaSeriesModel> per_series;
};

/// Least-squares fit of y_{t+h,j} on (z_{t,i}, ..., z_{t-q+1,i}) with
/// intercept, per predictor, over origins [origin_lo, origin_hi]; collinear
/// lag blocks get a 1e-8 ridge.
ScaledPredictors scale_predictors(const Eigen::MatrixXd& y_std, Index series,
                                  const Eigen::MatrixXd& z_std, Index q_lags,
                                  Index h, Index origin_lo, Index origin_hi);

/// Per-target-series supervised PCA with (q, s) selected on the first
/// validation window; fits use training origins only.
SdpcaModel sdpca_fit(const Eigen::MatrixXd& y_std, const Eigen::MatrixXd& z_std,
                     Index h, const SplitSpec& split, const SdpcaCaps& caps,
                     int threads = 1);

/// Re-estimates every series model at fixed (q, s) on origins up to
/// train_origin_hi (the refit step before final evaluation).
SdpcaModel sdpca_refit(const SdpcaModel& model, const Eigen::MatrixXd& y_std,
                       const Eigen::MatrixXd& z_std, Index train_origin_hi,
                       int threads = 1);

/// Stacked per-series forecasts of y_{origin+h}.
Eigen::VectorXd sdpca_forecast(const SdpcaModel& model,
                               const Eigen::MatrixXd& z_std, Index origin);

/// Mean squared forecast-error norm over origins [origin_lo, origin_hi].
double sdpca_window_fmse(const SdpcaModel& model, const Eigen::MatrixXd& y_std,
                         const Eigen::MatrixXd& z_std, Index origin_lo,
                         Index origin_hi);

} // namespace ccf
