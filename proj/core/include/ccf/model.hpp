#pragma once

#include <limits>
#include <vector>

#include "ccf/objective.hpp"
#include "ccf/solver.hpp"

namespace ccf {

/// One fitted core component: unit-norm loading over the stacked regressors
/// plus its forecast-equation coefficients and hyper-parameters.
struct CoreComponent {
    Eigen::VectorXd beta;  // length m(c+1), ||beta||_2 = 1
    Eigen::MatrixXd gamma; // q x (k+1)
    Index c = 0;
    Index k = 0;
    double lambda = 0.0;

    Index span() const { return c + k; }
};

/// Per-series autoregression of forecast errors on lagged target values.
struct ArAugment {
    Index series = 0;
    Index order = 0;
    Eigen::VectorXd coefficients;
};

struct ScheduleEntry {
    Index c = 0;
    Index k = 0;
    double lambda = 0.0;
};

/// Ordered list of components sharing one horizon and loss, plus the
/// standardization applied before fitting. Forecasts are produced on the
/// standardized scale and de-standardized with the stored info.
struct CcfModel {
    std::vector<CoreComponent> components;
    std::vector<ArAugment> ar_augment; // optional, possibly empty
    StandardizationInfo y_std, z_std;
    std::vector<std::string> y_labels, z_labels;
    Index h = 0;
    LossKind loss = LossKind::G1;

    // In-sample mean squared residual norm before/after each stage, on that
    // stage's index range. Diagnostics only; not serialized.
    std::vector<std::pair<double, double>> stage_losses;

    Index q() const { return static_cast<Index>(y_labels.size()); }
    Index m() const { return static_cast<Index>(z_labels.size()); }
    /// d = max_i (c_i + k_i); earliest forecast origin.
    Index max_span() const;
};

struct ExtractResult {
    CoreComponent component;
    AlignedMatrix residuals; // updated targets over the trimmed common range
    FitTrace trace;
};

/// Fits one component to the current residual targets (standardized scale)
/// and returns the chained residuals e^{(i+1)} = e^{(i)} - gamma f(beta).
/// Fitting uses origins <= train_origin_hi; residuals are produced over the
/// whole intersection of the target range and the lag structure.
ExtractResult extract_component(
    const AlignedMatrix& targets, const Eigen::MatrixXd& z_values, Index c,
    Index k, double lambda, Index h, LossKind loss, const SolverConfig& cfg,
    Index train_origin_hi = std::numeric_limits<Index>::max(),
    std::shared_ptr<const AlignedMatrix> lag_matrix = nullptr);

/// Standardizes both panels, then applies extract_component sequentially
/// over the schedule.
CcfModel fit_model(const TimeSeriesPanel& y_panel, const TimeSeriesPanel& z_panel,
                   const std::vector<ScheduleEntry>& schedule, Index h,
                   LossKind loss, const SolverConfig& cfg = {});

/// Same, over already-standardized value matrices (infos supplied).
CcfModel fit_model_standardized(const Eigen::MatrixXd& y_std_values,
                                const Eigen::MatrixXd& z_std_values,
                                const StandardizationInfo& y_info,
                                const StandardizationInfo& z_info,
                                const std::vector<std::string>& y_labels,
                                const std::vector<std::string>& z_labels,
                                const std::vector<ScheduleEntry>& schedule,
                                Index h, LossKind loss, const SolverConfig& cfg = {},
                                Index train_origin_hi = std::numeric_limits<Index>::max());

struct ForecastResult {
    Eigen::VectorXd standardized;
    Eigen::VectorXd destandardized;
};

/// Multi-component forecast of y_{origin+h} from standardized histories:
/// sum_i gamma^(i) f_origin(beta^(i)) plus AR terms when present.
Eigen::VectorXd forecast_standardized(const CcfModel& model,
                                      const Eigen::MatrixXd& y_std_values,
                                      const Eigen::MatrixXd& z_std_values,
                                      Index origin);

/// Forecast from raw panels: standardizes with the model's stored info and
/// returns both scales. `origin` is the forecast origin T (0-based row).
ForecastResult forecast(const CcfModel& model, const TimeSeriesPanel& y_panel,
                        const TimeSeriesPanel& z_panel, Index origin);

/// Chained residual targets of the model over its common index range
/// (standardized scale); rows tagged by target time t+h.
AlignedMatrix model_residuals(const CcfModel& model,
                              const Eigen::MatrixXd& y_std_values,
                              const Eigen::MatrixXd& z_std_values,
                              Index origin_hi = std::numeric_limits<Index>::max());

/// Per-series least-squares AR fit of the model's forecast errors on lagged
/// y values (no intercept); returns a copy of the model with the AR terms.
/// orders[j] = 0 leaves series j un-augmented.
CcfModel fit_ar_augment(const CcfModel& model, const TimeSeriesPanel& y_panel,
                        const TimeSeriesPanel& z_panel,
                        const std::vector<Index>& orders);

CcfModel fit_ar_augment_standardized(const CcfModel& model,
                                     const Eigen::MatrixXd& y_std_values,
                                     const Eigen::MatrixXd& z_std_values,
                                     const std::vector<Index>& orders,
                                     Index train_origin_hi = std::numeric_limits<Index>::max());

/// Total parameter count sum_i [m(c_i+1) + q(k_i+1)].
Index parameter_count(const CcfModel& model);

} // namespace ccf
