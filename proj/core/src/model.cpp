#include "ccf/model.hpp"

#include <cmath>

namespace ccf {

Index CcfModel::max_span() const {
    Index d = 0;
    for (const auto& comp : components) d = std::max(d, comp.span());
    return d;
}

namespace {

// Component series f_t(beta) over every origin the lag structure supports.
AlignedSeries component_series(const Eigen::MatrixXd& z_values,
                               const CoreComponent& comp,
                               std::shared_ptr<const AlignedMatrix> lag) {
    AlignedSeries f;
    if (lag && lag->values.cols() == comp.beta.size()) {
        f.values = lag->values * comp.beta;
        f.first_time = lag->first_time;
        return f;
    }
    AlignedMatrix built = build_lag_matrix(z_values, comp.c);
    f.values = built.values * comp.beta;
    f.first_time = built.first_time;
    return f;
}

// Predictions gamma * f_t(beta) for origins t in [lo, hi].
Eigen::MatrixXd component_predictions(const AlignedSeries& f,
                                      const CoreComponent& comp, Index lo,
                                      Index hi) {
    const Index n = hi - lo + 1;
    Eigen::MatrixXd F(n, comp.k + 1);
    for (Index j = 0; j <= comp.k; ++j)
        F.col(j) = f.values.segment(lo - j - f.first_time, n);
    return F * comp.gamma.transpose(); // n x q
}

} // namespace

ExtractResult extract_component(const AlignedMatrix& targets,
                                const Eigen::MatrixXd& z_values, Index c,
                                Index k, double lambda, Index h, LossKind loss,
                                const SolverConfig& cfg, Index train_origin_hi,
                                std::shared_ptr<const AlignedMatrix> lag_matrix) {
    LagDesign design{c, k, h, z_values.cols()};
    if (!lag_matrix)
        lag_matrix = std::make_shared<AlignedMatrix>(build_lag_matrix(z_values, c));

    FitProblem prob = make_fit_problem(lag_matrix, targets, design, loss, lambda,
                                       0, train_origin_hi);
    Eigen::VectorXd init = loss == LossKind::G1 ? init_redundancy(prob)
                                                : init_canonical(prob);
    auto [params, trace] = proximal_fit(prob, init, cfg);

    ExtractResult out;
    out.component = CoreComponent{params.beta, params.gamma, c, k, lambda};
    out.trace = std::move(trace);

    // New residuals over the whole usable range, not just the training part:
    // origins t in [max(first_target - h, c+k), min(last_target - h, T-1)].
    AlignedSeries f = component_series(z_values, out.component, lag_matrix);
    Index lo = std::max(targets.first_time - h, design.min_origin());
    Index hi = std::min(targets.last_time() - h, f.last_time());
    if (hi < lo) throw config_error("no usable origins for residual update");
    Eigen::MatrixXd pred = component_predictions(f, out.component, lo, hi);
    out.residuals.first_time = lo + h;
    out.residuals.values =
        targets.values.middleRows(lo + h - targets.first_time, hi - lo + 1) - pred;
    return out;
}

CcfModel fit_model_standardized(const Eigen::MatrixXd& y_std_values,
                                const Eigen::MatrixXd& z_std_values,
                                const StandardizationInfo& y_info,
                                const StandardizationInfo& z_info,
                                const std::vector<std::string>& y_labels,
                                const std::vector<std::string>& z_labels,
                                const std::vector<ScheduleEntry>& schedule,
                                Index h, LossKind loss, const SolverConfig& cfg,
                                Index train_origin_hi) {
    if (schedule.empty()) throw config_error("component schedule is empty");

    CcfModel model;
    model.y_std = y_info;
    model.z_std = z_info;
    model.y_labels = y_labels;
    model.z_labels = z_labels;
    model.h = h;
    model.loss = loss;

    AlignedMatrix residuals{y_std_values, 0};
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const auto& entry = schedule[i];
        double before = residuals.values.squaredNorm() /
                        static_cast<double>(residuals.rows());
        ExtractResult step;
        try {
            step = extract_component(residuals, z_std_values, entry.c, entry.k,
                                     entry.lambda, h, loss, cfg, train_origin_hi);
        } catch (const std::exception& e) {
            throw numeric_error("component " + std::to_string(i + 1) +
                                " failed: " + e.what());
        }
        residuals = std::move(step.residuals);
        double after = residuals.values.squaredNorm() /
                       static_cast<double>(residuals.rows());
        model.components.push_back(std::move(step.component));
        model.stage_losses.emplace_back(before, after);
    }
    return model;
}

CcfModel fit_model(const TimeSeriesPanel& y_panel, const TimeSeriesPanel& z_panel,
                   const std::vector<ScheduleEntry>& schedule, Index h,
                   LossKind loss, const SolverConfig& cfg) {
    auto [y_std, y_info] = standardize(y_panel);
    auto [z_std, z_info] = standardize(z_panel);
    return fit_model_standardized(y_std.values, z_std.values, y_info, z_info,
                                  y_panel.labels, z_panel.labels, schedule, h,
                                  loss, cfg);
}

Eigen::VectorXd forecast_standardized(const CcfModel& model,
                                      const Eigen::MatrixXd& y_std_values,
                                      const Eigen::MatrixXd& z_std_values,
                                      Index origin) {
    if (model.components.empty()) throw config_error("model has no components");
    const Index d = model.max_span();
    if (origin < d || origin >= z_std_values.rows())
        throw config_error("insufficient history: forecast origin " +
                           std::to_string(origin) + " needs " +
                           std::to_string(d) + " past rows");

    const Index m = z_std_values.cols();
    Eigen::VectorXd yhat = Eigen::VectorXd::Zero(y_std_values.cols());
    for (const auto& comp : model.components) {
        Eigen::VectorXd window(comp.k + 1); // f_{origin-j}, j = 0..k
        for (Index j = 0; j <= comp.k; ++j) {
            double f = 0.0;
            for (Index l = 0; l <= comp.c; ++l)
                f += comp.beta.segment(l * m, m).dot(
                    z_std_values.row(origin - j - l));
            window(j) = f;
        }
        yhat.noalias() += comp.gamma * window;
    }
    for (const auto& ar : model.ar_augment) {
        if (origin - ar.order < 0)
            throw config_error("insufficient history for the AR augmentation");
        for (Index r = 1; r <= ar.order; ++r)
            yhat(ar.series) += ar.coefficients(r - 1) *
                               y_std_values(origin - r, ar.series);
    }
    return yhat;
}

ForecastResult forecast(const CcfModel& model, const TimeSeriesPanel& y_panel,
                        const TimeSeriesPanel& z_panel, Index origin) {
    if (y_panel.labels != model.y_labels || z_panel.labels != model.z_labels)
        throw data_error("panel columns do not match the model's series");
    Eigen::MatrixXd y_std = model.y_std.apply(y_panel.values);
    Eigen::MatrixXd z_std = model.z_std.apply(z_panel.values);
    ForecastResult out;
    out.standardized = forecast_standardized(model, y_std, z_std, origin);
    out.destandardized = model.y_std.invert_row(out.standardized);
    return out;
}

AlignedMatrix model_residuals(const CcfModel& model,
                              const Eigen::MatrixXd& y_std_values,
                              const Eigen::MatrixXd& z_std_values,
                              Index origin_hi) {
    if (model.components.empty()) throw config_error("model has no components");
    const Index d = model.max_span();
    Index lo = d;
    Index hi = std::min({y_std_values.rows() - 1 - model.h,
                         z_std_values.rows() - 1, origin_hi});
    if (hi < lo) throw config_error("no usable origins for residual evaluation");

    AlignedMatrix resid;
    resid.first_time = lo + model.h;
    resid.values = y_std_values.middleRows(lo + model.h, hi - lo + 1);
    for (const auto& comp : model.components) {
        AlignedSeries f = component_series(z_std_values, comp, nullptr);
        resid.values -= component_predictions(f, comp, lo, hi);
    }
    for (const auto& ar : model.ar_augment) {
        for (Index t = lo; t <= hi; ++t) {
            if (t - ar.order < 0) continue;
            double add = 0.0;
            for (Index r = 1; r <= ar.order; ++r)
                add += ar.coefficients(r - 1) * y_std_values(t - r, ar.series);
            resid.values(t - lo, ar.series) -= add;
        }
    }
    return resid;
}

CcfModel fit_ar_augment_standardized(const CcfModel& model,
                                     const Eigen::MatrixXd& y_std_values,
                                     const Eigen::MatrixXd& z_std_values,
                                     const std::vector<Index>& orders,
                                     Index train_origin_hi) {
    if (static_cast<Index>(orders.size()) != model.q())
        throw config_error("AR orders list must have one entry per target series");
    CcfModel base = model;
    base.ar_augment.clear();
    AlignedMatrix errors = model_residuals(base, y_std_values, z_std_values,
                                           train_origin_hi);
    const Index d = base.max_span();
    const Index hi = errors.last_time() - base.h; // last origin

    CcfModel out = std::move(base);
    for (Index j = 0; j < out.q(); ++j) {
        const Index pj = orders[static_cast<std::size_t>(j)];
        if (pj == 0) continue;
        Index lo = std::max(d, pj); // origins need pj lagged y values
        Index n = hi - lo + 1;
        if (n < pj + 1)
            throw config_error("AR order " + std::to_string(pj) +
                               " too large for the sample of series " +
                               std::to_string(j));
        Eigen::MatrixXd R(n, pj);
        Eigen::VectorXd e(n);
        for (Index t = lo; t <= hi; ++t) {
            e(t - lo) = errors.values(t + out.h - errors.first_time, j);
            for (Index r = 1; r <= pj; ++r)
                R(t - lo, r - 1) = y_std_values(t - r, j);
        }
        Eigen::MatrixXd RtR = R.transpose() * R;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(RtR);
        Eigen::VectorXd phi = ldlt.solve(R.transpose() * e);
        if (ldlt.info() != Eigen::Success || !phi.allFinite()) {
            RtR.diagonal().array() += 1e-10 * RtR.trace() / static_cast<double>(pj);
            phi = RtR.ldlt().solve(R.transpose() * e);
            if (!phi.allFinite())
                throw numeric_error("AR regression is singular for series " +
                                    std::to_string(j));
        }
        out.ar_augment.push_back(ArAugment{j, pj, std::move(phi)});
    }
    return out;
}

CcfModel fit_ar_augment(const CcfModel& model, const TimeSeriesPanel& y_panel,
                        const TimeSeriesPanel& z_panel,
                        const std::vector<Index>& orders) {
    Eigen::MatrixXd y_std = model.y_std.apply(y_panel.values);
    Eigen::MatrixXd z_std = model.z_std.apply(z_panel.values);
    return fit_ar_augment_standardized(model, y_std, z_std, orders);
}

Index parameter_count(const CcfModel& model) {
    Index total = 0;
    for (const auto& comp : model.components)
        total += model.m() * (comp.c + 1) + model.q() * (comp.k + 1);
    return total;
}

} // namespace ccf
