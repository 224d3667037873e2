#include "ccf/baseline.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>

#include "ccf/errors.hpp"

namespace ccf {

AlignedMatrix ScaledPredictors::scale(const Eigen::MatrixXd& z_std,
                                      Index origin_lo, Index origin_hi) const {
    if (origin_lo < q_lags - 1 || origin_hi >= z_std.rows() || origin_hi < origin_lo)
        throw config_error("scaled-predictor window outside the data range");
    const Index n = origin_hi - origin_lo + 1;
    const Index m = z_std.cols();
    AlignedMatrix out;
    out.first_time = origin_lo;
    out.values = Eigen::MatrixXd::Zero(n, m);
    for (Index r = 0; r < q_lags; ++r)
        out.values += z_std.middleRows(origin_lo - r, n) *
                      gamma.col(r).asDiagonal();
    return out;
}

ScaledPredictors scale_predictors(const Eigen::MatrixXd& y_std, Index series,
                                  const Eigen::MatrixXd& z_std, Index q_lags,
                                  Index h, Index origin_lo, Index origin_hi) {
    if (q_lags < 1) throw config_error("predictor lag order must be >= 1");
    const Index m = z_std.cols();
    Index lo = std::max(origin_lo, q_lags - 1);
    Index hi = std::min({origin_hi, z_std.rows() - 1, y_std.rows() - 1 - h});
    if (hi < lo) throw config_error("empty sample for predictor scaling");
    const Index n = hi - lo + 1;

    ScaledPredictors out;
    out.q_lags = q_lags;
    out.gamma.resize(m, q_lags);
    out.intercepts.resize(m);

    Eigen::VectorXd target = y_std.col(series).segment(lo + h, n);
    Eigen::MatrixXd R(n, q_lags + 1);
    R.col(q_lags).setOnes();
    for (Index i = 0; i < m; ++i) {
        for (Index r = 0; r < q_lags; ++r)
            R.col(r) = z_std.col(i).segment(lo - r, n);
        Eigen::MatrixXd RtR = R.transpose() * R;
        Eigen::VectorXd rhs = R.transpose() * target;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(RtR);
        Eigen::VectorXd coef = ldlt.solve(rhs);
        if (ldlt.info() != Eigen::Success || !coef.allFinite()) {
            RtR.diagonal().array() += 1e-8;
            coef = RtR.ldlt().solve(rhs);
            if (!coef.allFinite())
                throw numeric_error("predictor scaling regression is singular");
        }
        out.gamma.row(i) = coef.head(q_lags).transpose();
        out.intercepts(i) = coef(q_lags);
    }
    return out;
}

namespace {

struct PcaBasis {
    Eigen::VectorXd mean;
    Eigen::MatrixXd directions; // m x rank
    Eigen::MatrixXd scores;     // n x rank, orthogonal columns, zero mean
};

PcaBasis pca(const Eigen::MatrixXd& data, Index max_rank) {
    PcaBasis out;
    out.mean = data.colwise().mean();
    Eigen::MatrixXd centered = data.rowwise() - out.mean.transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success)
        throw numeric_error("principal-component decomposition failed");
    Index rank = std::min<Index>(max_rank, svd.singularValues().size());
    out.directions = svd.matrixV().leftCols(rank);
    out.scores = svd.matrixU().leftCols(rank) *
                 svd.singularValues().head(rank).asDiagonal();
    return out;
}

SdpcaSeriesModel fit_series_fixed(const Eigen::MatrixXd& y_std,
                                  const Eigen::MatrixXd& z_std, Index series,
                                  Index h, int q_lags, int s_pc,
                                  Index train_origin_hi) {
    SdpcaSeriesModel out;
    out.q_lags = q_lags;
    out.s_pc = s_pc;
    out.scaling =
        scale_predictors(y_std, series, z_std, q_lags, h, 0, train_origin_hi);
    Index lo = q_lags - 1;
    AlignedMatrix scaled = out.scaling.scale(z_std, lo, train_origin_hi);
    PcaBasis basis = pca(scaled.values, s_pc);
    Index rank = basis.directions.cols();
    out.s_pc = static_cast<int>(rank);
    out.pc_mean = basis.mean;
    out.directions = basis.directions;

    Eigen::VectorXd target =
        y_std.col(series).segment(lo + h, train_origin_hi - lo + 1);
    out.intercept = target.mean();
    out.coef.resize(rank);
    for (Index l = 0; l < rank; ++l) {
        double denom = basis.scores.col(l).squaredNorm();
        out.coef(l) = denom > 0 ? basis.scores.col(l).dot(target) / denom : 0.0;
    }
    return out;
}

double series_window_fmse(const SdpcaSeriesModel& model,
                          const Eigen::MatrixXd& y_std,
                          const Eigen::MatrixXd& z_std, Index series, Index h,
                          Index origin_lo, Index origin_hi) {
    AlignedMatrix scaled = model.scaling.scale(z_std, origin_lo, origin_hi);
    Eigen::MatrixXd centered =
        scaled.values.rowwise() - model.pc_mean.transpose();
    Eigen::VectorXd pred =
        (centered * model.directions) * model.coef;
    pred.array() += model.intercept;
    Eigen::VectorXd target =
        y_std.col(series).segment(origin_lo + h, origin_hi - origin_lo + 1);
    return (target - pred).squaredNorm() / static_cast<double>(pred.size());
}

} // namespace

SdpcaModel sdpca_fit(const Eigen::MatrixXd& y_std, const Eigen::MatrixXd& z_std,
                     Index h, const SplitSpec& split, const SdpcaCaps& caps,
                     int threads) {
    if (caps.q_max < 1 || caps.s_max < 1)
        throw config_error("sdPCA caps must be >= 1");
    if (split.T2 <= h)
        throw config_error("validation window too short for horizon h");
    const Index q = y_std.cols();
    const Index train_hi = split.T1 - 1 - h;
    const Index val_lo = split.T1;
    const Index val_hi = split.T1 + split.T2 - 1 - h;

    SdpcaModel model;
    model.h = h;
    model.per_series.resize(static_cast<std::size_t>(q));

    parallel_for_index(static_cast<std::size_t>(q), threads, [&](std::size_t sj) {
        Index j = static_cast<Index>(sj);
        SdpcaSeriesModel best;
        double best_fmse = std::numeric_limits<double>::infinity();
        for (int ql = 1; ql <= caps.q_max; ++ql) {
            // One PCA per lag order; every s reuses its leading columns.
            SdpcaSeriesModel full =
                fit_series_fixed(y_std, z_std, j, h, ql, caps.s_max, train_hi);
            AlignedMatrix scaled_val = full.scaling.scale(z_std, val_lo, val_hi);
            Eigen::MatrixXd centered =
                scaled_val.values.rowwise() - full.pc_mean.transpose();
            Eigen::MatrixXd scores_val = centered * full.directions;
            Eigen::VectorXd target =
                y_std.col(j).segment(val_lo + h, val_hi - val_lo + 1);
            Eigen::VectorXd pred =
                Eigen::VectorXd::Constant(scores_val.rows(), full.intercept);
            for (int s = 1; s <= full.s_pc; ++s) {
                pred += full.coef(s - 1) * scores_val.col(s - 1);
                double fmse = (target - pred).squaredNorm() /
                              static_cast<double>(pred.size());
                if (fmse < best_fmse) {
                    best_fmse = fmse;
                    best = full;
                    best.s_pc = s;
                    best.directions = full.directions.leftCols(s);
                    best.coef = full.coef.head(s);
                    best.val_fmse = fmse;
                }
            }
        }
        if (!std::isfinite(best_fmse))
            throw numeric_error("sdPCA selection failed for series " +
                                std::to_string(j));
        model.per_series[sj] = std::move(best);
    });
    return model;
}

SdpcaModel sdpca_refit(const SdpcaModel& model, const Eigen::MatrixXd& y_std,
                       const Eigen::MatrixXd& z_std, Index train_origin_hi,
                       int threads) {
    SdpcaModel out;
    out.h = model.h;
    out.per_series.resize(model.per_series.size());
    parallel_for_index(model.per_series.size(), threads, [&](std::size_t sj) {
        const auto& prev = model.per_series[sj];
        out.per_series[sj] =
            fit_series_fixed(y_std, z_std, static_cast<Index>(sj), model.h,
                             prev.q_lags, prev.s_pc, train_origin_hi);
        out.per_series[sj].val_fmse = prev.val_fmse;
    });
    return out;
}

Eigen::VectorXd sdpca_forecast(const SdpcaModel& model,
                               const Eigen::MatrixXd& z_std, Index origin) {
    const Index q = static_cast<Index>(model.per_series.size());
    Eigen::VectorXd yhat(q);
    for (Index j = 0; j < q; ++j) {
        const auto& sm = model.per_series[static_cast<std::size_t>(j)];
        if (origin < sm.q_lags - 1 || origin >= z_std.rows())
            throw config_error("insufficient history for the sdPCA forecast");
        AlignedMatrix scaled = sm.scaling.scale(z_std, origin, origin);
        Eigen::VectorXd centered =
            (scaled.values.row(0).transpose() - sm.pc_mean);
        yhat(j) = sm.intercept +
                  sm.coef.dot(sm.directions.transpose() * centered);
    }
    return yhat;
}

double sdpca_window_fmse(const SdpcaModel& model, const Eigen::MatrixXd& y_std,
                         const Eigen::MatrixXd& z_std, Index origin_lo,
                         Index origin_hi) {
    if (origin_hi < origin_lo) throw config_error("empty evaluation window");
    double sum = 0.0;
    for (std::size_t sj = 0; sj < model.per_series.size(); ++sj)
        sum += series_window_fmse(model.per_series[sj], y_std, z_std,
                                  static_cast<Index>(sj), model.h, origin_lo,
                                  origin_hi);
    return sum; // sum over series of per-series MSE = mean ||e||^2 per origin
}

} // namespace ccf
