#include "ccf/panel.hpp"

#include <cmath>
#include <sstream>

namespace ccf {

Eigen::MatrixXd StandardizationInfo::apply(const Eigen::MatrixXd& raw) const {
    if (raw.cols() != means.size())
        throw data_error("standardization info has " + std::to_string(means.size()) +
                         " columns, data has " + std::to_string(raw.cols()));
    return (raw.rowwise() - means.transpose()).array().rowwise() /
           scales.transpose().array();
}

Eigen::MatrixXd StandardizationInfo::invert(const Eigen::MatrixXd& standardized) const {
    if (standardized.cols() != means.size())
        throw data_error("standardization info does not match data width");
    return (standardized.array().rowwise() * scales.transpose().array()).matrix().rowwise() +
           means.transpose();
}

Eigen::VectorXd StandardizationInfo::invert_row(const Eigen::VectorXd& row) const {
    if (row.size() != means.size())
        throw data_error("standardization info does not match vector length");
    return (row.array() * scales.array() + means.array()).matrix();
}

void TimeSeriesPanel::validate() const {
    if (!labels.empty() && static_cast<Index>(labels.size()) != values.cols())
        throw data_error("panel has " + std::to_string(values.cols()) +
                         " columns but " + std::to_string(labels.size()) + " labels");
    if (values.rows() < 1 || values.cols() < 1)
        throw data_error("panel must have at least one row and one column");
    for (Index j = 0; j < values.cols(); ++j)
        for (Index i = 0; i < values.rows(); ++i)
            if (!std::isfinite(values(i, j))) {
                std::ostringstream msg;
                msg << "non-finite value at row " << i << ", column "
                    << (j < static_cast<Index>(labels.size()) ? labels[j]
                                                              : std::to_string(j));
                throw data_error(msg.str());
            }
}

TimeSeriesPanel TimeSeriesPanel::select_columns(
    const std::vector<std::string>& names) const {
    TimeSeriesPanel out;
    out.t0 = t0;
    out.values.resize(values.rows(), static_cast<Index>(names.size()));
    out.labels = names;
    for (std::size_t j = 0; j < names.size(); ++j) {
        Index src = -1;
        for (std::size_t l = 0; l < labels.size(); ++l)
            if (labels[l] == names[j]) {
                src = static_cast<Index>(l);
                break;
            }
        if (src < 0)
            throw config_error("column not found in data: " + names[j]);
        out.values.col(static_cast<Index>(j)) = values.col(src);
    }
    return out;
}

TimeSeriesPanel TimeSeriesPanel::slice_rows(Index first, Index count) const {
    if (first < 0 || count < 0 || first + count > values.rows())
        throw config_error("row slice out of range");
    TimeSeriesPanel out;
    out.values = values.middleRows(first, count);
    out.labels = labels;
    out.t0 = t0;
    return out;
}

Eigen::RowVectorXd AlignedMatrix::at_time(Index t) const {
    if (!contains_time(t))
        throw std::out_of_range("time index " + std::to_string(t) +
                                " outside [" + std::to_string(first_time) + ", " +
                                std::to_string(last_time()) + "]");
    return values.row(t - first_time);
}

void LagDesign::validate() const {
    if (c < 0 || k < 0 || h < 0 || m < 1)
        throw config_error("lag design requires c,k,h >= 0 and m >= 1");
}

SplitSpec SplitSpec::compute(Index T, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw config_error("split fraction alpha must lie in (0,1)");
    SplitSpec s;
    s.alpha = alpha;
    s.T1 = static_cast<Index>(std::floor(alpha * static_cast<double>(T)));
    s.T2 = (T - s.T1) / 2;
    s.T3 = T - s.T1 - s.T2;
    if (s.T1 < 1 || s.T2 < 1 || s.T3 < 1)
        throw config_error("degenerate split: T=" + std::to_string(T) +
                           ", alpha=" + std::to_string(alpha));
    return s;
}

std::pair<TimeSeriesPanel, StandardizationInfo>
standardize(const TimeSeriesPanel& panel) {
    panel.validate();
    const Index T = panel.rows();
    const Index n = panel.cols();
    if (T < 2) throw data_error("standardize requires at least 2 rows");

    StandardizationInfo info;
    info.means = panel.values.colwise().mean();
    info.scales.resize(n);

    Eigen::MatrixXd centered = panel.values.rowwise() - info.means.transpose();
    for (Index j = 0; j < n; ++j) {
        double var = centered.col(j).squaredNorm() / static_cast<double>(T - 1);
        if (var < 1e-24) {
            info.scales(j) = 1.0; // constant column: center only
            info.constant_columns.push_back(j);
        } else {
            info.scales(j) = std::sqrt(var);
        }
    }

    TimeSeriesPanel out;
    out.values = centered.array().rowwise() / info.scales.transpose().array();
    out.labels = panel.labels;
    out.t0 = panel.t0;
    return {std::move(out), std::move(info)};
}

AlignedMatrix build_lag_matrix(const Eigen::MatrixXd& values, Index c) {
    const Index T = values.rows();
    const Index m = values.cols();
    if (c < 0) throw config_error("lag count c must be >= 0");
    if (c >= T)
        throw config_error("lag count c=" + std::to_string(c) +
                           " leaves an empty sample (T=" + std::to_string(T) + ")");
    AlignedMatrix out;
    out.first_time = c;
    out.values.resize(T - c, m * (c + 1));
    for (Index l = 0; l <= c; ++l)
        out.values.middleCols(l * m, m) = values.middleRows(c - l, T - c);
    return out;
}

AlignedMatrix build_lag_matrix(const TimeSeriesPanel& panel, Index c) {
    panel.validate();
    return build_lag_matrix(panel.values, c);
}

Eigen::VectorXd component_window(const AlignedSeries& f, Index k, Index t) {
    if (k < 0) throw config_error("window lag count k must be >= 0");
    if (t - k < f.first_time || t > f.last_time())
        throw std::out_of_range("component window [" + std::to_string(t - k) + ", " +
                                std::to_string(t) + "] outside series range");
    Eigen::VectorXd w(k + 1);
    for (Index j = 0; j <= k; ++j) w(j) = f.values(t - j - f.first_time);
    return w;
}

SplitPanels split(const TimeSeriesPanel& panel, double alpha) {
    panel.validate();
    SplitSpec spec = SplitSpec::compute(panel.rows(), alpha);
    SplitPanels out;
    out.spec = spec;
    out.train = panel.slice_rows(0, spec.T1);
    out.val1 = panel.slice_rows(spec.T1, spec.T2);
    out.val2 = panel.slice_rows(spec.T1 + spec.T2, spec.T3);
    return out;
}

} // namespace ccf
