#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ccf/errors.hpp"

namespace ccf {

using Index = Eigen::Index;

/// Per-column centering/scaling recorded by standardize(); suffices to
/// invert the transform.
struct StandardizationInfo {
    Eigen::VectorXd means;
    Eigen::VectorXd scales;
    std::vector<Index> constant_columns; // centered only, scale forced to 1

    Eigen::MatrixXd apply(const Eigen::MatrixXd& raw) const;
    Eigen::MatrixXd invert(const Eigen::MatrixXd& standardized) const;
    Eigen::VectorXd invert_row(const Eigen::VectorXd& standardized_row) const;
};

/// A T-by-n block of time series: rows are periods in ascending order,
/// columns are named series. Immutable by convention once built.
struct TimeSeriesPanel {
    Eigen::MatrixXd values;          // T x n
    std::vector<std::string> labels; // n names
    std::string t0;                  // optional first-period tag, informational

    Index rows() const { return values.rows(); }
    Index cols() const { return values.cols(); }

    /// Throws data_error on non-finite entries or label/shape mismatch.
    void validate() const;

    /// Sub-panel of the given columns, in list order. Unknown names throw
    /// config_error naming the offending column.
    TimeSeriesPanel select_columns(const std::vector<std::string>& names) const;

    /// Contiguous row range [first, first+count).
    TimeSeriesPanel slice_rows(Index first, Index count) const;
};

/// A matrix whose row r corresponds to absolute time first_time + r.
/// All lagged/derived matrices carry this tag so that y_{t+h} alignment is
/// done by absolute time, never by positional offset.
struct AlignedMatrix {
    Eigen::MatrixXd values;
    Index first_time = 0;

    Index rows() const { return values.rows(); }
    Index last_time() const { return first_time + values.rows() - 1; }
    /// Row for absolute time t (bounds-checked).
    Eigen::RowVectorXd at_time(Index t) const;
    bool contains_time(Index t) const {
        return t >= first_time && t <= last_time();
    }
};

/// A univariate series with an absolute-time tag for its first element.
struct AlignedSeries {
    Eigen::VectorXd values;
    Index first_time = 0;

    Index last_time() const { return first_time + values.size() - 1; }
};

/// Stacked-regressor layout x_t = (z_t', z_{t-1}', ..., z_{t-c}')' together
/// with the component lag count k and forecast horizon h.
struct LagDesign {
    Index c = 0; // lags of z stacked into x_t
    Index k = 0; // lags of the component series in the forecast equation
    Index h = 0; // forecast horizon
    Index m = 0; // raw explanatory dimension

    Index p() const { return m * (c + 1); }
    /// Earliest usable forecast origin (0-based absolute time).
    Index min_origin() const { return c + k; }
    void validate() const;
};

/// Chronological three-way split lengths. T1 = floor(alpha*T), the two
/// validation parts split the remainder as evenly as possible (T2 <= T3).
struct SplitSpec {
    double alpha = 0.0;
    Index T1 = 0, T2 = 0, T3 = 0;

    static SplitSpec compute(Index T, double alpha);
    Index total() const { return T1 + T2 + T3; }
};

struct SplitPanels {
    TimeSeriesPanel train, val1, val2;
    SplitSpec spec;
};

/// Center and scale every column to sample mean 0 and sample variance 1
/// (denominator T-1). Constant columns are centered only, with scale 1,
/// and listed in StandardizationInfo::constant_columns.
std::pair<TimeSeriesPanel, StandardizationInfo>
standardize(const TimeSeriesPanel& panel);

/// (T-c) x m(c+1) matrix whose row for time t is (z_t', ..., z_{t-c}')',
/// first_time = c. Requires T > c.
AlignedMatrix build_lag_matrix(const TimeSeriesPanel& panel, Index c);
AlignedMatrix build_lag_matrix(const Eigen::MatrixXd& values, Index c);

/// Window (f_t, f_{t-1}, ..., f_{t-k})' of a component series; t is an
/// absolute time index. Throws std::out_of_range outside the valid range.
Eigen::VectorXd component_window(const AlignedSeries& f, Index k, Index t);

/// Chronological, contiguous, non-overlapping split per SplitSpec.
SplitPanels split(const TimeSeriesPanel& panel, double alpha);

} // namespace ccf
