#pragma once

#include <string>

#include "ccf/panel.hpp"

namespace ccf {

/// Wide-layout CSV: header row of series names, one row per period in
/// ascending time order, decimal points, no thousands separators. An
/// optional first column named "date" is kept as row tags but ignored
/// numerically. Ragged rows, non-numeric cells, and non-finite values are
/// rejected with data_error.
TimeSeriesPanel read_csv_panel(const std::string& path);

/// Writes values with 17 significant digits (round-trip exact).
void write_csv_panel(const TimeSeriesPanel& panel, const std::string& path);

std::string format_double(double v);

} // namespace ccf
