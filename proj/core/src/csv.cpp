#include "ccf/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace ccf {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string trimmed(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, std::size_t row, const std::string& col) {
    std::string s = trimmed(raw);
    if (s.empty())
        throw data_error("missing value at data row " + std::to_string(row) +
                         ", column " + col);
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE)
        throw data_error("cannot parse '" + s + "' at data row " +
                         std::to_string(row) + ", column " + col);
    if (!std::isfinite(v))
        throw data_error("non-finite value at data row " + std::to_string(row) +
                         ", column " + col);
    return v;
}

} // namespace

TimeSeriesPanel read_csv_panel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open CSV file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw data_error("empty CSV file: " + path);
    std::vector<std::string> header = split_line(line);
    for (auto& h : header) h = trimmed(h);
    if (header.empty()) throw data_error("CSV header is empty: " + path);

    bool has_date = header.front() == "date";
    std::size_t first_col = has_date ? 1 : 0;
    if (header.size() <= first_col)
        throw data_error("CSV has no data columns: " + path);

    TimeSeriesPanel panel;
    panel.labels.assign(header.begin() + static_cast<std::ptrdiff_t>(first_col),
                        header.end());

    std::vector<std::vector<double>> rows;
    std::string first_date;
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        if (line.empty() && in.eof()) break;
        ++row_no;
        std::vector<std::string> fields = split_line(line);
        if (fields.size() != header.size())
            throw data_error("data row " + std::to_string(row_no) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(header.size()));
        if (has_date && row_no == 1) first_date = trimmed(fields[0]);
        std::vector<double> row(panel.labels.size());
        for (std::size_t j = 0; j < panel.labels.size(); ++j)
            row[j] = parse_cell(fields[j + first_col], row_no, panel.labels[j]);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw data_error("CSV has no data rows: " + path);

    panel.t0 = first_date;
    panel.values.resize(static_cast<Index>(rows.size()),
                        static_cast<Index>(panel.labels.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            panel.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    return panel;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_csv_panel(const TimeSeriesPanel& panel, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write CSV file: " + path);
    for (std::size_t j = 0; j < panel.labels.size(); ++j) {
        if (j) out << ',';
        out << panel.labels[j];
    }
    out << '\n';
    for (Index i = 0; i < panel.rows(); ++i) {
        for (Index j = 0; j < panel.cols(); ++j) {
            if (j) out << ',';
            out << format_double(panel.values(i, j));
        }
        out << '\n';
    }
}

} // namespace ccf
