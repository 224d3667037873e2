#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "ccf/model.hpp"
#include "ccf/selection.hpp"
#include "ccf/simulate.hpp"

namespace ccf {

inline constexpr int model_format_version = 1;
inline constexpr int report_format_version = 1;

nlohmann::json model_to_json(const CcfModel& model);
CcfModel model_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const CvReport& report);
CvReport report_from_json(const nlohmann::json& j);

nlohmann::json sim_result_to_json(const SimResult& result, const SimConfig& cfg);

void save_json(const nlohmann::json& j, const std::string& path);
nlohmann::json load_json(const std::string& path);

void save_model(const CcfModel& model, const std::string& path);
CcfModel load_model(const std::string& path);

void save_report(const CvReport& report, const std::string& path);
CvReport load_report(const std::string& path);

} // namespace ccf
