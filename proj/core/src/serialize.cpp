#include "ccf/serialize.hpp"

#include <fstream>

namespace ccf {

using nlohmann::json;

namespace {

json vec_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
    Eigen::VectorXd v(static_cast<Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        v(static_cast<Index>(i)) = a[i].get<double>();
    return v;
}

json mat_to_json(const Eigen::MatrixXd& m) { // array of rows
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd mat_from_json(const json& rows) {
    if (rows.empty()) return Eigen::MatrixXd();
    Eigen::MatrixXd m(static_cast<Index>(rows.size()),
                      static_cast<Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size())
            throw data_error("ragged matrix in JSON document");
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j].get<double>();
    }
    return m;
}

json std_info_to_json(const StandardizationInfo& info) {
    json j;
    j["means"] = vec_to_json(info.means);
    j["scales"] = vec_to_json(info.scales);
    j["constant_columns"] = info.constant_columns;
    return j;
}

StandardizationInfo std_info_from_json(const json& j) {
    StandardizationInfo info;
    info.means = vec_from_json(j.at("means"));
    info.scales = vec_from_json(j.at("scales"));
    if (j.contains("constant_columns"))
        info.constant_columns = j.at("constant_columns").get<std::vector<Index>>();
    return info;
}

void check_kind(const json& j, const std::string& kind, int version) {
    if (!j.is_object() || j.value("kind", "") != kind)
        throw data_error("JSON document is not a " + kind);
    if (j.value("format_version", 0) > version)
        throw data_error("unsupported " + kind + " format version");
}

} // namespace

json model_to_json(const CcfModel& model) {
    json j;
    j["kind"] = "ccf_model";
    j["format_version"] = model_format_version;
    j["h"] = model.h;
    j["loss"] = to_string(model.loss);
    j["y_labels"] = model.y_labels;
    j["z_labels"] = model.z_labels;
    j["standardization"] = {{"y", std_info_to_json(model.y_std)},
                            {"z", std_info_to_json(model.z_std)}};
    json comps = json::array();
    for (const auto& comp : model.components) {
        json c;
        c["c"] = comp.c;
        c["k"] = comp.k;
        c["lambda"] = comp.lambda;
        c["beta"] = vec_to_json(comp.beta);
        c["gamma"] = mat_to_json(comp.gamma);
        comps.push_back(std::move(c));
    }
    j["components"] = std::move(comps);
    json ar = json::array();
    for (const auto& spec : model.ar_augment) {
        json a;
        a["series"] = spec.series;
        a["order"] = spec.order;
        a["coefficients"] = vec_to_json(spec.coefficients);
        ar.push_back(std::move(a));
    }
    j["ar_augment"] = std::move(ar);
    return j;
}

CcfModel model_from_json(const json& j) {
    check_kind(j, "ccf_model", model_format_version);
    CcfModel model;
    model.h = j.at("h").get<Index>();
    model.loss = loss_from_string(j.at("loss").get<std::string>());
    model.y_labels = j.at("y_labels").get<std::vector<std::string>>();
    model.z_labels = j.at("z_labels").get<std::vector<std::string>>();
    model.y_std = std_info_from_json(j.at("standardization").at("y"));
    model.z_std = std_info_from_json(j.at("standardization").at("z"));
    for (const auto& c : j.at("components")) {
        CoreComponent comp;
        comp.c = c.at("c").get<Index>();
        comp.k = c.at("k").get<Index>();
        comp.lambda = c.at("lambda").get<double>();
        comp.beta = vec_from_json(c.at("beta"));
        comp.gamma = mat_from_json(c.at("gamma"));
        model.components.push_back(std::move(comp));
    }
    if (j.contains("ar_augment"))
        for (const auto& a : j.at("ar_augment")) {
            ArAugment spec;
            spec.series = a.at("series").get<Index>();
            spec.order = a.at("order").get<Index>();
            spec.coefficients = vec_from_json(a.at("coefficients"));
            model.ar_augment.push_back(std::move(spec));
        }
    return model;
}

namespace {

json selection_to_json(const ComponentSelection& sel) {
    json c;
    c["c_hat"] = sel.c_hat;
    c["k_hat"] = sel.k_hat;
    c["lambda_hat"] = sel.lambda_hat;
    c["lambda_max"] = sel.lambda_max;
    c["fmse"] = sel.fmse;
    json surface = json::array();
    for (const auto& cell : sel.fmse_surface)
        surface.push_back({{"c", cell.c},
                           {"k", cell.k},
                           {"fmse", cell.fmse},
                           {"skipped", cell.skipped}});
    c["fmse_surface"] = std::move(surface);
    json grid = json::array();
    for (const auto& cell : sel.lambda_grid)
        grid.push_back({{"lambda", cell.lambda}, {"fmse", cell.fmse}});
    c["lambda_grid"] = std::move(grid);
    return c;
}

ComponentSelection selection_from_json(const json& c) {
    ComponentSelection sel;
    sel.c_hat = c.at("c_hat").get<int>();
    sel.k_hat = c.at("k_hat").get<int>();
    sel.lambda_hat = c.at("lambda_hat").get<double>();
    sel.lambda_max = c.at("lambda_max").get<double>();
    sel.fmse = c.at("fmse").get<double>();
    for (const auto& cell : c.at("fmse_surface"))
        sel.fmse_surface.push_back(LagCell{cell.at("c").get<int>(),
                                           cell.at("k").get<int>(),
                                           cell.at("fmse").get<double>(),
                                           cell.at("skipped").get<bool>()});
    for (const auto& cell : c.at("lambda_grid"))
        sel.lambda_grid.push_back(LambdaCell{cell.at("lambda").get<double>(),
                                             cell.at("fmse").get<double>()});
    return sel;
}

} // namespace

json report_to_json(const CvReport& report) {
    json j;
    j["kind"] = "ccf_cv_report";
    j["format_version"] = report_format_version;
    j["alpha"] = report.alpha;
    j["h"] = report.h;
    j["loss"] = to_string(report.loss);
    j["split"] = {{"T1", report.split.T1},
                  {"T2", report.split.T2},
                  {"T3", report.split.T3}};
    json comps = json::array();
    for (const auto& sel : report.components)
        comps.push_back(selection_to_json(sel));
    j["components"] = std::move(comps);
    if (report.rejected_stage)
        j["rejected_stage"] = selection_to_json(*report.rejected_stage);
    j["fmse_path"] = report.fmse_path;
    j["s_hat"] = report.s_hat;
    j["fmsecv"] = report.fmsecv;
    j["ar_orders"] = report.ar_orders;
    return j;
}

CvReport report_from_json(const json& j) {
    check_kind(j, "ccf_cv_report", report_format_version);
    CvReport report;
    report.alpha = j.at("alpha").get<double>();
    report.h = j.at("h").get<Index>();
    report.loss = loss_from_string(j.at("loss").get<std::string>());
    report.split.alpha = report.alpha;
    report.split.T1 = j.at("split").at("T1").get<Index>();
    report.split.T2 = j.at("split").at("T2").get<Index>();
    report.split.T3 = j.at("split").at("T3").get<Index>();
    for (const auto& c : j.at("components"))
        report.components.push_back(selection_from_json(c));
    if (j.contains("rejected_stage"))
        report.rejected_stage = selection_from_json(j.at("rejected_stage"));
    report.fmse_path = j.at("fmse_path").get<std::vector<double>>();
    report.s_hat = j.at("s_hat").get<int>();
    report.fmsecv = j.at("fmsecv").get<double>();
    if (j.contains("ar_orders"))
        report.ar_orders = j.at("ar_orders").get<std::vector<Index>>();
    return report;
}

json sim_result_to_json(const SimResult& result, const SimConfig& cfg) {
    json j;
    j["kind"] = "ccf_simulation";
    j["format_version"] = 1;
    j["config"] = {{"m", cfg.m},
                   {"q", cfg.q},
                   {"T_total", cfg.T_total},
                   {"reps", cfg.reps},
                   {"sigma_e", cfg.sigma_e},
                   {"seed", cfg.seed},
                   {"alpha", cfg.alpha},
                   {"burn_in", cfg.burn_in},
                   {"redraw_loadings", cfg.redraw_loadings}};
    json sums = json::array();
    for (const auto& s : result.summaries)
        sums.push_back({{"sigma_e", s.sigma_e},
                        {"fmse_ccf", s.fmse_ccf},
                        {"se_ccf", s.se_ccf},
                        {"fmse_sdpca", s.fmse_sdpca},
                        {"se_sdpca", s.se_sdpca},
                        {"ratio", s.ratio},
                        {"failures", s.failures}});
    j["summaries"] = std::move(sums);
    json recs = json::array();
    for (const auto& r : result.records) {
        json rec = {{"rep", r.rep},
                    {"sigma_e", r.sigma_e},
                    {"failed", r.failed},
                    {"err_ccf", r.err_ccf},
                    {"err_sdpca", r.err_sdpca},
                    {"s_hat", r.s_hat}};
        if (r.failed) rec["error"] = r.error;
        recs.push_back(std::move(rec));
    }
    j["replications"] = std::move(recs);
    return j;
}

void save_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write file: " + path);
    out << j.dump(2) << '\n';
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw data_error("invalid JSON in " + path + ": " + e.what());
    }
    return j;
}

void save_model(const CcfModel& model, const std::string& path) {
    save_json(model_to_json(model), path);
}

CcfModel load_model(const std::string& path) {
    return model_from_json(load_json(path));
}

void save_report(const CvReport& report, const std::string& path) {
    save_json(report_to_json(report), path);
}

CvReport load_report(const std::string& path) {
    return report_from_json(load_json(path));
}

} // namespace ccf
