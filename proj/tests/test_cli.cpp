#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "ccf/csv.hpp"
#include "ccf/pipeline.hpp"
#include "test_support.hpp"

using namespace ccf;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CliResult run_cli(const std::string& args, const fs::path& dir) {
    fs::create_directories(dir);
    fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
    std::string cmd = std::string(CCF_CLI_PATH) + " " + args + " > " +
                      out.string() + " 2> " + err.string();
    int status = std::system(cmd.c_str());
    CliResult res;
    if (status >= 0 && WIFEXITED(status)) res.code = WEXITSTATUS(status);
    res.out = slurp(out);
    res.err = slurp(err);
    return res;
}

fs::path scratch_root() {
    fs::path root = fs::temp_directory_path() / "ccf_cli_tests";
    fs::create_directories(root);
    return root;
}

// 264 x 49 index-like panel: 20 target series and 29 explanatory series
// sharing two persistent common factors plus idiosyncratic noise.
fs::path write_hicp_like_csv(const fs::path& dir) {
    auto rng = make_rng(90210, 1);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Index T = 264, q = 20, mz = 29;

    Eigen::VectorXd f1 = Eigen::VectorXd::Zero(T), f2 = Eigen::VectorXd::Zero(T);
    for (Index t = 1; t < T; ++t) {
        f1(t) = 0.97 * f1(t - 1) + gauss(rng);
        f2(t) = 0.80 * f2(t - 1) + gauss(rng);
    }
    TimeSeriesPanel panel;
    panel.values.resize(T, q + mz);
    for (Index j = 0; j < q + mz; ++j) {
        double l1 = gauss(rng), l2 = gauss(rng);
        std::string name = (j < q ? "ez" : "x") +
                           std::to_string(j < q ? j + 1 : j - q + 1);
        panel.labels.push_back(name);
        for (Index t = 0; t < T; ++t)
            panel.values(t, j) = 100.0 + l1 * f1(t) + l2 * f2(t) + 0.3 * gauss(rng);
    }
    fs::create_directories(dir);
    fs::path csv = dir / "hicp_like.csv";
    write_csv_panel(panel, csv.string());
    return csv;
}

std::string columns_arg(const std::string& prefix, int from, int to) {
    std::string arg;
    for (int i = from; i <= to; ++i) {
        if (!arg.empty()) arg += ",";
        arg += prefix + std::to_string(i);
    }
    return arg;
}

} // namespace

TEST_CASE("cv command: end-to-end on a 264x49 panel, deterministic rerun") {
    fs::path root = scratch_root() / "cv";
    fs::remove_all(root);
    fs::path csv = write_hicp_like_csv(root);

    std::string common = "cv --data " + csv.string() + " --y-columns " +
                         columns_arg("ez", 1, 20) + " --z-columns " +
                         columns_arg("x", 1, 29) + " --alpha 0.7 --horizon 1 " +
                         "--cmax 1 --kmax 1 --grid 3 --max-components 2 " +
                         "--seed 7 --threads 2 --out ";

    CliResult first = run_cli(common + (root / "run1").string(), root / "log1");
    INFO(first.err);
    REQUIRE(first.code == 0);
    CHECK(fs::exists(root / "run1" / "report.json"));
    CHECK(fs::exists(root / "run1" / "model.json"));
    CHECK(fs::exists(root / "run1" / "summary.txt"));

    CvReport report = load_report((root / "run1" / "report.json").string());
    CHECK(report.split.T1 == 184);
    CHECK(report.split.T2 == 40);
    CHECK(report.split.T3 == 40);
    CHECK(report.s_hat >= 1);

    CliResult second = run_cli(common + (root / "run2").string(), root / "log2");
    REQUIRE(second.code == 0);
    for (const char* name : {"report.json", "model.json", "summary.txt"})
        CHECK(slurp(root / "run1" / name) == slurp(root / "run2" / name));
    CHECK(first.out == second.out);
}

TEST_CASE("cv command: a missing column is a config error naming it") {
    fs::path root = scratch_root() / "badcol";
    fs::remove_all(root);
    fs::path csv = write_hicp_like_csv(root);
    CliResult res = run_cli("cv --data " + csv.string() +
                                " --y-columns ez1,nosuchseries --z-columns x1,x2"
                                " --out " + (root / "out").string(),
                            root / "log");
    CHECK(res.code == exit_config_error);
    CHECK(res.err.find("nosuchseries") != std::string::npos);
    CHECK_FALSE(fs::exists(root / "out" / "model.json")); // no partial outputs
}

TEST_CASE("forecast command: model/data schema mismatch exits 3") {
    fs::path root = scratch_root() / "schema";
    fs::remove_all(root);
    fs::path csv = write_hicp_like_csv(root);

    CliResult fit = run_cli(
        "cv --data " + csv.string() + " --y-columns " + columns_arg("ez", 1, 5) +
            " --z-columns " + columns_arg("x", 1, 8) +
            " --cmax 0 --kmax 0 --grid 2 --max-components 1 --seed 3 --out " +
            (root / "fit").string(),
        root / "fitlog");
    REQUIRE(fit.code == 0);

    // Drop a column the model needs.
    TimeSeriesPanel all = read_csv_panel(csv.string());
    std::vector<std::string> keep;
    for (const auto& l : all.labels)
        if (l != "x3") keep.push_back(l);
    TimeSeriesPanel reduced = all.select_columns(keep);
    fs::path reduced_csv = root / "reduced.csv";
    write_csv_panel(reduced, reduced_csv.string());

    CliResult bad = run_cli("forecast --model " +
                                (root / "fit" / "model.json").string() +
                                " --data " + reduced_csv.string() + " --out " +
                                (root / "fc").string(),
                            root / "fclog");
    CHECK(bad.code == exit_schema_error);

    CliResult good = run_cli("forecast --model " +
                                 (root / "fit" / "model.json").string() +
                                 " --data " + csv.string() + " --out " +
                                 (root / "fc2").string(),
                             root / "fc2log");
    REQUIRE(good.code == 0);
    std::string fc = slurp(root / "fc2" / "forecast.csv");
    CHECK(fc.rfind("series,forecast_standardized,forecast", 0) == 0);
    // Header plus one line per target series.
    CHECK(std::count(fc.begin(), fc.end(), '\n') == 6);
}

TEST_CASE("fit command honours an explicit schedule from config JSON") {
    fs::path root = scratch_root() / "fitcmd";
    fs::remove_all(root);
    fs::path csv = write_hicp_like_csv(root);

    nlohmann::json cfg;
    cfg["data"] = csv.string();
    cfg["y_columns"] = nlohmann::json::array();
    for (int i = 1; i <= 4; ++i) cfg["y_columns"].push_back("ez" + std::to_string(i));
    cfg["z_columns"] = nlohmann::json::array();
    for (int i = 1; i <= 6; ++i) cfg["z_columns"].push_back("x" + std::to_string(i));
    cfg["horizon"] = 1;
    cfg["schedule"] = nlohmann::json::array(
        {{{"c", 1}, {"k", 0}, {"lambda", 0.05}}, {{"c", 0}, {"k", 1}}});
    cfg["out"] = (root / "out").string();
    fs::create_directories(root);
    save_json(cfg, (root / "config.json").string());

    CliResult res = run_cli("fit --config " + (root / "config.json").string(),
                            root / "log");
    INFO(res.err);
    REQUIRE(res.code == 0);
    CcfModel model = load_model((root / "out" / "model.json").string());
    REQUIRE(model.components.size() == 2);
    CHECK(model.components[0].c == 1);
    CHECK(model.components[0].lambda == 0.05);
    CHECK(model.components[1].k == 1);
}

TEST_CASE("simulate command: tiny smoke run writes the table and records") {
    fs::path root = scratch_root() / "sim";
    fs::remove_all(root);
    CliResult res = run_cli(
        "simulate --reps 2 --sigma 0.5 --sim-m 6 --sim-q 5 --sim-T 81 "
        "--cmax 1 --kmax 1 --grid 3 --max-components 2 --seed 5 --threads 2 "
        "--out " + (root / "out").string(),
        root / "log");
    INFO(res.err);
    REQUIRE(res.code == 0);
    std::string table = slurp(root / "out" / "table.csv");
    CHECK(table.find("sigma_e,0.5") != std::string::npos);
    CHECK(table.find("FMSE(sdPCA)") != std::string::npos);
    CHECK(table.find("FMSE(CCF)") != std::string::npos);
    CHECK(table.find("FMSE(sdPCA)/FMSE(CCF)") != std::string::npos);
    CHECK(fs::exists(root / "out" / "replications.json"));

    CliResult rerun = run_cli(
        "simulate --reps 2 --sigma 0.5 --sim-m 6 --sim-q 5 --sim-T 81 "
        "--cmax 1 --kmax 1 --grid 3 --max-components 2 --seed 5 --threads 1 "
        "--out " + (root / "out2").string(),
        root / "log2");
    REQUIRE(rerun.code == 0);
    CHECK(slurp(root / "out" / "table.csv") == slurp(root / "out2" / "table.csv"));
    CHECK(slurp(root / "out" / "replications.json") ==
          slurp(root / "out2" / "replications.json"));
}

TEST_CASE("bench command: easy persistent instance, format, and ordering") {
    // Rank-2 targets driven by very persistent factors; z lists the same
    // columns as y (the degenerate z = y configuration).
    fs::path root = scratch_root() / "bench";
    fs::remove_all(root);
    fs::create_directories(root);
    auto rng = make_rng(90310, 1);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Index T = 400, q = 3;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(T), b = Eigen::VectorXd::Zero(T);
    for (Index t = 1; t < T; ++t) {
        a(t) = 0.995 * a(t - 1) + 0.1 * gauss(rng);
        b(t) = 0.99 * b(t - 1) + 0.1 * gauss(rng);
    }
    TimeSeriesPanel panel;
    panel.values.resize(T, q);
    panel.labels = {"s1", "s2", "s3"};
    for (Index j = 0; j < q; ++j) {
        double l1 = gauss(rng), l2 = gauss(rng);
        for (Index t = 0; t < T; ++t)
            panel.values(t, j) = l1 * a(t) + l2 * b(t);
    }
    fs::path csv = root / "easy.csv";
    write_csv_panel(panel, csv.string());

    CliResult res = run_cli("bench --data " + csv.string() +
                                " --y-columns s1,s2,s3 --z-columns s1,s2,s3 "
                                "--cmax 1 --kmax 1 --grid 3 --max-components 3 "
                                "--seed 9 --out " + (root / "out").string(),
                            root / "log");
    INFO(res.err);
    REQUIRE(res.code == 0);

    std::string table = slurp(root / "out" / "bench.csv");
    std::istringstream lines(table);
    std::string header, l_sdpca, l_ccf, l_ratio, extra;
    std::getline(lines, header);
    std::getline(lines, l_sdpca);
    std::getline(lines, l_ccf);
    std::getline(lines, l_ratio);
    bool more = static_cast<bool>(std::getline(lines, extra)) && !extra.empty();
    CHECK(header == "method,fmsecv");
    CHECK(l_sdpca.rfind("sdpca,", 0) == 0);
    CHECK(l_ccf.rfind("ccf,", 0) == 0);
    CHECK(l_ratio.rfind("ratio_sdpca_over_ccf,", 0) == 0);
    CHECK_FALSE(more); // exactly methods x 1 rows plus the ratio line

    double fmse_sdpca = std::stod(l_sdpca.substr(6));
    double fmse_ccf = std::stod(l_ccf.substr(4));
    CHECK(fmse_ccf < 0.05);
    CHECK(fmse_sdpca < 0.05);
}

TEST_CASE("bench: CCF beats sdPCA on single-factor data for most seeds") {
    // Library-level loop over 20 seeds (the binary adds nothing here).
    int wins = 0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        auto rng = make_rng(9500 + static_cast<std::uint64_t>(s), 2);
        std::normal_distribution<double> gauss(0.0, 1.0);
        const Index T = 200, m = 8, q = 4;
        Eigen::MatrixXd z = test::random_z(T, m, rng);
        Eigen::VectorXd beta = test::random_unit(m, rng);
        Eigen::VectorXd load = test::random_matrix(q, 1, rng);
        Eigen::MatrixXd y = Eigen::MatrixXd::Zero(T, q);
        for (Index t = 0; t + 1 < T; ++t)
            y.row(t + 1) = (load * beta.dot(z.row(t))).transpose() +
                           0.25 * test::random_matrix(1, q, rng);

        fs::path dir = scratch_root() / ("ratio" + std::to_string(s));
        fs::remove_all(dir);
        fs::create_directories(dir);
        fs::path csv = dir / "data.csv";
        TimeSeriesPanel yz;
        yz.values.resize(T, q + m);
        yz.values << y, z;
        for (Index j = 0; j < q; ++j) yz.labels.push_back("y" + std::to_string(j + 1));
        for (Index j = 0; j < m; ++j) yz.labels.push_back("z" + std::to_string(j + 1));
        write_csv_panel(yz, csv.string());

        RunConfig cfg;
        cfg.data = csv.string();
        for (Index j = 0; j < q; ++j) cfg.y_columns.push_back("y" + std::to_string(j + 1));
        for (Index j = 0; j < m; ++j) cfg.z_columns.push_back("z" + std::to_string(j + 1));
        cfg.c_max = 1;
        cfg.k_max = 1;
        cfg.grid = 3;
        cfg.max_components = 2;
        cfg.seed = 9500 + static_cast<std::uint64_t>(s);
        cfg.threads = 2;
        cfg.out_dir = (dir / "out").string();
        BenchCommandResult res = cmd_bench(cfg);
        if (res.ratio > 1.0) ++wins;
    }
    CHECK(wins >= 16); // >= 80%
}
