#include <doctest.h>

#include "ccf/simulate.hpp"
#include "test_support.hpp"

using namespace ccf;

namespace {

SimConfig small_sim() {
    SimConfig cfg;
    cfg.m = 6;
    cfg.q = 5;
    cfg.T_total = 81;
    cfg.reps = 2;
    cfg.sigma_e = {0.5};
    cfg.seed = 424242;
    cfg.threads = 2;
    cfg.cv.c_max = 1;
    cfg.cv.k_max = 1;
    cfg.cv.grid = 3;
    cfg.cv.max_components = 2;
    cfg.baseline.q_max = 2;
    cfg.baseline.s_max = 3;
    return cfg;
}

} // namespace

TEST_CASE("gen_replication: VAR matrix is always stable") {
    SimConfig cfg = small_sim();
    for (std::uint64_t rep = 0; rep < 5; ++rep) {
        SimDraws draws;
        gen_replication(cfg, 0.5, derive_seed(1, rep), &draws);
        // Upper-bidiagonal A: the eigenvalues are exactly the diagonal draws.
        CHECK(draws.d.maxCoeff() <= 0.5);
        CHECK(draws.d.minCoeff() >= 0.0);
        CHECK(draws.g.maxCoeff() <= 0.5);
        CHECK(draws.v.maxCoeff() <= 0.5);
    }
}

TEST_CASE("gen_replication: near-zero noise puts y in the rank-2 loading span") {
    SimConfig cfg = small_sim();
    cfg.q = 8;
    SimDraws draws;
    auto [z, y] = gen_replication(cfg, 1e-9, 99, &draws);

    Eigen::MatrixXd C(cfg.q, 2);
    C.col(0) = draws.c1;
    C.col(1) = draws.c2;
    Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(C).householderQ() *
                        Eigen::MatrixXd::Identity(cfg.q, 2);
    for (Index t = 0; t < y.rows(); ++t) {
        Eigen::VectorXd row = y.row(t).transpose();
        Eigen::VectorXd resid = row - Q * (Q.transpose() * row);
        CHECK(resid.norm() < 1e-8 * (1.0 + row.norm()));
    }
}

TEST_CASE("gen_replication: lag-1 autocovariance matches A Var(z)") {
    SimConfig cfg = small_sim();
    cfg.m = 10;
    cfg.q = 2;
    cfg.T_total = 5000;
    SimDraws draws;
    auto [z, y] = gen_replication(cfg, 1.0, 7, &draws);

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(cfg.m, cfg.m);
    A.diagonal() = draws.d;
    A.diagonal(1) = draws.g;

    const Index T = z.rows();
    Eigen::MatrixXd var = z.transpose() * z / static_cast<double>(T);
    Eigen::MatrixXd cov1 = z.bottomRows(T - 1).transpose() * z.topRows(T - 1) /
                           static_cast<double>(T - 1);
    double rel = (cov1 - A * var).norm() / var.norm();
    CHECK(rel < 0.2);
}

TEST_CASE("run_experiment: deterministic and prefix-stable records") {
    SimConfig cfg = small_sim();
    SimResult a = run_experiment(cfg);
    SimResult b = run_experiment(cfg);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].err_ccf == b.records[i].err_ccf);
        CHECK(a.records[i].err_sdpca == b.records[i].err_sdpca);
        CHECK(a.records[i].s_hat == b.records[i].s_hat);
    }

    SimConfig more = cfg;
    more.reps = 3;
    more.threads = 1; // scheduling must not matter either
    SimResult c = run_experiment(more);
    for (int rep = 0; rep < cfg.reps; ++rep) {
        CHECK(c.records[static_cast<std::size_t>(rep)].err_ccf ==
              a.records[static_cast<std::size_t>(rep)].err_ccf);
        CHECK(c.records[static_cast<std::size_t>(rep)].err_sdpca ==
              a.records[static_cast<std::size_t>(rep)].err_sdpca);
    }
}

TEST_CASE("run_experiment: summaries aggregate the records") {
    SimConfig cfg = small_sim();
    cfg.reps = 3;
    SimResult res = run_experiment(cfg);
    REQUIRE(res.summaries.size() == 1);
    const auto& s = res.summaries[0];
    double mean_ccf = 0.0, mean_sdpca = 0.0;
    for (const auto& rec : res.records) {
        mean_ccf += rec.err_ccf;
        mean_sdpca += rec.err_sdpca;
    }
    mean_ccf /= 3.0;
    mean_sdpca /= 3.0;
    CHECK(s.fmse_ccf == doctest::Approx(mean_ccf).epsilon(1e-14));
    CHECK(s.fmse_sdpca == doctest::Approx(mean_sdpca).epsilon(1e-14));
    CHECK(s.ratio == doctest::Approx(mean_sdpca / mean_ccf).epsilon(1e-12));
    CHECK(s.failures == 0);
}

TEST_CASE("fixed loadings mode draws (d,g,v,b,c) once") {
    SimConfig cfg = small_sim();
    cfg.redraw_loadings = false;
    SimDraws first, second;
    gen_replication(cfg, 0.5, 1001, &first);
    gen_replication(cfg, 0.5, 2002, &second);
    CHECK((first.d - second.d).cwiseAbs().maxCoeff() == 0.0);
    CHECK((first.b1 - second.b1).cwiseAbs().maxCoeff() == 0.0);
    CHECK((first.c2 - second.c2).cwiseAbs().maxCoeff() == 0.0);

    cfg.redraw_loadings = true;
    gen_replication(cfg, 0.5, 1001, &first);
    gen_replication(cfg, 0.5, 2002, &second);
    CHECK((first.d - second.d).cwiseAbs().maxCoeff() > 0.0);
}
