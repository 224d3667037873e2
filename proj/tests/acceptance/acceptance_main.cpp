// Acceptance suite: one checked criterion per section, one PASS/FAIL line
// each. --profile smoke runs the quick Monte Carlo profile (10 replications,
// widened tolerance); --profile full runs 100 replications at the tight
// tolerance. --only filters criteria, --cli points at the built binary for
// the end-to-end determinism checks.

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <sys/wait.h>

#include "ccf/pipeline.hpp"
#include "ccf/rng.hpp"
#include "test_support.hpp"

using namespace ccf;
namespace fs = std::filesystem;

namespace {

struct Context {
    bool full = false;
    std::string cli_path;
    int threads = default_threads();
    fs::path scratch;
};

// ---------------------------------------------------------------------------
// Criterion 1 & 2: descent and certified convergence on 50 random problems.
// ---------------------------------------------------------------------------

struct DescentStats {
    int problems = 0;
    int converged = 0;
    int converged_certified = 0;
    bool monotone = true;
    bool strict_until_critical = true;
};

DescentStats run_descent_problems(std::ostream& log) {
    DescentStats stats;
    const int dims[3][2] = {{5, 0}, {5, 3}, {10, 5}}; // (m, c) -> p = 5, 20, 60
    const Index qs[3] = {1, 3, 10};
    const double lambdas[3] = {0.0, 0.1, 1.0};
    int made = 0;
    for (int round = 0; made < 50; ++round) {
        for (int a = 0; a < 3 && made < 50; ++a)
            for (int b = 0; b < 3 && made < 50; ++b) {
                int l = (a + b + round) % 3;
                auto inst = test::make_instance(
                    dims[a][0], qs[b], dims[a][1], 1, 1, 160,
                    1000 + static_cast<std::uint64_t>(made), 0.5);
                FitProblem prob = test::problem_of(inst, LossKind::G1, lambdas[l]);
                SolverConfig cfg;
                cfg.record_iterates = true;
                cfg.seed = static_cast<std::uint64_t>(made);
                auto [params, trace] = proximal_fit(prob, init_redundancy(prob), cfg);
                ++made;
                ++stats.problems;
                if (trace.termination == Termination::converged) {
                    ++stats.converged;
                    if (critical_point_certificate(params.beta, prob).certified)
                        ++stats.converged_certified;
                }
                bool critical_seen = false;
                for (std::size_t i = 1; i < trace.objective_path.size(); ++i) {
                    double prev = trace.objective_path[i - 1];
                    double cur = trace.objective_path[i];
                    if (cur > prev) stats.monotone = false;
                    if (!critical_seen &&
                        critical_point_certificate(trace.iterates[i - 1], prob,
                                                   1e-5)
                            .certified)
                        critical_seen = true;
                    if (!critical_seen && !(cur < prev))
                        stats.strict_until_critical = false;
                }
            }
    }
    log << "    " << stats.problems << " problems, " << stats.converged
        << " converged\n";
    return stats;
}

bool criterion1(const Context&, std::ostream& log) {
    DescentStats stats = run_descent_problems(log);
    return stats.monotone && stats.strict_until_critical;
}

bool criterion2(const Context&, std::ostream& log) {
    DescentStats stats = run_descent_problems(log);
    log << "    certified " << stats.converged_certified << "/"
        << stats.converged << " converged runs\n";
    return stats.converged > 0 &&
           stats.converged_certified == stats.converged;
}

// ---------------------------------------------------------------------------
// Criterion 3: fixed-point self-consistency.
// ---------------------------------------------------------------------------

bool criterion3(const Context&, std::ostream& log) {
    bool ok = true;
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        auto inst = test::make_instance(4, 3, 1, 1, 1, 150, 2000 + seed, 0.4);
        for (bool weighted : {false, true}) {
            LossKind loss = weighted ? LossKind::G2 : LossKind::G1;
            FitProblem prob = test::problem_of(inst, loss, 0.0);
            Eigen::VectorXd init = weighted ? init_canonical(prob)
                                            : init_redundancy(prob);
            auto [params, trace] = weighted ? fixed_point_fit_g2(prob, init)
                                            : fixed_point_fit_g1(prob, init);
            if (trace.termination != Termination::converged) {
                log << "    seed " << seed << " did not converge\n";
                ok = false;
                continue;
            }
            ProfiledEval ev = eval_profiled(params.beta, prob);
            Eigen::MatrixXd weight = Eigen::MatrixXd::Identity(3, 3);
            if (weighted) weight = ev.sigma.inverse();

            const Index k1 = inst.design.k + 1;
            Eigen::MatrixXd M = Eigen::MatrixXd::Zero(prob.p(), prob.p());
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(prob.p());
            for (Index r = 0; r < prob.n(); ++r) {
                Eigen::MatrixXd Xt(k1, prob.p());
                for (Index j = 0; j < k1; ++j) Xt.row(j) = prob.x_block(j).row(r);
                Eigen::MatrixXd C = params.gamma * Xt;
                M += C.transpose() * weight * C;
                rhs += C.transpose() * weight * prob.targets().row(r).transpose();
            }
            Eigen::VectorXd fixed = M.ldlt().solve(rhs).normalized();
            double mismatch = std::min((fixed - params.beta).norm(),
                                       (fixed + params.beta).norm());
            double gamma_gap =
                (params.gamma - gamma_ls(params.beta, prob)).cwiseAbs().maxCoeff();
            if (mismatch >= 1e-6 || gamma_gap >= 1e-8) {
                log << "    seed " << seed << (weighted ? " (G2)" : " (G1)")
                    << ": mismatch " << mismatch << ", gamma gap " << gamma_gap
                    << "\n";
                ok = false;
            }
        }
    }
    return ok;
}

// ---------------------------------------------------------------------------
// Criterion 4: analytic gradients vs central finite differences.
// ---------------------------------------------------------------------------

bool criterion4(const Context&, std::ostream& log) {
    double worst = 0.0;
    for (LossKind loss : {LossKind::G1, LossKind::G2}) {
        for (int i = 0; i < 20; ++i) {
            auto inst = test::make_instance(3, 2, 1, 1, 1, 60,
                                            3000 + static_cast<std::uint64_t>(i),
                                            1.0);
            FitProblem prob = test::problem_of(inst, loss, 0.0);
            auto rng = make_rng(3100 + static_cast<std::uint64_t>(i), 1);
            Eigen::VectorXd beta = test::random_unit(prob.p(), rng);
            Eigen::VectorXd analytic = grad_profiled(beta, prob);
            Eigen::VectorXd fd = test::fd_gradient(
                [&](const Eigen::VectorXd& b) { return profiled_loss(b, prob); },
                beta, 1e-6);
            double scale = std::max({analytic.cwiseAbs().maxCoeff(),
                                     fd.cwiseAbs().maxCoeff(), 1e-8});
            for (Index j = 0; j < beta.size(); ++j) {
                double denom = std::max(
                    {std::abs(analytic(j)), std::abs(fd(j)), 1e-3 * scale});
                worst = std::max(worst, std::abs(analytic(j) - fd(j)) / denom);
            }
        }
    }
    log << "    worst componentwise relative error " << worst << "\n";
    return worst < 1e-5;
}

// ---------------------------------------------------------------------------
// Criterion 5: static canonical / redundancy equivalence.
// ---------------------------------------------------------------------------

bool criterion5(const Context&, std::ostream& log) {
    auto rng = make_rng(4000, 1);
    const Index T = 400, p = 5, q = 3;
    Eigen::MatrixXd x = test::random_matrix(T, p, rng);
    Eigen::VectorXd b = test::random_unit(p, rng);
    Eigen::MatrixXd y = (x * b) * test::random_matrix(q, 1, rng).transpose() +
                        0.6 * test::random_matrix(T, q, rng);
    AlignedMatrix targets{y, 0};

    // G2 side: achieved canonical correlation vs the eigen oracle.
    FitProblem prob2 = make_fit_problem(x, targets, LagDesign{0, 0, 0, p},
                                        LossKind::G2, 0.0);
    auto [params2, trace2] = fixed_point_fit_g2(prob2, init_canonical(prob2));
    Eigen::MatrixXd Sxx = x.transpose() * x / T;
    Eigen::MatrixXd Sxy = x.transpose() * y / T;
    Eigen::MatrixXd Syy = y.transpose() * y / T;
    Eigen::MatrixXd canon = Sxx.inverse() * Sxy * Syy.inverse() * Sxy.transpose();
    Eigen::EigenSolver<Eigen::MatrixXd> es(canon);
    double rho2_oracle = es.eigenvalues().real().maxCoeff();
    Eigen::VectorXd u = x * params2.beta;
    Eigen::VectorXd cov_uy = y.transpose() * u / T;
    double rho2 = cov_uy.dot(Syy.inverse() * cov_uy) / (u.squaredNorm() / T);
    double rho_gap = std::abs(rho2 - rho2_oracle);

    // G1 side: first component vs the redundancy eigenvector.
    FitProblem prob1 = make_fit_problem(x, targets, LagDesign{0, 0, 0, p},
                                        LossKind::G1, 0.0);
    auto [params1, trace1] = fixed_point_fit_g1(prob1, init_redundancy(prob1));
    Eigen::MatrixXd redun = Sxx.inverse() * Sxy * Sxy.transpose();
    Eigen::EigenSolver<Eigen::MatrixXd> er(redun);
    Index which = 0;
    er.eigenvalues().real().maxCoeff(&which);
    Eigen::VectorXd lead = er.eigenvectors().col(which).real();
    double angle = test::angle_between(params1.beta, lead);

    log << "    |rho^2 - oracle| = " << rho_gap << ", redundancy angle = "
        << angle << "\n";
    return rho_gap < 1e-6 && angle < 1e-4;
}

// ---------------------------------------------------------------------------
// Criterion 6: homogeneity and fitted-value invariance.
// ---------------------------------------------------------------------------

bool criterion6(const Context&, std::ostream& log) {
    auto rng = make_rng(5000, 1);
    bool ok = true;
    for (int rep = 0; rep < 5; ++rep) {
        auto inst = test::make_instance(3, 2, 1, 1, 1, 60,
                                        5000 + static_cast<std::uint64_t>(rep),
                                        0.7);
        FitProblem p1 = test::problem_of(inst, LossKind::G1, 0.0);
        FitProblem p2 = test::problem_of(inst, LossKind::G2, 0.0);
        Eigen::VectorXd beta = test::random_unit(p1.p(), rng);
        Eigen::MatrixXd gamma = test::random_matrix(2, 2, rng);
        double v1 = loss_g1({beta, gamma}, p1);
        double v2 = loss_g2({beta, gamma}, p2);
        for (double scale : {0.5, 2.0, 10.0}) {
            ComponentParams scaled{scale * beta, gamma / scale};
            if (std::abs(loss_g1(scaled, p1) - v1) > 1e-12 * (1.0 + std::abs(v1)))
                ok = false;
            if (std::abs(loss_g2(scaled, p2) - v2) > 1e-12 * (1.0 + std::abs(v2)))
                ok = false;
        }
        // Fitted values are invariant to the internal scale of (beta, gamma).
        ProfiledEval ev = eval_profiled(beta, p1);
        Eigen::MatrixXd fitted = ev.F * ev.gamma.transpose();
        ProfiledEval ev_scaled = eval_profiled((2.0 * beta).eval(), p1);
        Eigen::MatrixXd fitted_scaled = ev_scaled.F * ev_scaled.gamma.transpose();
        if ((fitted - fitted_scaled).cwiseAbs().maxCoeff() >
            1e-10 * (1.0 + fitted.cwiseAbs().maxCoeff()))
            ok = false;
    }
    if (!ok) log << "    invariance violated\n";
    return ok;
}

// ---------------------------------------------------------------------------
// Criterion 7: oracle recovery (noiseless betas; two-factor s-hat).
// ---------------------------------------------------------------------------

bool criterion7(const Context& ctx, std::ostream& log) {
    bool ok = true;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto inst = test::make_instance(4, 3, 1, 1, 1, 120, 6000 + seed);
        FitProblem prob = test::problem_of(inst, LossKind::G1, 0.0);
        auto [params, trace] = proximal_fit(prob, init_redundancy(prob));
        double angle = test::angle_between(params.beta, inst.beta0);
        if (angle >= 1e-4) {
            log << "    noiseless seed " << seed << ": angle " << angle << "\n";
            ok = false;
        }
        // One-step-ahead forecast of the last usable target.
        ProfiledEval ev = eval_profiled(params.beta, prob);
        Eigen::VectorXd pred =
            params.gamma * ev.F.row(prob.n() - 1).transpose();
        Eigen::VectorXd truth =
            prob.targets().row(prob.n() - 1).transpose();
        if ((pred - truth).norm() >= 1e-6) {
            log << "    noiseless forecast error too large\n";
            ok = false;
        }
    }

    // Two orthogonal core directions; Gamma's q(k+1) free parameters make an
    // exhausted third stage visibly hurt the validation window.
    int hits = 0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        auto rng = make_rng(6100 + static_cast<std::uint64_t>(s), 2);
        const Index T = 400, m = 10, q = 30;
        Eigen::MatrixXd z = test::random_z(T, m, rng);
        Eigen::VectorXd b1 = test::random_unit(m, rng);
        Eigen::VectorXd b2 = test::random_unit(m, rng);
        b2 -= b1 * b1.dot(b2);
        b2.normalize();
        Eigen::VectorXd g1v = test::random_matrix(q, 1, rng);
        Eigen::VectorXd g2v = test::random_matrix(q, 1, rng);
        Eigen::MatrixXd y = Eigen::MatrixXd::Zero(T, q);
        for (Index t = 0; t + 1 < T; ++t)
            y.row(t + 1) = (g1v * b1.dot(z.row(t)) + g2v * b2.dot(z.row(t)))
                               .transpose();
        y += 0.9 * test::random_matrix(T, q, rng);

        auto [y_std, yi] = standardize(test::panel_of(y, "y"));
        auto [z_std, zi] = standardize(test::panel_of(z, "z"));
        SplitSpec split = SplitSpec::compute(T, 0.7);
        CvConfig cfg;
        cfg.c_max = 1;
        cfg.k_max = 1;
        cfg.grid = 4;
        cfg.max_components = 5;
        cfg.threads = ctx.threads;
        cfg.solver.seed = 6100 + static_cast<std::uint64_t>(s);
        SelectionState state =
            select_components(y_std.values, z_std.values, split, cfg);
        if (state.report.s_hat == 2) ++hits;
    }
    log << "    s_hat = 2 in " << hits << "/" << seeds << " seeds\n";
    return ok && hits >= 16;
}

// ---------------------------------------------------------------------------
// Criterion 8: consistency in T.
// ---------------------------------------------------------------------------

bool criterion8(const Context&, std::ostream& log) {
    const Index m = 8, q = 4, c = 1, k = 0;
    auto fixed_rng = make_rng(7000, 1);
    Eigen::VectorXd beta_star = test::random_unit(m * (c + 1), fixed_rng);
    sign_fix(beta_star);
    Eigen::MatrixXd gamma_star = test::random_matrix(q, k + 1, fixed_rng);

    std::vector<double> medians;
    for (Index T : {200, 800, 3200}) {
        std::vector<double> angles;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            auto rng = make_rng(7100 + seed, static_cast<std::uint64_t>(T));
            Eigen::MatrixXd z = test::random_z(T, m, rng);
            AlignedMatrix lag = build_lag_matrix(z, c);
            Eigen::VectorXd f = lag.values * beta_star;
            const Index lo = c + k, h = 1;
            const Index n = T - h - lo;
            Eigen::MatrixXd F(n, k + 1);
            for (Index j = 0; j <= k; ++j) F.col(j) = f.segment(lo - j - c, n);
            AlignedMatrix targets;
            targets.first_time = lo + h;
            targets.values = F * gamma_star.transpose() +
                             test::random_matrix(n, q, rng, 1.0);
            FitProblem prob = make_fit_problem(z, targets, LagDesign{c, k, h, m},
                                               LossKind::G1, 0.0);
            auto [params, trace] = fixed_point_fit_g1(prob, init_redundancy(prob));
            angles.push_back(test::angle_between(params.beta, beta_star));
        }
        std::sort(angles.begin(), angles.end());
        medians.push_back(0.5 * (angles[9] + angles[10]));
    }
    log << "    median angles: " << medians[0] << ", " << medians[1] << ", "
        << medians[2] << "\n";
    return medians[0] > medians[1] && medians[1] > medians[2] &&
           medians[2] < 0.1;
}

// ---------------------------------------------------------------------------
// Criterion 9: Table-1 scale Monte Carlo reproduction.
// ---------------------------------------------------------------------------

bool criterion9(const Context& ctx, std::ostream& log) {
    SimConfig cfg;
    cfg.reps = ctx.full ? 100 : 10;
    cfg.sigma_e = {0.3, 3.0};
    cfg.seed = 987654321;
    cfg.threads = ctx.threads;
    SimResult res = run_experiment(cfg);

    const double center[2] = {0.4457, 0.5472};
    const double tol[2] = {ctx.full ? 0.10 : 0.20, ctx.full ? 0.12 : 0.20};
    const double min_ratio[2] = {ctx.full ? 1.2 : 1.0, ctx.full ? 1.1 : 1.0};

    bool ok = true;
    for (int i = 0; i < 2; ++i) {
        const auto& s = res.summaries[static_cast<std::size_t>(i)];
        log << "    sigma_e=" << s.sigma_e << ": FMSE(CCF)=" << s.fmse_ccf
            << " (se " << s.se_ccf << "), FMSE(sdPCA)=" << s.fmse_sdpca
            << ", ratio=" << s.ratio << "\n";
        if (std::abs(s.fmse_ccf - center[i]) > tol[i]) ok = false;
        if (!(s.ratio > min_ratio[i])) ok = false;
    }
    return ok;
}

// ---------------------------------------------------------------------------
// Criterion 10: end-to-end workflow on the 264 x 49 panel.
// ---------------------------------------------------------------------------

fs::path write_workflow_csv(const fs::path& dir) {
    auto rng = make_rng(880, 1);
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
        panel.labels.push_back((j < q ? "ez" : "x") +
                               std::to_string(j < q ? j + 1 : j - q + 1));
        for (Index t = 0; t < T; ++t)
            panel.values(t, j) =
                100.0 + l1 * f1(t) + l2 * f2(t) + 0.3 * gauss(rng);
    }
    fs::create_directories(dir);
    fs::path csv = dir / "workflow.csv";
    write_csv_panel(panel, csv.string());
    return csv;
}

bool criterion10(const Context& ctx, std::ostream& log) {
    fs::path dir = ctx.scratch / "workflow";
    fs::remove_all(dir);
    fs::path csv = write_workflow_csv(dir);

    RunConfig cfg;
    cfg.data = csv.string();
    for (int i = 1; i <= 20; ++i) cfg.y_columns.push_back("ez" + std::to_string(i));
    for (int i = 1; i <= 29; ++i) cfg.z_columns.push_back("x" + std::to_string(i));
    cfg.alpha = 0.70;
    cfg.h = 1;
    cfg.seed = 31;
    cfg.threads = ctx.threads;
    cfg.out_dir = (dir / "out").string();

    BenchCommandResult a = cmd_bench(cfg);
    cfg.out_dir = (dir / "out2").string();
    BenchCommandResult b = cmd_bench(cfg);

    log << "    splits " << a.report.split.T1 << "/" << a.report.split.T2 << "/"
        << a.report.split.T3 << ", FMSECV ccf=" << a.fmsecv_ccf
        << " sdpca=" << a.fmsecv_sdpca << ", s_hat=" << a.report.s_hat << "\n";
    bool split_ok = a.report.split.T1 == 184 && a.report.split.T2 == 40 &&
                    a.report.split.T3 == 40;
    bool deterministic = a.table == b.table &&
                         a.fmsecv_ccf == b.fmsecv_ccf &&
                         a.fmsecv_sdpca == b.fmsecv_sdpca;
    bool reported = std::isfinite(a.fmsecv_ccf) && std::isfinite(a.fmsecv_sdpca) &&
                    a.fmsecv_ccf > 0 && a.fmsecv_sdpca > 0 &&
                    a.report.s_hat >= 1 &&
                    !a.report.components.empty();
    return split_ok && deterministic && reported;
}

// ---------------------------------------------------------------------------
// Criterion 11: cross-algorithm agreement at lambda = 0.
// ---------------------------------------------------------------------------

bool criterion11(const Context&, std::ostream& log) {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto inst = test::make_instance(3, 2, 1, 0, 1, 150, 8000 + seed, 0.3);
        FitProblem prob = test::problem_of(inst, LossKind::G1, 0.0);
        Eigen::VectorXd init = init_redundancy(prob);
        auto [pp, pt] = proximal_fit(prob, init);
        auto [fp, ft] = fixed_point_fit_g1(prob, init);
        double vp = profiled_loss(pp.beta, prob);
        double vf = profiled_loss(fp.beta, prob);
        worst = std::max(worst, std::abs(vp - vf) / (1.0 + std::min(vp, vf)));
    }
    log << "    worst relative objective gap " << worst << "\n";
    return worst < 1e-6;
}

// ---------------------------------------------------------------------------
// Criterion 12: byte-identical command reruns through the real binary.
// ---------------------------------------------------------------------------

int run_cmd(const std::string& cmd) {
    int status = std::system(cmd.c_str());
    return status >= 0 && WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool same_files(const fs::path& a, const fs::path& b,
                const std::vector<std::string>& names, std::ostream& log) {
    for (const auto& name : names) {
        if (slurp(a / name) != slurp(b / name)) {
            log << "    " << name << " differs between reruns\n";
            return false;
        }
        if (slurp(a / name).empty()) {
            log << "    " << name << " is empty\n";
            return false;
        }
    }
    return true;
}

bool criterion12(const Context& ctx, std::ostream& log) {
    if (ctx.cli_path.empty()) {
        log << "    no --cli path provided\n";
        return false;
    }
    fs::path dir = ctx.scratch / "determinism";
    fs::remove_all(dir);
    fs::path csv = write_workflow_csv(dir);
    std::string ycols, zcols;
    for (int i = 1; i <= 6; ++i) ycols += (i > 1 ? "," : "") + std::string("ez") + std::to_string(i);
    for (int i = 1; i <= 8; ++i) zcols += (i > 1 ? "," : "") + std::string("x") + std::to_string(i);

    auto cli = [&](const std::string& args, const std::string& tag) {
        std::string cmd = ctx.cli_path + " " + args + " > " +
                          (dir / (tag + ".out")).string() + " 2> " +
                          (dir / (tag + ".err")).string();
        return run_cmd(cmd);
    };

    std::string base = " --data " + csv.string() + " --y-columns " + ycols +
                       " --z-columns " + zcols +
                       " --cmax 1 --kmax 1 --grid 3 --max-components 2 --seed 11"
                       " --threads " + std::to_string(ctx.threads);

    bool ok = true;
    for (int run = 1; run <= 2; ++run) {
        std::string out = (dir / ("cv" + std::to_string(run))).string();
        if (cli("cv" + base + " --out " + out, "cv" + std::to_string(run)) != 0) {
            log << "    cv run " << run << " failed\n";
            ok = false;
        }
    }
    ok = ok && same_files(dir / "cv1", dir / "cv2",
                          {"report.json", "model.json", "summary.txt"}, log);

    for (int run = 1; run <= 2; ++run) {
        std::string out = (dir / ("fc" + std::to_string(run))).string();
        if (cli("forecast --model " + (dir / "cv1" / "model.json").string() +
                    " --data " + csv.string() + " --out " + out,
                "fc" + std::to_string(run)) != 0) {
            log << "    forecast run " << run << " failed\n";
            ok = false;
        }
    }
    ok = ok && same_files(dir / "fc1", dir / "fc2", {"forecast.csv"}, log);

    for (int run = 1; run <= 2; ++run) {
        std::string out = (dir / ("sim" + std::to_string(run))).string();
        if (cli("simulate --reps 2 --sigma 0.5 --sim-m 6 --sim-q 5 --sim-T 81 "
                "--cmax 1 --kmax 1 --grid 3 --max-components 2 --seed 13 "
                "--threads " + std::to_string(ctx.threads) + " --out " + out,
                "sim" + std::to_string(run)) != 0) {
            log << "    simulate run " << run << " failed\n";
            ok = false;
        }
    }
    ok = ok && same_files(dir / "sim1", dir / "sim2",
                          {"table.csv", "replications.json"}, log);

    for (int run = 1; run <= 2; ++run) {
        std::string out = (dir / ("bench" + std::to_string(run))).string();
        if (cli("bench" + base + " --out " + out, "bench" + std::to_string(run)) !=
            0) {
            log << "    bench run " << run << " failed\n";
            ok = false;
        }
    }
    ok = ok && same_files(dir / "bench1", dir / "bench2", {"bench.csv"}, log);
    return ok;
}

struct Criterion {
    int id;
    const char* name;
    bool (*run)(const Context&, std::ostream&);
};

} // namespace

int main(int argc, char** argv) {
    Context ctx;
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--profile" && i + 1 < argc) {
            ctx.full = std::string(argv[++i]) == "full";
        } else if (arg == "--cli" && i + 1 < argc) {
            ctx.cli_path = argv[++i];
        } else if (arg == "--threads" && i + 1 < argc) {
            ctx.threads = std::atoi(argv[++i]);
        } else if (arg == "--only" && i + 1 < argc) {
            only.insert(std::atoi(argv[++i]));
        } else {
            std::cerr << "unknown argument: " << arg << "\n";
            return 2;
        }
    }
    ctx.scratch = fs::temp_directory_path() / "ccf_acceptance";
    fs::create_directories(ctx.scratch);

    const Criterion criteria[] = {
        {1, "descent: RG* path non-increasing, strict until critical", criterion1},
        {2, "converged runs pass the critical-point certificate", criterion2},
        {3, "fixed-point self-consistency and gamma = G(beta)", criterion3},
        {4, "analytic gradients match finite differences", criterion4},
        {5, "static canonical / redundancy equivalence", criterion5},
        {6, "homogeneity and fitted-value invariance", criterion6},
        {7, "oracle recovery: noiseless beta and two-factor s-hat", criterion7},
        {8, "consistency: angle to beta* shrinks with T", criterion8},
        {9, "Table-1 scale Monte Carlo reproduction", criterion9},
        {10, "end-to-end workflow on the 264x49 panel", criterion10},
        {11, "proximal and fixed-point agreement at lambda = 0", criterion11},
        {12, "byte-identical command reruns", criterion12},
    };

    int failures = 0, ran = 0;
    for (const auto& crit : criteria) {
        if (!only.empty() && only.find(crit.id) == only.end()) continue;
        ++ran;
        std::ostringstream log;
        bool ok = false;
        try {
            ok = crit.run(ctx, log);
        } catch (const std::exception& e) {
            log << "    exception: " << e.what() << "\n";
        }
        std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << crit.id
                  << ": " << crit.name << "\n"
                  << log.str();
        std::cout.flush();
        if (!ok) ++failures;
    }
    std::cout << "SUMMARY: " << (ran - failures) << "/" << ran
              << " criteria passed (" << (ctx.full ? "full" : "smoke")
              << " profile)\n";
    return failures == 0 ? 0 : 1;
}
