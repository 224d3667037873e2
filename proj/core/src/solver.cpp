#include "ccf/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <random>

#include "ccf/rng.hpp"

namespace ccf {

std::string to_string(Termination t) {
    switch (t) {
        case Termination::converged: return "converged";
        case Termination::max_iter: return "max_iter";
        case Termination::critical_point: return "critical_point";
    }
    return "unknown";
}

Index CriticalPointReport::count(IndexClass c) const {
    Index n = 0;
    for (auto cl : classes)
        if (cl == c) ++n;
    return n;
}

void sign_fix(Eigen::VectorXd& beta) {
    Index imax = 0;
    beta.cwiseAbs().maxCoeff(&imax);
    if (beta(imax) < 0) beta = -beta;
}

void sign_fix(ComponentParams& params) {
    Index imax = 0;
    params.beta.cwiseAbs().maxCoeff(&imax);
    if (params.beta(imax) < 0) {
        params.beta = -params.beta;
        params.gamma = -params.gamma; // prediction gamma * f(beta) unchanged
    }
}

namespace {

// Cholesky with escalating diagonal ridge; moment matrices here are PSD by
// construction, so failures only come from rank deficiency.
Eigen::LLT<Eigen::MatrixXd> ridged_llt(Eigen::MatrixXd S) {
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    double ridge = 1e-10 * S.trace() / static_cast<double>(S.rows());
    if (ridge <= 0) ridge = 1e-12;
    int tries = 0;
    while (llt.info() != Eigen::Success && tries++ < 6) {
        S.diagonal().array() += ridge;
        llt.compute(S);
        ridge *= 100.0;
    }
    return llt;
}

// Prefer the eigenvector with lexicographically largest |v| pattern when the
// two leading singular values tie; keeps runs reproducible.
bool abs_lex_greater(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    for (Index i = 0; i < a.size(); ++i) {
        double da = std::abs(a(i)), db = std::abs(b(i));
        if (da != db) return da > db;
    }
    return false;
}

Eigen::VectorXd uniform_direction(Index p) {
    return Eigen::VectorXd::Constant(p, 1.0 / std::sqrt(static_cast<double>(p)));
}

// Shared skeleton of the two eigen initializers. The target matrix is
// Sxx^{-1} Sxy W Syx with W = I (redundancy) or W = Syy^{-1} (canonical);
// both reduce to the leading left singular vector of A = L^{-1} Sxy R^{-T}
// with Sxx = LL' and W = (RR')^{-1}, mapped back through L^{-T}.
Eigen::VectorXd leading_direction(const FitProblem& prob, bool canonical,
                                  bool* fell_back) {
    if (fell_back) *fell_back = false;
    const Index p = prob.p();
    const double n = static_cast<double>(prob.n());
    const Eigen::MatrixXd X = prob.x_block(0);
    Eigen::MatrixXd Sxx = X.transpose() * X / n;
    Eigen::MatrixXd Sxy = X.transpose() * prob.targets() / n;

    auto llt_x = ridged_llt(std::move(Sxx));
    if (llt_x.info() != Eigen::Success) {
        if (fell_back) *fell_back = true;
        return uniform_direction(p);
    }
    Eigen::MatrixXd A = llt_x.matrixL().solve(Sxy); // p x q
    if (canonical) {
        Eigen::MatrixXd Syy = prob.targets().transpose() * prob.targets() / n;
        auto llt_y = ridged_llt(std::move(Syy));
        if (llt_y.info() != Eigen::Success) {
            if (fell_back) *fell_back = true;
            return uniform_direction(p);
        }
        // A <- A R^{-T}, i.e. solve R A'^T ... row-wise: A R^{-T} = (R^{-1} A')'.
        A = llt_y.matrixL().solve(A.transpose()).transpose();
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU);
    if (svd.info() != Eigen::Success || svd.singularValues().size() == 0) {
        if (fell_back) *fell_back = true;
        return uniform_direction(p);
    }

    auto back_map = [&](Eigen::VectorXd w) {
        Eigen::VectorXd v = llt_x.matrixU().solve(std::move(w)); // L^{-T} w
        double nv = v.norm();
        if (!(nv > 0) || !v.allFinite()) return Eigen::VectorXd();
        v /= nv;
        sign_fix(v);
        return v;
    };

    Eigen::VectorXd v = back_map(svd.matrixU().col(0));
    const auto& sv = svd.singularValues();
    if (sv.size() > 1 && sv(0) - sv(1) < 1e-10 * std::max(1.0, sv(0))) {
        Eigen::VectorXd v2 = back_map(svd.matrixU().col(1));
        if (v2.size() == v.size() && abs_lex_greater(v2, v)) v = v2;
    }
    if (v.size() != p) {
        if (fell_back) *fell_back = true;
        return uniform_direction(p);
    }
    return v;
}

} // namespace

Eigen::VectorXd init_redundancy(const FitProblem& prob, bool* fell_back) {
    return leading_direction(prob, /*canonical=*/false, fell_back);
}

Eigen::VectorXd init_canonical(const FitProblem& prob, bool* fell_back) {
    return leading_direction(prob, /*canonical=*/true, fell_back);
}

CriticalPointReport critical_point_certificate(const Eigen::VectorXd& beta,
                                               const FitProblem& prob,
                                               double tol_scale) {
    ProfiledEval ev = eval_profiled(beta, prob);
    if (!ev.ok) throw numeric_error(ev.error);
    const double lambda = prob.lambda();
    const double rg = ev.value + lambda * beta.lpNorm<1>() / beta.norm();
    Eigen::VectorXd g = grad_from_eval(ev, prob) - lambda * beta.lpNorm<1>() * beta;
    Eigen::VectorXd g_star = g + lambda * sign_vector(beta);

    CriticalPointReport report;
    report.tolerance = tol_scale * (1.0 + std::abs(rg));
    report.classes.resize(static_cast<std::size_t>(beta.size()));
    for (Index i = 0; i < beta.size(); ++i) {
        double violation;
        if (beta(i) == 0.0) {
            violation = std::abs(g(i)) - lambda;
            report.classes[static_cast<std::size_t>(i)] =
                violation <= report.tolerance ? IndexClass::inactive_ok
                                              : IndexClass::violating;
        } else {
            violation = std::abs(g_star(i));
            report.classes[static_cast<std::size_t>(i)] =
                violation <= report.tolerance ? IndexClass::active_ok
                                              : IndexClass::violating;
        }
        if (report.classes[static_cast<std::size_t>(i)] == IndexClass::violating)
            report.max_violation = std::max(report.max_violation, violation);
    }
    report.certified = report.count(IndexClass::violating) == 0;
    return report;
}

namespace {

struct ProbePoint {
    bool feasible = false;
    bool annihilated = false;
    double eta = 0.0;
    double value = std::numeric_limits<double>::infinity();
    Eigen::VectorXd beta;
    ProfiledEval eval;
};

struct SearchState {
    const FitProblem& prob;
    const Eigen::VectorXd& beta;
    const Eigen::VectorXd& g;
    int evals_left;
    bool any_nonannihilated = false;
    ProbePoint best; // lowest feasible value seen anywhere

    ProbePoint probe(double eta) {
        ProbePoint pt;
        pt.eta = eta;
        if (evals_left <= 0) return pt;
        --evals_left;
        Eigen::VectorXd shrunk =
            soft_threshold(beta - eta * g, prob.lambda() * eta);
        if (shrunk.isZero(0.0)) {
            pt.annihilated = true;
            return pt;
        }
        any_nonannihilated = true;
        pt.beta = shrunk / shrunk.norm();
        pt.eval = eval_profiled(pt.beta, prob);
        if (!pt.eval.ok) return pt;
        pt.value = pt.eval.value + prob.lambda() * pt.beta.lpNorm<1>();
        if (!std::isfinite(pt.value)) return pt;
        pt.feasible = true;
        if (pt.value < best.value || !best.feasible) best = pt;
        return pt;
    }
};

struct StepResult {
    bool ok = false;
    bool annihilated_everywhere = false;
    ProbePoint point;
};

// Derivative-free search over the proximal path
//   eta -> RG*(normalize(S_{lambda eta}(beta - eta g))).
// Doubling bracket from eta0, golden-section refinement within the
// evaluation budget, then a halving rescue; only strict improvements over
// `current_value` are accepted.
StepResult line_search_golden(const FitProblem& prob, const Eigen::VectorXd& beta,
                              const Eigen::VectorXd& g, double current_value,
                              const SolverConfig& cfg) {
    SearchState st{prob, beta, g, cfg.line_search_evals, false, {}};

    double eta = cfg.eta0;
    ProbePoint cur = st.probe(eta);
    double best_eta = eta;
    double best_val = cur.feasible ? cur.value
                                   : std::numeric_limits<double>::infinity();
    while (st.evals_left > 0) {
        ProbePoint nxt = st.probe(eta * 2.0);
        if (nxt.feasible && nxt.value < best_val) {
            eta *= 2.0;
            best_eta = eta;
            best_val = nxt.value;
        } else {
            break;
        }
    }

    if (std::isfinite(best_val)) {
        // Golden-section refinement on [best_eta/2, 2 best_eta].
        const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
        double lo = best_eta * 0.5, hi = best_eta * 2.0;
        double x1 = hi - phi * (hi - lo);
        double x2 = lo + phi * (hi - lo);
        ProbePoint p1 = st.probe(x1);
        ProbePoint p2 = st.probe(x2);
        while (st.evals_left > 0 && hi - lo > 1e-3 * hi) {
            double v1 = p1.feasible ? p1.value : std::numeric_limits<double>::infinity();
            double v2 = p2.feasible ? p2.value : std::numeric_limits<double>::infinity();
            if (v1 <= v2) {
                hi = x2;
                x2 = x1;
                p2 = p1;
                x1 = hi - phi * (hi - lo);
                p1 = st.probe(x1);
            } else {
                lo = x1;
                x1 = x2;
                p1 = p2;
                x2 = lo + phi * (hi - lo);
                p2 = st.probe(x2);
            }
        }
    }

    StepResult out;
    if (st.best.feasible && st.best.value < current_value) {
        out.ok = true;
        out.point = st.best;
        return out;
    }

    // Rescue: halve toward zero. Descent exists for small enough eta at any
    // non-critical point, so failure here signals (numerical) criticality.
    double rescue = std::isfinite(best_val) ? best_eta : cfg.eta0;
    while (rescue > 1e-12) {
        rescue *= 0.5;
        st.evals_left = std::max(st.evals_left, 1); // rescue ignores the budget
        ProbePoint pt = st.probe(rescue);
        if (pt.feasible && pt.value < current_value) {
            out.ok = true;
            out.point = pt;
            return out;
        }
    }
    out.annihilated_everywhere = !st.any_nonannihilated;
    return out;
}

StepResult line_search_backtracking(const FitProblem& prob,
                                    const Eigen::VectorXd& beta,
                                    const Eigen::VectorXd& g,
                                    double current_value,
                                    const SolverConfig& cfg, double eta_start) {
    SearchState st{prob, beta, g, cfg.line_search_evals, false, {}};
    double eta = eta_start;
    StepResult out;
    while (eta > 1e-12) {
        st.evals_left = std::max(st.evals_left, 1);
        ProbePoint pt = st.probe(eta);
        if (pt.feasible && pt.value < current_value) {
            out.ok = true;
            out.point = pt;
            return out;
        }
        eta *= cfg.backtrack_shrink;
    }
    out.annihilated_everywhere = !st.any_nonannihilated;
    return out;
}

struct ProximalRun {
    ComponentParams params;
    FitTrace trace;
    double final_value = std::numeric_limits<double>::infinity();
};

ProximalRun proximal_fit_single(const FitProblem& prob,
                                const Eigen::VectorXd& init,
                                const SolverConfig& cfg) {
    ProximalRun run;
    Eigen::VectorXd beta = init;
    double nb = beta.norm();
    if (!(nb > 0)) throw config_error("initializer must be nonzero");
    beta /= nb;

    ProfiledEval ev = eval_profiled(beta, prob);
    if (!ev.ok) throw numeric_error("infeasible initializer: " + ev.error);
    double value = ev.value + prob.lambda() * beta.lpNorm<1>();

    FitTrace& trace = run.trace;
    trace.objective_path.push_back(value);
    if (cfg.record_iterates) trace.iterates.push_back(beta);
    trace.termination = Termination::max_iter;

    bool delta_small = false;
    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        Eigen::VectorXd gp = grad_from_eval(ev, prob);
        Eigen::VectorXd g = gp - prob.lambda() * beta.lpNorm<1>() * beta;

        // Criticality check; "converged" is only granted once both the
        // relative-objective rule and the certificate hold.
        Eigen::VectorXd g_star = g + prob.lambda() * sign_vector(beta);
        double tol = cfg.cert_tol_scale * (1.0 + std::abs(value));
        bool certified = true;
        for (Index i = 0; i < beta.size() && certified; ++i) {
            if (beta(i) == 0.0)
                certified = std::abs(g(i)) <= prob.lambda() + tol;
            else
                certified = std::abs(g_star(i)) <= tol;
        }
        if (certified) {
            trace.termination = delta_small ? Termination::converged
                                            : Termination::critical_point;
            break;
        }

        StepResult step =
            cfg.line_search == LineSearchKind::golden_section
                ? line_search_golden(prob, beta, g, value, cfg)
                : line_search_backtracking(prob, beta, g, value, cfg, 1.0);
        if (!step.ok) {
            trace.termination = Termination::critical_point;
            trace.line_search_stalled = true;
            trace.annihilated = step.annihilated_everywhere;
            break;
        }

        double new_value = step.point.value;
        delta_small = std::abs(new_value - value) <=
                      cfg.epsilon * std::max(std::abs(value), 1e-300);
        beta = std::move(step.point.beta);
        ev = std::move(step.point.eval);
        value = new_value;
        trace.objective_path.push_back(value);
        if (cfg.record_iterates) trace.iterates.push_back(beta);
        ++trace.iterations;
    }

    run.params.beta = beta;
    run.params.gamma = ev.gamma;
    sign_fix(run.params);
    run.final_value = value;
    return run;
}

} // namespace

std::pair<ComponentParams, FitTrace> proximal_fit(const FitProblem& prob,
                                                  const Eigen::VectorXd& init,
                                                  const SolverConfig& cfg) {
    if (init.size() != prob.p())
        throw config_error("initializer dimension does not match the design");
    ProximalRun best = proximal_fit_single(prob, init, cfg);
    for (int r = 1; r < cfg.restarts; ++r) {
        auto rng = make_rng(cfg.seed, static_cast<std::uint64_t>(r));
        std::normal_distribution<double> gauss(0.0, cfg.restart_sigma);
        Eigen::VectorXd perturbed = init;
        for (Index i = 0; i < perturbed.size(); ++i) perturbed(i) += gauss(rng);
        if (perturbed.norm() <= 1e-12) continue;
        ProximalRun run = proximal_fit_single(prob, perturbed, cfg);
        if (run.final_value < best.final_value) best = std::move(run);
    }
    return {std::move(best.params), std::move(best.trace)};
}

namespace {

// Cross-product blocks C_ab = X_a' X_b reused across fixed-point iterations.
struct LagCrossProducts {
    std::vector<Eigen::MatrixXd> blocks; // (k+1)^2, row-major in (a, b)
    Index k1;

    LagCrossProducts(const FitProblem& prob) : k1(prob.design().k + 1) {
        blocks.resize(static_cast<std::size_t>(k1 * k1));
        for (Index a = 0; a < k1; ++a)
            for (Index b = 0; b < k1; ++b) {
                if (b < a) {
                    blocks[static_cast<std::size_t>(a * k1 + b)] =
                        blocks[static_cast<std::size_t>(b * k1 + a)].transpose();
                } else {
                    blocks[static_cast<std::size_t>(a * k1 + b)] =
                        prob.x_block(a).transpose() * prob.x_block(b);
                }
            }
    }
    const Eigen::MatrixXd& at(Index a, Index b) const {
        return blocks[static_cast<std::size_t>(a * k1 + b)];
    }
};

Eigen::VectorXd solve_normal(Eigen::MatrixXd M, const Eigen::VectorXd& rhs) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
    Eigen::VectorXd x = ldlt.solve(rhs);
    if (ldlt.info() == Eigen::Success && x.allFinite()) return x;
    double ridge = 1e-10 * M.trace() / static_cast<double>(M.rows());
    if (ridge <= 0) ridge = 1e-12;
    for (int tries = 0; tries < 4; ++tries) {
        M.diagonal().array() += ridge;
        ldlt.compute(M);
        x = ldlt.solve(rhs);
        if (ldlt.info() == Eigen::Success && x.allFinite()) return x;
        ridge *= 1000.0;
    }
    throw numeric_error("fixed-point normal equations are singular even with ridge");
}

std::pair<ComponentParams, FitTrace> fixed_point_fit(const FitProblem& prob,
                                                     const Eigen::VectorXd& init,
                                                     const SolverConfig& cfg,
                                                     bool weighted) {
    if (prob.lambda() != 0.0)
        throw config_error("fixed-point solver requires lambda == 0");
    if (init.size() != prob.p())
        throw config_error("initializer dimension does not match the design");

    const Index k1 = prob.design().k + 1;
    LagCrossProducts cross(prob);

    Eigen::VectorXd beta = init;
    double nb = beta.norm();
    if (!(nb > 0)) throw config_error("initializer must be nonzero");
    beta /= nb;

    FitTrace trace;
    trace.termination = Termination::max_iter;
    ProfiledEval ev = eval_profiled(beta, prob);
    if (!ev.ok) throw numeric_error("infeasible initializer: " + ev.error);
    trace.objective_path.push_back(ev.value);
    if (cfg.record_iterates) trace.iterates.push_back(beta);

    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        Eigen::MatrixXd gamma_w = ev.gamma; // q x (k+1)
        if (weighted && prob.q() > 1) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ev.sigma);
            if (es.info() != Eigen::Success)
                throw numeric_error("residual covariance eigendecomposition failed");
            double ridge = 0.0;
            double max_ev = es.eigenvalues().maxCoeff();
            double min_ev = es.eigenvalues().minCoeff();
            if (min_ev <= 0 || max_ev / min_ev > 1e12)
                ridge = 1e-10 * ev.sigma.trace() / static_cast<double>(prob.q());
            Eigen::VectorXd inv = (es.eigenvalues().array() + ridge).inverse();
            if (!inv.allFinite())
                throw numeric_error(
                    "residual covariance is singular; the G1 criterion is the "
                    "robust alternative");
            gamma_w = es.eigenvectors() * inv.asDiagonal() *
                      es.eigenvectors().transpose() * ev.gamma;
        }

        Eigen::MatrixXd W = ev.gamma.transpose() * gamma_w; // (k+1) x (k+1)
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(prob.p(), prob.p());
        for (Index a = 0; a < k1; ++a)
            for (Index b = 0; b < k1; ++b) M.noalias() += W(a, b) * cross.at(a, b);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(prob.p());
        for (Index a = 0; a < k1; ++a)
            rhs.noalias() +=
                prob.x_block(a).transpose() * (prob.targets() * gamma_w.col(a));

        Eigen::VectorXd next = solve_normal(std::move(M), rhs);
        double nn = next.norm();
        if (!(nn > 0)) throw numeric_error("fixed-point update collapsed to zero");
        next /= nn;
        if ((next + beta).norm() < (next - beta).norm()) next = -next;

        double delta = (next - beta).norm();
        beta = std::move(next);
        ev = eval_profiled(beta, prob);
        if (!ev.ok) throw numeric_error(ev.error);
        trace.objective_path.push_back(ev.value);
        if (cfg.record_iterates) trace.iterates.push_back(beta);
        ++trace.iterations;
        if (delta <= cfg.epsilon) {
            trace.termination = Termination::converged;
            break;
        }
    }

    ComponentParams params{beta, ev.gamma};
    sign_fix(params);
    return {std::move(params), std::move(trace)};
}

} // namespace

std::pair<ComponentParams, FitTrace> fixed_point_fit_g1(
    const FitProblem& prob, const Eigen::VectorXd& init, const SolverConfig& cfg) {
    if (prob.loss() != LossKind::G1)
        throw config_error("fixed_point_fit_g1 requires a G1 problem");
    return fixed_point_fit(prob, init, cfg, /*weighted=*/false);
}

std::pair<ComponentParams, FitTrace> fixed_point_fit_g2(
    const FitProblem& prob, const Eigen::VectorXd& init, const SolverConfig& cfg) {
    if (prob.loss() != LossKind::G2)
        throw config_error("fixed_point_fit_g2 requires a G2 problem");
    if (prob.q() == 1) return fixed_point_fit(prob, init, cfg, /*weighted=*/false);
    return fixed_point_fit(prob, init, cfg, /*weighted=*/true);
}

} // namespace ccf
