#include "ccf/selection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ccf/rng.hpp"

namespace ccf {

double validation_fmse(const AlignedMatrix& residuals, Index origin_lo,
                       Index origin_hi, Index h) {
    Index lo = std::max(origin_lo + h, residuals.first_time);
    Index hi = std::min(origin_hi + h, residuals.last_time());
    if (hi < lo)
        throw config_error("no valid (t, t+h) pairs in the validation window");
    double sum = 0.0;
    for (Index u = lo; u <= hi; ++u)
        sum += residuals.values.row(u - residuals.first_time).squaredNorm();
    return sum / static_cast<double>(hi - lo + 1);
}

namespace {

// Validation-window error of a single candidate component against the
// current residual targets.
double component_val_fmse(const AlignedMatrix& targets, const AlignedMatrix& lag,
                          const CoreComponent& comp, Index h, Index origin_lo,
                          Index origin_hi) {
    AlignedSeries f{lag.values * comp.beta, lag.first_time};
    Index lo = std::max({origin_lo, lag.first_time + comp.k,
                         targets.first_time - h});
    Index hi = std::min({origin_hi, f.last_time(), targets.last_time() - h});
    if (hi < lo) throw config_error("empty validation window");
    const Index n = hi - lo + 1;
    Eigen::MatrixXd F(n, comp.k + 1);
    for (Index j = 0; j <= comp.k; ++j)
        F.col(j) = f.values.segment(lo - j - f.first_time, n);
    Eigen::MatrixXd E =
        targets.values.middleRows(lo + h - targets.first_time, n) -
        F * comp.gamma.transpose();
    return E.squaredNorm() / static_cast<double>(n);
}

struct CellFit {
    bool ok = false;
    bool skipped = false;
    std::string error;
    CoreComponent comp;
    double fmse = 0.0;
};

std::vector<std::shared_ptr<const AlignedMatrix>>
lag_cache(const Eigen::MatrixXd& z, int c_max) {
    std::vector<std::shared_ptr<const AlignedMatrix>> cache;
    cache.reserve(static_cast<std::size_t>(c_max) + 1);
    for (int c = 0; c <= c_max; ++c)
        cache.push_back(std::make_shared<AlignedMatrix>(build_lag_matrix(z, c)));
    return cache;
}

CellFit fit_cell(const Eigen::MatrixXd& z,
                 const std::shared_ptr<const AlignedMatrix>& lag,
                 const AlignedMatrix& targets, const SplitSpec& split,
                 const CvConfig& cfg, int c, int k, double lambda, int restarts,
                 std::uint64_t seed_id) {
    CellFit out;
    LagDesign design{c, k, cfg.h, z.cols()};
    const Index train_hi = split.T1 - 1 - cfg.h;
    FitProblem prob = [&]() -> FitProblem {
        return make_fit_problem(lag, targets, design, cfg.loss, lambda, 0, train_hi);
    }();
    if (prob.n() < cfg.min_effective_sample) {
        out.skipped = true;
        return out;
    }
    Eigen::VectorXd init = cfg.loss == LossKind::G1 ? init_redundancy(prob)
                                                    : init_canonical(prob);
    SolverConfig scfg = cfg.solver;
    scfg.restarts = restarts;
    scfg.seed = derive_seed(cfg.solver.seed, seed_id);
    auto [params, trace] = proximal_fit(prob, init, scfg);
    out.comp = CoreComponent{params.beta, params.gamma, c, k, lambda};
    out.fmse = component_val_fmse(targets, *lag, out.comp, cfg.h, split.T1,
                                  split.T1 + split.T2 - cfg.h - 1);
    out.ok = true;
    return out;
}

CellFit guarded_fit_cell(const Eigen::MatrixXd& z,
                         const std::shared_ptr<const AlignedMatrix>& lag,
                         const AlignedMatrix& targets, const SplitSpec& split,
                         const CvConfig& cfg, int c, int k, double lambda,
                         int restarts, std::uint64_t seed_id) {
    try {
        return fit_cell(z, lag, targets, split, cfg, c, k, lambda, restarts,
                        seed_id);
    } catch (const config_error&) {
        CellFit out;
        out.skipped = true; // empty effective sample for this candidate
        return out;
    } catch (const std::exception& e) {
        CellFit out;
        out.error = e.what();
        return out;
    }
}

// Smallest lambda whose single proximal step from the initializer zeroes at
// least 90% of the coordinates; eta is the unpenalized line minimizer.
double auto_lambda_max(const FitProblem& prob, const Eigen::VectorXd& init) {
    Eigen::VectorXd g = grad_profiled(init, prob);
    auto value_at = [&](double eta) {
        Eigen::VectorXd b = init - eta * g;
        double nb = b.norm();
        if (!(nb > 0)) return std::numeric_limits<double>::infinity();
        ProfiledEval ev = eval_profiled(b / nb, prob);
        return ev.ok ? ev.value : std::numeric_limits<double>::infinity();
    };
    double eta = 1e-4;
    double best_eta = eta, best_v = value_at(eta);
    for (int i = 0; i < 25; ++i) {
        double v = value_at(eta * 2.0);
        if (v < best_v) {
            eta *= 2.0;
            best_eta = eta;
            best_v = v;
        } else {
            break;
        }
    }
    Eigen::VectorXd w = (init - best_eta * g).cwiseAbs();
    std::vector<double> sorted(w.data(), w.data() + w.size());
    std::sort(sorted.begin(), sorted.end());
    const auto p = sorted.size();
    std::size_t idx = static_cast<std::size_t>(
        std::ceil(0.9 * static_cast<double>(p))) - 1;
    idx = std::min(idx, p - 1);
    double lmax = sorted[idx] / best_eta;
    if (!std::isfinite(lmax) || lmax <= 0) return 1.0;
    return lmax;
}

} // namespace

LagSelection select_lags(const Eigen::MatrixXd& z_std,
                         const AlignedMatrix& targets, const SplitSpec& split,
                         const CvConfig& cfg, int stage) {
    if (cfg.c_max < 0 || cfg.k_max < 0)
        throw config_error("lag caps must be >= 0");
    auto lags = lag_cache(z_std, cfg.c_max);
    const int n_cells = (cfg.c_max + 1) * (cfg.k_max + 1);
    std::vector<CellFit> cells(static_cast<std::size_t>(n_cells));

    parallel_for_index(static_cast<std::size_t>(n_cells), cfg.threads,
                       [&](std::size_t idx) {
        int c = static_cast<int>(idx) / (cfg.k_max + 1);
        int k = static_cast<int>(idx) % (cfg.k_max + 1);
        cells[idx] = guarded_fit_cell(
            z_std, lags[static_cast<std::size_t>(c)], targets, split, cfg, c, k,
            0.0, cfg.solver.restarts,
            static_cast<std::uint64_t>(stage) * 1000000u + idx);
    });

    LagSelection out;
    bool have_best = false;
    double best = 0.0;
    for (int c = 0; c <= cfg.c_max; ++c)
        for (int k = 0; k <= cfg.k_max; ++k) {
            const auto& cell =
                cells[static_cast<std::size_t>(c * (cfg.k_max + 1) + k)];
            LagCell rec{c, k, cell.fmse, cell.skipped || !cell.ok};
            out.surface.push_back(rec);
            if (!cell.ok) continue;
            bool better = !have_best || cell.fmse < best;
            if (!better && have_best && cell.fmse == best) {
                int bsum = out.c_hat + out.k_hat;
                better = (c + k < bsum) || (c + k == bsum && c < out.c_hat);
            }
            if (better) {
                have_best = true;
                best = cell.fmse;
                out.c_hat = c;
                out.k_hat = k;
            }
        }
    if (!have_best)
        throw config_error("every (c,k) candidate was skipped or failed; "
                           "reduce the lag caps or provide more data");
    return out;
}

LambdaSelection select_lambda(const Eigen::MatrixXd& z_std,
                              const AlignedMatrix& targets,
                              const SplitSpec& split, const CvConfig& cfg,
                              int c_hat, int k_hat, int stage) {
    if (cfg.grid < 2) throw config_error("lambda grid size J must be >= 2");
    auto lag = std::make_shared<AlignedMatrix>(build_lag_matrix(z_std, c_hat));

    LambdaSelection out;
    if (cfg.lambda_max > 0) {
        out.lambda_max = cfg.lambda_max;
    } else {
        LagDesign design{c_hat, k_hat, cfg.h, z_std.cols()};
        FitProblem prob = make_fit_problem(lag, targets, design, cfg.loss, 0.0,
                                           0, split.T1 - 1 - cfg.h);
        Eigen::VectorXd init = cfg.loss == LossKind::G1 ? init_redundancy(prob)
                                                        : init_canonical(prob);
        out.lambda_max = auto_lambda_max(prob, init);
    }

    const int J = cfg.grid;
    std::vector<CellFit> cells(static_cast<std::size_t>(J));
    parallel_for_index(static_cast<std::size_t>(J), cfg.threads,
                       [&](std::size_t j) {
        double lambda = static_cast<double>(j) * out.lambda_max /
                        static_cast<double>(J - 1);
        cells[j] = guarded_fit_cell(
            z_std, lag, targets, split, cfg, c_hat, k_hat, lambda,
            cfg.solver.restarts,
            static_cast<std::uint64_t>(stage) * 1000000u + 500000u + j);
    });

    bool have_best = false;
    double best = 0.0;
    for (int j = 0; j < J; ++j) {
        double lambda = static_cast<double>(j) * out.lambda_max /
                        static_cast<double>(J - 1);
        const auto& cell = cells[static_cast<std::size_t>(j)];
        if (!cell.ok) {
            if (!cell.skipped && !cell.error.empty())
                throw numeric_error("lambda grid fit failed: " + cell.error);
            continue;
        }
        out.grid.push_back(LambdaCell{lambda, cell.fmse});
        if (!have_best || cell.fmse <= best) { // ties toward larger lambda
            have_best = true;
            best = cell.fmse;
            out.lambda_hat = lambda;
            out.chosen = cell.comp;
            out.chosen_fmse = cell.fmse;
        }
    }
    if (!have_best) throw config_error("every lambda candidate failed");
    return out;
}

namespace {

std::vector<ArAugment> fit_ar_on_residuals(const AlignedMatrix& resid,
                                           const Eigen::MatrixXd& y_std,
                                           const std::vector<Index>& orders,
                                           Index h, Index origin_hi) {
    std::vector<ArAugment> specs;
    const Index first_origin = resid.first_time - h;
    for (Index j = 0; j < y_std.cols(); ++j) {
        Index pj = orders[static_cast<std::size_t>(j)];
        if (pj == 0) continue;
        Index lo = std::max(first_origin, pj);
        Index hi = std::min(origin_hi, resid.last_time() - h);
        Index n = hi - lo + 1;
        if (n < pj + 1)
            throw config_error("AR order too large for the sample of series " +
                               std::to_string(j));
        Eigen::MatrixXd R(n, pj);
        Eigen::VectorXd e(n);
        for (Index t = lo; t <= hi; ++t) {
            e(t - lo) = resid.values(t + h - resid.first_time, j);
            for (Index r = 1; r <= pj; ++r) R(t - lo, r - 1) = y_std(t - r, j);
        }
        Eigen::MatrixXd RtR = R.transpose() * R;
        Eigen::VectorXd phi = RtR.ldlt().solve(R.transpose() * e);
        if (!phi.allFinite()) {
            RtR.diagonal().array() += 1e-10 * RtR.trace() / static_cast<double>(pj);
            phi = RtR.ldlt().solve(R.transpose() * e);
            if (!phi.allFinite())
                throw numeric_error("AR regression singular for series " +
                                    std::to_string(j));
        }
        specs.push_back(ArAugment{j, pj, std::move(phi)});
    }
    return specs;
}

void subtract_ar_predictions(AlignedMatrix& resid, const Eigen::MatrixXd& y_std,
                             const std::vector<ArAugment>& specs, Index h) {
    for (const auto& ar : specs) {
        for (Index u = resid.first_time; u <= resid.last_time(); ++u) {
            Index t = u - h;
            if (t - ar.order < 0) continue;
            double add = 0.0;
            for (Index r = 1; r <= ar.order; ++r)
                add += ar.coefficients(r - 1) * y_std(t - r, ar.series);
            resid.values(u - resid.first_time, ar.series) -= add;
        }
    }
}

// Per-series AR order selection on the first validation window.
std::vector<Index> select_ar_orders(const AlignedMatrix& resid,
                                    const Eigen::MatrixXd& y_std,
                                    const SplitSpec& split, const CvConfig& cfg) {
    const Index q = y_std.cols();
    std::vector<Index> orders(static_cast<std::size_t>(q), 0);
    const Index val_lo = split.T1, val_hi = split.T1 + split.T2 - cfg.h - 1;
    const Index train_hi = split.T1 - cfg.h - 1;
    const Index first_origin = resid.first_time - cfg.h;

    parallel_for_index(static_cast<std::size_t>(q), cfg.threads,
                       [&](std::size_t sj) {
        Index j = static_cast<Index>(sj);
        double best = std::numeric_limits<double>::infinity();
        Index best_p = 0;
        for (Index p = 0; p <= cfg.ar_max_order; ++p) {
            Eigen::VectorXd phi(p);
            if (p > 0) {
                Index lo = std::max(first_origin, p);
                Index n = train_hi - lo + 1;
                if (n < p + 1) break;
                Eigen::MatrixXd R(n, p);
                Eigen::VectorXd e(n);
                for (Index t = lo; t <= train_hi; ++t) {
                    e(t - lo) = resid.values(t + cfg.h - resid.first_time, j);
                    for (Index r = 1; r <= p; ++r) R(t - lo, r - 1) = y_std(t - r, j);
                }
                phi = (R.transpose() * R).ldlt().solve(R.transpose() * e);
                if (!phi.allFinite()) continue;
            }
            double sum = 0.0;
            Index count = 0;
            for (Index t = val_lo; t <= val_hi; ++t) {
                double pred = 0.0;
                for (Index r = 1; r <= p; ++r) pred += phi(r - 1) * y_std(t - r, j);
                double err = resid.values(t + cfg.h - resid.first_time, j) - pred;
                sum += err * err;
                ++count;
            }
            if (count == 0) break;
            double fmse = sum / static_cast<double>(count);
            if (fmse < best) {
                best = fmse;
                best_p = p;
            }
        }
        orders[sj] = best_p;
    });
    return orders;
}

struct RefitResult {
    std::vector<CoreComponent> components;
    std::vector<ArAugment> ar;
    AlignedMatrix residuals; // chained over the full data range
};

// Re-estimates (beta, gamma) for a fixed schedule with origins capped at
// origin_hi, chaining residuals over the whole sample.
RefitResult refit_schedule(const Eigen::MatrixXd& y_std,
                           const Eigen::MatrixXd& z_std,
                           const std::vector<CoreComponent>& schedule,
                           const std::vector<Index>& ar_orders,
                           const CvConfig& cfg, Index origin_hi,
                           std::uint64_t seed_salt) {
    RefitResult out;
    AlignedMatrix targets{y_std, 0};
    SolverConfig scfg = cfg.solver;
    scfg.restarts = cfg.final_restarts;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        scfg.seed = derive_seed(cfg.solver.seed, seed_salt + i);
        ExtractResult step = extract_component(
            targets, z_std, schedule[i].c, schedule[i].k, schedule[i].lambda,
            cfg.h, cfg.loss, scfg, origin_hi);
        out.components.push_back(std::move(step.component));
        targets = std::move(step.residuals);
    }
    if (!ar_orders.empty()) {
        out.ar = fit_ar_on_residuals(targets, y_std, ar_orders, cfg.h, origin_hi);
        subtract_ar_predictions(targets, y_std, out.ar, cfg.h);
    }
    out.residuals = std::move(targets);
    return out;
}

// Residual chain of already-fitted components (no re-estimation).
AlignedMatrix chain_residuals(const Eigen::MatrixXd& y_std,
                              const Eigen::MatrixXd& z_std,
                              const std::vector<CoreComponent>& comps,
                              const std::vector<ArAugment>& ar, Index h) {
    Index d = 0;
    for (const auto& c : comps) d = std::max(d, c.span());
    Index lo = d;
    Index hi = std::min(y_std.rows() - 1 - h, z_std.rows() - 1);
    if (hi < lo) throw config_error("no usable origins for residual evaluation");
    AlignedMatrix resid;
    resid.first_time = lo + h;
    resid.values = y_std.middleRows(lo + h, hi - lo + 1);
    for (const auto& comp : comps) {
        AlignedMatrix lag = build_lag_matrix(z_std, comp.c);
        AlignedSeries f{lag.values * comp.beta, lag.first_time};
        const Index n = hi - lo + 1;
        Eigen::MatrixXd F(n, comp.k + 1);
        for (Index j = 0; j <= comp.k; ++j)
            F.col(j) = f.values.segment(lo - j - f.first_time, n);
        resid.values -= F * comp.gamma.transpose();
    }
    subtract_ar_predictions(resid, y_std, ar, h);
    return resid;
}

} // namespace

SelectionState select_components(const Eigen::MatrixXd& y_std,
                                 const Eigen::MatrixXd& z_std,
                                 const SplitSpec& split, const CvConfig& cfg) {
    if (cfg.max_components < 1)
        throw config_error("max_components must be >= 1");
    if (split.T2 <= cfg.h)
        throw config_error("first validation window too short for horizon h=" +
                           std::to_string(cfg.h));
    const Index T_sel = split.T1 + split.T2;
    if (y_std.rows() < T_sel || z_std.rows() < T_sel)
        throw config_error("data shorter than train+val1");

    // Selection may only read the training and first-validation rows.
    Eigen::MatrixXd y_sel = y_std.topRows(T_sel);
    Eigen::MatrixXd z_sel = z_std.topRows(T_sel);

    SelectionState state;
    state.report.split = split;
    state.report.alpha = split.alpha;
    state.report.h = cfg.h;
    state.report.loss = cfg.loss;
    state.residuals = AlignedMatrix{y_sel, 0};

    for (int stage = 1; stage <= cfg.max_components; ++stage) {
        LagSelection lags;
        LambdaSelection lam;
        try {
            lags = select_lags(z_sel, state.residuals, split, cfg, stage);
            lam = select_lambda(z_sel, state.residuals, split, cfg, lags.c_hat,
                                lags.k_hat, stage);
        } catch (const std::exception& e) {
            if (stage == 1)
                throw numeric_error(std::string("first component failed: ") +
                                    e.what());
            break; // keep the accepted stages
        }

        // The stage keeps exactly the grid fit at (c_hat, k_hat, lambda_hat),
        // and FMSE^(s) is that cell's validation value.
        double stage_fmse = lam.chosen_fmse;

        ComponentSelection sel;
        sel.c_hat = lags.c_hat;
        sel.k_hat = lags.k_hat;
        sel.lambda_hat = lam.lambda_hat;
        sel.lambda_max = lam.lambda_max;
        sel.fmse_surface = std::move(lags.surface);
        sel.lambda_grid = std::move(lam.grid);
        sel.fmse = stage_fmse;

        state.report.fmse_path.push_back(stage_fmse);
        if (stage >= 2 &&
            stage_fmse >= state.report.components.back().fmse) {
            state.report.rejected_stage = std::move(sel);
            break; // first non-improvement: keep s = stage - 1 components
        }
        state.report.components.push_back(std::move(sel));
        state.train_components.push_back(lam.chosen);

        // Chain residuals over the selection window with the kept component.
        const CoreComponent& comp = state.train_components.back();
        AlignedMatrix lag = build_lag_matrix(z_sel, comp.c);
        AlignedSeries f{lag.values * comp.beta, lag.first_time};
        Index lo = std::max(state.residuals.first_time - cfg.h,
                            comp.c + comp.k);
        Index hi = std::min(state.residuals.last_time() - cfg.h, f.last_time());
        const Index n = hi - lo + 1;
        Eigen::MatrixXd F(n, comp.k + 1);
        for (Index j = 0; j <= comp.k; ++j)
            F.col(j) = f.values.segment(lo - j - f.first_time, n);
        AlignedMatrix next;
        next.first_time = lo + cfg.h;
        next.values = state.residuals.values.middleRows(
                          lo + cfg.h - state.residuals.first_time, n) -
                      F * comp.gamma.transpose();
        state.residuals = std::move(next);
    }
    state.report.s_hat = static_cast<int>(state.report.components.size());

    if (cfg.ar_max_order > 0)
        state.report.ar_orders =
            select_ar_orders(state.residuals, y_sel, split, cfg);
    return state;
}

double final_fmsecv(const Eigen::MatrixXd& y_std, const Eigen::MatrixXd& z_std,
                    const SelectionState& state, const SplitSpec& split,
                    const CvConfig& cfg) {
    if (split.T3 <= cfg.h)
        throw config_error("second validation window too short for horizon h=" +
                           std::to_string(cfg.h));
    const Index val2_lo = split.T1 + split.T2;
    const Index val2_hi = split.total() - 1 - cfg.h;

    AlignedMatrix resid;
    if (cfg.refit) {
        RefitResult refit = refit_schedule(y_std, z_std, state.train_components,
                                           state.report.ar_orders, cfg,
                                           val2_lo - 1 - cfg.h, 7000000u);
        resid = std::move(refit.residuals);
    } else {
        std::vector<ArAugment> ar;
        if (!state.report.ar_orders.empty())
            ar = fit_ar_on_residuals(state.residuals, y_std,
                                     state.report.ar_orders, cfg.h,
                                     split.T1 - 1 - cfg.h);
        resid = chain_residuals(y_std, z_std, state.train_components, ar, cfg.h);
    }
    return validation_fmse(resid, val2_lo, val2_hi, cfg.h);
}

CvOutcome cross_validate(const TimeSeriesPanel& y_panel,
                         const TimeSeriesPanel& z_panel, const CvConfig& cfg) {
    y_panel.validate();
    z_panel.validate();
    if (y_panel.rows() != z_panel.rows())
        throw data_error("y and z panels must cover the same periods");
    const Index T = y_panel.rows();
    SplitSpec split = SplitSpec::compute(T, cfg.alpha);

    // Scale/center from train+val1 only; val2 must not influence selection.
    auto [y_sel, y_info] = standardize(y_panel.slice_rows(0, split.T1 + split.T2));
    auto [z_sel, z_info] = standardize(z_panel.slice_rows(0, split.T1 + split.T2));
    Eigen::MatrixXd y_std = y_info.apply(y_panel.values);
    Eigen::MatrixXd z_std = z_info.apply(z_panel.values);

    SelectionState state = select_components(y_std, z_std, split, cfg);
    state.report.fmsecv = final_fmsecv(y_std, z_std, state, split, cfg);

    CvOutcome out;
    out.report = std::move(state.report);

    out.model.y_std = y_info;
    out.model.z_std = z_info;
    out.model.y_labels = y_panel.labels;
    out.model.z_labels = z_panel.labels;
    out.model.h = cfg.h;
    out.model.loss = cfg.loss;
    if (cfg.refit) {
        RefitResult refit = refit_schedule(y_std, z_std, state.train_components,
                                           out.report.ar_orders, cfg,
                                           T - 1 - cfg.h, 8000000u);
        out.model.components = std::move(refit.components);
        out.model.ar_augment = std::move(refit.ar);
    } else {
        out.model.components = state.train_components;
        if (!out.report.ar_orders.empty())
            out.model.ar_augment =
                fit_ar_on_residuals(state.residuals, y_std, out.report.ar_orders,
                                    cfg.h, split.T1 - 1 - cfg.h);
    }
    return out;
}

std::string format_cv_table(const CvReport& report) {
    std::ostringstream os;
    char line[160];
    std::snprintf(line, sizeof(line), "%-10s %4s %4s %14s %14s\n", "component",
                  "c", "k", "lambda", "val_fmse");
    os << line;
    for (std::size_t i = 0; i < report.components.size(); ++i) {
        const auto& comp = report.components[i];
        std::snprintf(line, sizeof(line), "%-10zu %4d %4d %14.6g %14.6g\n",
                      i + 1, comp.c_hat, comp.k_hat, comp.lambda_hat, comp.fmse);
        os << line;
    }
    if (report.rejected_stage) {
        const auto& comp = *report.rejected_stage;
        std::snprintf(line, sizeof(line), "%-10s %4d %4d %14.6g %14.6g\n",
                      "(rejected)", comp.c_hat, comp.k_hat, comp.lambda_hat,
                      comp.fmse);
        os << line;
    }
    std::snprintf(line, sizeof(line), "s_hat = %d, FMSECV = %.10g\n",
                  report.s_hat, report.fmsecv);
    os << line;
    return os.str();
}

} // namespace ccf
