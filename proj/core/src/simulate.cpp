#include "ccf/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "ccf/model.hpp"
#include "ccf/rng.hpp"

namespace ccf {

namespace {

std::vector<std::string> numbered_labels(const std::string& prefix, Index n) {
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(n));
    for (Index i = 1; i <= n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

} // namespace

std::pair<Eigen::MatrixXd, Eigen::MatrixXd>
gen_replication(const SimConfig& cfg, double sigma_e, std::uint64_t rep_seed,
                SimDraws* draws_out) {
    if (cfg.m < 2 || cfg.q < 1) throw config_error("simulation needs m >= 2, q >= 1");
    if (cfg.burn_in < 2) throw config_error("burn-in must be >= 2");
    if (!(sigma_e > 0)) throw config_error("sigma_e must be > 0");

    std::mt19937_64 rep_rng(rep_seed);
    std::mt19937_64 fixed_rng(derive_seed(cfg.seed, 0xF1EDCAFEULL));
    std::mt19937_64& load_rng = cfg.redraw_loadings ? rep_rng : fixed_rng;

    std::uniform_real_distribution<double> uhalf(0.0, 0.5);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const Index m = cfg.m, q = cfg.q;
    Eigen::VectorXd d(m), g(m - 1), v(m), b1(m), b2(m), c1(q), c2(q);
    for (Index i = 0; i < m; ++i) d(i) = uhalf(load_rng);
    for (Index i = 0; i < m - 1; ++i) g(i) = uhalf(load_rng);
    for (Index i = 0; i < m; ++i) v(i) = uhalf(load_rng);
    for (Index i = 0; i < m; ++i) b1(i) = gauss(load_rng);
    for (Index i = 0; i < m; ++i) b2(i) = gauss(load_rng);
    for (Index i = 0; i < q; ++i) c1(i) = gauss(load_rng);
    for (Index i = 0; i < q; ++i) c2(i) = gauss(load_rng);
    if (draws_out) *draws_out = SimDraws{d, g, v, b1, b2, c1, c2};
    Eigen::VectorXd noise_sd = v.cwiseSqrt();

    // A is upper bidiagonal, so its eigenvalues are the d_i <= 0.5 and the
    // VAR is always stable.
    const Index L = cfg.burn_in + cfg.T_total;
    Eigen::MatrixXd z(L, m);
    Eigen::VectorXd prev = Eigen::VectorXd::Zero(m);
    for (Index t = 0; t < L; ++t) {
        for (Index i = 0; i < m; ++i) {
            double mean = d(i) * prev(i);
            if (i + 1 < m) mean += g(i) * prev(i + 1);
            z(t, i) = mean + noise_sd(i) * gauss(rep_rng);
        }
        prev = z.row(t);
    }

    Eigen::VectorXd f(L);
    f(0) = 0.0; // never used: kept rows start after the burn-in
    for (Index t = 1; t < L; ++t)
        f(t) = b1.dot(z.row(t)) + b2.dot(z.row(t - 1));

    const Index keep_from = L - cfg.T_total;
    Eigen::MatrixXd y(cfg.T_total, q);
    for (Index t = keep_from; t < L; ++t) {
        Eigen::VectorXd e(q);
        for (Index i = 0; i < q; ++i) e(i) = sigma_e * gauss(rep_rng);
        y.row(t - keep_from) = (c1 * f(t) + c2 * f(t - 1) + e).transpose();
    }
    return {z.bottomRows(cfg.T_total), y};
}

namespace {

RepRecord run_one(const SimConfig& cfg, double sigma_e, int rep,
                  std::uint64_t seed) {
    RepRecord rec;
    rec.rep = rep;
    rec.sigma_e = sigma_e;

    auto [z_raw, y_raw] = gen_replication(cfg, sigma_e, seed);
    const Index n_fit = cfg.T_total - 1; // the last row is the prediction target

    TimeSeriesPanel y_fit_raw{y_raw.topRows(n_fit), numbered_labels("y", cfg.q), ""};
    TimeSeriesPanel z_fit_raw{z_raw.topRows(n_fit), numbered_labels("z", cfg.m), ""};
    auto [y_fit, y_info] = standardize(y_fit_raw);
    auto [z_fit, z_info] = standardize(z_fit_raw);
    Eigen::MatrixXd y_std_all = y_info.apply(y_raw);
    Eigen::MatrixXd z_std_all = z_info.apply(z_raw);
    const Eigen::VectorXd target = y_std_all.row(n_fit).transpose();
    const Index origin = n_fit - 1;

    if (cfg.run_ccf) {
        CvConfig cv = cfg.cv;
        cv.alpha = cfg.alpha;
        cv.h = 1;
        cv.threads = 1; // replications already run in parallel
        cv.solver.seed = derive_seed(seed, 101);
        CvOutcome outcome = cross_validate(y_fit, z_fit, cv);
        rec.s_hat = outcome.report.s_hat;
        ForecastResult fc = forecast(outcome.model, y_fit, z_fit, origin);
        rec.err_ccf = (target - fc.destandardized).squaredNorm() /
                      static_cast<double>(cfg.q);
    }
    if (cfg.run_sdpca) {
        SplitSpec split = SplitSpec::compute(n_fit, cfg.alpha);
        SdpcaModel sel = sdpca_fit(y_std_all.topRows(n_fit),
                                   z_std_all.topRows(n_fit), 1, split,
                                   cfg.baseline, 1);
        SdpcaModel refit = sdpca_refit(sel, y_std_all.topRows(n_fit),
                                       z_std_all.topRows(n_fit),
                                       n_fit - 2, 1);
        Eigen::VectorXd yhat = sdpca_forecast(refit, z_std_all, origin);
        rec.err_sdpca =
            (target - yhat).squaredNorm() / static_cast<double>(cfg.q);
    }
    return rec;
}

} // namespace

SimResult run_experiment(const SimConfig& cfg) {
    if (cfg.reps < 1) throw config_error("reps must be >= 1");
    if (cfg.sigma_e.empty()) throw config_error("sigma_e list is empty");
    if (cfg.T_total < 30) throw config_error("T_total too small for the protocol");

    const std::size_t n_sigma = cfg.sigma_e.size();
    const std::size_t n_tasks = n_sigma * static_cast<std::size_t>(cfg.reps);

    SimResult result;
    result.records.resize(n_tasks);

    parallel_for_index(n_tasks, cfg.threads, [&](std::size_t idx) {
        std::size_t si = idx / static_cast<std::size_t>(cfg.reps);
        int rep = static_cast<int>(idx % static_cast<std::size_t>(cfg.reps));
        // (sigma, rep)-keyed seeds: records are prefix-stable in the rep count.
        std::uint64_t seed = derive_seed(
            cfg.seed, (static_cast<std::uint64_t>(si) << 32) |
                          (static_cast<std::uint64_t>(rep) + 1));
        try {
            result.records[idx] = run_one(cfg, cfg.sigma_e[si], rep, seed);
        } catch (const std::exception& e) {
            RepRecord rec;
            rec.rep = rep;
            rec.sigma_e = cfg.sigma_e[si];
            rec.failed = true;
            rec.error = e.what();
            result.records[idx] = rec;
        }
    });

    for (std::size_t si = 0; si < n_sigma; ++si) {
        SigmaSummary sum;
        sum.sigma_e = cfg.sigma_e[si];
        std::vector<double> ccf, sdpca;
        std::string first_error;
        for (int rep = 0; rep < cfg.reps; ++rep) {
            const auto& rec =
                result.records[si * static_cast<std::size_t>(cfg.reps) +
                               static_cast<std::size_t>(rep)];
            if (rec.failed) {
                ++sum.failures;
                if (first_error.empty()) first_error = rec.error;
                continue;
            }
            if (cfg.run_ccf) ccf.push_back(rec.err_ccf);
            if (cfg.run_sdpca) sdpca.push_back(rec.err_sdpca);
        }
        double rate = static_cast<double>(sum.failures) /
                      static_cast<double>(cfg.reps);
        if (rate > cfg.max_failure_rate)
            throw numeric_error("replication failure rate " +
                                std::to_string(rate) + " exceeds the limit; first error: " +
                                first_error);
        auto mean_se = [](const std::vector<double>& xs, double& mean, double& se) {
            if (xs.empty()) { mean = se = 0.0; return; }
            double s = 0.0;
            for (double x : xs) s += x;
            mean = s / static_cast<double>(xs.size());
            if (xs.size() < 2) { se = 0.0; return; }
            double ss = 0.0;
            for (double x : xs) ss += (x - mean) * (x - mean);
            se = std::sqrt(ss / static_cast<double>(xs.size() - 1) /
                           static_cast<double>(xs.size()));
        };
        mean_se(ccf, sum.fmse_ccf, sum.se_ccf);
        mean_se(sdpca, sum.fmse_sdpca, sum.se_sdpca);
        sum.ratio = sum.fmse_ccf > 0 ? sum.fmse_sdpca / sum.fmse_ccf : 0.0;
        result.summaries.push_back(sum);
    }
    return result;
}

std::string format_sim_table(const SimResult& result) {
    std::ostringstream os;
    char buf[64];
    os << "sigma_e";
    for (const auto& s : result.summaries) {
        std::snprintf(buf, sizeof(buf), ",%.10g", s.sigma_e);
        os << buf;
    }
    os << "\nFMSE(sdPCA)";
    for (const auto& s : result.summaries) {
        std::snprintf(buf, sizeof(buf), ",%.10g", s.fmse_sdpca);
        os << buf;
    }
    os << "\nFMSE(CCF)";
    for (const auto& s : result.summaries) {
        std::snprintf(buf, sizeof(buf), ",%.10g", s.fmse_ccf);
        os << buf;
    }
    os << "\nFMSE(sdPCA)/FMSE(CCF)";
    for (const auto& s : result.summaries) {
        std::snprintf(buf, sizeof(buf), ",%.10g", s.ratio);
        os << buf;
    }
    os << "\n";
    return os.str();
}

} // namespace ccf
