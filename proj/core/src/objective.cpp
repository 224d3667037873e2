#include "ccf/objective.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace ccf {

std::string to_string(LossKind kind) {
    return kind == LossKind::G1 ? "g1" : "g2";
}

LossKind loss_from_string(const std::string& s) {
    if (s == "g1" || s == "G1") return LossKind::G1;
    if (s == "g2" || s == "G2") return LossKind::G2;
    throw config_error("unknown loss kind: " + s + " (expected g1 or g2)");
}

FitProblem::FitProblem(std::shared_ptr<const AlignedMatrix> lag_matrix,
                       Eigen::MatrixXd targets, Index t_lo, LagDesign design,
                       LossKind loss, double lambda)
    : lag_(std::move(lag_matrix)),
      Y_(std::move(targets)),
      t_lo_(t_lo),
      design_(design),
      loss_(loss),
      lambda_(lambda) {
    design_.validate();
    if (lambda_ < 0) throw config_error("penalty lambda must be >= 0");
    if (!lag_) throw config_error("fit problem requires a lag matrix");
    if (lag_->values.cols() != design_.p())
        throw config_error("lag matrix width does not match the design");
    if (Y_.rows() < 1) throw config_error("empty effective sample");
    if (t_lo_ < design_.min_origin() || t_hi() > lag_->last_time())
        throw config_error("origin range outside the lag matrix");
}

Eigen::Block<const Eigen::MatrixXd> FitProblem::x_block(Index j) const {
    // Rows x_{t-j} for t = t_lo..t_hi; row of time u sits at u - c.
    return lag_->values.middleRows(t_lo_ - j - lag_->first_time, n());
}

FitProblem make_fit_problem(std::shared_ptr<const AlignedMatrix> lag_matrix,
                            const AlignedMatrix& targets, LagDesign design,
                            LossKind loss, double lambda, Index origin_lo,
                            Index origin_hi) {
    design.validate();
    if (!lag_matrix) throw config_error("fit problem requires a lag matrix");
    if (lag_matrix->first_time != design.c)
        throw config_error("lag matrix was built for a different lag count");
    Index t_lo = std::max({design.min_origin(), targets.first_time - design.h,
                           origin_lo});
    Index t_hi = std::min({lag_matrix->last_time(),
                           targets.last_time() - design.h, origin_hi});
    if (t_hi < t_lo)
        throw config_error("empty effective sample for c=" + std::to_string(design.c) +
                           ", k=" + std::to_string(design.k) +
                           ", h=" + std::to_string(design.h));
    Eigen::MatrixXd Y = targets.values.middleRows(
        t_lo + design.h - targets.first_time, t_hi - t_lo + 1);
    return FitProblem(std::move(lag_matrix), std::move(Y), t_lo, design, loss,
                      lambda);
}

FitProblem make_fit_problem(const Eigen::MatrixXd& z_values,
                            const AlignedMatrix& targets, LagDesign design,
                            LossKind loss, double lambda, Index origin_lo,
                            Index origin_hi) {
    auto lag = std::make_shared<AlignedMatrix>(build_lag_matrix(z_values, design.c));
    return make_fit_problem(std::move(lag), targets, design, loss, lambda,
                            origin_lo, origin_hi);
}

namespace {

// F(beta): n x (k+1) with rows (f_t, ..., f_{t-k}). One pass over the lag
// matrix gives the component series; columns are shifted windows of it.
Eigen::MatrixXd design_windows(const Eigen::VectorXd& beta, const FitProblem& prob) {
    const Index k = prob.design().k;
    const Index n = prob.n();
    Eigen::VectorXd f_full = prob.lag().values * beta; // f_u for u = c..T-1
    Eigen::MatrixXd F(n, k + 1);
    const Index base = prob.t_lo() - prob.lag().first_time;
    for (Index j = 0; j <= k; ++j) F.col(j) = f_full.segment(base - j, n);
    return F;
}

struct SigmaInverse {
    Eigen::MatrixXd inv;
    bool ok = false;
    std::string error;
};

// Symmetric positive-definite solve with the documented ridge fallback:
// 1e-10 * trace/q added to the diagonal when the condition number exceeds 1e12.
SigmaInverse invert_sigma(const Eigen::MatrixXd& sigma) {
    SigmaInverse out;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
    if (es.info() != Eigen::Success) {
        out.error = "eigendecomposition of residual covariance failed";
        return out;
    }
    Eigen::VectorXd evals = es.eigenvalues();
    const double max_ev = evals.maxCoeff();
    const double min_ev = evals.minCoeff();
    if (!(std::isfinite(max_ev) && std::isfinite(min_ev)) || max_ev <= 0) {
        out.error = "residual covariance is not positive";
        return out;
    }
    double ridge = 0.0;
    if (min_ev <= 0 || max_ev / min_ev > 1e12)
        ridge = 1e-10 * sigma.trace() / static_cast<double>(sigma.rows());
    Eigen::VectorXd inv_evals = (evals.array() + ridge).inverse();
    if (!inv_evals.allFinite()) {
        out.error = "residual covariance is singular beyond the ridge fallback";
        return out;
    }
    out.inv = es.eigenvectors() * inv_evals.asDiagonal() * es.eigenvectors().transpose();
    out.ok = true;
    return out;
}

} // namespace

ProfiledEval eval_profiled(const Eigen::VectorXd& beta, const FitProblem& prob) {
    ProfiledEval out;
    if (beta.size() != prob.p()) {
        out.error = "beta has wrong dimension";
        return out;
    }
    const Index n = prob.n();
    const Index k1 = prob.design().k + 1;

    out.F = design_windows(beta, prob);
    Eigen::MatrixXd G = out.F.transpose() * out.F;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    if (es.info() != Eigen::Success) {
        out.error = "design gram matrix eigendecomposition failed";
        return out;
    }
    const double max_ev = es.eigenvalues().maxCoeff();
    const double min_ev = es.eigenvalues().minCoeff();
    if (!(max_ev > 0) || min_ev <= max_ev * 1e-13 || n < k1) {
        out.error = "singular design: F(beta) is rank deficient";
        return out;
    }
    Eigen::MatrixXd FtY = out.F.transpose() * prob.targets(); // (k+1) x q
    Eigen::MatrixXd gamma_t = es.eigenvectors() *
                              es.eigenvalues().cwiseInverse().asDiagonal() *
                              (es.eigenvectors().transpose() * FtY);
    out.gamma = gamma_t.transpose(); // q x (k+1)
    out.resid = prob.targets() - out.F * gamma_t;

    if (prob.loss() == LossKind::G1 || prob.q() == 1) {
        // G2 with q = 1 is the 1x1 determinant, i.e. exactly G1.
        out.value = out.resid.squaredNorm() / static_cast<double>(n);
        if (prob.loss() == LossKind::G2) {
            out.sigma = Eigen::MatrixXd::Constant(1, 1, out.value);
            out.sigma_det = out.value;
        }
    } else {
        out.sigma = out.resid.transpose() * out.resid / static_cast<double>(n);
        out.sigma_det = out.sigma.determinant();
        out.value = out.sigma_det;
    }
    if (!std::isfinite(out.value)) {
        out.error = "non-finite objective value";
        out.ok = false;
        return out;
    }
    out.ok = true;
    return out;
}

Eigen::VectorXd grad_from_eval(const ProfiledEval& eval, const FitProblem& prob) {
    if (!eval.ok) throw numeric_error("gradient requested at infeasible point: " + eval.error);
    const Index n = prob.n();
    const Index k = prob.design().k;

    Eigen::MatrixXd U; // n x (k+1), rows u_t'
    double scale;
    if (prob.loss() == LossKind::G1) {
        U = eval.resid * eval.gamma; // u_t = gamma' e_t
        scale = -2.0 / static_cast<double>(n);
    } else {
        auto sinv = invert_sigma(eval.sigma);
        if (!sinv.ok) throw numeric_error(sinv.error);
        U = eval.resid * (sinv.inv * eval.gamma); // u_t = gamma' sigma^-1 e_t
        scale = -2.0 * eval.sigma_det / static_cast<double>(n);
    }

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(prob.p());
    for (Index j = 0; j <= k; ++j)
        grad.noalias() += prob.x_block(j).transpose() * U.col(j);
    return scale * grad;
}

namespace {

void check_params(const ComponentParams& params, const FitProblem& prob) {
    if (params.beta.size() != prob.p())
        throw std::invalid_argument("beta dimension does not match the design");
    if (params.gamma.rows() != prob.q() ||
        params.gamma.cols() != prob.design().k + 1)
        throw std::invalid_argument("gamma dimensions do not match the problem");
}

Eigen::MatrixXd residuals_at(const ComponentParams& params, const FitProblem& prob) {
    check_params(params, prob);
    Eigen::MatrixXd F = design_windows(params.beta, prob);
    return prob.targets() - F * params.gamma.transpose();
}

} // namespace

double loss_g1(const ComponentParams& params, const FitProblem& prob) {
    Eigen::MatrixXd E = residuals_at(params, prob);
    return E.squaredNorm() / static_cast<double>(prob.n());
}

double loss_g2(const ComponentParams& params, const FitProblem& prob) {
    Eigen::MatrixXd E = residuals_at(params, prob);
    if (prob.q() == 1) return E.squaredNorm() / static_cast<double>(prob.n());
    Eigen::MatrixXd sigma = E.transpose() * E / static_cast<double>(prob.n());
    double det = sigma.determinant();
    if (!std::isfinite(det)) throw numeric_error("non-finite residual determinant");
    return det;
}

double loss(const ComponentParams& params, const FitProblem& prob) {
    return prob.loss() == LossKind::G1 ? loss_g1(params, prob)
                                       : loss_g2(params, prob);
}

Eigen::MatrixXd gamma_ls(const Eigen::VectorXd& beta, const FitProblem& prob) {
    ProfiledEval ev = eval_profiled(beta, prob);
    if (!ev.ok) throw numeric_error(ev.error);
    return ev.gamma;
}

double profiled_loss(const Eigen::VectorXd& beta, const FitProblem& prob) {
    ProfiledEval ev = eval_profiled(beta, prob);
    if (!ev.ok) throw numeric_error(ev.error);
    return ev.value;
}

double regularized_loss(const Eigen::VectorXd& beta, const FitProblem& prob) {
    double l2 = beta.norm();
    if (l2 == 0.0) throw std::domain_error("regularized loss undefined at beta = 0");
    return profiled_loss(beta, prob) +
           prob.lambda() * beta.lpNorm<1>() / l2;
}

Eigen::VectorXd grad_profiled(const Eigen::VectorXd& beta, const FitProblem& prob) {
    ProfiledEval ev = eval_profiled(beta, prob);
    if (!ev.ok) throw numeric_error(ev.error);
    return grad_from_eval(ev, prob);
}

Eigen::VectorXd grad_regularized_smooth(const Eigen::VectorXd& beta,
                                        const FitProblem& prob) {
    if (std::abs(beta.norm() - 1.0) > 1e-6)
        throw std::invalid_argument("grad_regularized_smooth requires ||beta||_2 = 1");
    return grad_profiled(beta, prob) - prob.lambda() * beta.lpNorm<1>() * beta;
}

double soft_threshold(double v, double gamma) {
    if (v > gamma) return v - gamma;
    if (v < -gamma) return v + gamma;
    return 0.0;
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double gamma) {
    if (gamma < 0) throw config_error("soft threshold level must be >= 0");
    Eigen::VectorXd out(v.size());
    for (Index i = 0; i < v.size(); ++i) out(i) = soft_threshold(v(i), gamma);
    return out;
}

Eigen::VectorXd sign_vector(const Eigen::VectorXd& beta) {
    Eigen::VectorXd s(beta.size());
    for (Index i = 0; i < beta.size(); ++i)
        s(i) = beta(i) > 0 ? 1.0 : (beta(i) < 0 ? -1.0 : 0.0);
    return s;
}

} // namespace ccf
