#pragma once

#include <limits>
#include <memory>
#include <string>

#include "ccf/panel.hpp"

namespace ccf {

enum class LossKind { G1, G2 };

std::string to_string(LossKind kind);
LossKind loss_from_string(const std::string& s);

/// One component's parameters: unit-norm loading vector beta over the
/// stacked regressors, and the q x (k+1) forecast-equation coefficients.
struct ComponentParams {
    Eigen::VectorXd beta;
    Eigen::MatrixXd gamma;
};

/// A fully aligned single-component estimation problem. Rows of Y are the
/// targets y_{t+h} for forecast origins t = t_lo .. t_lo + n() - 1; the lag
/// matrix is shared (it depends only on (z, c)) so that lambda grids and
/// k sweeps reuse it.
class FitProblem {
public:
    FitProblem(std::shared_ptr<const AlignedMatrix> lag_matrix,
               Eigen::MatrixXd targets, Index t_lo, LagDesign design,
               LossKind loss, double lambda);

    const AlignedMatrix& lag() const { return *lag_; }
    const Eigen::MatrixXd& targets() const { return Y_; }
    const LagDesign& design() const { return design_; }
    LossKind loss() const { return loss_; }
    double lambda() const { return lambda_; }

    Index t_lo() const { return t_lo_; }
    Index t_hi() const { return t_lo_ + Y_.rows() - 1; }
    Index n() const { return Y_.rows(); }       // effective sample size
    Index q() const { return Y_.cols(); }
    Index p() const { return design_.p(); }

    /// Block of x_{t-j} rows for t = t_lo..t_hi (n x p view into the lag matrix).
    Eigen::Block<const Eigen::MatrixXd> x_block(Index j) const;

private:
    std::shared_ptr<const AlignedMatrix> lag_;
    Eigen::MatrixXd Y_;
    Index t_lo_;
    LagDesign design_;
    LossKind loss_;
    double lambda_;
};

/// Aligns targets (rows tagged by absolute time) against the lag structure
/// and clamps the forecast-origin range to [origin_lo, origin_hi].
/// Throws config_error when the effective sample is empty.
FitProblem make_fit_problem(std::shared_ptr<const AlignedMatrix> lag_matrix,
                            const AlignedMatrix& targets, LagDesign design,
                            LossKind loss, double lambda,
                            Index origin_lo = 0,
                            Index origin_hi = std::numeric_limits<Index>::max());

/// Convenience overload that builds the lag matrix from the z values.
FitProblem make_fit_problem(const Eigen::MatrixXd& z_values,
                            const AlignedMatrix& targets, LagDesign design,
                            LossKind loss, double lambda,
                            Index origin_lo = 0,
                            Index origin_hi = std::numeric_limits<Index>::max());

/// Everything one evaluation of the profiled objective produces. `ok` is
/// false (with `error` set) on singular designs or non-finite values, so
/// line searches can treat such points as infeasible without exceptions.
struct ProfiledEval {
    bool ok = false;
    std::string error;
    double value = 0.0;       // G_i*(beta)
    Eigen::MatrixXd gamma;    // q x (k+1), the inner least-squares minimizer
    Eigen::MatrixXd resid;    // n x q, rows e_{t+h|t}'
    Eigen::MatrixXd F;        // n x (k+1), rows f_t(beta)'
    Eigen::MatrixXd sigma;    // q x q residual covariance (G2 only)
    double sigma_det = 0.0;   // |sigma| (G2 only)
};

ProfiledEval eval_profiled(const Eigen::VectorXd& beta, const FitProblem& prob);

/// Gradient of the smooth profiled loss from a completed evaluation
/// (envelope property: gamma is the exact inner minimizer).
Eigen::VectorXd grad_from_eval(const ProfiledEval& eval, const FitProblem& prob);

// --- Loss functions -------------------------------------------------------

/// Mean squared Euclidean norm of the forecast errors.
double loss_g1(const ComponentParams& params, const FitProblem& prob);

/// Determinant of the time-averaged residual outer-product matrix.
double loss_g2(const ComponentParams& params, const FitProblem& prob);

double loss(const ComponentParams& params, const FitProblem& prob);

/// Inner least-squares coefficients gamma = Y'F (F'F)^{-1}; minimizes both
/// criteria over gamma for fixed beta. Throws numeric_error when F(beta) is
/// rank deficient.
Eigen::MatrixXd gamma_ls(const Eigen::VectorXd& beta, const FitProblem& prob);

/// G_i*(beta) = G_i(beta, gamma_ls(beta)).
double profiled_loss(const Eigen::VectorXd& beta, const FitProblem& prob);

/// RG_i*(beta) = G_i*(beta) + lambda ||beta||_1 / ||beta||_2.
double regularized_loss(const Eigen::VectorXd& beta, const FitProblem& prob);

/// Analytic gradient of G_i*.
Eigen::VectorXd grad_profiled(const Eigen::VectorXd& beta, const FitProblem& prob);

/// Continuous part of the regularized gradient at unit norm:
/// grad_profiled(beta) - lambda ||beta||_1 beta.
Eigen::VectorXd grad_regularized_smooth(const Eigen::VectorXd& beta,
                                        const FitProblem& prob);

/// Componentwise shrink-toward-zero operator.
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double gamma);
double soft_threshold(double v, double gamma);

/// sign(beta_i) with sign(0) = 0 (the discontinuous part of the subgradient).
Eigen::VectorXd sign_vector(const Eigen::VectorXd& beta);

} // namespace ccf
