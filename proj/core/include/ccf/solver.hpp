#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ccf/objective.hpp"

namespace ccf {

enum class LineSearchKind { golden_section, backtracking };

struct SolverConfig {
    double epsilon = 1e-7;  // relative-objective stopping tolerance
    int max_iter = 500;
    LineSearchKind line_search = LineSearchKind::golden_section;
    double eta0 = 1e-4;        // smallest bracketing step
    int line_search_evals = 30;
    double backtrack_shrink = 0.5;
    int restarts = 1;            // total starts (1 = initializer only)
    double restart_sigma = 0.1;  // Gaussian perturbation of extra starts
    std::uint64_t seed = 0;
    double cert_tol_scale = 1e-6; // certificate tolerance, scaled by 1+|RG*|
    bool record_iterates = false;
};

enum class Termination { converged, max_iter, critical_point };

std::string to_string(Termination t);

struct FitTrace {
    std::vector<double> objective_path; // RG* after every accepted step
    int iterations = 0;
    Termination termination = Termination::max_iter;
    bool annihilated = false;        // soft threshold zeroed every coordinate
    bool line_search_stalled = false;
    std::vector<Eigen::VectorXd> iterates; // filled when record_iterates
};

enum class IndexClass { inactive_ok, active_ok, violating };
// inactive_ok: beta_i = 0 and |g_i| <= lambda   (set I1)
// active_ok:   beta_i != 0 and g*_i = 0         (set I2)

struct CriticalPointReport {
    std::vector<IndexClass> classes;
    double max_violation = 0.0;
    double tolerance = 0.0;
    bool certified = false;
    Index count(IndexClass c) const;
};

/// First redundancy-analysis direction: leading eigenvector of
/// Sxx^{-1} Sxy Syx, unit norm, largest-magnitude entry positive.
/// Falls back to the uniform vector 1/sqrt(p) on eigen failure
/// (fallback flag reported through `fell_back` when non-null).
Eigen::VectorXd init_redundancy(const FitProblem& prob, bool* fell_back = nullptr);

/// First canonical-correlation direction on the regressor side: leading
/// eigenvector of Sxx^{-1} Sxy Syy^{-1} Syx, unit norm, sign-fixed.
Eigen::VectorXd init_canonical(const FitProblem& prob, bool* fell_back = nullptr);

/// Proximal-gradient descent for the regularized profiled objective.
/// Each accepted step strictly decreases RG*; "converged" additionally
/// requires the critical-point certificate, so converged fits are certified
/// critical points.
std::pair<ComponentParams, FitTrace>
proximal_fit(const FitProblem& prob, const Eigen::VectorXd& init,
             const SolverConfig& cfg = {});

/// Per-index classification into the two critical-condition sets;
/// certified iff every index lands in one of them within
/// tol_scale * (1 + |RG*(beta)|).
CriticalPointReport critical_point_certificate(const Eigen::VectorXd& beta,
                                               const FitProblem& prob,
                                               double tol_scale = 1e-6);

/// Alternating fixed-point iteration for the non-regularized G1 problem
/// (rejects lambda > 0).
std::pair<ComponentParams, FitTrace>
fixed_point_fit_g1(const FitProblem& prob, const Eigen::VectorXd& init,
                   const SolverConfig& cfg = {});

/// Determinant-criterion fixed point: alternates the residual covariance,
/// the Sigma^{-1}-weighted beta solve, and the inner least squares.
/// q = 1 delegates to the G1 iteration.
std::pair<ComponentParams, FitTrace>
fixed_point_fit_g2(const FitProblem& prob, const Eigen::VectorXd& init,
                   const SolverConfig& cfg = {});

/// Flip sign so the largest-magnitude coordinate is positive (ties: first).
void sign_fix(Eigen::VectorXd& beta);
void sign_fix(ComponentParams& params);

} // namespace ccf
