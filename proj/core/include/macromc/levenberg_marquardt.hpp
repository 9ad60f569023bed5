#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace macromc::fitting {

/// Residual vector for a parameter vector. Non-finite entries mark an infeasible point.
using ResidualFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct LmOptions {
    int max_iterations = 200;
    double gradient_tolerance = 1e-10; ///< on max |projected gradient component|
    double step_tolerance = 1e-12;     ///< on |step| / (|params| + step_tolerance)
    double initial_damping = 1e-3;
    double damping_factor = 10.0;
    double max_damping = 1e16;
    double fd_step = 1e-6; ///< relative to the per-parameter scaling
};

/// Bound-constrained nonlinear least-squares problem: minimise 0.5 |r(p)|^2 over a box.
struct FitProblem {
    ResidualFunction residuals;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    Eigen::VectorXd initial;
    Eigen::VectorXd scaling; ///< characteristic magnitude of each parameter
    LmOptions options;

    /// Throws ValidationError on mismatched sizes, empty/infinite bounds or an initial guess outside them.
    void validate() const;
};

enum class Termination {
    GradientTolerance,
    StepTolerance,
    MaxIterations,
    DampingLimit,
};

const char* to_string(Termination t);

struct FitResult {
    Eigen::VectorXd params;
    double mse = 0.0;  ///< mean of squared residuals
    double rmse = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    Termination termination = Termination::MaxIterations;
    double gradient_norm = 0.0; ///< max |projected gradient component| at the result
    double condition = 0.0;     ///< 2-norm condition number of the scaled Jacobian
    /// 0.5 |r|^2 after every accepted step, starting with the initial guess.
    std::vector<double> cost_history;
    std::vector<std::string> warnings;
};

/// Forward-difference Jacobian with step fd_step * scaling[j]. A column switches to a
/// backward difference when the forward point leaves the box or is infeasible.
Eigen::MatrixXd finite_difference_jacobian(const ResidualFunction& fn, const Eigen::VectorXd& params,
                                           const Eigen::VectorXd& residuals, const Eigen::VectorXd& scaling,
                                           const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                           double fd_step);

/// Damped Gauss-Newton with Marquardt diagonal scaling and projection onto the bounds.
///
/// Parameters resting on a bound whose gradient points outward are held fixed for the
/// step. A trial point is accepted only when it strictly lowers the cost; the damping
/// is divided by `damping_factor` on acceptance and multiplied by it on rejection.
/// Non-convergence is reported through `converged`, not thrown.
FitResult levenberg_marquardt(const FitProblem& problem);

} // namespace macromc::fitting
