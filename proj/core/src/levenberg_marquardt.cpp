#include "macromc/levenberg_marquardt.hpp"

#include "macromc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace macromc::fitting {

namespace {

bool all_finite(const Eigen::VectorXd& v)
{
    return v.allFinite();
}

double half_sq_norm(const Eigen::VectorXd& r)
{
    return 0.5 * r.squaredNorm();
}

Eigen::VectorXd project(const Eigen::VectorXd& p, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper)
{
    return p.cwiseMax(lower).cwiseMin(upper);
}

/// Mask of parameters held on a bound by an outward-pointing gradient.
std::vector<bool> active_set(const Eigen::VectorXd& p, const Eigen::VectorXd& g, const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper)
{
    std::vector<bool> active(static_cast<std::size_t>(p.size()), false);
    for (Eigen::Index j = 0; j < p.size(); ++j) {
        // descent direction is -g
        active[static_cast<std::size_t>(j)] = (p[j] <= lower[j] && g[j] > 0.0) || (p[j] >= upper[j] && g[j] < 0.0);
    }
    return active;
}

double projected_gradient_norm(const Eigen::VectorXd& g, const std::vector<bool>& active)
{
    double norm = 0.0;
    for (Eigen::Index j = 0; j < g.size(); ++j) {
        if (!active[static_cast<std::size_t>(j)]) {
            norm = std::max(norm, std::abs(g[j]));
        }
    }
    return norm;
}

double condition_number(const Eigen::MatrixXd& J, const Eigen::VectorXd& scaling)
{
    if (J.rows() == 0 || J.cols() == 0) {
        return std::numeric_limits<double>::infinity();
    }
    const Eigen::MatrixXd scaled = J * scaling.asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled);
    const auto& sv = svd.singularValues();
    if (J.rows() < J.cols() || sv[sv.size() - 1] <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return sv[0] / sv[sv.size() - 1];
}

} // namespace

const char* to_string(Termination t)
{
    switch (t) {
    case Termination::GradientTolerance:
        return "gradient tolerance";
    case Termination::StepTolerance:
        return "step tolerance";
    case Termination::MaxIterations:
        return "iteration limit";
    case Termination::DampingLimit:
        return "damping limit";
    }
    return "unknown";
}

void FitProblem::validate() const
{
    const auto n = initial.size();
    if (!residuals) {
        throw ValidationError("FitProblem: residual function not set");
    }
    if (n == 0) {
        throw ValidationError("FitProblem: empty parameter vector");
    }
    if (lower.size() != n || upper.size() != n || scaling.size() != n) {
        throw ValidationError("FitProblem: bounds, scaling and initial guess differ in size");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]) || lower[j] > upper[j]) {
            throw ValidationError("FitProblem: bounds of parameter " + std::to_string(j) + " are not a finite interval");
        }
        if (!(initial[j] >= lower[j] && initial[j] <= upper[j])) {
            throw ValidationError("FitProblem: initial guess of parameter " + std::to_string(j) + " outside its bounds");
        }
        if (!(std::isfinite(scaling[j]) && scaling[j] > 0.0)) {
            throw ValidationError("FitProblem: scaling of parameter " + std::to_string(j) + " must be > 0");
        }
    }
}

Eigen::MatrixXd finite_difference_jacobian(const ResidualFunction& fn, const Eigen::VectorXd& params,
                                           const Eigen::VectorXd& residuals, const Eigen::VectorXd& scaling,
                                           const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                           double fd_step)
{
    const auto m = residuals.size();
    const auto n = params.size();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double h = fd_step * scaling[j];
        const double room_up = upper[j] - params[j];
        const double room_down = params[j] - lower[j];
        double sign = (room_up >= h || room_up >= room_down) ? 1.0 : -1.0;
        for (int attempt = 0; attempt < 2; ++attempt, sign = -sign) {
            Eigen::VectorXd shifted = params;
            shifted[j] += sign * h;
            const double actual = shifted[j] - params[j];
            if (actual == 0.0) {
                continue;
            }
            const Eigen::VectorXd r = fn(shifted);
            if (all_finite(r)) {
                J.col(j) = (r - residuals) / actual;
                break;
            }
        }
    }
    return J;
}

FitResult levenberg_marquardt(const FitProblem& problem)
{
    problem.validate();
    const auto& opt = problem.options;

    FitResult result;
    Eigen::VectorXd p = problem.initial;
    Eigen::VectorXd r = problem.residuals(p);
    ++result.evaluations;
    if (r.size() == 0) {
        throw ValidationError("levenberg_marquardt: residual vector is empty");
    }
    if (!all_finite(r)) {
        throw DomainError("levenberg_marquardt: residual not finite at the initial guess");
    }
    double cost = half_sq_norm(r);
    result.cost_history.push_back(cost);

    double lambda = opt.initial_damping;
    Eigen::MatrixXd J;
    bool done = false;

    while (!done) {
        J = finite_difference_jacobian(problem.residuals, p, r, problem.scaling, problem.lower, problem.upper,
                                       opt.fd_step);
        result.evaluations += static_cast<int>(p.size());
        const Eigen::VectorXd g = J.transpose() * r;
        const auto active = active_set(p, g, problem.lower, problem.upper);
        result.gradient_norm = projected_gradient_norm(g, active);

        if (result.gradient_norm < opt.gradient_tolerance) {
            result.termination = Termination::GradientTolerance;
            result.converged = true;
            break;
        }
        if (result.iterations >= opt.max_iterations) {
            result.termination = Termination::MaxIterations;
            break;
        }

        // Reduced system over the free parameters.
        std::vector<Eigen::Index> free;
        for (Eigen::Index j = 0; j < p.size(); ++j) {
            if (!active[static_cast<std::size_t>(j)]) {
                free.push_back(j);
            }
        }
        const auto nf = static_cast<Eigen::Index>(free.size());
        if (nf == 0) {
            result.termination = Termination::StepTolerance;
            result.converged = true;
            break;
        }
        Eigen::MatrixXd Jf(J.rows(), nf);
        for (Eigen::Index k = 0; k < nf; ++k) {
            Jf.col(k) = J.col(free[static_cast<std::size_t>(k)]);
        }
        const Eigen::MatrixXd A = Jf.transpose() * Jf;
        const Eigen::VectorXd gf = Jf.transpose() * r;
        Eigen::VectorXd diag = A.diagonal();
        const double diag_floor = 1e-12 * std::max(1.0, diag.maxCoeff());
        diag = diag.cwiseMax(diag_floor);

        while (true) {
            Eigen::MatrixXd damped = A;
            damped.diagonal() += lambda * diag;
            const Eigen::VectorXd step_free = damped.ldlt().solve(-gf);

            Eigen::VectorXd trial = p;
            if (step_free.allFinite()) {
                for (Eigen::Index k = 0; k < nf; ++k) {
                    trial[free[static_cast<std::size_t>(k)]] += step_free[k];
                }
                trial = project(trial, problem.lower, problem.upper);
            }

            const double step = (trial - p).norm();
            if (step_free.allFinite() && step <= opt.step_tolerance * (p.norm() + opt.step_tolerance)) {
                result.termination = Termination::StepTolerance;
                result.converged = true;
                done = true;
                break;
            }

            Eigen::VectorXd r_trial;
            double cost_trial = std::numeric_limits<double>::infinity();
            if (step_free.allFinite()) {
                r_trial = problem.residuals(trial);
                ++result.evaluations;
                if (all_finite(r_trial)) {
                    cost_trial = half_sq_norm(r_trial);
                }
            }

            if (cost_trial < cost) {
                p = std::move(trial);
                r = std::move(r_trial);
                cost = cost_trial;
                result.cost_history.push_back(cost);
                lambda = std::max(lambda / opt.damping_factor, 1e-300);
                ++result.iterations;
                break;
            }
            lambda *= opt.damping_factor;
            if (lambda > opt.max_damping) {
                result.termination = Termination::DampingLimit;
                done = true;
                break;
            }
        }
    }

    result.params = p;
    result.mse = r.squaredNorm() / static_cast<double>(r.size());
    result.rmse = std::sqrt(result.mse);
    result.condition = condition_number(J, problem.scaling);
    if (!result.converged) {
        result.warnings.push_back(std::string("stopped without convergence: ") + to_string(result.termination));
    }
    return result;
}

} // namespace macromc::fitting
