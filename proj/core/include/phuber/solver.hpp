#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>

namespace phuber {

/// Objective callback: returns the value at x and, when grad is non-null,
/// fills the gradient (a subgradient at kinks). May return +inf outside the
/// feasible region; the gradient is only requested at finite points.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct SolveOptions {
    int max_iterations = 20000;
    double grad_tol = 1e-8;
    double step_tol = 1e-12;
    double armijo_c = 1e-4;
    double backtrack = 0.5;
    double initial_step = 1.0;
    bool newton_polish = true;
    bool pattern_polish = true;
    /// Gradient-sampling polish: descends along the minimum-norm vector of
    /// nearby sampled gradients, which keeps making progress where plain
    /// subgradient steps stall (kink intersections). Cheap in low dimension.
    bool gradient_sampling = true;
    /// Optional per-coordinate bounds (projected descent).
    std::optional<Eigen::VectorXd> lower_bounds;
    std::optional<Eigen::VectorXd> upper_bounds;
};

struct SolveResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Backtracking line-search descent on (sub)gradients with Armijo acceptance,
/// an optional finite-difference Newton polish where the local Hessian is
/// positive definite, and an optional coordinate pattern polish for the last
/// few digits near kinks. Requires x0 to be feasible with a finite value.
SolveResult minimize(const Objective& objective, const Eigen::VectorXd& x0,
                     const SolveOptions& options = {});

}  // namespace phuber
