#include "phuber/solver.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace phuber {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void project(Eigen::VectorXd& x, const SolveOptions& opt) {
    if (opt.lower_bounds) x = x.cwiseMax(*opt.lower_bounds);
    if (opt.upper_bounds) x = x.cwiseMin(*opt.upper_bounds);
}

// Gradient with components pointing out of the feasible box zeroed.
Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                                   const SolveOptions& opt) {
    Eigen::VectorXd pg = g;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (opt.lower_bounds && x[i] <= (*opt.lower_bounds)[i] && pg[i] > 0.0) pg[i] = 0.0;
        if (opt.upper_bounds && x[i] >= (*opt.upper_bounds)[i] && pg[i] < 0.0) pg[i] = 0.0;
    }
    return pg;
}

struct LineSearchOutcome {
    Eigen::VectorXd x;
    double value = kInf;
    double step = 0.0;
    bool ok = false;
};

LineSearchOutcome backtrack(const Objective& f, const Eigen::VectorXd& x, double fx,
                            const Eigen::VectorXd& g, double t0, const SolveOptions& opt) {
    LineSearchOutcome out;
    double t = t0;
    for (int k = 0; k < 80; ++k) {
        Eigen::VectorXd xt = x - t * g;
        project(xt, opt);
        const double ft = f(xt, nullptr);
        const double move2 = (x - xt).squaredNorm();
        if (move2 == 0.0) break;
        if (std::isfinite(ft) && ft <= fx - opt.armijo_c / t * move2) {
            out.x = std::move(xt);
            out.value = ft;
            out.step = t;
            out.ok = true;
            return out;
        }
        t *= opt.backtrack;
    }
    return out;
}

void newton_polish(const Objective& f, Eigen::VectorXd& x, double& fx,
                   const SolveOptions& opt) {
    const Eigen::Index n = x.size();
    Eigen::VectorXd g(n);
    for (int round = 0; round < 30; ++round) {
        const double fx0 = f(x, &g);
        fx = fx0;
        // Coordinates pinned at an active bound stay fixed.
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < n; ++i) {
            const bool at_lo = opt.lower_bounds && x[i] <= (*opt.lower_bounds)[i] && g[i] > 0.0;
            const bool at_hi = opt.upper_bounds && x[i] >= (*opt.upper_bounds)[i] && g[i] < 0.0;
            const bool active = at_lo || at_hi;
            if (!active) free.push_back(i);
        }
        if (free.empty()) return;
        const Eigen::Index nf = static_cast<Eigen::Index>(free.size());
        Eigen::MatrixXd h(nf, nf);
        Eigen::VectorXd gp(n), gm(n);
        for (Eigen::Index j = 0; j < nf; ++j) {
            const double hstep = 1e-5 * (1.0 + std::abs(x[free[j]]));
            Eigen::VectorXd xp = x, xm = x;
            xp[free[j]] += hstep;
            xm[free[j]] -= hstep;
            project(xp, opt);
            project(xm, opt);
            const double vp = f(xp, &gp);
            const double vm = f(xm, &gm);
            if (!std::isfinite(vp) || !std::isfinite(vm)) return;
            for (Eigen::Index i = 0; i < nf; ++i) {
                h(i, j) = (gp[free[i]] - gm[free[i]]) / (xp[free[j]] - xm[free[j]]);
            }
        }
        h = 0.5 * (h + h.transpose()).eval();
        Eigen::LLT<Eigen::MatrixXd> llt(h);
        if (llt.info() != Eigen::Success) return;
        Eigen::VectorXd gf(nf);
        for (Eigen::Index i = 0; i < nf; ++i) gf[i] = g[free[i]];
        const Eigen::VectorXd df = llt.solve(gf);
        Eigen::VectorXd dir = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < nf; ++i) dir[free[i]] = df[i];
        if (!(dir.dot(g) > 0.0)) return;
        double t = 1.0;
        bool accepted = false;
        for (int k = 0; k < 40; ++k) {
            Eigen::VectorXd xt = x - t * dir;
            project(xt, opt);
            const double ft = f(xt, nullptr);
            if (std::isfinite(ft) && ft < fx0) {
                x = std::move(xt);
                fx = ft;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted || fx0 - fx < 1e-15 * (1.0 + std::abs(fx0))) return;
    }
}

// Direction set for the pattern polish: coordinate axes, two-coordinate
// diagonals, and a fixed batch of pseudo-random unit directions. The random
// directions matter near kink intersections, where axis probes can stall.
std::vector<Eigen::VectorXd> polish_directions(Eigen::Index n) {
    std::vector<Eigen::VectorXd> dirs;
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
        d[i] = 1.0;
        dirs.push_back(d);
        dirs.push_back(-d);
    }
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            for (const double si : {1.0, -1.0}) {
                for (const double sj : {1.0, -1.0}) {
                    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
                    d[i] = si * inv_sqrt2;
                    d[j] = sj * inv_sqrt2;
                    dirs.push_back(d);
                }
            }
        }
    }
    std::uint64_t state = 0x9e3779b97f4a7c15ull;
    const auto next = [&state]() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return static_cast<double>(state >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    };
    for (int k = 0; k < 12; ++k) {
        Eigen::VectorXd d(n);
        for (Eigen::Index i = 0; i < n; ++i) d[i] = next();
        if (d.norm() > 1e-6) dirs.push_back(d.normalized());
    }
    return dirs;
}

void pattern_polish(const Objective& f, Eigen::VectorXd& x, double& fx,
                    const SolveOptions& opt) {
    const auto dirs = polish_directions(x.size());
    double radius = 1e-3 * (1.0 + x.norm());
    const double radius_floor = 1e-13 * (1.0 + x.norm());
    while (radius > radius_floor) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (const auto& d : dirs) {
                Eigen::VectorXd xt = x + radius * d;
                project(xt, opt);
                const double ft = f(xt, nullptr);
                if (std::isfinite(ft) && ft < fx - 1e-18) {
                    x = std::move(xt);
                    fx = ft;
                    improved = true;
                }
            }
        }
        radius *= 0.5;
    }
}

}  // namespace

namespace {

// Minimum-norm point of the convex hull of the gradient columns, by
// Frank-Wolfe on the simplex.
Eigen::VectorXd min_norm_in_hull(const Eigen::MatrixXd& grads) {
    const Eigen::Index m = grads.cols();
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
    lambda[0] = 1.0;
    Eigen::VectorXd d = grads.col(0);
    for (int it = 0; it < 300; ++it) {
        Eigen::Index best = 0;
        double best_dot = d.dot(grads.col(0));
        for (Eigen::Index i = 1; i < m; ++i) {
            const double dot = d.dot(grads.col(i));
            if (dot < best_dot) {
                best_dot = dot;
                best = i;
            }
        }
        const Eigen::VectorXd diff = d - grads.col(best);
        const double denom = diff.squaredNorm();
        if (denom < 1e-30) break;
        const double gamma = std::clamp(d.dot(diff) / denom, 0.0, 1.0);
        if (gamma <= 0.0) break;
        lambda *= (1.0 - gamma);
        lambda[best] += gamma;
        d = grads * lambda;
    }
    return d;
}

void gradient_sampling_polish(const Objective& f, Eigen::VectorXd& x, double& fx,
                              const SolveOptions& opt) {
    const Eigen::Index n = x.size();
    const Eigen::Index m = 2 * n + 6;
    std::uint64_t state = 0x2545f4914f6cdd1dull;
    const auto unit_dir = [&state, n]() {
        Eigen::VectorXd u(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            // xorshift64 bits through a rough normal via sum of uniforms
            double acc = 0.0;
            for (int k = 0; k < 4; ++k) {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                acc += static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
            }
            u[i] = acc;
        }
        const double norm = u.norm();
        return norm > 1e-9 ? Eigen::VectorXd(u / norm) : Eigen::VectorXd::Unit(n, 0).eval();
    };

    Eigen::MatrixXd grads(n, m);
    Eigen::VectorXd g(n);
    for (double delta = 1e-5 * (1.0 + x.norm()); delta > 1e-12 * (1.0 + x.norm());
         delta *= 0.2) {
        for (int round = 0; round < 40; ++round) {
            Eigen::Index col = 0;
            if (std::isfinite(f(x, &g))) grads.col(col++) = g;
            int attempts = 0;
            while (col < m && attempts < 4 * m) {
                ++attempts;
                Eigen::VectorXd xs = x + delta * unit_dir();
                project(xs, opt);
                if (std::isfinite(f(xs, &g))) grads.col(col++) = g;
            }
            if (col < 2) return;
            const Eigen::VectorXd d = min_norm_in_hull(grads.leftCols(col));
            if (d.norm() <= opt.grad_tol) return;  // epsilon-stationary
            // line search along the min-norm descent direction
            const Eigen::VectorXd dir = d / d.norm();
            double t = 8.0 * delta;
            bool accepted = false;
            for (int k = 0; k < 30; ++k) {
                Eigen::VectorXd xt = x - t * dir;
                project(xt, opt);
                const double ft = f(xt, nullptr);
                if (std::isfinite(ft) && ft < fx - opt.armijo_c * t * d.norm()) {
                    x = std::move(xt);
                    fx = ft;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if (!accepted) break;  // shrink the sampling radius
            // greedy extension: keep doubling while the value still drops,
            // which rides long descent ridges in few rounds
            for (int k = 0; k < 60; ++k) {
                t *= 2.0;
                Eigen::VectorXd xt = x - t * dir;
                project(xt, opt);
                const double ft = f(xt, nullptr);
                if (!std::isfinite(ft) || ft >= fx) break;
                x = std::move(xt);
                fx = ft;
            }
        }
    }
}

// One run of projected backtracking descent; returns iterations used.
int descent_loop(const Objective& objective, Eigen::VectorXd& x, double& fx, double& t_warm,
                 int max_iterations, const SolveOptions& opt, bool* converged) {
    Eigen::VectorXd g(x.size());
    fx = objective(x, &g);
    int it = 0;
    int tiny_steps = 0;
    *converged = false;
    for (; it < max_iterations; ++it) {
        const Eigen::VectorXd pg = projected_gradient(x, g, opt);
        if (pg.norm() < opt.grad_tol) {
            *converged = true;
            break;
        }
        const auto ls = backtrack(objective, x, fx, g, t_warm, opt);
        if (!ls.ok) {
            *converged = true;  // no descent at any scale; subgradient stationary
            break;
        }
        const double move = (ls.x - x).norm();
        x = ls.x;
        t_warm = std::min(ls.step * 2.5, 1e12);
        if (move < opt.step_tol * (1.0 + x.norm())) {
            if (++tiny_steps >= 3) {
                *converged = true;
                break;
            }
        } else {
            tiny_steps = 0;
        }
        fx = objective(x, &g);
    }
    return it;
}

}  // namespace

SolveResult minimize(const Objective& objective, const Eigen::VectorXd& x0,
                     const SolveOptions& opt) {
    Eigen::VectorXd x = x0;
    project(x, opt);
    if (!std::isfinite(objective(x, nullptr))) {
        throw std::invalid_argument("minimize: starting point has non-finite value");
    }

    SolveResult result;
    double fx = 0.0;
    double t_warm = opt.initial_step;
    bool converged = false;
    int total_iterations = descent_loop(objective, x, fx, t_warm, opt.max_iterations, opt,
                                        &converged);

    // Descent stalls at kink intersections; alternate polish phases with
    // short descent restarts, exiting only when a full polish pass finds no
    // further improvement.
    for (int round = 0; round < 60; ++round) {
        const double before = fx;
        if (opt.newton_polish) newton_polish(objective, x, fx, opt);
        if (opt.gradient_sampling) gradient_sampling_polish(objective, x, fx, opt);
        if (opt.pattern_polish) pattern_polish(objective, x, fx, opt);
        if (before - fx <= 1e-14 * (1.0 + std::abs(before))) break;
        bool re_converged = false;
        total_iterations += descent_loop(objective, x, fx, t_warm,
                                         std::min(opt.max_iterations, 2000), opt, &re_converged);
        converged = converged || re_converged;
    }

    result.x = std::move(x);
    result.value = objective(result.x, nullptr);
    result.iterations = total_iterations;
    result.converged = converged;
    return result;
}

}  // namespace phuber
