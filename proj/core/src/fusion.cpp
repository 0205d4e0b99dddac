#include "phuber/fusion.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <limits>

#include "phuber/solver.hpp"

namespace phuber {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd to_vec(const Point3& v) {
    Eigen::VectorXd x(3);
    x << v.x(), v.y(), v.z();
    return x;
}

Point3 to_point(const Eigen::VectorXd& x) { return {x[0], x[1], x[2]}; }

SolveOptions fusion_solver_options(double grad_tol) {
    SolveOptions opt;
    opt.max_iterations = 20000;
    opt.grad_tol = grad_tol;
    opt.newton_polish = true;
    opt.pattern_polish = true;
    return opt;
}

}  // namespace

void validate(const CameraPose& pose) {
    if (!pose.R.allFinite() || !pose.t.allFinite()) {
        throw std::invalid_argument("CameraPose: non-finite field");
    }
    const Eigen::Matrix3d err = pose.R.transpose() * pose.R - Eigen::Matrix3d::Identity();
    if (err.cwiseAbs().maxCoeff() > 1e-10) {
        throw std::invalid_argument("CameraPose: R is not orthonormal");
    }
    if (std::abs(pose.R.determinant() - 1.0) > 1e-10) {
        throw std::invalid_argument("CameraPose: det R must be +1");
    }
}

void validate(const ViewEstimate& view) {
    validate(view.pose);
    if (!(view.intrinsics.f > 0.0) || !(view.intrinsics.S > 0.0)) {
        throw std::invalid_argument("ViewEstimate: invalid intrinsics");
    }
    validate(view.params);
}

NllWorldResult nll_world(const Point3& v, const ViewEstimate& view) {
    NllWorldResult out;
    const Point3 vc = view.pose.world_to_cam(v);
    if (vc.z() <= 0.0) {
        out.value = kInf;
        return out;
    }
    const LogPdfGrad lp = log_pdf_with_gradient(vc, view.params);
    out.value = -lp.value;
    out.grad = view.pose.R * (-lp.grad);  // chain rule: d v_cam / d v_world = R^T
    return out;
}

double total_nll(const Point3& v, const std::vector<ViewEstimate>& views,
                 Eigen::Vector3d* grad) {
    double value = 0.0;
    Eigen::Vector3d g = Eigen::Vector3d::Zero();
    for (const auto& view : views) {
        const NllWorldResult r = nll_world(v, view);
        if (!std::isfinite(r.value)) {
            return kInf;
        }
        value += r.value;
        g += r.grad;
    }
    if (grad) *grad = g;
    return value;
}

namespace {

// First finite-NLL point among: the caller's init, the centroid of world
// modes, bisection from the centroid toward the first view's mode, the modes
// themselves, and pairwise mode midpoints.
Point3 feasible_start(const std::vector<ViewEstimate>& views,
                      const std::optional<Point3>& init) {
    std::vector<Point3> modes;
    modes.reserve(views.size());
    for (const auto& view : views) {
        modes.push_back(view.pose.cam_to_world(mode(view.params)));
    }
    const auto finite = [&](const Point3& v) { return std::isfinite(total_nll(v, views)); };

    if (init && finite(*init)) return *init;
    Point3 centroid = Point3::Zero();
    for (const auto& m : modes) centroid += m;
    centroid /= static_cast<double>(modes.size());
    if (finite(centroid)) return centroid;
    double t = 0.5;
    for (int k = 0; k < 48; ++k, t *= 0.5) {
        const Point3 v = modes.front() + t * (centroid - modes.front());
        if (finite(v)) return v;
    }
    for (const auto& m : modes) {
        if (finite(m)) return m;
    }
    for (std::size_t i = 0; i < modes.size(); ++i) {
        for (std::size_t j = i + 1; j < modes.size(); ++j) {
            const Point3 v = 0.5 * (modes[i] + modes[j]);
            if (finite(v)) return v;
        }
    }
    throw InfeasibleError("fuse: no point with finite total NLL found (disjoint fields of view?)");
}

}  // namespace

FuseResult fuse(const std::vector<ViewEstimate>& views, const std::optional<Point3>& init,
                double grad_tol) {
    if (views.empty()) throw std::invalid_argument("fuse: need at least one view");
    for (const auto& view : views) validate(view);

    const Point3 start = feasible_start(views, init);
    const Objective objective = [&views](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
        Eigen::Vector3d g;
        const double value = total_nll(to_point(x), views, grad ? &g : nullptr);
        if (grad && std::isfinite(value)) *grad = g;
        return value;
    };
    const SolveResult sol = minimize(objective, to_vec(start), fusion_solver_options(grad_tol));

    FuseResult out;
    out.v_star = to_point(sol.x);
    out.nll = sol.value;
    out.iterations = sol.iterations;
    out.converged = sol.converged;
    return out;
}

void validate(const Plane& plane) {
    if (!plane.d.allFinite() || !std::isfinite(plane.c)) {
        throw std::invalid_argument("Plane: non-finite field");
    }
    if (std::abs(plane.d.norm() - 1.0) > 1e-12) {
        throw std::invalid_argument("Plane: normal must have unit length");
    }
}

PlaneMleResult plane_mle(const std::vector<ViewEstimate>& views, const Plane& plane,
                         double grad_tol) {
    if (views.empty()) throw std::invalid_argument("plane_mle: need at least one view");
    for (const auto& view : views) validate(view);
    validate(plane);

    // Orthonormal basis of the plane through p0 = c d.
    const Eigen::Vector3d d = plane.d;
    Eigen::Vector3d seed = Eigen::Vector3d::UnitX();
    if (std::abs(d.x()) > 0.9) seed = Eigen::Vector3d::UnitY();
    const Eigen::Vector3d u1 = d.cross(seed).normalized();
    const Eigen::Vector3d u2 = d.cross(u1);
    const Eigen::Vector3d p0 = plane.c * d;

    const auto embed = [&](double alpha, double beta) -> Point3 {
        return p0 + alpha * u1 + beta * u2;
    };
    const auto nll_at = [&](double alpha, double beta) {
        return total_nll(embed(alpha, beta), views);
    };

    // Feasible start: projected world modes, then expanding rings.
    double a0 = 0.0, b0 = 0.0;
    bool found = false;
    std::vector<Eigen::Vector2d> seeds;
    double scale = 1.0;
    for (const auto& view : views) {
        const Point3 m = view.pose.cam_to_world(mode(view.params));
        seeds.emplace_back(u1.dot(m - p0), u2.dot(m - p0));
        scale = std::max(scale, (m - p0).norm());
    }
    for (const auto& s : seeds) {
        if (std::isfinite(nll_at(s.x(), s.y()))) {
            a0 = s.x();
            b0 = s.y();
            found = true;
            break;
        }
    }
    if (!found) {
        for (int ring = 0; ring < 24 && !found; ++ring) {
            const double r = scale * std::ldexp(1.0, ring - 8);
            for (int k = 0; k < 16 && !found; ++k) {
                const double ang = 2.0 * M_PI * k / 16.0;
                const double ca = seeds.front().x() + r * std::cos(ang);
                const double cb = seeds.front().y() + r * std::sin(ang);
                if (std::isfinite(nll_at(ca, cb))) {
                    a0 = ca;
                    b0 = cb;
                    found = true;
                }
            }
        }
    }
    if (!found) {
        throw InfeasibleError("plane_mle: plane does not intersect any field of view");
    }

    const Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
        Eigen::Vector3d g3;
        const double value = total_nll(embed(x[0], x[1]), views, grad ? &g3 : nullptr);
        if (grad && std::isfinite(value)) {
            (*grad)(0) = u1.dot(g3);
            (*grad)(1) = u2.dot(g3);
        }
        return value;
    };
    Eigen::VectorXd x0(2);
    x0 << a0, b0;
    const SolveResult sol = minimize(objective, x0, fusion_solver_options(grad_tol));

    PlaneMleResult out;
    out.v_star = embed(sol.x[0], sol.x[1]);
    out.v_star -= (d.dot(out.v_star) - plane.c) * d;  // scrub rounding in d^T v = c
    out.nll = sol.value;
    out.iterations = sol.iterations;
    out.converged = sol.converged;
    return out;
}

}  // namespace phuber
