#include "phuber/harness.hpp"

#include <algorithm>
#include <Eigen/Geometry>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "phuber/rng.hpp"
#include "phuber/solver.hpp"

namespace phuber {

std::vector<ViewEstimate> simulate_rig(const ScenarioConfig& config) {
    if (config.n_views < 1) throw std::invalid_argument("simulate_rig: n_views must be >= 1");
    if (!(config.rig_radius > 0.0)) {
        throw std::invalid_argument("simulate_rig: rig_radius must be > 0");
    }
    const NoiseSpec& ns = config.noise;
    if (!(ns.proj_jitter_std >= 0.0) || !(ns.depth_jitter_factor >= 0.0) ||
        !(ns.eig_lo > 0.0) || !(ns.eig_hi >= ns.eig_lo) || !(ns.a_lo > 0.0) ||
        !(ns.a_hi >= ns.a_lo)) {
        throw std::invalid_argument("simulate_rig: invalid noise spec");
    }
    if (!(config.intrinsics.f > 0.0) || !(config.intrinsics.S > 0.0)) {
        throw std::invalid_argument("simulate_rig: invalid intrinsics");
    }

    std::vector<ViewEstimate> views;
    views.reserve(config.n_views);
    for (int i = 0; i < config.n_views; ++i) {
        Rng rng(Rng::split(config.seed, static_cast<std::uint64_t>(i)));
        const double theta = 2.0 * M_PI * i / config.n_views;
        const Eigen::Vector3d pos =
            config.truth + config.rig_radius * Eigen::Vector3d(std::cos(theta), std::sin(theta), 0.0);
        const Eigen::Vector3d z_axis = (config.truth - pos).normalized();
        const Eigen::Vector3d up = Eigen::Vector3d::UnitZ();
        const Eigen::Vector3d x_axis = up.cross(z_axis).normalized();
        const Eigen::Vector3d y_axis = z_axis.cross(x_axis);

        ViewEstimate view;
        view.pose.R.col(0) = x_axis;
        view.pose.R.col(1) = y_axis;
        view.pose.R.col(2) = z_axis;
        view.pose.t = pos;
        view.intrinsics = config.intrinsics;

        const Point3 truth_cam = view.pose.world_to_cam(config.truth);
        // Facing the truth puts it on the principal axis; keep the assertion
        // as the geometry contract.
        if (!(truth_cam.z() > 0.0) ||
            std::abs(view.intrinsics.f * truth_cam.x() / truth_cam.z()) >= view.intrinsics.S / 2 ||
            std::abs(view.intrinsics.f * truth_cam.y() / truth_cam.z()) >= view.intrinsics.S / 2) {
            throw std::invalid_argument("simulate_rig: truth escaped the field of view");
        }

        view.params.mu_p.x() = truth_cam.x() / truth_cam.z() + ns.proj_jitter_std * rng.normal();
        view.params.mu_p.y() = truth_cam.y() / truth_cam.z() + ns.proj_jitter_std * rng.normal();
        view.params.mu_z = truth_cam.z() * std::exp(ns.depth_jitter_factor * rng.normal());
        const double e1 = rng.uniform(ns.eig_lo, ns.eig_hi);
        const double e2 = rng.uniform(ns.eig_lo, ns.eig_hi);
        const double psi = rng.uniform(0.0, M_PI);
        Eigen::Matrix2d rot;
        rot << std::cos(psi), -std::sin(psi), std::sin(psi), std::cos(psi);
        view.params.A = rot * Eigen::Vector2d(e1, e2).asDiagonal() * rot.transpose();
        view.params.a = rng.uniform(ns.a_lo, ns.a_hi);
        validate(view);
        views.push_back(std::move(view));
    }
    return views;
}

FitResult fit_params(const std::vector<NormalizedObservation>& samples,
                     const std::optional<RawOutput>& init, double grad_tol) {
    if (samples.size() < 3) {
        throw std::invalid_argument("fit_params: need at least 3 samples");
    }
    for (const auto& obs : samples) {
        if (!(obs.z_p > 0.0) || !obs.v_p.allFinite()) {
            throw std::invalid_argument("fit_params: samples must have finite v_p and z_p > 0");
        }
    }

    const double inv_n = 1.0 / static_cast<double>(samples.size());
    const Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
        RawOutput w = x;
        double value = 0.0;
        RawOutput g = RawOutput::Zero();
        for (const auto& obs : samples) {
            const RawLossResult r = loss_from_raw(w, obs);
            value += r.value;
            if (grad) g += r.grad;
        }
        if (grad) *grad = g * inv_n;
        return value * inv_n;
    };

    SolveOptions opt;
    opt.max_iterations = 5000;
    opt.grad_tol = grad_tol;
    opt.newton_polish = true;
    // Empirical-mean objectives are smooth near the optimum, where the
    // sampling polish exits after one round; it only works when a fit ends
    // on the nu_z = z_p ridge (degenerate inputs).
    opt.pattern_polish = false;
    opt.gradient_sampling = true;
    // The +-1e6 box is a guard for degenerate likelihoods with no finite
    // maximizer (e.g. every sample identical drives the precisions to
    // infinity); ordinary fits stay far inside it.
    Eigen::VectorXd lb = Eigen::VectorXd::Constant(7, -1e6);
    lb[5] = 0.0;  // restrict to the a >= 1 region
    opt.lower_bounds = lb;
    opt.upper_bounds = Eigen::VectorXd::Constant(7, 1e6);

    Eigen::VectorXd x0 = init ? Eigen::VectorXd(*init) : Eigen::VectorXd::Zero(7);
    const SolveResult sol = minimize(objective, x0, opt);

    FitResult out;
    out.w = sol.x;
    out.params = activation(out.w);
    out.loss = sol.value;
    out.iterations = sol.iterations;
    out.converged = sol.converged;
    Eigen::VectorXd g(7);
    objective(sol.x, &g);
    out.a_at_floor = sol.x[5] <= 0.0 && g[5] > 0.0;
    return out;
}

CalibrationCurve calibration_curve(const std::vector<std::pair<double, double>>& pairs,
                                   int window) {
    if (pairs.empty()) throw std::invalid_argument("calibration_curve: empty input");
    if (window < 1) throw std::invalid_argument("calibration_curve: window must be >= 1");
    for (const auto& [pv, se] : pairs) {
        if (!(pv >= 0.0) || !(se >= 0.0) || !std::isfinite(pv) || !std::isfinite(se)) {
            throw std::invalid_argument("calibration_curve: entries must be finite and >= 0");
        }
    }
    std::vector<std::pair<double, double>> sorted = pairs;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    const std::size_t n = sorted.size();
    const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(window), n);
    std::vector<double> cum_pv(n + 1, 0.0), cum_se(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        cum_pv[i + 1] = cum_pv[i] + sorted[i].first;
        cum_se[i + 1] = cum_se[i] + sorted[i].second;
    }
    CalibrationCurve curve;
    curve.points.reserve(n - w + 1);
    for (std::size_t i = 0; i + w <= n; ++i) {
        curve.points.emplace_back((cum_pv[i + w] - cum_pv[i]) / w,
                                  (cum_se[i + w] - cum_se[i]) / w);
    }
    return curve;
}

}  // namespace phuber
