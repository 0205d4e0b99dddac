#include "phuber/verify.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <Eigen/LU>
#include <cmath>
#include <sstream>

#include "phuber/distribution.hpp"
#include "phuber/fusion.hpp"
#include "phuber/harness.hpp"
#include "phuber/mapping.hpp"
#include "phuber/quadrature.hpp"
#include "phuber/rng.hpp"
#include "phuber/special_functions.hpp"

namespace phuber {

namespace {

class Checker {
public:
    explicit Checker(std::string suite) { report_.suite = std::move(suite); }

    void check(const std::string& name, bool ok, double stat = std::nan("")) {
        std::ostringstream line;
        line << name << ": " << (ok ? "pass" : "FAIL");
        if (!std::isnan(stat)) line << " (" << stat << ")";
        report_.details.push_back(line.str());
        report_.passed = report_.passed && ok;
    }

    SuiteReport take() { return std::move(report_); }

private:
    SuiteReport report_;
};

Eigen::Matrix2d random_spd(Rng& rng, double eig_lo, double eig_hi) {
    const double e1 = rng.uniform(eig_lo, eig_hi);
    const double e2 = rng.uniform(eig_lo, eig_hi);
    const double psi = rng.uniform(0.0, M_PI);
    Eigen::Matrix2d rot;
    rot << std::cos(psi), -std::sin(psi), std::sin(psi), std::cos(psi);
    return rot * Eigen::Vector2d(e1, e2).asDiagonal() * rot.transpose();
}

DistParams random_params(Rng& rng) {
    DistParams p;
    p.mu_p << rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5);
    p.mu_z = rng.uniform(0.5, 5.0);
    p.A = random_spd(rng, 0.5, 4.0);
    p.a = rng.uniform(0.5, 10.0);
    return p;
}

double direct_gamma_oracle(int k, double a) {
    const double hi = a + 60.0;
    const double scale = std::exp(-a) * std::pow(a, k - 1);
    return adaptive_simpson(
        [k](double t) { return std::pow(t, k - 1) * std::exp(-t); }, a, hi,
        1e-12 * std::max(scale, 1e-300));
}

SuiteReport special_fn_suite() {
    Checker c("special_fn");

    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double a = 0.05 * std::pow(50.0 / 0.05, i / 49.0);
        worst = std::max(worst, std::abs(g1(a) - g1_adaptive(a, 1e-12)));
    }
    c.check("gauss_legendre_vs_adaptive_simpson_1e-9", worst < 1e-9, worst);

    double worst_rec = 0.0;
    for (int i = 0; i < 24; ++i) {
        const double a = 0.1 * std::pow(200.0, i / 23.0);
        for (const int k : {-2, -3}) {
            const double direct = direct_gamma_oracle(k, a);
            const double rec = upper_gamma(k, a);
            worst_rec = std::max(worst_rec, std::abs(rec - direct) / std::abs(direct));
        }
    }
    c.check("gamma_recurrence_vs_quadrature_1e-8", worst_rec < 1e-8, worst_rec);

    bool increasing = true;
    double prev = 0.0;
    for (int i = 0; i <= 40; ++i) {
        const double a = 0.05 * std::pow(100.0 / 0.05, i / 40.0);
        const double v = upper_gamma_scaled(-1, a);
        increasing = increasing && v > prev && v > 0.0 && v < 1.0;
        prev = v;
    }
    c.check("g1_increasing_in_(0,1)", increasing);
    const double tail = std::abs(upper_gamma_scaled(-1, 100.0) - 1.0);
    c.check("g1(100)_within_0.03_of_1", tail < 0.03, tail);

    bool bounds_ok = true;
    bool deriv_ok = true;
    for (int i = 0; i <= 200; ++i) {
        const double a = 0.05 + i * (40.0 - 0.05) / 200.0;
        const ValueAndDerivative lnd = log_norm_depth(a);
        const double k_depth = std::exp(lnd.value);  // mu_z = 1
        bounds_ok = bounds_ok && k_depth >= std::exp(-a) / a * (1.0 - 1e-12) &&
                    k_depth <= std::exp(-a) * (1.0 / a + 1.0) * (1.0 + 1e-12);
        if (a > 1.0) deriv_ok = deriv_ok && std::abs(lnd.derivative) < 4.0;
    }
    c.check("k_depth_bounds", bounds_ok);
    c.check("log_norm_depth_derivative_below_4_for_a>1", deriv_ok);
    return c.take();
}

SuiteReport distribution_suite(std::uint64_t seed) {
    Checker c("distribution");
    Rng rng(Rng::split(seed, 1));

    bool support_ok = true;
    for (int i = 0; i < 2000; ++i) {
        DistParams p = random_params(rng);
        const Point3 behind(rng.normal(), rng.normal(), -std::abs(rng.normal()) - 1e-12);
        support_ok = support_ok && std::isinf(log_pdf(behind, p)) && log_pdf(behind, p) < 0;
        const Point3 front(rng.normal() * 10, rng.normal() * 10, std::abs(rng.normal()) + 1e-6);
        support_ok = support_ok && std::isfinite(log_pdf(front, p));
    }
    c.check("support_half_space", support_ok);

    double worst_chord = -1.0;
    for (int i = 0; i < 10000; ++i) {
        DistParams p = random_params(rng);
        const Point3 v1(rng.normal() * 2, rng.normal() * 2, rng.uniform(0.05, 8.0));
        const Point3 v2(rng.normal() * 2, rng.normal() * 2, rng.uniform(0.05, 8.0));
        const Point3 mid = 0.5 * (v1 + v2);
        const double viol =
            -log_pdf(mid, p) - 0.5 * (-log_pdf(v1, p) - log_pdf(v2, p));
        worst_chord = std::max(worst_chord, viol);
    }
    c.check("nll_midpoint_convexity_in_v", worst_chord <= 1e-9, worst_chord);

    bool decay_ok = true;
    for (int trial = 0; trial < 3; ++trial) {
        DistParams p = random_params(rng);
        double prev = std::numeric_limits<double>::infinity();
        for (const double rr : {10.0, 100.0, 1000.0}) {
            double best = -std::numeric_limits<double>::infinity();
            for (int k = 0; k < 1000; ++k) {
                Point3 dir(rng.normal(), rng.normal(), rng.normal());
                dir.normalize();
                best = std::max(best, log_pdf((rr * p.mu_z) * dir, p));
            }
            decay_ok = decay_ok && best < prev;
            prev = best;
        }
        decay_ok = decay_ok && prev < std::log(1e-6);
    }
    c.check("density_decays_on_spheres", decay_ok);

    bool cont_ok = true;
    for (const double a : {1.0, 3.0}) {
        DistParams p;
        p.a = a;
        cont_ok = cont_ok && log_pdf({0.0, 0.0, 1e-8 * p.mu_z}, p) < std::log(1e-30);
    }
    c.check("continuity_at_zero_depth", cont_ok);

    {
        DistParams p = random_params(rng);
        const auto s1 = sample(p, 1000, 42);
        const auto s2 = sample(p, 1000, 42);
        bool det = s1.size() == s2.size();
        bool positive = true;
        for (std::size_t i = 0; i < s1.size(); ++i) {
            det = det && s1[i] == s2[i];
            positive = positive && s1[i].z() > 0.0;
        }
        c.check("sampling_deterministic", det);
        c.check("samples_in_support", positive);
    }

    double worst_se = 0.0;
    for (int trial = 0; trial < 2; ++trial) {
        DistParams p = random_params(rng);
        const Moments mom = moments(p);
        const int n = 200000;
        const auto pts = sample(p, n, Rng::split(seed, 77 + trial));
        double sx = 0, sxx = 0, sz = 0, szz = 0;
        for (const auto& v : pts) {
            const double u = v.x() / v.z();
            sx += u;
            sxx += u * u;
            sz += v.z();
            szz += v.z() * v.z();
        }
        const double mean_u = sx / n;
        const double var_u = sxx / n - mean_u * mean_u;
        const double mean_z = sz / n;
        const double var_z = szz / n - mean_z * mean_z;
        const double se_u = std::sqrt(mom.var_proj(0, 0) / n);
        worst_se = std::max(worst_se, std::abs(mean_u - mom.mean_proj.x()) / se_u);
        const double se_z = std::sqrt(mom.var_depth / n);
        worst_se = std::max(worst_se, std::abs(mean_z - mom.mean_depth) / se_z);
        worst_se = std::max(worst_se, std::abs(var_u / mom.var_proj(0, 0) - 1.0) /
                                          (3.0 * std::sqrt(2.0 / n)) * 1.0);
        worst_se = std::max(worst_se, std::abs(var_z / mom.var_depth - 1.0) /
                                          (8.0 * std::sqrt(2.0 / n)) * 1.0);
    }
    c.check("monte_carlo_moments_within_3se", worst_se < 3.0, worst_se);
    return c.take();
}

SuiteReport mapping_suite(std::uint64_t seed) {
    Checker c("mapping");
    Rng rng(Rng::split(seed, 2));
    const CameraIntrinsics cam{1550.0, 224.0};
    const DatasetStats stats = stats_from_ranges(3.0, 5.0, 1200.0, 2000.0);

    bool prop5_ok = true;
    for (int i = 0; i < 100000; ++i) {
        const double f = rng.uniform(1200.0, 2000.0);
        const double z = rng.uniform(3.0, 5.0);
        const double x = z * cam.S / (2.0 * f) * rng.uniform(-1.0, 1.0);
        const double y = z * cam.S / (2.0 * f) * rng.uniform(-1.0, 1.0);
        const auto obs = normalize_obs({x, y, z}, {f, cam.S}, stats);
        prop5_ok = prop5_ok && obs.v_p.cwiseAbs().maxCoeff() <= 1.0 + 1e-12 &&
                   obs.z_p >= 1.0 / stats.D - 1e-12 && obs.z_p <= stats.D + 1e-12;
    }
    c.check("normalized_observation_bounds", prop5_ok);

    bool total_ok = true;
    for (int i = 0; i < 1000000; ++i) {
        RawOutput w;
        for (int k = 0; k < 7; ++k) {
            const double mag = (i % 7 == 0) ? 1000.0 : 3.0;
            w[k] = mag * rng.normal();
        }
        const NormalizedParams np = activation(w);
        const double tr = np.B(0, 0) + np.B(1, 1);
        const double det = np.B.determinant();
        const double eig_min = 0.5 * tr - std::sqrt(std::max(0.25 * tr * tr - det, 0.0));
        total_ok = total_ok && np.a > 0.0 && np.nu_z > 0.0 && std::isfinite(np.nu_z) &&
                   np.B.allFinite() && eig_min >= 1.0 - 1e-9;
    }
    c.check("activation_totality", total_ok);

    bool a_map_ok = positive_scalar_map(0.0).value == 1.0;
    double prev_a = 0.0;
    for (int i = 0; i <= 400; ++i) {
        const double t = -20.0 + 40.0 * i / 400.0;
        const double v = positive_scalar_map(t).value;
        a_map_ok = a_map_ok && v > prev_a;
        prev_a = v;
    }
    a_map_ok = a_map_ok &&
               std::abs(positive_scalar_map(-1e-12).value - positive_scalar_map(1e-12).value) < 1e-11;
    c.check("a_of_w1_monotone_continuous", a_map_ok);

    double worst_consistency = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        RawOutput w;
        for (int k = 0; k < 7; ++k) w[k] = rng.normal();
        const NormalizedParams np = activation(w);
        const DistParams params = normalized_to_world(np, cam, stats);
        double ref = std::nan("");
        double lo = 0.0, hi = 0.0;
        for (int i = 0; i < 20; ++i) {
            const Point3 v(rng.normal() * 2, rng.normal() * 2, rng.uniform(0.5, 12.0));
            const auto obs = normalize_obs(v, cam, stats);
            const double diff = -log_pdf(v, params) - loss(np, obs).value;
            if (std::isnan(ref)) {
                ref = lo = hi = diff;
            } else {
                lo = std::min(lo, diff);
                hi = std::max(hi, diff);
            }
        }
        worst_consistency = std::max(worst_consistency, hi - lo);
    }
    c.check("loss_consistency_between_bases", worst_consistency < 1e-9, worst_consistency);

    double sup_depth_sqrt2 = 0.0, sup_depth_sqrt5 = 0.0, sup_total = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double w1 = rng.uniform(-3.0, 3.0);
        const double w2 = rng.uniform(-6.0, 6.0);
        const double z_p = rng.uniform(1.0 / stats.D, stats.D);
        const double a = positive_scalar_map(w1).value;
        const double da = positive_scalar_map(w1).derivative;
        // Regression-term gradient over (w1, w2) per active branch.
        const double nu_z = w2 > 0 ? 1.0 + w2 / a : a / (a - w2);
        if (z_p >= nu_z) {  // a z_p / nu_z branch
            double ga, gw2;
            if (w2 > 0) {
                ga = z_p * a * (a + 2 * w2) / ((a + w2) * (a + w2));
                gw2 = -z_p * a * a / ((a + w2) * (a + w2));
            } else {
                ga = z_p * a * (a - 2 * w2) / ((a - w2) * (a - w2));
                gw2 = z_p * a * a / ((a - w2) * (a - w2));
            }
            sup_depth_sqrt5 = std::max(sup_depth_sqrt5, std::hypot(ga * da, gw2));
        } else {  // a nu_z / z_p branch
            double ga, gw2;
            if (w2 > 0) {
                ga = 1.0 / z_p;
                gw2 = 1.0 / z_p;
            } else {
                ga = 1.0 / z_p;
                gw2 = -1.0 / z_p;
            }
            sup_depth_sqrt2 = std::max(sup_depth_sqrt2, std::hypot(ga * da, gw2));
        }
        RawOutput w;
        w << rng.normal(), rng.normal(), rng.normal(), rng.normal(), rng.normal(), w1, w2;
        NormalizedObservation obs;
        obs.v_p << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
        obs.z_p = z_p;
        sup_total = std::max(sup_total, loss_from_raw(w, obs).grad.norm());
    }
    c.check("depth_grad_bound_sqrt2D", sup_depth_sqrt2 <= std::sqrt(2.0) * stats.D * (1 + 1e-12),
            sup_depth_sqrt2);
    c.check("depth_grad_bound_sqrt5D", sup_depth_sqrt5 <= std::sqrt(5.0) * stats.D * (1 + 1e-12),
            sup_depth_sqrt5);
    c.check("loss_gradient_sup_finite", std::isfinite(sup_total), sup_total);
    return c.take();
}

SuiteReport fusion_suite(std::uint64_t seed) {
    Checker c("fusion");
    Rng rng(Rng::split(seed, 3));

    const auto make_rig = [&](int n_views, std::uint64_t s) {
        ScenarioConfig config;
        config.n_views = n_views;
        config.truth = Point3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-0.5, 0.5));
        config.rig_radius = rng.uniform(3.0, 8.0);
        config.seed = s;
        return simulate_rig(config);
    };

    double worst_chord = -1.0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto views = make_rig(2 + trial % 4, Rng::split(seed, 100 + trial));
        const FuseResult fr = fuse(views);
        for (int i = 0; i < 500; ++i) {
            const Point3 v1 = fr.v_star + Point3(rng.normal(), rng.normal(), rng.normal());
            const Point3 v2 = fr.v_star + Point3(rng.normal(), rng.normal(), rng.normal());
            const double f1 = total_nll(v1, views);
            const double f2 = total_nll(v2, views);
            const double fm = total_nll(0.5 * (v1 + v2), views);
            if (std::isfinite(f1) && std::isfinite(f2) && std::isfinite(fm)) {
                worst_chord = std::max(worst_chord, fm - 0.5 * (f1 + f2));
            }
        }
    }
    c.check("fused_nll_midpoint_convexity", worst_chord <= 1e-9, worst_chord);

    double worst_opt = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const auto views = make_rig(2 + trial % 4, Rng::split(seed, 300 + trial));
        const FuseResult fr = fuse(views);
        for (int i = 0; i < 1000; ++i) {
            Point3 dir(rng.normal(), rng.normal(), rng.normal());
            dir.normalize();
            const double f = total_nll(fr.v_star + 1e-4 * dir, views);
            worst_opt = std::max(worst_opt, fr.nll - f);
        }
    }
    c.check("solver_optimality_perturbation", worst_opt <= 1e-8, worst_opt);

    {
        const auto views = make_rig(3, Rng::split(seed, 500));
        const FuseResult base = fuse(views);
        Eigen::Matrix3d q;
        q = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
        const Eigen::Vector3d shift(0.4, -1.2, 2.0);
        std::vector<ViewEstimate> moved = views;
        for (auto& view : moved) {
            view.pose.R = q * view.pose.R;
            view.pose.t = q * view.pose.t + shift;
        }
        const FuseResult fr2 = fuse(moved, q * base.v_star + shift);
        const double err = (fr2.v_star - (q * base.v_star + shift)).norm();
        c.check("pose_invariance", err < 1e-8, err);
    }

    {
        const auto views = make_rig(1, Rng::split(seed, 600));
        const FuseResult fr = fuse(views);
        const Point3 expected = views[0].pose.cam_to_world(mode(views[0].params));
        c.check("single_view_returns_mode", (fr.v_star - expected).norm() < 1e-6,
                (fr.v_star - expected).norm());
    }
    return c.take();
}

SuiteReport harness_suite(std::uint64_t seed) {
    Checker c("harness");

    {
        ScenarioConfig config;
        config.n_views = 4;
        config.truth = Point3(0.3, -0.2, 0.1);
        config.rig_radius = 4.0;
        config.seed = Rng::split(seed, 9);
        const auto v1 = simulate_rig(config);
        const auto v2 = simulate_rig(config);
        bool det = v1.size() == v2.size();
        for (std::size_t i = 0; det && i < v1.size(); ++i) {
            det = v1[i].pose.t == v2[i].pose.t && v1[i].params.mu_z == v2[i].params.mu_z;
        }
        c.check("simulate_deterministic", det);

        config.noise.proj_jitter_std = 0.0;
        config.noise.depth_jitter_factor = 0.0;
        const auto clean = simulate_rig(config);
        const FuseResult fr = fuse(clean);
        c.check("zero_noise_fusion_recovers_truth", (fr.v_star - config.truth).norm() < 1e-6,
                (fr.v_star - config.truth).norm());
    }

    {
        Rng rng(Rng::split(seed, 10));
        std::vector<std::pair<double, double>> pairs;
        for (int i = 0; i < 3000; ++i) {
            pairs.emplace_back(rng.uniform(0.0, 2.0), rng.uniform(0.0, 4.0));
        }
        const auto curve = calibration_curve(pairs, 200);
        std::vector<std::pair<double, double>> shuffled = pairs;
        for (std::size_t i = shuffled.size(); i > 1; --i) {
            std::swap(shuffled[i - 1], shuffled[rng.next_u64() % i]);
        }
        const auto curve2 = calibration_curve(shuffled, 200);
        bool same = curve.points.size() == curve2.points.size();
        double worst = 0.0;
        for (std::size_t i = 0; same && i < curve.points.size(); ++i) {
            worst = std::max({worst, std::abs(curve.points[i].first - curve2.points[i].first),
                              std::abs(curve.points[i].second - curve2.points[i].second)});
        }
        bool monotone = true;
        for (std::size_t i = 1; i < curve.points.size(); ++i) {
            monotone = monotone && curve.points[i].first >= curve.points[i - 1].first;
        }
        c.check("calibration_permutation_invariant", same && worst < 1e-12, worst);
        c.check("calibration_x_monotone", monotone);
    }
    return c.take();
}

}  // namespace

std::vector<SuiteReport> run_verify_suites(std::uint64_t seed) {
    std::vector<SuiteReport> reports;
    reports.push_back(special_fn_suite());
    reports.push_back(distribution_suite(seed));
    reports.push_back(mapping_suite(seed));
    reports.push_back(fusion_suite(seed));
    reports.push_back(harness_suite(seed));
    return reports;
}

}  // namespace phuber
