#include "phuber/fusion.hpp"

#include <gtest/gtest.h>

#include <Eigen/Geometry>

#include <cmath>

#include "oracles.hpp"
#include "phuber/harness.hpp"
#include "phuber/rng.hpp"

using namespace phuber;

namespace {

ViewEstimate identity_view(const DistParams& params) {
    ViewEstimate view;
    view.params = params;
    return view;
}

std::vector<ViewEstimate> random_rig(Rng& rng, int n_views, std::uint64_t seed) {
    ScenarioConfig config;
    config.n_views = n_views;
    config.truth = Point3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-0.5, 0.5));
    config.rig_radius = rng.uniform(3.0, 8.0);
    config.seed = seed;
    return simulate_rig(config);
}

double grid_minimum(const std::vector<ViewEstimate>& views, const Point3& center, int half_n,
                    double step) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = -half_n; i <= half_n; ++i) {
        for (int j = -half_n; j <= half_n; ++j) {
            for (int k = -half_n; k <= half_n; ++k) {
                const Point3 v = center + step * Point3(i, j, k);
                best = std::min(best, total_nll(v, views));
            }
        }
    }
    return best;
}

}  // namespace

TEST(NllWorld, IdentityPoseEqualsCameraFrame) {
    Rng rng(41);
    for (int i = 0; i < 20; ++i) {
        const DistParams p = oracles::random_dist_params(rng);
        const ViewEstimate view = identity_view(p);
        const Point3 v(rng.normal(), rng.normal(), rng.uniform(0.2, 6.0));
        EXPECT_NEAR(nll_world(v, view).value, -log_pdf(v, p), 1e-12);
    }
}

TEST(NllWorld, BehindCameraIsInfinite) {
    Rng rng(42);
    const ViewEstimate view = identity_view(oracles::random_dist_params(rng));
    EXPECT_TRUE(std::isinf(nll_world({0.0, 0.0, -1.0}, view).value));
    EXPECT_GT(nll_world({0.0, 0.0, -1.0}, view).value, 0.0);
}

TEST(NllWorld, GradientMatchesFiniteDifferences) {
    Rng rng(43);
    int checked = 0;
    while (checked < 100) {
        ScenarioConfig config;
        config.n_views = 1;
        config.truth = Point3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        config.rig_radius = rng.uniform(2.0, 6.0);
        config.seed = Rng::split(4300, checked);
        const ViewEstimate view = simulate_rig(config)[0];
        const Point3 v = config.truth + 0.3 * Point3(rng.normal(), rng.normal(), rng.normal());
        const Point3 vc = view.pose.world_to_cam(v);
        if (vc.z() <= 0.05) continue;
        const Eigen::Vector2d e =
            view.params.A * (Eigen::Vector2d(vc.x() / vc.z(), vc.y() / vc.z()) - view.params.mu_p);
        const double r = e.norm() * vc.z() / view.params.mu_z;
        if (std::abs(vc.z() / view.params.mu_z - 1.0) < 1e-3 || std::abs(r - 1.0) < 1e-3 ||
            e.norm() < 1e-3) {
            continue;
        }
        const NllWorldResult res = nll_world(v, view);
        Eigen::VectorXd x(3);
        x << v.x(), v.y(), v.z();
        const double err = oracles::grad_rel_err(
            [&view](const Eigen::VectorXd& q) {
                return nll_world({q[0], q[1], q[2]}, view).value;
            },
            x, res.grad, 1e-7);
        EXPECT_LT(err, 1e-5);
        ++checked;
    }
}

TEST(Fuse, SingleViewReturnsWorldMode) {
    Rng rng(44);
    for (int trial = 0; trial < 5; ++trial) {
        const auto views = random_rig(rng, 1, Rng::split(44, trial));
        const FuseResult fr = fuse(views);
        const Point3 expected = views[0].pose.cam_to_world(mode(views[0].params));
        EXPECT_LT((fr.v_star - expected).norm(), 1e-6);
    }
}

TEST(Fuse, SymmetricPairLandsOnSymmetryPlane) {
    // Two identical cameras at +-1 m on the x axis, both facing the origin.
    DistParams params;
    params.mu_p.setZero();
    params.mu_z = 1.0;
    params.A = 1.5 * Eigen::Matrix2d::Identity();
    params.a = 2.0;

    ViewEstimate left, right;
    // left camera at (-1,0,0) looking along +x: z_cam = +x_world
    left.pose.R.col(0) = Eigen::Vector3d::UnitY();
    left.pose.R.col(1) = Eigen::Vector3d::UnitZ();
    left.pose.R.col(2) = Eigen::Vector3d::UnitX();
    left.pose.t = Eigen::Vector3d(-1.0, 0.0, 0.0);
    left.params = params;
    // right camera at (+1,0,0) looking along -x
    right.pose.R.col(0) = -Eigen::Vector3d::UnitY();
    right.pose.R.col(1) = Eigen::Vector3d::UnitZ();
    right.pose.R.col(2) = -Eigen::Vector3d::UnitX();
    right.pose.t = Eigen::Vector3d(1.0, 0.0, 0.0);
    right.params = params;

    const FuseResult fr = fuse({left, right});
    EXPECT_TRUE(fr.converged);
    EXPECT_NEAR(fr.v_star.x(), 0.0, 1e-6);
    EXPECT_NEAR(fr.v_star.y(), 0.0, 1e-6);
    EXPECT_NEAR(fr.v_star.z(), 0.0, 1e-6);
}

TEST(Fuse, BeatsGridOracle) {
    Rng rng(45);
    for (int trial = 0; trial < 3; ++trial) {
        const auto views = random_rig(rng, 3, Rng::split(450, trial));
        const FuseResult fr = fuse(views);
        const double grid_best = grid_minimum(views, fr.v_star, 10, 1e-3);
        EXPECT_LE(fr.nll, grid_best + 1e-6);
    }
}

TEST(Fuse, Errors) {
    EXPECT_THROW(fuse({}), std::invalid_argument);

    // Back-to-back cameras share no field of view.
    DistParams params;
    ViewEstimate forward = identity_view(params);
    ViewEstimate backward = identity_view(params);
    backward.pose.R = Eigen::AngleAxisd(M_PI, Eigen::Vector3d::UnitX()).toRotationMatrix();
    EXPECT_THROW(fuse({forward, backward}), InfeasibleError);
}

TEST(Fuse, ConvexityAlongChords) {
    Rng rng(46);
    double worst = -1.0;
    for (int trial = 0; trial < 10; ++trial) {
        const auto views = random_rig(rng, 2 + trial % 4, Rng::split(46, trial));
        const FuseResult fr = fuse(views);
        for (int i = 0; i < 1000; ++i) {
            const Point3 v1 = fr.v_star + Point3(rng.normal(), rng.normal(), rng.normal());
            const Point3 v2 = fr.v_star + Point3(rng.normal(), rng.normal(), rng.normal());
            const double f1 = total_nll(v1, views);
            const double f2 = total_nll(v2, views);
            const double fm = total_nll(0.5 * (v1 + v2), views);
            if (std::isfinite(f1) && std::isfinite(f2) && std::isfinite(fm)) {
                worst = std::max(worst, fm - 0.5 * (f1 + f2));
            }
        }
    }
    EXPECT_LE(worst, 1e-9);
}

TEST(Fuse, PoseInvariance) {
    Rng rng(47);
    const auto views = random_rig(rng, 3, 4711);
    const FuseResult base = fuse(views);
    const Eigen::Matrix3d q =
        Eigen::AngleAxisd(1.1, Eigen::Vector3d(2, -1, 0.5).normalized()).toRotationMatrix();
    const Eigen::Vector3d shift(0.7, 2.0, -1.3);
    std::vector<ViewEstimate> moved = views;
    for (auto& view : moved) {
        view.pose.R = q * view.pose.R;
        view.pose.t = q * view.pose.t + shift;
    }
    const FuseResult fr = fuse(moved, q * base.v_star + shift);
    EXPECT_LT((fr.v_star - (q * base.v_star + shift)).norm(), 1e-8);
}

TEST(Fuse, PerturbationOptimality) {
    Rng rng(48);
    for (int trial = 0; trial < 50; ++trial) {
        const auto views = random_rig(rng, 2 + trial % 4, Rng::split(48, trial));
        const FuseResult fr = fuse(views);
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            Point3 dir(rng.normal(), rng.normal(), rng.normal());
            dir.normalize();
            worst = std::max(worst, fr.nll - total_nll(fr.v_star + 1e-4 * dir, views));
        }
        EXPECT_LE(worst, 1e-8) << "trial " << trial;
    }
}

TEST(PlaneMle, UnconstrainedOptimumOnPlane) {
    Rng rng(49);
    const auto views = random_rig(rng, 1, 4900);
    const Point3 m = views[0].pose.cam_to_world(mode(views[0].params));
    Plane plane;
    plane.d = Eigen::Vector3d(0.3, -0.5, 0.81).normalized();
    plane.c = plane.d.dot(m);  // plane passes through the mode
    const PlaneMleResult pr = plane_mle(views, plane);
    EXPECT_LT((pr.v_star - m).norm(), 1e-6);
    EXPECT_NEAR(plane.d.dot(pr.v_star), plane.c, 1e-10);
}

TEST(PlaneMle, ConstraintSatisfiedExactly) {
    Rng rng(50);
    for (int trial = 0; trial < 5; ++trial) {
        const auto views = random_rig(rng, 2, Rng::split(50, trial));
        const Point3 m = views[0].pose.cam_to_world(mode(views[0].params));
        Plane plane;
        plane.d = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized();
        plane.c = plane.d.dot(m) + rng.uniform(-0.3, 0.3);
        const PlaneMleResult pr = plane_mle(views, plane);
        EXPECT_NEAR(plane.d.dot(pr.v_star), plane.c, 1e-10);
    }
}

TEST(PlaneMle, BeatsPlanarGridOracle) {
    Rng rng(51);
    const auto views = random_rig(rng, 1, 5100);
    const Point3 m = views[0].pose.cam_to_world(mode(views[0].params));
    Plane plane;
    plane.d = Eigen::Vector3d::UnitZ();
    plane.c = m.z() - 0.4;  // ground plane below the mode
    const PlaneMleResult pr = plane_mle(views, plane);

    Eigen::Vector3d u1 = plane.d.cross(Eigen::Vector3d::UnitX()).normalized();
    Eigen::Vector3d u2 = plane.d.cross(u1);
    double best = std::numeric_limits<double>::infinity();
    for (int i = -12; i <= 12; ++i) {
        for (int j = -12; j <= 12; ++j) {
            best = std::min(best,
                            total_nll(pr.v_star + 1e-3 * (i * u1 + j * u2), views));
        }
    }
    EXPECT_LE(pr.nll, best + 1e-6);
}

TEST(PlaneMle, InfeasiblePlane) {
    DistParams params;
    const ViewEstimate view = identity_view(params);
    Plane plane;
    plane.d = Eigen::Vector3d::UnitZ();
    plane.c = -5.0;  // entirely behind the camera
    EXPECT_THROW(plane_mle({view}, plane), InfeasibleError);
}

TEST(Validation, PoseAndPlane) {
    CameraPose pose;
    pose.R(0, 0) = 1.1;
    EXPECT_THROW(validate(pose), std::invalid_argument);
    pose = CameraPose{};
    pose.R.col(0) = -Eigen::Vector3d::UnitX();  // det = -1
    EXPECT_THROW(validate(pose), std::invalid_argument);
    Plane plane;
    plane.d = Eigen::Vector3d(1.0, 1.0, 0.0);
    EXPECT_THROW(validate(plane), std::invalid_argument);
}
