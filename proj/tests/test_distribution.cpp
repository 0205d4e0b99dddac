#include "phuber/distribution.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "phuber/quadrature.hpp"
#include "phuber/rng.hpp"

using namespace phuber;

namespace {

DistParams unit_params() {
    DistParams p;
    p.mu_p.setZero();
    p.mu_z = 1.0;
    p.A.setIdentity();
    p.a = 1.0;
    return p;
}

// Independent normalization check: tensor-product panel quadrature of the
// density in sheared coordinates (x - mu_x z, y - mu_y z, log z), where the
// projected spread is depth-independent.
double integrate_density(const DistParams& p) {
    const GaussLegendre rule32(32);
    const GaussLegendre rule48(48);
    const Eigen::Matrix2d a_inv = p.A.inverse();
    const double opn = std::sqrt(a_inv.squaredNorm() / 2.0 +
                                 std::sqrt(std::pow(a_inv.squaredNorm() / 2.0, 2) -
                                           std::pow(a_inv.determinant(), 2)));
    const double sc = p.mu_z * opn;
    std::vector<double> xe;
    for (const double e : {-25.0, -12.0, -5.0, -2.0, 0.0, 2.0, 5.0, 12.0, 25.0}) {
        xe.push_back(e * sc);
    }
    std::vector<double> xs, xw;
    for (std::size_t k = 0; k + 1 < xe.size(); ++k) {
        const double mid = 0.5 * (xe[k] + xe[k + 1]);
        const double half = 0.5 * (xe[k + 1] - xe[k]);
        for (int i = 0; i < rule32.order(); ++i) {
            xs.push_back(mid + half * rule32.nodes()[i]);
            xw.push_back(half * rule32.weights()[i]);
        }
    }
    const double smax = std::log1p(40.0 / p.a);
    std::vector<double> se = {-smax, std::max(-smax, -1.0), 0.0, std::min(smax, 1.0), smax};
    double total = 0.0;
    for (std::size_t sk = 0; sk + 1 < se.size(); ++sk) {
        const double mid = 0.5 * (se[sk] + se[sk + 1]);
        const double half = 0.5 * (se[sk + 1] - se[sk]);
        for (int si = 0; si < rule48.order(); ++si) {
            const double s = mid + half * rule48.nodes()[si];
            const double ws = half * rule48.weights()[si];
            const double z = p.mu_z * std::exp(s);
            double slice = 0.0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                for (std::size_t j = 0; j < xs.size(); ++j) {
                    const Point3 v(xs[i] + p.mu_p.x() * z, xs[j] + p.mu_p.y() * z, z);
                    slice += xw[i] * xw[j] * std::exp(log_pdf(v, p));
                }
            }
            total += ws * slice * z;  // dz = z ds
        }
    }
    return total;
}

}  // namespace

TEST(Normalizers, FrozenUnitCase) {
    const Normalizers k = normalizers(unit_params());
    EXPECT_NEAR(k.k_depth, 0.51637494794736437, 1e-12);
    EXPECT_NEAR(k.k_proj, 10.094129836639946, 1e-12);
    EXPECT_NEAR(k.k_combined, 5.2123557689688899, 1e-12);
}

TEST(Normalizers, HomogeneityInMuZ) {
    DistParams p = unit_params();
    p.a = 2.3;
    const Normalizers base = normalizers(p);
    p.mu_z *= 2.0;
    const Normalizers doubled = normalizers(p);
    EXPECT_NEAR(doubled.k_depth, 2.0 * base.k_depth, 1e-12 * base.k_depth);
    EXPECT_NEAR(doubled.k_proj, 4.0 * base.k_proj, 1e-11 * base.k_proj);
}

TEST(Normalizers, DetAInDenominator) {
    DistParams p = unit_params();
    const Normalizers base = normalizers(p);
    p.A *= std::sqrt(2.0);  // doubles |A|
    const Normalizers scaled = normalizers(p);
    EXPECT_NEAR(scaled.k_proj, 0.5 * base.k_proj, 1e-12 * base.k_proj);
}

TEST(LogPdf, ZeroDensityBehindCamera) {
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        const DistParams p = oracles::random_dist_params(rng);
        const Point3 v(rng.normal(), rng.normal(), -std::abs(rng.normal()));
        EXPECT_TRUE(std::isinf(log_pdf(v, p)));
        EXPECT_LT(log_pdf(v, p), 0.0);
    }
    EXPECT_TRUE(std::isinf(log_pdf({0.0, 0.0, -1.0}, unit_params())));
}

TEST(LogPdf, FrozenValueAtMode) {
    const DistParams p = unit_params();
    EXPECT_NEAR(log_pdf(mode(p), p), -2.6510319165202965, 1e-12);
}

TEST(LogPdf, ShearEquivariance) {
    Rng rng(8);
    for (int i = 0; i < 50; ++i) {
        DistParams p = oracles::random_dist_params(rng);
        const double delta = rng.normal();
        const Point3 v(rng.normal(), rng.normal(), rng.uniform(0.1, 6.0));
        const double lhs = log_pdf({v.x() + delta * v.z(), v.y(), v.z()}, p);
        DistParams shifted = p;
        shifted.mu_p.x() -= delta;
        const double rhs = log_pdf(v, shifted);
        EXPECT_NEAR(lhs, rhs, 1e-10 * std::abs(rhs) + 1e-12);
    }
}

TEST(LogPdf, NonFinitePointRejected) {
    EXPECT_THROW(log_pdf({std::nan(""), 0.0, 1.0}, unit_params()), std::domain_error);
    EXPECT_THROW(log_pdf({0.0, INFINITY, 1.0}, unit_params()), std::domain_error);
}

TEST(LogPdf, GradientMatchesFiniteDifferences) {
    Rng rng(9);
    int checked = 0;
    while (checked < 100) {
        const DistParams p = oracles::random_dist_params(rng);
        const Point3 v(rng.normal(), rng.normal(), rng.uniform(0.2, 7.0));
        // skip points near the depth kink and the huber corner
        const Eigen::Vector2d e = p.A * (Eigen::Vector2d(v.x() / v.z(), v.y() / v.z()) - p.mu_p);
        const double r = e.norm() * v.z() / p.mu_z;
        if (std::abs(v.z() / p.mu_z - 1.0) < 1e-3 || std::abs(r - 1.0) < 1e-3 ||
            e.norm() < 1e-3) {
            continue;
        }
        const LogPdfGrad lg = log_pdf_with_gradient(v, p);
        Eigen::VectorXd x(3);
        x << v.x(), v.y(), v.z();
        const double err = oracles::grad_rel_err(
            [&p](const Eigen::VectorXd& q) { return log_pdf({q[0], q[1], q[2]}, p); }, x,
            lg.grad, 1e-6);
        EXPECT_LT(err, 1e-5);
        ++checked;
    }
}

TEST(Moments, ProjectedVarianceCoefficient) {
    // int r^3 e^{-h} dr = 2 + 13 e^{-1/2}; int r e^{-h} dr = 1 + e^{-1/2}.
    const double c = proj_var_coefficient();
    EXPECT_NEAR(c, 3.0764736783898, 1e-12);
    const double num = phuber::adaptive_simpson(
        [](double r) { return r * r * r * std::exp(-(r <= 1 ? 0.5 * r * r : r - 0.5)); }, 0.0,
        60.0, 1e-13);
    const double den = phuber::adaptive_simpson(
        [](double r) { return r * std::exp(-(r <= 1 ? 0.5 * r * r : r - 0.5)); }, 0.0, 60.0,
        1e-13);
    EXPECT_NEAR(c, num / (2.0 * den), 1e-10);
    const Moments m = moments(unit_params());
    EXPECT_NEAR(m.var_proj(0, 0), c, 1e-12);
    EXPECT_NEAR(m.var_proj(1, 1), c, 1e-12);
    EXPECT_NEAR(m.var_proj(0, 1), 0.0, 1e-14);
}

TEST(Moments, DepthMomentsFrozen) {
    DistParams p = unit_params();
    p.a = 10.0;
    const Moments m = moments(p);
    EXPECT_NEAR(m.mean_depth, 1.0206112991083879, 1e-12);
    EXPECT_NEAR(m.var_depth, 0.014821658263873988, 1e-12);
    EXPECT_GT(m.mean_depth, 1.0);
    EXPECT_LT(m.mean_depth, 1.7);
    EXPECT_GT(m.var_depth, 0.5 * 0.01);
    EXPECT_LT(m.var_depth, 2.0 * 0.01);

    p.a = 1.0;
    const Moments m1 = moments(p);
    EXPECT_NEAR(m1.mean_depth, 1.6372809194198633, 1e-12);
    EXPECT_NEAR(m1.var_depth, 1.0481127232700860, 1e-11);
}

TEST(Moments, DepthMomentsMatchQuadratureOracle) {
    for (const double a : {0.7, 2.0, 6.0, 14.0}) {
        DistParams p = unit_params();
        p.a = a;
        const double den = adaptive_simpson(
            [a](double s) { return std::exp(s) * std::exp(-a * std::exp(std::abs(s))); }, -30.0,
            30.0, 1e-14);
        const double ez = adaptive_simpson(
            [a](double s) { return std::exp(2 * s) * std::exp(-a * std::exp(std::abs(s))); },
            -30.0, 30.0, 1e-14) / den;
        const double ez2 = adaptive_simpson(
            [a](double s) { return std::exp(3 * s) * std::exp(-a * std::exp(std::abs(s))); },
            -30.0, 30.0, 1e-14) / den;
        const Moments m = moments(p);
        EXPECT_NEAR(m.mean_depth, ez, 1e-9 * ez) << "a = " << a;
        EXPECT_NEAR(m.var_depth, ez2 - ez * ez, 1e-7 * m.var_depth) << "a = " << a;
    }
}

TEST(Moments, MeanProjIsMuP) {
    Rng rng(11);
    const DistParams p = oracles::random_dist_params(rng);
    EXPECT_EQ(moments(p).mean_proj, p.mu_p);
}

TEST(Mode, Formula) {
    DistParams p = unit_params();
    p.mu_p << 0.1, -0.2;
    p.mu_z = 4.0;
    const Point3 m = mode(p);
    EXPECT_DOUBLE_EQ(m.x(), 0.4);
    EXPECT_DOUBLE_EQ(m.y(), -0.8);
    EXPECT_DOUBLE_EQ(m.z(), 4.0);
    EXPECT_EQ(mode(unit_params()), Point3(0.0, 0.0, 1.0));
}

TEST(Mode, LocalOptimalityProbe) {
    Rng rng(12);
    for (int trial = 0; trial < 5; ++trial) {
        const DistParams p = oracles::random_dist_params(rng);
        const Point3 m = mode(p);
        const double at_mode = log_pdf(m, p);
        for (int i = 0; i < 100; ++i) {
            Point3 dir(rng.normal(), rng.normal(), rng.normal());
            dir.normalize();
            EXPECT_GE(at_mode, log_pdf(m + 1e-3 * dir, p) - 1e-12);
        }
    }
}

TEST(Sample, DeterministicAndInSupport) {
    Rng rng(13);
    const DistParams p = oracles::random_dist_params(rng);
    const auto s1 = sample(p, 2000, 987654321);
    const auto s2 = sample(p, 2000, 987654321);
    ASSERT_EQ(s1.size(), s2.size());
    for (std::size_t i = 0; i < s1.size(); ++i) {
        EXPECT_EQ(s1[i], s2[i]);
        EXPECT_GT(s1[i].z(), 0.0);
    }
    const auto s3 = sample(p, 100, 1);
    const auto s4 = sample(p, 100, 2);
    EXPECT_NE(s3[0], s4[0]);
}

TEST(Sample, RejectsNegativeCount) {
    EXPECT_THROW(sample(unit_params(), -1, 0), std::domain_error);
    EXPECT_TRUE(sample(unit_params(), 0, 0).empty());
}

TEST(Sample, DepthInverseCdfRoundTrip) {
    Rng rng(14);
    for (const double a : {0.1, 0.7, 1.0, 4.0, 12.0, 40.0}) {
        for (int i = 0; i < 200; ++i) {
            const double u = rng.uniform();
            const double s = detail::depth_inverse_cdf(u, a);
            EXPECT_NEAR(detail::depth_cdf(s, a), u, 2e-12) << "a = " << a << " u = " << u;
        }
    }
}

TEST(Sample, RadialInverseCdfRoundTrip) {
    Rng rng(15);
    for (int i = 0; i < 2000; ++i) {
        const double u = rng.uniform();
        const double r = detail::radial_inverse_cdf(u);
        EXPECT_GE(r, 0.0);
        EXPECT_NEAR(detail::radial_cdf(r), u, 1e-11);
    }
    // branch boundary: the quadratic piece carries (1 - e^{-1/2})/(1 + e^{-1/2})
    const double p_quad = (1.0 - std::exp(-0.5)) / (1.0 + std::exp(-0.5));
    EXPECT_NEAR(detail::radial_inverse_cdf(p_quad), 1.0, 1e-9);
}

TEST(Sample, MeanOfProjectedCoordinatesWithinThreeSE) {
    DistParams p = unit_params();
    p.mu_p << 0.3, -0.1;
    p.a = 2.0;
    const int n = 200000;
    const auto pts = sample(p, n, 5150);
    double sx = 0.0, sy = 0.0;
    for (const auto& v : pts) {
        sx += v.x() / v.z();
        sy += v.y() / v.z();
    }
    const Moments m = moments(p);
    const double se = std::sqrt(m.var_proj(0, 0) / n);
    EXPECT_NEAR(sx / n, 0.3, 3.0 * se);
    EXPECT_NEAR(sy / n, -0.1, 3.0 * se);
}

TEST(Sample, MomentsMatchMonteCarlo) {
    Rng rng(16);
    for (int trial = 0; trial < 3; ++trial) {
        const DistParams p = oracles::random_dist_params(rng);
        const Moments m = moments(p);
        const int n = 300000;
        const auto pts = sample(p, n, Rng::split(99, trial));
        double su = 0, suu = 0, sz = 0, szz = 0, s4u = 0, s4z = 0;
        for (const auto& v : pts) {
            const double u = v.x() / v.z();
            su += u;
            suu += u * u;
            sz += v.z();
            szz += v.z() * v.z();
        }
        const double mu = su / n, mz = sz / n;
        const double vu = suu / n - mu * mu, vz = szz / n - mz * mz;
        for (const auto& v : pts) {
            const double u = v.x() / v.z();
            s4u += std::pow(u - mu, 4);
            s4z += std::pow(v.z() - mz, 4);
        }
        const double se_vu = std::sqrt((s4u / n - vu * vu) / n);
        const double se_vz = std::sqrt((s4z / n - vz * vz) / n);
        EXPECT_NEAR(mu, m.mean_proj.x(), 3.0 * std::sqrt(m.var_proj(0, 0) / n));
        EXPECT_NEAR(mz, m.mean_depth, 3.0 * std::sqrt(m.var_depth / n));
        EXPECT_NEAR(vu, m.var_proj(0, 0), 3.0 * se_vu);
        EXPECT_NEAR(vz, m.var_depth, 3.0 * se_vz);
    }
}

TEST(Density, NormalizationByGridAndImportanceSampling) {
    Rng rng(17);
    for (int trial = 0; trial < 2; ++trial) {
        const DistParams p = oracles::random_dist_params(rng);
        EXPECT_NEAR(integrate_density(p), 1.0, 0.01);

        // E_p[q/p] = 1 for a box-uniform q covering the bulk near the mode.
        // The box stays inside ~1.2 sigma so the weights q/p remain moderate
        // and the estimator variance is small.
        const Moments m = moments(p);
        const double sx = 1.2 * std::sqrt(m.var_proj(0, 0));
        const double sy = 1.2 * std::sqrt(m.var_proj(1, 1));
        const double sz = std::log1p(1.0 / p.a);
        const double vol = (2 * sx) * (2 * sy) * (2 * sz);
        const int n = 200000;
        const auto pts = sample(p, n, Rng::split(1234, trial));
        double acc = 0.0;
        for (const auto& v : pts) {
            const double ux = v.x() / v.z() - p.mu_p.x();
            const double uy = v.y() / v.z() - p.mu_p.y();
            const double s = std::log(v.z() / p.mu_z);
            if (std::abs(ux) < sx && std::abs(uy) < sy && std::abs(s) < sz) {
                // q in (u_x, u_y, s) coordinates; d(x,y,z) = z^3 d(u_x,u_y,s)
                const double q = 1.0 / vol / (v.z() * v.z() * v.z());
                acc += q / std::exp(log_pdf(v, p));
            }
        }
        EXPECT_NEAR(acc / n, 1.0, 0.01);
    }
}

TEST(Density, MidpointLogConcavity) {
    Rng rng(18);
    double worst = -1.0;
    for (int i = 0; i < 10000; ++i) {
        const DistParams p = oracles::random_dist_params(rng);
        const Point3 v1(rng.normal() * 2, rng.normal() * 2, rng.uniform(0.05, 8.0));
        const Point3 v2(rng.normal() * 2, rng.normal() * 2, rng.uniform(0.05, 8.0));
        const double nll_mid = -log_pdf(0.5 * (v1 + v2), p);
        const double avg = 0.5 * (-log_pdf(v1, p) - log_pdf(v2, p));
        worst = std::max(worst, nll_mid - avg);
    }
    EXPECT_LE(worst, 1e-9) << "worst midpoint violation " << worst;
}

TEST(Density, DecaysOnGrowingSpheres) {
    Rng rng(19);
    const DistParams p = oracles::random_dist_params(rng);
    double prev = std::numeric_limits<double>::infinity();
    for (const double rr : {10.0, 100.0, 1000.0}) {
        double best = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < 1000; ++k) {
            Point3 dir(rng.normal(), rng.normal(), rng.normal());
            dir.normalize();
            best = std::max(best, log_pdf((rr * p.mu_z) * dir, p));
        }
        EXPECT_LT(best, prev);
        prev = best;
    }
}

TEST(Density, VanishesApproachingZeroDepth) {
    for (const double a : {1.0, 2.0, 8.0}) {
        DistParams p = unit_params();
        p.a = a;
        EXPECT_LT(log_pdf({0.0, 0.0, 1e-8}, p), std::log(1e-30));
    }
}

TEST(DistParamsValidation, RejectsBadParameters) {
    DistParams p = unit_params();
    p.mu_z = 0.0;
    EXPECT_THROW(validate(p), std::invalid_argument);
    p = unit_params();
    p.a = -1.0;
    EXPECT_THROW(validate(p), std::invalid_argument);
    p = unit_params();
    p.A << 1.0, 2.0, 2.0, 1.0;  // indefinite
    EXPECT_THROW(validate(p), std::invalid_argument);
    p = unit_params();
    p.A(0, 1) = 0.5;  // asymmetric
    EXPECT_THROW(validate(p), std::invalid_argument);
}
