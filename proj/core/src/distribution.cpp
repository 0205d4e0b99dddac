#include "phuber/distribution.hpp"

#include <Eigen/LU>
#include <cmath>
#include <stdexcept>

#include "phuber/rng.hpp"
#include "phuber/special_functions.hpp"

namespace phuber {

namespace {

const double kHuberMass2d = 2.0 * M_PI * (1.0 + std::exp(-0.5));  // int e^{-h(||v||)} dv

double sym_eig_min(const Eigen::Matrix2d& m) {
    const double tr = m(0, 0) + m(1, 1);
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const double disc = std::sqrt(std::max(0.25 * tr * tr - det, 0.0));
    return 0.5 * tr - disc;
}

}  // namespace

void validate(const DistParams& params) {
    if (!params.mu_p.allFinite() || !std::isfinite(params.mu_z) || !std::isfinite(params.a) ||
        !params.A.allFinite()) {
        throw std::invalid_argument("DistParams: non-finite field");
    }
    if (!(params.mu_z > 0.0)) throw std::invalid_argument("DistParams: mu_z must be > 0");
    if (!(params.a > 0.0)) throw std::invalid_argument("DistParams: a must be > 0");
    if (std::abs(params.A(0, 1) - params.A(1, 0)) >
        1e-12 * (1.0 + params.A.cwiseAbs().maxCoeff())) {
        throw std::invalid_argument("DistParams: A must be symmetric");
    }
    if (!(sym_eig_min(params.A) > 0.0)) {
        throw std::invalid_argument("DistParams: A must be positive definite");
    }
}

Normalizers normalizers(const DistParams& params) {
    validate(params);
    Normalizers out;
    const double g = upper_gamma_scaled(-1, params.a);
    out.k_depth = params.mu_z * std::exp(-params.a) / params.a * (1.0 + g);
    out.k_proj = params.mu_z * params.mu_z / params.A.determinant() * kHuberMass2d;
    out.k_combined = out.k_depth * out.k_proj;
    return out;
}

double log_k_combined(const DistParams& params) {
    return 3.0 * std::log(params.mu_z) + log_norm_depth(params.a).value -
           std::log(params.A.determinant()) + std::log(kHuberMass2d);
}

double log_pdf(const Point3& v, const DistParams& params) {
    if (!v.allFinite()) throw std::domain_error("log_pdf: non-finite point");
    validate(params);
    const double z = v.z();
    if (z <= 0.0) return -std::numeric_limits<double>::infinity();
    const Eigen::Vector2d u(v.x() / z, v.y() / z);
    const Eigen::Vector2d e = params.A * (u - params.mu_p);
    const double r = e.norm() * z / params.mu_z;
    const double depth = params.a * std::max(z / params.mu_z, params.mu_z / z);
    return -huber(r).value - depth - log_k_combined(params);
}

LogPdfGrad log_pdf_with_gradient(const Point3& v, const DistParams& params) {
    if (!v.allFinite()) throw std::domain_error("log_pdf_with_gradient: non-finite point");
    const double z = v.z();
    if (z <= 0.0) {
        throw std::domain_error("log_pdf_with_gradient: z must be > 0");
    }
    const Eigen::Vector2d u(v.x() / z, v.y() / z);
    const Eigen::Vector2d e = params.A * (u - params.mu_p);
    const double en = e.norm();
    const double r = en * z / params.mu_z;

    LogPdfGrad out;
    const double depth = params.a * std::max(z / params.mu_z, params.mu_z / z);
    out.value = -huber(r).value - depth - log_k_combined(params);

    // c = h'(r) z / (mu_z ||e||); equals (z/mu_z)^2 on the quadratic branch,
    // continuous through e = 0.
    const double zr = z / params.mu_z;
    const double c = (r <= 1.0) ? zr * zr : z / (params.mu_z * en);
    const Eigen::Vector2d Ae = params.A * e;
    out.grad.x() = -(c / z) * Ae.x();
    out.grad.y() = -(c / z) * Ae.y();
    const double depth_dz =
        (z >= params.mu_z) ? params.a / params.mu_z : -params.a * params.mu_z / (z * z);
    out.grad.z() = (c / z) * e.dot(params.A * params.mu_p) - depth_dz;
    return out;
}

double proj_var_coefficient() {
    return (2.0 + 13.0 * std::exp(-0.5)) / (2.0 + 2.0 * std::exp(-0.5));
}

Moments moments(const DistParams& params) {
    validate(params);
    Moments out;
    out.mean_proj = params.mu_p;
    const Eigen::Matrix2d a_inv = params.A.inverse();
    out.var_proj = a_inv * a_inv * proj_var_coefficient();
    const double g1m = upper_gamma_scaled(-1, params.a);
    const double num1 = upper_gamma_scaled(2, params.a) + upper_gamma_scaled(-2, params.a);
    const double num2 = upper_gamma_scaled(3, params.a) + upper_gamma_scaled(-3, params.a);
    out.mean_depth = params.mu_z * num1 / (1.0 + g1m);
    const double ez2 = params.mu_z * params.mu_z * num2 / (1.0 + g1m);
    out.var_depth = ez2 - out.mean_depth * out.mean_depth;
    return out;
}

Point3 mode(const DistParams& params) {
    return {params.mu_z * params.mu_p.x(), params.mu_z * params.mu_p.y(), params.mu_z};
}

namespace detail {

namespace {

// phi(x) = g1(x) (a/x)^2 e^{-(x-a)} = a^2 e^a Gamma(-1, x); the unnormalized
// left-branch CDF evaluated at x = a e^{-s}, decreasing in x from g1(a) at
// x = a toward 0.
double phi_left(double x, double a) {
    const double q = a / x;
    return detail::g1_fast(x) * q * q * std::exp(a - x);
}

}  // namespace

double depth_cdf(double s, double a) {
    const double g1a = detail::g1_fast(a);
    if (s <= 0.0) {
        return phi_left(a * std::exp(-s), a) / (1.0 + g1a);
    }
    return (g1a + 1.0 - std::exp(a - a * std::exp(s))) / (1.0 + g1a);
}

double depth_inverse_cdf(double u, double a) {
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("depth_inverse_cdf: u must be in (0,1)");
    if (!(a > 0.0)) throw std::domain_error("depth_inverse_cdf: a must be > 0");
    const double g1a = detail::g1_fast(a);
    const double p_left = g1a / (1.0 + g1a);
    if (u >= p_left) {
        const double q = (1.0 + g1a) * (1.0 - u);  // e^{a - a e^s}
        return std::log1p(-std::log(q) / a);
    }
    // Solve phi(x) = u (1 + g1a) on x >= a. phi is convex decreasing with
    // phi'(x) = -(a/x)^2 e^{-(x-a)}, so Newton from x = a increases
    // monotonically to the root.
    const double target = u * (1.0 + g1a);
    const double tol = 1e-12 * (1.0 + g1a);
    double x = a;
    for (int it = 0; it < 200; ++it) {
        const double fx = phi_left(x, a) - target;
        if (std::abs(fx) <= tol) break;
        const double q = a / x;
        const double deriv = q * q * std::exp(a - x);
        const double x_next = x + fx / deriv;
        if (!(x_next > x)) break;
        x = x_next;
    }
    return -std::log(x / a);
}

double radial_cdf(double r) {
    if (!(r >= 0.0)) throw std::domain_error("radial_cdf: r must be >= 0");
    const double total = 1.0 + std::exp(-0.5);
    if (r <= 1.0) {
        return -std::expm1(-0.5 * r * r) / total;
    }
    return (1.0 + std::exp(-0.5) - (1.0 + r) * std::exp(-r + 0.5)) / total;
}

double radial_inverse_cdf(double u) {
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("radial_inverse_cdf: u must be in (0,1)");
    const double mass_quad = -std::expm1(-0.5);  // 1 - e^{-1/2} on r <= 1
    const double w = u * (1.0 + std::exp(-0.5));
    if (w <= mass_quad) {
        return std::sqrt(-2.0 * std::log1p(-w));
    }
    // Tail branch: (1 + r) e^{-r} = c, solved by the contraction
    // r <- log((1 + r)/c) (rate 1/(1+r) <= 1/2) plus a Newton polish.
    const double c = (2.0 * std::exp(-0.5) - (w - mass_quad)) * std::exp(-0.5);
    const double log_c = std::log(c);
    double r = std::max(1.0, -log_c);
    for (int it = 0; it < 200; ++it) {
        const double next = std::log1p(r) - log_c;
        if (std::abs(next - r) < 1e-13) {
            r = next;
            break;
        }
        r = next;
    }
    for (int it = 0; it < 3; ++it) {
        const double f = std::log1p(r) - r - log_c;
        r -= f * (1.0 + r) / (-r);
    }
    return r;
}

}  // namespace detail

std::vector<Point3> sample(const DistParams& params, std::int64_t n, std::uint64_t seed) {
    validate(params);
    if (n < 0) throw std::domain_error("sample: n must be >= 0");
    Rng rng(seed);
    const Eigen::Matrix2d a_inv = params.A.inverse();
    std::vector<Point3> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        const double s = detail::depth_inverse_cdf(rng.uniform(), params.a);
        const double z = params.mu_z * std::exp(s);
        const double r = detail::radial_inverse_cdf(rng.uniform());
        const double theta = 2.0 * M_PI * rng.uniform();
        const Eigen::Vector2d q(r * std::cos(theta), r * std::sin(theta));
        const Eigen::Vector2d u = params.mu_p + (params.mu_z / z) * (a_inv * q);
        out.emplace_back(u.x() * z, u.y() * z, z);
    }
    return out;
}

}  // namespace phuber
