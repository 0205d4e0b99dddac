#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace phuber {

using Point3 = Eigen::Vector3d;

/// Parameters of the projected Huber distribution in camera coordinates.
/// mu_p is the mean of the projected coordinates (x/z, y/z), mu_z > 0 the
/// depth scale in meters, A the SPD projected precision and a > 0 the depth
/// concentration.
struct DistParams {
    Eigen::Vector2d mu_p = Eigen::Vector2d::Zero();
    double mu_z = 1.0;
    Eigen::Matrix2d A = Eigen::Matrix2d::Identity();
    double a = 1.0;
};

/// Throws std::invalid_argument if any invariant fails (finiteness,
/// mu_z > 0, a > 0, A symmetric positive definite).
void validate(const DistParams& params);

struct Normalizers {
    double k_depth = 0.0;
    double k_proj = 0.0;
    double k_combined = 0.0;
};

/// K_depth = mu_z (e^{-a}/a + Gamma(-1,a) a),
/// K_proj  = mu_z^2 / |A| * 2 pi (1 + e^{-1/2}),
/// K_combined = K_depth * K_proj.
Normalizers normalizers(const DistParams& params);

/// log K_combined evaluated in log space (usable where K itself underflows).
double log_k_combined(const DistParams& params);

/// Log density at v. Exactly -inf for z <= 0 (the support is the open
/// half-space z > 0). Throws std::domain_error for non-finite v.
double log_pdf(const Point3& v, const DistParams& params);

struct LogPdfGrad {
    double value = 0.0;
    Eigen::Vector3d grad = Eigen::Vector3d::Zero();
};

/// Log density together with its gradient in v, defined for z > 0. At the
/// depth kink z = mu_z the z/mu_z branch is used (a valid subgradient).
LogPdfGrad log_pdf_with_gradient(const Point3& v, const DistParams& params);

struct Moments {
    Eigen::Vector2d mean_proj = Eigen::Vector2d::Zero();
    Eigen::Matrix2d var_proj = Eigen::Matrix2d::Identity();
    double mean_depth = 0.0;
    double var_depth = 0.0;
};

/// Closed-form moments: E[(x/z, y/z)] = mu_p,
/// Var[(x/z, y/z)] = A^{-2} (2 + 13 e^{-1/2}) / (2 + 2 e^{-1/2}),
/// E[z] and Var[z] from the scaled incomplete-gamma forms.
Moments moments(const DistParams& params);

/// Second radial moment ratio of the 2D unit Huber density:
/// int r^3 e^{-h(r)} dr / (2 int r e^{-h(r)} dr)
/// = (2 + 13 e^{-1/2}) / (2 + 2 e^{-1/2}).
double proj_var_coefficient();

/// The point predictor mu_z * (mu_x, mu_y, 1); minimizer of the negative
/// log density.
Point3 mode(const DistParams& params);

/// n i.i.d. draws, deterministic in the seed. Depth via numeric inverse CDF
/// on log(z/mu_z); the radial component via the piecewise inverse CDF of
/// r e^{-h(r)}; then the affine map back to camera coordinates.
std::vector<Point3> sample(const DistParams& params, std::int64_t n, std::uint64_t seed);

namespace detail {

/// Inverse CDF of s = log(z/mu_z) under the depth density e^s exp(-a e^{|s|});
/// u in (0,1). Root solve tolerance is 1e-12 on the CDF value.
double depth_inverse_cdf(double u, double a);

/// CDF of s under the same density (for round-trip checks).
double depth_cdf(double s, double a);

/// Inverse CDF of the radial density r e^{-h(r)} on [0, inf); u in (0,1).
double radial_inverse_cdf(double u);

double radial_cdf(double r);

}  // namespace detail

}  // namespace phuber
