#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "phuber/distribution.hpp"
#include "phuber/special_functions.hpp"

namespace phuber {

/// Pinhole camera without distortion: focal length f and square sensor side
/// S, both in pixels.
struct CameraIntrinsics {
    double f = 1550.0;
    double S = 224.0;
};

/// Dataset normalization constants. mu_z0 is the geometric mean of the
/// extreme z/f ratios, D the half-range ratio sqrt(max(z/f)/min(z/f)).
struct DatasetStats {
    double mu_z0 = 2.5e-3;
    double D = 5.0 / 3.0;
};

/// A ground-truth point in the network basis: v_p = (2fx/(zS), 2fy/(zS)),
/// z_p = z/(mu_z0 f). In-domain points satisfy ||v_p||_inf <= 1 and
/// 1/D <= z_p <= D.
struct NormalizedObservation {
    Eigen::Vector2d v_p = Eigen::Vector2d::Zero();
    double z_p = 1.0;
};

/// Raw 7-vector as a network head would emit it:
/// (w_B0, w_B1, w_B2) for the SPD factor, (w_v0, w_v1) for nu_p, then w1, w2.
using RawOutput = Eigen::Matrix<double, 7, 1>;

/// Distribution parameters in the network basis.
struct NormalizedParams {
    Eigen::Vector2d nu_p = Eigen::Vector2d::Zero();
    double nu_z = 1.0;
    Eigen::Matrix2d B = 2.0 * Eigen::Matrix2d::Identity();
    double a = 1.0;
};

void validate(const NormalizedParams& np);

/// Empirical stats from (z, f) samples: mu_z0 = sqrt(max(z/f) min(z/f)),
/// D = sqrt(max(z/f)/min(z/f)). Throws on an empty list or non-positive
/// entries.
DatasetStats compute_stats(const std::vector<std::pair<double, double>>& z_f_samples);

/// Stats from known dataset ranges z in [z_lo, z_hi], f in [f_lo, f_hi].
DatasetStats stats_from_ranges(double z_lo, double z_hi, double f_lo, double f_hi);

NormalizedObservation normalize_obs(const Point3& v, const CameraIntrinsics& cam,
                                    const DatasetStats& stats);

Point3 denormalize_obs(const NormalizedObservation& obs, const CameraIntrinsics& cam,
                       const DatasetStats& stats);

/// The scalar positivity map used for a and for diagonal entries of the SPD
/// factor: exp(t) for t < 0 (argument clamped at -700 so the output stays
/// positive in double precision), t + 1 for t >= 0. Continuous, strictly
/// increasing, maps 0 to 1.
ValueAndDerivative positive_scalar_map(double t);

/// Total map from a raw 7-vector to valid parameters:
/// a = m(w1); nu_z = 1 + w2/a for w2 > 0, a/(a - w2) otherwise;
/// B = L L^T + I with L lower triangular, diagonal through m, off-diagonal
/// raw; nu_p passes through.
NormalizedParams activation(const RawOutput& w);

/// Inverse basis change fixed by loss consistency:
/// mu_z = nu_z mu_z0 f, A = (2 f nu_z / S) B, mu_p = (S/(2f)) B^{-1} nu_p.
DistParams normalized_to_world(const NormalizedParams& np, const CameraIntrinsics& cam,
                               const DatasetStats& stats);

/// Forward basis change (exact inverse of normalized_to_world).
NormalizedParams world_to_normalized(const DistParams& params, const CameraIntrinsics& cam,
                                     const DatasetStats& stats);

struct LossGrad {
    Eigen::Vector2d d_nu_p = Eigen::Vector2d::Zero();
    double d_nu_z = 0.0;
    Eigen::Matrix2d d_B = Eigen::Matrix2d::Zero();  // entry-wise dL/dB_ij
    double d_a = 0.0;
};

struct LossResult {
    double value = 0.0;
    LossGrad grad;
};

/// Negative log likelihood in the network basis (constant terms in f, S,
/// mu_z0 dropped):
///   h(||B v_p - nu_p|| z_p) - log|B|
///   + a max(z_p/nu_z, nu_z/z_p) + log(e^{-a}/a + Gamma(-1,a) a) + log(nu_z)
/// with its analytic gradient. At the depth kink z_p = nu_z the z_p/nu_z
/// branch supplies the subgradient.
LossResult loss(const NormalizedParams& np, const NormalizedObservation& obs);

struct RawLossResult {
    double value = 0.0;
    RawOutput grad = RawOutput::Zero();
};

/// loss composed with activation; gradient by the chain rule.
RawLossResult loss_from_raw(const RawOutput& w, const NormalizedObservation& obs);

}  // namespace phuber
