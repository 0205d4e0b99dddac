#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "phuber/fusion.hpp"
#include "phuber/mapping.hpp"

namespace phuber {

/// Jitter magnitudes roughly consistent with the claimed precisions: A
/// eigenvalues of a few hundred put the projected std at pixel scale for a
/// focal length around 1550, and a in [5, 25] matches relative depth errors
/// of 4-20%.
struct NoiseSpec {
    double proj_jitter_std = 0.005;     // std of the projected-mean jitter
    double depth_jitter_factor = 0.08;  // lognormal sigma of the depth-mean jitter
    double eig_lo = 100.0, eig_hi = 400.0;  // eigenvalue range of the random A
    double a_lo = 5.0, a_hi = 25.0;         // depth concentration range
};

struct ScenarioConfig {
    int n_views = 4;
    Point3 truth = Point3(0.0, 0.0, 0.0);
    double rig_radius = 5.0;
    NoiseSpec noise;
    std::uint64_t seed = 0;
    CameraIntrinsics intrinsics;
};

/// Places n_views cameras on a circle of rig_radius around the truth point,
/// each facing it (so the truth sits at the center of every field of view at
/// depth rig_radius), and fills per-view distribution parameters centered at
/// the jittered projection/depth of the truth. Deterministic in the seed;
/// per-view streams are split from it.
std::vector<ViewEstimate> simulate_rig(const ScenarioConfig& config);

struct FitResult {
    RawOutput w = RawOutput::Zero();
    NormalizedParams params;
    double loss = 0.0;
    int iterations = 0;
    bool converged = false;
    /// True when the optimum sits on the a >= 1 boundary (the fit wanted
    /// a < 1, outside the region the solver is restricted to).
    bool a_at_floor = false;
};

/// Direct maximum-likelihood fit of the network-basis parameters: minimizes
/// the mean of loss_from_raw over the samples with w1 constrained to >= 0,
/// using the same descent solver as fusion. Requires at least 3 samples.
FitResult fit_params(const std::vector<NormalizedObservation>& samples,
                     const std::optional<RawOutput>& init = std::nullopt,
                     double grad_tol = 1e-8);

struct CalibrationCurve {
    /// (mean predicted variance, mean empirical squared error) per window;
    /// the first coordinate is non-decreasing along the curve.
    std::vector<std::pair<double, double>> points;
};

/// Sorts pairs by predicted variance and emits means over sliding windows of
/// the given length. With fewer samples than the window length a single
/// window covering everything is emitted.
CalibrationCurve calibration_curve(const std::vector<std::pair<double, double>>& pairs,
                                   int window = 200);

}  // namespace phuber
