#pragma once

#include <Eigen/Core>
#include <optional>
#include <stdexcept>
#include <vector>

#include "phuber/distribution.hpp"
#include "phuber/mapping.hpp"

namespace phuber {

/// Raised when no point with finite total negative log likelihood can be
/// found (e.g. the fields of view do not intersect, or the constraint plane
/// misses every field of view).
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Camera pose mapping world to camera coordinates via v_cam = R^T (v - t);
/// t is the camera position in world coordinates and R's columns are the
/// camera axes expressed in the world frame.
struct CameraPose {
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
    Eigen::Vector3d t = Eigen::Vector3d::Zero();

    Point3 world_to_cam(const Point3& v) const { return R.transpose() * (v - t); }
    Point3 cam_to_world(const Point3& v) const { return R * v + t; }
};

/// Throws unless R is a rotation (R^T R = I to 1e-10, det R = +1).
void validate(const CameraPose& pose);

/// One camera's contribution to a fusion problem.
struct ViewEstimate {
    CameraPose pose;
    CameraIntrinsics intrinsics;
    DistParams params;
};

void validate(const ViewEstimate& view);

/// Affine constraint set {v : d^T v = c} with unit normal d.
struct Plane {
    Eigen::Vector3d d = Eigen::Vector3d::UnitZ();
    double c = 0.0;
};

void validate(const Plane& plane);

struct NllWorldResult {
    double value = 0.0;                               // +inf behind the camera
    Eigen::Vector3d grad = Eigen::Vector3d::Zero();   // valid where value is finite
};

/// Negative log likelihood of a world point under one view, with gradient
/// through the rigid transform.
NllWorldResult nll_world(const Point3& v, const ViewEstimate& view);

/// Sum of nll_world over views (+inf if any view sees the point at z <= 0).
double total_nll(const Point3& v, const std::vector<ViewEstimate>& views,
                 Eigen::Vector3d* grad = nullptr);

struct FuseResult {
    Point3 v_star = Point3::Zero();
    double nll = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Maximum likelihood fusion: minimizes the total NLL over world points by
/// subgradient-aware backtracking descent; convex, so the result is a global
/// minimizer within tolerance. Default init is the centroid of the per-view
/// world-frame modes, bisected toward the first view's mode if infeasible.
FuseResult fuse(const std::vector<ViewEstimate>& views,
                const std::optional<Point3>& init = std::nullopt,
                double grad_tol = 1e-8);

struct PlaneMleResult {
    Point3 v_star = Point3::Zero();
    double nll = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Ground-plane constrained MLE: minimizes the total NLL over {d^T v = c}
/// in a 2D orthonormal parameterization of the plane.
PlaneMleResult plane_mle(const std::vector<ViewEstimate>& views, const Plane& plane,
                         double grad_tol = 1e-8);

}  // namespace phuber
