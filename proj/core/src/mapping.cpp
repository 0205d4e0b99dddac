#include "phuber/mapping.hpp"

#include <Eigen/LU>
#include <cmath>
#include <stdexcept>

namespace phuber {

namespace {

double sym_eig_min(const Eigen::Matrix2d& m) {
    const double tr = m(0, 0) + m(1, 1);
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const double disc = std::sqrt(std::max(0.25 * tr * tr - det, 0.0));
    return 0.5 * tr - disc;
}

void check_cam(const CameraIntrinsics& cam) {
    if (!(cam.f > 0.0) || !(cam.S > 0.0)) {
        throw std::invalid_argument("CameraIntrinsics: f and S must be > 0");
    }
}

void check_stats(const DatasetStats& stats) {
    if (!(stats.mu_z0 > 0.0) || !(stats.D >= 1.0)) {
        throw std::invalid_argument("DatasetStats: mu_z0 > 0 and D >= 1 required");
    }
}

}  // namespace

void validate(const NormalizedParams& np) {
    if (!np.nu_p.allFinite() || !std::isfinite(np.nu_z) || !std::isfinite(np.a) ||
        !np.B.allFinite()) {
        throw std::invalid_argument("NormalizedParams: non-finite field");
    }
    if (!(np.nu_z > 0.0)) throw std::invalid_argument("NormalizedParams: nu_z must be > 0");
    if (!(np.a > 0.0)) throw std::invalid_argument("NormalizedParams: a must be > 0");
    if (!(sym_eig_min(np.B) >= 1.0 - 1e-9)) {
        throw std::invalid_argument("NormalizedParams: eigmin(B) must exceed 1");
    }
}

DatasetStats compute_stats(const std::vector<std::pair<double, double>>& z_f_samples) {
    if (z_f_samples.empty()) {
        throw std::invalid_argument("compute_stats: empty sample list");
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& [z, f] : z_f_samples) {
        if (!(z > 0.0) || !(f > 0.0)) {
            throw std::invalid_argument("compute_stats: z and f must be > 0");
        }
        const double r = z / f;
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    DatasetStats stats;
    stats.mu_z0 = std::sqrt(hi * lo);
    stats.D = std::sqrt(hi / lo);
    return stats;
}

DatasetStats stats_from_ranges(double z_lo, double z_hi, double f_lo, double f_hi) {
    if (!(z_lo > 0.0) || !(f_lo > 0.0) || z_hi < z_lo || f_hi < f_lo) {
        throw std::invalid_argument("stats_from_ranges: invalid ranges");
    }
    return compute_stats({{z_lo, f_hi}, {z_hi, f_lo}});
}

NormalizedObservation normalize_obs(const Point3& v, const CameraIntrinsics& cam,
                                    const DatasetStats& stats) {
    check_cam(cam);
    check_stats(stats);
    if (!v.allFinite()) throw std::domain_error("normalize_obs: non-finite point");
    if (!(v.z() > 0.0)) throw std::domain_error("normalize_obs: z must be > 0");
    NormalizedObservation obs;
    obs.v_p.x() = 2.0 * cam.f * v.x() / (v.z() * cam.S);
    obs.v_p.y() = 2.0 * cam.f * v.y() / (v.z() * cam.S);
    obs.z_p = v.z() / (stats.mu_z0 * cam.f);
    return obs;
}

Point3 denormalize_obs(const NormalizedObservation& obs, const CameraIntrinsics& cam,
                       const DatasetStats& stats) {
    check_cam(cam);
    check_stats(stats);
    if (!(obs.z_p > 0.0)) throw std::domain_error("denormalize_obs: z_p must be > 0");
    const double z = obs.z_p * stats.mu_z0 * cam.f;
    const double half = z * cam.S / (2.0 * cam.f);
    return {obs.v_p.x() * half, obs.v_p.y() * half, z};
}

ValueAndDerivative positive_scalar_map(double t) {
    if (t < 0.0) {
        const double v = std::exp(std::max(t, -700.0));
        return {v, t <= -700.0 ? 0.0 : v};
    }
    return {t + 1.0, 1.0};
}

namespace {

struct NuZ {
    double value;
    double d_a;
    double d_w2;
};

NuZ nu_z_map(double a, double w2) {
    if (w2 > 0.0) {
        return {1.0 + w2 / a, -w2 / (a * a), 1.0 / a};
    }
    const double den = a - w2;
    return {a / den, -w2 / (den * den), a / (den * den)};
}

}  // namespace

NormalizedParams activation(const RawOutput& w) {
    if (!w.allFinite()) throw std::invalid_argument("activation: non-finite raw output");
    const double l0 = positive_scalar_map(w[0]).value;
    const double m = w[1];
    const double l2 = positive_scalar_map(w[2]).value;
    NormalizedParams np;
    np.B(0, 0) = l0 * l0 + 1.0;
    np.B(0, 1) = np.B(1, 0) = l0 * m;
    np.B(1, 1) = m * m + l2 * l2 + 1.0;
    np.nu_p = w.segment<2>(3);
    np.a = positive_scalar_map(w[5]).value;
    np.nu_z = nu_z_map(np.a, w[6]).value;
    return np;
}

DistParams normalized_to_world(const NormalizedParams& np, const CameraIntrinsics& cam,
                               const DatasetStats& stats) {
    validate(np);
    check_cam(cam);
    check_stats(stats);
    DistParams params;
    params.mu_z = np.nu_z * stats.mu_z0 * cam.f;
    params.A = (2.0 * cam.f * np.nu_z / cam.S) * np.B;
    const double det = np.B.determinant();
    if (!(det > 0.0)) throw std::invalid_argument("normalized_to_world: singular B");
    params.mu_p = (cam.S / (2.0 * cam.f)) * np.B.inverse() * np.nu_p;
    params.a = np.a;
    return params;
}

NormalizedParams world_to_normalized(const DistParams& params, const CameraIntrinsics& cam,
                                     const DatasetStats& stats) {
    validate(params);
    check_cam(cam);
    check_stats(stats);
    NormalizedParams np;
    np.nu_z = params.mu_z / (stats.mu_z0 * cam.f);
    np.B = params.A * cam.S / (2.0 * cam.f * np.nu_z);
    np.nu_p = (2.0 * cam.f / cam.S) * (np.B * params.mu_p);
    np.a = params.a;
    return np;
}

LossResult loss(const NormalizedParams& np, const NormalizedObservation& obs) {
    validate(np);
    if (!obs.v_p.allFinite() || !std::isfinite(obs.z_p)) {
        throw std::domain_error("loss: non-finite observation");
    }
    if (!(obs.z_p > 0.0)) throw std::domain_error("loss: z_p must be > 0");

    LossResult out;
    const Eigen::Vector2d e = np.B * obs.v_p - np.nu_p;
    const double en = e.norm();
    const double r = en * obs.z_p;
    const double det = np.B.determinant();

    // Depth regression branch; ties at z_p = nu_z go to the z_p/nu_z branch.
    double m, dm_dnu;
    if (obs.z_p >= np.nu_z) {
        m = obs.z_p / np.nu_z;
        dm_dnu = -obs.z_p / (np.nu_z * np.nu_z);
    } else {
        m = np.nu_z / obs.z_p;
        dm_dnu = 1.0 / obs.z_p;
    }
    const ValueAndDerivative lnd = log_norm_depth(np.a);
    out.value = huber(r).value - std::log(det) + np.a * m + lnd.value + std::log(np.nu_z);

    // w = h'(r) z_p / ||e||; z_p^2 on the quadratic branch, continuous at e=0.
    const double w = (r <= 1.0) ? obs.z_p * obs.z_p : obs.z_p / en;
    out.grad.d_nu_p = -w * e;
    out.grad.d_B = w * (e * obs.v_p.transpose()) - np.B.inverse();
    out.grad.d_a = m + lnd.derivative;
    out.grad.d_nu_z = np.a * dm_dnu + 1.0 / np.nu_z;
    return out;
}

RawLossResult loss_from_raw(const RawOutput& w, const NormalizedObservation& obs) {
    if (!w.allFinite()) throw std::invalid_argument("loss_from_raw: non-finite raw output");
    const ValueAndDerivative l0 = positive_scalar_map(w[0]);
    const double m_off = w[1];
    const ValueAndDerivative l2 = positive_scalar_map(w[2]);
    const ValueAndDerivative a = positive_scalar_map(w[5]);
    const NuZ nz = nu_z_map(a.value, w[6]);

    NormalizedParams np;
    np.B(0, 0) = l0.value * l0.value + 1.0;
    np.B(0, 1) = np.B(1, 0) = l0.value * m_off;
    np.B(1, 1) = m_off * m_off + l2.value * l2.value + 1.0;
    np.nu_p = w.segment<2>(3);
    np.a = a.value;
    np.nu_z = nz.value;

    const LossResult base = loss(np, obs);
    RawLossResult out;
    out.value = base.value;
    const Eigen::Matrix2d& G = base.grad.d_B;
    const double g_off = G(0, 1) + G(1, 0);
    out.grad[0] = (2.0 * l0.value * G(0, 0) + m_off * g_off) * l0.derivative;
    out.grad[1] = l0.value * g_off + 2.0 * m_off * G(1, 1);
    out.grad[2] = 2.0 * l2.value * G(1, 1) * l2.derivative;
    out.grad.segment<2>(3) = base.grad.d_nu_p;
    out.grad[5] = (base.grad.d_a + base.grad.d_nu_z * nz.d_a) * a.derivative;
    out.grad[6] = base.grad.d_nu_z * nz.d_w2;
    return out;
}

}  // namespace phuber
