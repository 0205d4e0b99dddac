#include "phuber/json_io.hpp"

#include <cmath>
#include <cstdio>

namespace phuber::io {

namespace {

const json& need(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw MalformedInputError(std::string("missing field '") + key + "'");
    }
    return j.at(key);
}

double need_number(const json& j, const char* key) {
    const json& v = need(j, key);
    if (!v.is_number()) {
        throw MalformedInputError(std::string("field '") + key + "' must be a number");
    }
    return v.get<double>();
}

std::vector<double> need_numbers(const json& v, std::size_t n, const char* what) {
    if (!v.is_array() || v.size() != n) {
        throw MalformedInputError(std::string(what) + " must be an array of " +
                                  std::to_string(n) + " numbers");
    }
    std::vector<double> out;
    out.reserve(n);
    for (const auto& e : v) {
        if (!e.is_number()) {
            throw MalformedInputError(std::string(what) + " must contain numbers only");
        }
        out.push_back(e.get<double>());
    }
    return out;
}

Eigen::Matrix2d matrix2_from(const json& v, const char* what) {
    if (!v.is_array() || v.size() != 2) {
        throw MalformedInputError(std::string(what) + " must be a 2x2 row-major array");
    }
    Eigen::Matrix2d m;
    for (int r = 0; r < 2; ++r) {
        const auto row = need_numbers(v.at(r), 2, what);
        m(r, 0) = row[0];
        m(r, 1) = row[1];
    }
    return m;
}

void dump_rec(const json& j, std::string& out) {
    switch (j.type()) {
        case json::value_t::number_float: {
            const double v = j.get<double>();
            if (!std::isfinite(v)) {
                out += "null";  // JSON has no infinities; null marks zero density
                return;
            }
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out += buf;
            return;
        }
        case json::value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& e : j) {
                if (!first) out += ',';
                first = false;
                dump_rec(e, out);
            }
            out += ']';
            return;
        }
        case json::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                out += json(it.key()).dump();
                out += ':';
                dump_rec(it.value(), out);
            }
            out += '}';
            return;
        }
        default:
            out += j.dump();
            return;
    }
}

}  // namespace

json parse(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        throw MalformedInputError("invalid JSON");
    }
    return j;
}

std::string dump(const json& j) {
    std::string out;
    dump_rec(j, out);
    return out;
}

json to_json(const Point3& v) { return json::array({v.x(), v.y(), v.z()}); }

Point3 point_from_json(const json& j) {
    const auto p = need_numbers(j, 3, "point");
    return {p[0], p[1], p[2]};
}

json to_json(const DistParams& params) {
    return {{"mu", {params.mu_p.x(), params.mu_p.y(), params.mu_z}},
            {"A",
             {{params.A(0, 0), params.A(0, 1)}, {params.A(1, 0), params.A(1, 1)}}},
            {"a", params.a}};
}

DistParams dist_params_from_json(const json& j) {
    DistParams params;
    const auto mu = need_numbers(need(j, "mu"), 3, "mu");
    params.mu_p << mu[0], mu[1];
    params.mu_z = mu[2];
    params.A = matrix2_from(need(j, "A"), "A");
    params.a = need_number(j, "a");
    validate(params);
    return params;
}

json to_json(const DatasetStats& stats) {
    return {{"mu_z0", stats.mu_z0}, {"D", stats.D}};
}

DatasetStats stats_from_json(const json& j) {
    DatasetStats stats;
    stats.mu_z0 = need_number(j, "mu_z0");
    stats.D = need_number(j, "D");
    if (!(stats.mu_z0 > 0.0) || !(stats.D >= 1.0)) {
        throw std::invalid_argument("DatasetStats: mu_z0 > 0 and D >= 1 required");
    }
    return stats;
}

json to_json(const NormalizedParams& np) {
    return {{"nu_p", {np.nu_p.x(), np.nu_p.y()}},
            {"nu_z", np.nu_z},
            {"B", {{np.B(0, 0), np.B(0, 1)}, {np.B(1, 0), np.B(1, 1)}}},
            {"a", np.a}};
}

NormalizedParams normalized_params_from_json(const json& j) {
    NormalizedParams np;
    const auto nu = need_numbers(need(j, "nu_p"), 2, "nu_p");
    np.nu_p << nu[0], nu[1];
    np.nu_z = need_number(j, "nu_z");
    np.B = matrix2_from(need(j, "B"), "B");
    np.a = need_number(j, "a");
    validate(np);
    return np;
}

json to_json(const RawOutput& w) {
    json arr = json::array();
    for (int i = 0; i < 7; ++i) arr.push_back(w[i]);
    return {{"w", arr}};
}

RawOutput raw_output_from_json(const json& j) {
    const auto vals = need_numbers(need(j, "w"), 7, "w");
    RawOutput w;
    for (int i = 0; i < 7; ++i) w[i] = vals[i];
    return w;
}

json to_json(const NormalizedObservation& obs) {
    return {{"v_p", {obs.v_p.x(), obs.v_p.y()}}, {"z_p", obs.z_p}};
}

NormalizedObservation observation_from_json(const json& j) {
    NormalizedObservation obs;
    const auto vp = need_numbers(need(j, "v_p"), 2, "v_p");
    obs.v_p << vp[0], vp[1];
    obs.z_p = need_number(j, "z_p");
    return obs;
}

json to_json(const ViewEstimate& view) {
    json rot = json::array();
    for (int r = 0; r < 3; ++r) {
        rot.push_back({view.pose.R(r, 0), view.pose.R(r, 1), view.pose.R(r, 2)});
    }
    return {{"R", rot},
            {"t", to_json(view.pose.t)},
            {"f", view.intrinsics.f},
            {"S", view.intrinsics.S},
            {"params", to_json(view.params)}};
}

ViewEstimate view_from_json(const json& j) {
    ViewEstimate view;
    const json& rot = need(j, "R");
    if (!rot.is_array() || rot.size() != 3) {
        throw MalformedInputError("R must be a 3x3 row-major array");
    }
    for (int r = 0; r < 3; ++r) {
        const auto row = need_numbers(rot.at(r), 3, "R");
        for (int c = 0; c < 3; ++c) view.pose.R(r, c) = row[c];
    }
    view.pose.t = point_from_json(need(j, "t"));
    view.intrinsics.f = need_number(j, "f");
    view.intrinsics.S = need_number(j, "S");
    view.params = dist_params_from_json(need(j, "params"));
    validate(view);
    return view;
}

json to_json(const Plane& plane) {
    return {{"d", to_json(plane.d)}, {"c", plane.c}};
}

Plane plane_from_json(const json& j) {
    Plane plane;
    plane.d = point_from_json(need(j, "d"));
    plane.c = need_number(j, "c");
    validate(plane);
    return plane;
}

ScenarioConfig scenario_from_json(const json& j) {
    ScenarioConfig config;
    config.n_views = static_cast<int>(need_number(j, "n_views"));
    config.truth = point_from_json(need(j, "truth"));
    config.rig_radius = need_number(j, "rig_radius");
    if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("f")) config.intrinsics.f = need_number(j, "f");
    if (j.contains("S")) config.intrinsics.S = need_number(j, "S");
    if (j.contains("noise")) {
        const json& n = j.at("noise");
        config.noise.proj_jitter_std = need_number(n, "proj_jitter_std");
        config.noise.depth_jitter_factor = need_number(n, "depth_jitter_factor");
        const auto eig = need_numbers(need(n, "eig_range"), 2, "eig_range");
        config.noise.eig_lo = eig[0];
        config.noise.eig_hi = eig[1];
        const auto ar = need_numbers(need(n, "a_range"), 2, "a_range");
        config.noise.a_lo = ar[0];
        config.noise.a_hi = ar[1];
    }
    return config;
}

json to_json(const CalibrationCurve& curve) {
    json arr = json::array();
    for (const auto& [pv, se] : curve.points) arr.push_back({pv, se});
    return {{"curve", arr}};
}

}  // namespace phuber::io
