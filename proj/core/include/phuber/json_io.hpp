#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "phuber/fusion.hpp"
#include "phuber/harness.hpp"

namespace phuber::io {

using nlohmann::json;

/// Structural problems in input documents (missing keys, wrong types).
/// Distinct from domain errors so the CLI can map them to exit code 2.
class MalformedInputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parse with the distinction above (syntax errors become MalformedInputError).
json parse(const std::string& text);

/// Serialize with doubles at 17 significant digits; key order and spacing are
/// fixed so equal documents byte-match.
std::string dump(const json& j);

json to_json(const Point3& v);
Point3 point_from_json(const json& j);

json to_json(const DistParams& params);
DistParams dist_params_from_json(const json& j);

json to_json(const DatasetStats& stats);
DatasetStats stats_from_json(const json& j);

json to_json(const NormalizedParams& np);
NormalizedParams normalized_params_from_json(const json& j);

json to_json(const RawOutput& w);
RawOutput raw_output_from_json(const json& j);

json to_json(const NormalizedObservation& obs);
NormalizedObservation observation_from_json(const json& j);

json to_json(const ViewEstimate& view);
ViewEstimate view_from_json(const json& j);

json to_json(const Plane& plane);
Plane plane_from_json(const json& j);

ScenarioConfig scenario_from_json(const json& j);

json to_json(const CalibrationCurve& curve);

}  // namespace phuber::io
