#include "seaflow/core/observation.hpp"

#include <cmath>

namespace seaflow {

std::vector<ValidationError> validate_observation(const Observation& obs) {
    std::vector<ValidationError> errors;
    auto fail = [&](const char* field, const char* rule) {
        errors.push_back({field, rule});
    };

    if (obs.observation_id.empty()) fail("observation_id", "must be non-empty");
    if (obs.org_id.empty()) fail("org_id", "must be non-empty");
    if (obs.platform_id.empty()) fail("platform_id", "must be non-empty");
    if (obs.sensor_id.empty()) fail("sensor_id", "must be non-empty");
    if (obs.parameter.empty()) fail("parameter", "must be non-empty");
    if (obs.unit.empty()) fail("unit", "must be non-empty");

    if (obs.measured_at > obs.ingested_at)
        fail("measured_at", "must not exceed ingested_at");

    if (!(obs.location.lat >= -90.0 && obs.location.lat <= 90.0))
        fail("location.lat", "out of range [-90, 90]");
    if (!(obs.location.lon >= -180.0 && obs.location.lon <= 180.0))
        fail("location.lon", "out of range [-180, 180]");
    if (!(obs.location.depth_m >= 0.0)) fail("location.depth_m", "must be >= 0");

    if (obs.value && !std::isfinite(*obs.value)) fail("value", "must be finite");
    if (!obs.value && obs.qc.completeness != AttributeFlag::Missing)
        fail("qc.completeness", "absent value requires completeness = Missing");
    if (obs.value && obs.qc.completeness == AttributeFlag::Missing)
        fail("qc.completeness", "present value forbids completeness = Missing");

    for (size_t i = 1; i < obs.lineage.size(); ++i) {
        if (obs.lineage[i].at < obs.lineage[i - 1].at) {
            fail("lineage", "step timestamps must be non-decreasing");
            break;
        }
    }
    for (const auto& step : obs.lineage) {
        if (step.stage.empty()) {
            fail("lineage", "step stage must be non-empty");
            break;
        }
    }
    return errors;
}

Expected<Observation> append_lineage(const Observation& obs, const std::string& stage,
                                     TimestampMs at, const std::string& detail) {
    if (!obs.lineage.empty() && at < obs.lineage.back().at) {
        return Error{Errc::TimeRegression,
                     "lineage step at " + std::to_string(at) + " precedes last step at " +
                         std::to_string(obs.lineage.back().at)};
    }
    Observation out = obs;
    out.lineage.push_back({stage, at, detail});
    return out;
}

std::string make_observation_id(const std::string& org_id, const std::string& platform_id,
                                const std::string& sensor_id, TimestampMs measured_at) {
    return org_id + "/" + platform_id + "/" + sensor_id + "@" + std::to_string(measured_at);
}

}  // namespace seaflow
