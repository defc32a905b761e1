#include "seaflow/core/json_codec.hpp"

namespace seaflow {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json observation_to_json(const Observation& obs) {
    ordered_json j;
    j["schema_version"] = kObservationSchemaVersion;
    j["observation_id"] = obs.observation_id;
    j["org_id"] = obs.org_id;
    j["platform_id"] = obs.platform_id;
    j["sensor_id"] = obs.sensor_id;
    j["parameter"] = obs.parameter;
    j["unit"] = obs.unit;
    if (obs.value) j["value"] = *obs.value;
    j["measured_at"] = obs.measured_at;
    j["ingested_at"] = obs.ingested_at;
    j["location"] = ordered_json{{"lat", obs.location.lat},
                                 {"lon", obs.location.lon},
                                 {"depth_m", obs.location.depth_m}};
    j["qc"] = ordered_json{{"accuracy", flag_name(obs.qc.accuracy)},
                           {"completeness", flag_name(obs.qc.completeness)},
                           {"consistency", flag_name(obs.qc.consistency)},
                           {"currentness", flag_name(obs.qc.currentness)},
                           {"overall", flag_name(obs.qc.overall)}};
    j["category"] = category_name(obs.category);
    ordered_json steps = ordered_json::array();
    for (const auto& s : obs.lineage) {
        steps.push_back(ordered_json{{"stage", s.stage}, {"at", s.at}, {"detail", s.detail}});
    }
    j["lineage"] = std::move(steps);
    return j;
}

Expected<Observation> observation_from_json(const json& j) {
    auto malformed = [](const std::string& what) -> Error {
        return Error{Errc::UnparseablePayload, "observation: " + what};
    };
    if (!j.is_object()) return malformed("not an object");

    Observation obs;
    try {
        if (j.contains("schema_version") &&
            j.at("schema_version").get<std::string>() != kObservationSchemaVersion)
            return malformed("unsupported schema_version");
        obs.observation_id = j.at("observation_id").get<std::string>();
        obs.org_id = j.at("org_id").get<std::string>();
        obs.platform_id = j.at("platform_id").get<std::string>();
        obs.sensor_id = j.at("sensor_id").get<std::string>();
        obs.parameter = j.at("parameter").get<std::string>();
        obs.unit = j.at("unit").get<std::string>();
        if (j.contains("value") && !j.at("value").is_null())
            obs.value = j.at("value").get<double>();
        obs.measured_at = j.at("measured_at").get<TimestampMs>();
        obs.ingested_at = j.at("ingested_at").get<TimestampMs>();
        const auto& loc = j.at("location");
        obs.location.lat = loc.at("lat").get<double>();
        obs.location.lon = loc.at("lon").get<double>();
        obs.location.depth_m = loc.at("depth_m").get<double>();

        const auto& qc = j.at("qc");
        auto read_flag = [&](const char* key, AttributeFlag& out) {
            auto f = flag_from_name(qc.at(key).get<std::string>());
            if (f) out = *f;
            return f.has_value();
        };
        if (!read_flag("accuracy", obs.qc.accuracy) ||
            !read_flag("completeness", obs.qc.completeness) ||
            !read_flag("consistency", obs.qc.consistency) ||
            !read_flag("currentness", obs.qc.currentness) ||
            !read_flag("overall", obs.qc.overall))
            return malformed("unknown qc flag name");

        auto cat = category_from_name(j.at("category").get<std::string>());
        if (!cat) return malformed("unknown category");
        obs.category = *cat;

        for (const auto& s : j.at("lineage")) {
            obs.lineage.push_back({s.at("stage").get<std::string>(),
                                   s.at("at").get<TimestampMs>(),
                                   s.value("detail", std::string{})});
        }
    } catch (const json::exception& e) {
        return malformed(e.what());
    }
    return obs;
}

std::string observation_to_line(const Observation& obs) {
    return observation_to_json(obs).dump();
}

Expected<Observation> observation_from_line(const std::string& line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
        return Error{Errc::UnparseablePayload, "observation line is not valid JSON"};
    return observation_from_json(j);
}

}  // namespace seaflow
