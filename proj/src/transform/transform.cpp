#include "seaflow/transform/transform.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace seaflow::transform {

namespace {

constexpr const char* kRequiredTargets[] = {
    "sensor_id", "parameter", "unit", "value", "measured_at",
};
constexpr const char* kOptionalTargets[] = {
    "platform_id", "lat", "lon", "depth_m",
};

bool numeric_target(const std::string& target) {
    return target == "value" || target == "lat" || target == "lon" ||
           target == "depth_m";
}

bool required_target(const std::string& target) {
    for (const char* t : kRequiredTargets)
        if (target == t) return true;
    return false;
}

bool known_target(const std::string& target) {
    if (required_target(target)) return true;
    for (const char* t : kOptionalTargets)
        if (target == t) return true;
    return false;
}

std::string registry_key(const std::string& org, ingest::SourceFormat f) {
    return org + "|" + ingest::source_format_name(f);
}

Expected<double> parse_decimal(const std::string& field,
                               const std::string& text) {
    if (!text.empty()) {
        char* end = nullptr;
        const double v = std::strtod(text.c_str(), &end);
        if (end == text.c_str() + text.size()) return v;
    }
    return Error{Errc::ConversionError,
                 field + ": not a decimal: \"" + text + "\""};
}

Error conversion_error(const std::string& field, const std::string& reason) {
    return Error{Errc::ConversionError, field + ": " + reason};
}

}  // namespace

const char* converter_name(Converter c) {
    switch (c) {
        case Converter::Identity: return "identity";
        case Converter::ParseIso8601ToEpochMs: return "iso8601_to_epoch_ms";
        case Converter::ParseDecimal: return "parse_decimal";
        case Converter::UnitScale: return "unit_scale";
        case Converter::Constant: return "constant";
    }
    return "unknown";
}

std::optional<Converter> converter_from_name(const std::string& name) {
    for (Converter c : {Converter::Identity, Converter::ParseIso8601ToEpochMs,
                        Converter::ParseDecimal, Converter::UnitScale,
                        Converter::Constant}) {
        if (name == converter_name(c)) return c;
    }
    return std::nullopt;
}

Expected<MappingId> MappingRegistry::register_mapping(FieldMapping mapping) {
    std::set<std::string> covered;
    for (const MappingRule& r : mapping.rules) {
        if (!known_target(r.target_field))
            return Error{Errc::IncompleteMapping,
                         "unknown target field " + r.target_field};
        if (!covered.insert(r.target_field).second)
            return Error{Errc::IncompleteMapping,
                         "target " + r.target_field + " covered twice"};
        if (r.converter != Converter::Constant && r.source_field.empty())
            return Error{Errc::IncompleteMapping,
                         "rule for " + r.target_field + " names no source"};
        const bool numeric = r.converter == Converter::ParseDecimal ||
                             r.converter == Converter::UnitScale;
        if (r.target_field == "measured_at" &&
            r.converter != Converter::ParseIso8601ToEpochMs)
            return Error{Errc::IncompleteMapping,
                         "measured_at needs iso8601_to_epoch_ms"};
        if (numeric_target(r.target_field) && !numeric)
            return Error{Errc::IncompleteMapping,
                         r.target_field + " needs a numeric converter"};
        if (!numeric_target(r.target_field) && numeric)
            return Error{Errc::IncompleteMapping,
                         r.target_field + " is textual, got " +
                             converter_name(r.converter)};
    }
    std::string missing;
    for (const char* t : kRequiredTargets) {
        if (!covered.count(t)) missing += missing.empty() ? t : std::string(", ") + t;
    }
    if (!missing.empty())
        return Error{Errc::IncompleteMapping, "uncovered: " + missing};

    const std::string key = registry_key(mapping.org_id, mapping.source_format);
    const int version = current_.count(key) ? current_[key].second + 1 : 1;
    MappingId id = mapping.org_id + "/" +
                   ingest::source_format_name(mapping.source_format) + "@v" +
                   std::to_string(version);
    current_[key] = {id, version};
    by_id_.emplace(id, std::move(mapping));
    return id;
}

const FieldMapping* MappingRegistry::resolve(const MappingId& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &it->second;
}

const FieldMapping* MappingRegistry::current(const std::string& org_id,
                                             ingest::SourceFormat format) const {
    auto it = current_.find(registry_key(org_id, format));
    return it == current_.end() ? nullptr : resolve(it->second.first);
}

std::optional<MappingId> MappingRegistry::current_id(
    const std::string& org_id, ingest::SourceFormat format) const {
    auto it = current_.find(registry_key(org_id, format));
    if (it == current_.end()) return std::nullopt;
    return it->second.first;
}

Expected<MappingRegistry> MappingRegistry::from_json_text(
    const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        return Error{Errc::ConfigError,
                     std::string("mapping file: ") + e.what()};
    }
    if (!doc.is_object() || !doc.contains("mappings") ||
        !doc["mappings"].is_array())
        return Error{Errc::ConfigError, "mapping file needs a mappings array"};

    MappingRegistry reg;
    for (const auto& m : doc["mappings"]) {
        FieldMapping fm;
        try {
            fm.org_id = m.at("org").get<std::string>();
            const std::string fmt = m.at("format").get<std::string>();
            if (fmt == "json-v1") fm.source_format = ingest::SourceFormat::JsonV1;
            else if (fmt == "xml-v1") fm.source_format = ingest::SourceFormat::XmlV1;
            else return Error{Errc::ConfigError, "unknown format " + fmt};
            for (const auto& r : m.at("rules")) {
                MappingRule rule;
                rule.source_field = r.value("source", "");
                rule.target_field = r.at("target").get<std::string>();
                auto conv = converter_from_name(
                    r.value("converter", "identity"));
                if (!conv)
                    return Error{Errc::ConfigError,
                                 "unknown converter in mapping for " +
                                     fm.org_id};
                rule.converter = *conv;
                rule.factor = r.value("factor", 1.0);
                rule.offset = r.value("offset", 0.0);
                rule.constant = r.value("value", "");
                fm.rules.push_back(std::move(rule));
            }
        } catch (const nlohmann::json::exception& e) {
            return Error{Errc::ConfigError,
                         std::string("mapping file: ") + e.what()};
        }
        if (auto id = reg.register_mapping(std::move(fm)); !id.ok())
            return id.error();
    }
    return reg;
}

Expected<MappingRegistry> MappingRegistry::from_json_file(
    const std::string& path) {
    std::ifstream in(path);
    if (!in)
        return Error{Errc::ConfigError, "cannot open mapping file " + path};
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

FieldMapping org_json_mapping(const std::string& org_id) {
    FieldMapping m;
    m.org_id = org_id;
    m.source_format = ingest::SourceFormat::JsonV1;
    m.rules = {
        {"sid", "sensor_id", Converter::Identity, 1, 0, ""},
        {"par", "parameter", Converter::Identity, 1, 0, ""},
        {"unit", "unit", Converter::Identity, 1, 0, ""},
        {"t", "measured_at", Converter::ParseIso8601ToEpochMs, 1, 0, ""},
        {"v", "value", Converter::ParseDecimal, 1, 0, ""},
        {"station", "platform_id", Converter::Identity, 1, 0, ""},
    };
    return m;
}

FieldMapping org_xml_mapping(const std::string& org_id) {
    FieldMapping m;
    m.org_id = org_id;
    m.source_format = ingest::SourceFormat::XmlV1;
    m.rules = {
        {"sensor", "sensor_id", Converter::Identity, 1, 0, ""},
        {"parameter", "parameter", Converter::Identity, 1, 0, ""},
        {"uom", "unit", Converter::Identity, 1, 0, ""},
        {"time", "measured_at", Converter::ParseIso8601ToEpochMs, 1, 0, ""},
        {"value", "value", Converter::ParseDecimal, 1, 0, ""},
        {"station", "platform_id", Converter::Identity, 1, 0, ""},
    };
    return m;
}

Expected<Observation> to_canonical(const ingest::RawRecord& record,
                                   const MappingRegistry& registry) {
    const FieldMapping* mapping =
        registry.current(record.org_id, record.source_format);
    if (mapping == nullptr)
        return Error{Errc::MappingNotFound,
                     "no mapping for " + record.org_id + "/" +
                         ingest::source_format_name(record.source_format)};

    Observation obs;
    obs.org_id = record.org_id;
    obs.ingested_at = record.received_at;
    obs.platform_id = ingest::record_platform(record);

    for (const MappingRule& rule : mapping->rules) {
        std::string text;
        if (rule.converter == Converter::Constant) {
            text = rule.constant;
        } else {
            const std::string* src = record.field(rule.source_field);
            if (src == nullptr) {
                // optional enrichments keep their defaults when unsupplied
                if (!required_target(rule.target_field)) continue;
                return conversion_error(rule.source_field, "field absent");
            }
            text = *src;
        }

        if (rule.target_field == "measured_at") {
            auto t = parse_iso8601(text);
            if (!t)
                return conversion_error(rule.source_field,
                                        "not an ISO 8601 instant: \"" + text +
                                            "\"");
            obs.measured_at = *t;
            continue;
        }
        if (numeric_target(rule.target_field)) {
            auto v = parse_decimal(rule.source_field, text);
            if (!v.ok()) return v.error();
            double num = *v;
            if (rule.converter == Converter::UnitScale)
                num = num * rule.factor + rule.offset;
            if (rule.target_field == "value") obs.value = num;
            else if (rule.target_field == "lat") obs.location.lat = num;
            else if (rule.target_field == "lon") obs.location.lon = num;
            else obs.location.depth_m = num;
            continue;
        }
        if (rule.target_field == "sensor_id") obs.sensor_id = text;
        else if (rule.target_field == "parameter") obs.parameter = text;
        else if (rule.target_field == "unit") obs.unit = text;
        else if (rule.target_field == "platform_id") obs.platform_id = text;
    }

    obs.observation_id = make_observation_id(obs.org_id, obs.platform_id,
                                             obs.sensor_id, obs.measured_at);
    const std::string trace =
        record.ingest_trace.empty() ? "push" : record.ingest_trace;
    obs.lineage.push_back(
        {"transform", record.received_at,
         *registry.current_id(record.org_id, record.source_format) + " via " +
             trace});

    if (auto problems = validate_observation(obs); !problems.empty()) {
        std::string msg = "canonical record invalid:";
        for (const ValidationError& p : problems)
            msg += " " + p.field + "(" + p.rule + ")";
        return Error{Errc::ConversionError, msg};
    }
    return obs;
}

bool Deduper::seen(const DedupKey& key) {
    if (key.measured_at > high_water_) {
        high_water_ = key.measured_at;
        const TimestampMs cutoff = high_water_ - horizon_ms_;
        for (auto it = seen_.begin(); it != seen_.end();) {
            if (it->first.measured_at < cutoff) it = seen_.erase(it);
            else ++it;
        }
    }
    if (key.measured_at < high_water_ - horizon_ms_) return false;
    return !seen_.emplace(key, key.measured_at).second;
}

Expected<std::optional<Observation>> Transformer::apply(
    const ingest::RawRecord& rec) {
    auto count = [this, &rec](const char* name) {
        if (metrics_ != nullptr)
            (void)metrics_->counter_inc(name, {{"org", rec.org_id}}, 1);
    };
    auto obs = to_canonical(rec, registry_);
    if (!obs.ok()) {
        count("transform_errors_total");
        return obs.error();
    }
    if (dedup_.seen(dedup_key(*obs))) {
        count("transform_duplicates_total");
        return std::optional<Observation>{};
    }
    count("transform_observations_total");
    return std::optional<Observation>{std::move(*obs)};
}

}  // namespace seaflow::transform
