#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seaflow/core/observation.hpp"
#include "seaflow/ingest/wire.hpp"
#include "seaflow/metrics/registry.hpp"

namespace seaflow::transform {

enum class Converter {
    Identity,             // copy the string
    ParseIso8601ToEpochMs,
    ParseDecimal,
    UnitScale,            // parse decimal, then v * factor + offset
    Constant,             // no source field, fixed value
};

const char* converter_name(Converter c);
std::optional<Converter> converter_from_name(const std::string& name);

struct MappingRule {
    std::string source_field;  // empty for Constant
    std::string target_field;
    Converter converter = Converter::Identity;
    double factor = 1.0;   // UnitScale
    double offset = 0.0;   // UnitScale
    std::string constant;  // Constant

    bool operator==(const MappingRule&) const = default;
};

/**
 * FieldMapping - one org's recipe from wire fields to the canonical record.
 * Every required canonical field (sensor_id, parameter, unit, value,
 * measured_at) must be covered exactly once; platform_id and the location
 * targets are optional extras.
 */
struct FieldMapping {
    std::string org_id;
    ingest::SourceFormat source_format = ingest::SourceFormat::JsonV1;
    std::vector<MappingRule> rules;
};

using MappingId = std::string;  // "<org>/<format>@v<n>"

/**
 * MappingRegistry - versioned mapping store. Re-registering an (org,
 * format) pair supersedes it for new records while the old version stays
 * resolvable by id, so replayed archives keep their original semantics.
 */
class MappingRegistry {
public:
    Expected<MappingId> register_mapping(FieldMapping mapping);

    const FieldMapping* resolve(const MappingId& id) const;
    const FieldMapping* current(const std::string& org_id,
                                ingest::SourceFormat format) const;
    std::optional<MappingId> current_id(const std::string& org_id,
                                        ingest::SourceFormat format) const;
    std::size_t size() const { return by_id_.size(); }

    /// Loads {"mappings":[...]} produced by the documented mapping schema.
    static Expected<MappingRegistry> from_json_text(const std::string& text);
    static Expected<MappingRegistry> from_json_file(const std::string& path);

private:
    std::map<MappingId, FieldMapping> by_id_;
    std::map<std::string, std::pair<MappingId, int>> current_;  // key org|format
};

/// Stock mappings for the two org wire styles.
FieldMapping org_json_mapping(const std::string& org_id);
FieldMapping org_xml_mapping(const std::string& org_id);

/// Pure conversion of one record under the registry's current mapping.
Expected<Observation> to_canonical(const ingest::RawRecord& record,
                                   const MappingRegistry& registry);

/**
 * Deduper - sliding-window duplicate filter on (sensor_id, measured_at).
 * Keys older than the horizon behind the newest seen timestamp are evicted,
 * bounding memory; replays beyond the horizon are accepted again.
 */
class Deduper {
public:
    explicit Deduper(TimestampMs horizon_ms = 48 * kMsPerHour)
        : horizon_ms_(horizon_ms) {}

    /// True when the key was already seen inside the horizon (caller drops).
    bool seen(const DedupKey& key);
    std::size_t size() const { return seen_.size(); }

private:
    TimestampMs horizon_ms_;
    TimestampMs high_water_ = 0;
    std::map<DedupKey, TimestampMs> seen_;
};

/**
 * Transformer - to_canonical plus dedup plus counters; the pipeline's
 * convert stage. ok(nullopt) means a duplicate was dropped on purpose.
 */
class Transformer {
public:
    Transformer(const MappingRegistry& registry,
                metrics::Registry* metrics = nullptr,
                TimestampMs dedup_horizon_ms = 48 * kMsPerHour)
        : registry_(registry), metrics_(metrics), dedup_(dedup_horizon_ms) {}

    Expected<std::optional<Observation>> apply(const ingest::RawRecord& rec);

private:
    const MappingRegistry& registry_;
    metrics::Registry* metrics_;
    Deduper dedup_;
};

}  // namespace seaflow::transform
