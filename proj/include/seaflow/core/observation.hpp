#pragma once

#include <optional>
#include <string>
#include <vector>

#include "seaflow/core/error.hpp"
#include "seaflow/core/flags.hpp"
#include "seaflow/core/time.hpp"

namespace seaflow {

struct Location {
    double lat = 0.0;      // degrees, [-90, 90]
    double lon = 0.0;      // degrees, [-180, 180]
    double depth_m = 0.0;  // meters below surface, >= 0

    bool operator==(const Location&) const = default;
};

/// One pipeline stage traversal. The list is append-only; timestamps are
/// non-decreasing along it.
struct LineageStep {
    std::string stage;
    TimestampMs at = 0;
    std::string detail;

    bool operator==(const LineageStep&) const = default;
};

struct QCReport {
    AttributeFlag accuracy = AttributeFlag::NotEvaluated;
    AttributeFlag completeness = AttributeFlag::NotEvaluated;
    AttributeFlag consistency = AttributeFlag::NotEvaluated;
    AttributeFlag currentness = AttributeFlag::NotEvaluated;
    AttributeFlag overall = AttributeFlag::NotEvaluated;

    /// Recompute overall as worst-of the four attributes.
    void finalize() {
        overall = worst_flag({accuracy, completeness, consistency, currentness});
    }

    bool operator==(const QCReport&) const = default;
};

/**
 * Observation - the canonical record every platform stage exchanges.
 *
 * An absent value marks a synthesized missing record; such records always
 * carry completeness = Missing and never a measured number.
 */
struct Observation {
    std::string observation_id;
    std::string org_id;
    std::string platform_id;
    std::string sensor_id;
    std::string parameter;
    std::string unit;
    std::optional<double> value;
    TimestampMs measured_at = 0;
    TimestampMs ingested_at = 0;
    Location location;
    QCReport qc;
    DataCategory category = DataCategory::BusinessCritical;
    std::vector<LineageStep> lineage;

    bool operator==(const Observation&) const = default;
};

struct ValidationError {
    std::string field;
    std::string rule;
};

/// Empty result iff every type invariant holds. Each violation names the
/// offending field and rule.
std::vector<ValidationError> validate_observation(const Observation& obs);

/// Copy with one appended lineage step. Fails with TimeRegression when `at`
/// precedes the last recorded step.
Expected<Observation> append_lineage(const Observation& obs, const std::string& stage,
                                     TimestampMs at, const std::string& detail = "");

/// Deterministic composite id: org/platform/sensor@measured_at.
std::string make_observation_id(const std::string& org_id, const std::string& platform_id,
                                const std::string& sensor_id, TimestampMs measured_at);

/// Transform-level dedup key.
struct DedupKey {
    std::string sensor_id;
    TimestampMs measured_at = 0;
    auto operator<=>(const DedupKey&) const = default;
};

inline DedupKey dedup_key(const Observation& obs) {
    return DedupKey{obs.sensor_id, obs.measured_at};
}

}  // namespace seaflow
