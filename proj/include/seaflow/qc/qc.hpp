#pragma once

#include <compare>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seaflow/core/observation.hpp"
#include "seaflow/metrics/registry.hpp"

namespace seaflow::qc {

enum class AlarmKind {
    MissingData,
    QcBad,
    SessionFailed,
    LowBattery,
};

const char* alarm_kind_name(AlarmKind k);

struct Alarm {
    AlarmKind kind = AlarmKind::MissingData;
    std::string key;  // stream key or node id the alarm is about
    TimestampMs at = 0;
    std::string detail;
};

/// Streams are checked per (sensor, parameter); one state each.
struct StreamKey {
    std::string sensor_id;
    std::string parameter;

    auto operator<=>(const StreamKey&) const = default;
};

std::string key_text(const StreamKey& key);  // "sensor/parameter"

struct WindowSample {
    TimestampMs measured_at = 0;
    double value = 0.0;
};

struct ValueRange {
    double min_value = 0.0;
    double max_value = 0.0;
};

/**
 * StreamState - running knowledge about one stream: when it last reported,
 * a window of recent values for robust statistics, and the expected cadence
 * from the sensor registry. last_seen < 0 means nothing has arrived yet.
 */
struct StreamState {
    StreamKey key;
    TimestampMs last_seen = -1;
    std::deque<WindowSample> window;  // ordered by measured_at
    std::int64_t expected_interval_s = 0;
    std::optional<ValueRange> valid_range;
    int stuck_run = 0;
    std::optional<double> last_value;

    // template for synthesized records, carried from the last real arrival
    std::string org_id;
    std::string platform_id;
    std::string unit;
    Location location;
};

struct ConsistencyConfig {
    double neighbor_radius_m = 1000.0;
    double max_delta = 2.0;
};

struct QcConfig {
    double spike_k = 6.0;        // MAD multiplier for spike detection
    int stuck_n = 5;             // consecutive equal values before a flag
    int window_w = 20;           // robust-statistics window size, >= 5
    double gap_tolerance_factor = 1.5;
    std::int64_t currentness_max_age_s = 0;  // 0: twice the stream interval
    std::int64_t alarm_horizon_s = 86400;    // silence alarms older than this
    ConsistencyConfig consistency;
};

Expected<void> validate_qc_config(const QcConfig& cfg);

/**
 * Accuracy of one arriving value against the stream's own history: hard
 * range violations are Bad, spikes beyond spike_k times the window MAD and
 * frozen runs are ProbablyBad, a short window downgrades to ProbablyGood.
 */
AttributeFlag check_accuracy(const Observation& obs, const StreamState& st,
                             const QcConfig& cfg);

struct MissingBatch {
    std::vector<Observation> missing;
    std::vector<Alarm> alarms;
};

/**
 * Synthesizes one value-less Observation per expected sample instant the
 * stream stayed silent past its tolerance, advancing last_seen so a repeat
 * call emits nothing. Alarms accompany each synthesized record one to one
 * unless the instant is older than alarm_horizon_s before wall_now (old
 * backfill should not page anyone).
 */
MissingBatch check_completeness(StreamState& st, TimestampMs now,
                                const QcConfig& cfg, TimestampMs wall_now = -1);

/// Agreement with the latest readings of the same parameter nearby.
AttributeFlag check_consistency(const Observation& obs,
                                const std::vector<Observation>& neighbors,
                                const QcConfig& cfg);

/// Age of the measurement against the configured or cadence-derived bound.
AttributeFlag check_currentness(const Observation& obs, TimestampMs now,
                                const QcConfig& cfg,
                                std::int64_t expected_interval_s = 0);

struct QcResult {
    Observation obs;
    std::vector<Alarm> alarms;
};

/**
 * Runs all four attribute checks on one arrival, finalizes the report,
 * appends a qc lineage step and updates the stream state. Emits a QcBad
 * alarm only for an overall Bad; Missing records alarm at synthesis time,
 * not here.
 */
QcResult run_qc(const Observation& obs, StreamState& st, TimestampMs now,
                const QcConfig& cfg,
                const std::vector<Observation>& neighbors = {});

/**
 * QcEngine - per-stream state keyed by (sensor, parameter). process() closes
 * completeness gaps up to the arriving instant, then checks the arrival
 * itself; sweep() closes gaps against the wall clock for streams that have
 * gone quiet without a successor arrival.
 */
class QcEngine {
public:
    explicit QcEngine(QcConfig cfg, metrics::Registry* metrics = nullptr)
        : cfg_(std::move(cfg)), metrics_(metrics) {}

    void register_stream(const StreamKey& key, std::int64_t expected_interval_s,
                         std::optional<ValueRange> valid_range = std::nullopt);

    struct Outcome {
        Observation obs;
        std::vector<Observation> missing;  // synthesized before this arrival
        std::vector<Alarm> alarms;
    };

    Outcome process(const Observation& obs, TimestampMs now,
                    const std::vector<Observation>& neighbors = {});

    MissingBatch sweep(TimestampMs now);

    const StreamState* state(const StreamKey& key) const;
    const QcConfig& config() const { return cfg_; }

private:
    StreamState& state_for(const StreamKey& key);
    void count_flags(const Observation& obs);

    QcConfig cfg_;
    metrics::Registry* metrics_;
    std::map<StreamKey, StreamState> streams_;
};

}  // namespace seaflow::qc
