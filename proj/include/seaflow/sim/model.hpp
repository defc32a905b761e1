#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "seaflow/core/time.hpp"

namespace seaflow::sim {

enum class FaultKind { Spike, Stuck, Drift, OutOfRange, NodeDead, LinkDown };
const char* fault_kind_name(FaultKind k);
std::optional<FaultKind> fault_kind_from_name(const std::string& name);

struct FaultEvent {
    FaultKind kind = FaultKind::Spike;
    TimestampMs start = 0;
    TimestampMs end = 0;  // exclusive
    double magnitude = 0.0;

    bool active_at(TimestampMs t) const { return t >= start && t < end; }
};

struct SignalModel {
    double base = 0.0;
    double diurnal_amplitude = 0.0;
    double noise_stddev = 0.0;
};

struct SensorSpec {
    std::string sensor_id;
    std::string parameter;
    std::string unit;
    std::int64_t sampling_interval_s = 1800;
    double valid_min = 0.0;
    double valid_max = 0.0;
    SignalModel signal;
    std::vector<FaultEvent> fault_plan;  // sensor-level kinds only
};

/// Ground truth rides on readings and the event log only; it never crosses
/// the UAC wire.
struct RawReading {
    std::string sensor_id;
    TimestampMs measured_at = 0;
    double value = 0.0;
    std::optional<FaultKind> true_fault;
};

/// Unit of transfer on the acoustic path and input to the gateway.
struct OutRecord {
    std::string sensor_id;
    TimestampMs measured_at = 0;
    double value = 0.0;       // mean under MeanOverWindow
    double min_value = 0.0;
    double max_value = 0.0;
    std::uint32_t count = 1;  // readings folded into this record
    std::optional<FaultKind> true_fault;

    bool operator==(const OutRecord&) const = default;
};

enum class AggregationMode { Raw, MeanOverWindow, EventOnly };

struct AggregationPolicy {
    AggregationMode mode = AggregationMode::Raw;
    std::int64_t window_s = 0;       // MeanOverWindow
    double event_threshold = 0.0;    // EventOnly
};

enum class NodeRole { Sensing, Gateway };

/// Joule figures from config are held as integer nanojoules so conservation
/// checks can demand exact equality.
struct EnergyCosts {
    std::int64_t sample_nj = 5'000'000;          // 5 mJ
    std::int64_t cpu_per_record_nj = 1'000'000;  // 1 mJ
    std::int64_t tx_per_byte_nj = 50'000;        // 50 uJ
    std::int64_t rx_per_byte_nj = 25'000;        // 25 uJ
};

struct EnergyLedger {
    std::int64_t sample_nj = 0;
    std::int64_t cpu_nj = 0;
    std::int64_t tx_nj = 0;
    std::int64_t rx_nj = 0;
    std::int64_t total() const { return sample_nj + cpu_nj + tx_nj + rx_nj; }
};

enum class ChannelKind { UAC, Serial, OTA };
const char* channel_kind_name(ChannelKind k);

/// Seconds-of-day window during which transmission is permitted.
struct DutyWindow {
    std::int64_t start_s = 0;
    std::int64_t end_s = 86400;  // exclusive
};

struct ChannelModel {
    ChannelKind kind = ChannelKind::UAC;
    double bandwidth_bps = 2000.0;   // acoustic default
    double base_latency_s = 1.5;
    double jitter_s = 0.0;
    double frame_loss_prob = 0.1;
    double bit_error_rate = 0.0;
    std::vector<DutyWindow> duty;    // empty: always open
    double cost_per_kb = 0.0;        // OTA only
    std::vector<FaultEvent> fault_plan;  // LinkDown entries

    std::optional<TimestampMs> linkdown_until(TimestampMs t) const {
        for (const FaultEvent& f : fault_plan) {
            if (f.kind == FaultKind::LinkDown && f.active_at(t)) return f.end;
        }
        return std::nullopt;
    }
};

std::int64_t joules_to_nj(double j);
double nj_to_joules(std::int64_t nj);

}  // namespace seaflow::sim
