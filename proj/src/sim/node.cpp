#include "seaflow/sim/node.hpp"

#include <algorithm>
#include <cmath>

namespace seaflow::sim {

NodeRuntime::NodeRuntime(std::string node_id, NodeRole role, double battery_j,
                         EnergyCosts costs, AggregationPolicy policy,
                         std::size_t buffer_capacity)
    : node_id_(std::move(node_id)),
      role_(role),
      battery_nj_(joules_to_nj(battery_j)),
      initial_battery_nj_(battery_nj_),
      costs_(costs),
      policy_(policy),
      buffer_capacity_(buffer_capacity) {}

std::int64_t NodeRuntime::debit(std::int64_t nj, EnergyKind kind) {
    const std::int64_t taken = std::min(nj, battery_nj_);
    battery_nj_ -= taken;
    switch (kind) {
        case EnergyKind::Sample: ledger_.sample_nj += taken; break;
        case EnergyKind::Cpu: ledger_.cpu_nj += taken; break;
        case EnergyKind::Tx: ledger_.tx_nj += taken; break;
        case EnergyKind::Rx: ledger_.rx_nj += taken; break;
    }
    return taken;
}

bool NodeRuntime::alive_at(TimestampMs t) const {
    if (battery_nj_ == 0) return false;
    for (const FaultEvent& f : fault_plan) {
        if (f.kind == FaultKind::NodeDead && f.active_at(t)) return false;
    }
    return true;
}

std::vector<OutRecord> NodeRuntime::process(const RawReading& r,
                                            std::int64_t sampling_interval_s) {
    const std::int64_t want = costs_.cpu_per_record_nj;
    if (debit(want, EnergyKind::Cpu) < want) return {};  // died mid-processing

    auto single = [&r]() {
        OutRecord rec;
        rec.sensor_id = r.sensor_id;
        rec.measured_at = r.measured_at;
        rec.value = r.value;
        rec.min_value = r.value;
        rec.max_value = r.value;
        rec.count = 1;
        rec.true_fault = r.true_fault;
        return rec;
    };

    switch (policy_.mode) {
        case AggregationMode::Raw:
            return {single()};
        case AggregationMode::EventOnly: {
            auto it = last_emitted_.find(r.sensor_id);
            if (it == last_emitted_.end() ||
                std::abs(r.value - it->second) > policy_.event_threshold) {
                last_emitted_[r.sensor_id] = r.value;
                return {single()};
            }
            return {};
        }
        case AggregationMode::MeanOverWindow: {
            WindowAcc& acc = windows_[r.sensor_id];
            if (acc.count == 0) {
                acc.min = r.value;
                acc.max = r.value;
            }
            acc.sum += r.value;
            acc.min = std::min(acc.min, r.value);
            acc.max = std::max(acc.max, r.value);
            acc.count += 1;
            if (r.true_fault) acc.fault = r.true_fault;
            const auto per_window = static_cast<std::uint32_t>(
                std::max<std::int64_t>(1, policy_.window_s / sampling_interval_s));
            if (acc.count < per_window) return {};
            OutRecord rec;
            rec.sensor_id = r.sensor_id;
            rec.measured_at = r.measured_at;  // window closes on its last sample
            rec.value = acc.sum / acc.count;
            rec.min_value = acc.min;
            rec.max_value = acc.max;
            rec.count = acc.count;
            rec.true_fault = acc.fault;
            windows_.erase(r.sensor_id);
            return {rec};
        }
    }
    return {};
}

}  // namespace seaflow::sim
