#pragma once

#include <map>

#include "seaflow/sim/model.hpp"
#include "seaflow/util/rng.hpp"

namespace seaflow::sim {

/**
 * SensorRuntime - per-sensor sampling state.
 *
 * Stuck faults freeze the first value sampled inside their window, so the
 * runtime remembers it per fault index. The RNG substream belongs to the
 * sensor; nothing else may draw from it.
 */
class SensorRuntime {
public:
    SensorRuntime(SensorSpec spec, DetRng rng)
        : spec_(std::move(spec)), rng_(rng) {}

    /// Clean diurnal signal plus noise, then fault transformations in plan
    /// order. true_fault reports the last fault that shaped the value.
    RawReading sample(TimestampMs t);

    const SensorSpec& spec() const { return spec_; }

private:
    SensorSpec spec_;
    DetRng rng_;
    std::map<std::size_t, double> stuck_values_;  // fault index -> frozen value
};

/// Clean signal component only (no noise, no faults); used by test oracles.
double signal_value(const SignalModel& s, TimestampMs t);

}  // namespace seaflow::sim
