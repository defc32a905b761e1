#include "seaflow/sim/signal.hpp"

#include <cmath>

namespace seaflow::sim {

namespace {
constexpr double kTau = 6.283185307179586;
constexpr std::int64_t kDayMs = 86'400'000;
}  // namespace

double signal_value(const SignalModel& s, TimestampMs t) {
    const double phase = static_cast<double>(t % kDayMs) / static_cast<double>(kDayMs);
    return s.base + s.diurnal_amplitude * std::sin(kTau * phase);
}

RawReading SensorRuntime::sample(TimestampMs t) {
    RawReading r;
    r.sensor_id = spec_.sensor_id;
    r.measured_at = t;
    double v = signal_value(spec_.signal, t);
    if (spec_.signal.noise_stddev > 0.0)
        v += rng_.next_gaussian() * spec_.signal.noise_stddev;

    for (std::size_t i = 0; i < spec_.fault_plan.size(); ++i) {
        const FaultEvent& f = spec_.fault_plan[i];
        if (!f.active_at(t)) continue;
        switch (f.kind) {
            case FaultKind::Spike:
                v += f.magnitude;
                r.true_fault = FaultKind::Spike;
                break;
            case FaultKind::Stuck: {
                auto [it, inserted] = stuck_values_.try_emplace(i, v);
                v = it->second;
                (void)inserted;
                r.true_fault = FaultKind::Stuck;
                break;
            }
            case FaultKind::Drift: {
                // ramps linearly from 0 at start to magnitude at end
                const double span = static_cast<double>(f.end - f.start);
                const double frac =
                    span > 0 ? static_cast<double>(t - f.start) / span : 1.0;
                v += f.magnitude * frac;
                r.true_fault = FaultKind::Drift;
                break;
            }
            case FaultKind::OutOfRange:
                v = spec_.valid_max + std::abs(f.magnitude);
                r.true_fault = FaultKind::OutOfRange;
                break;
            case FaultKind::NodeDead:
            case FaultKind::LinkDown:
                break;  // node and link faults do not touch values
        }
    }
    r.value = v;
    return r;
}

}  // namespace seaflow::sim
