#include "seaflow/sim/model.hpp"

#include <cmath>

namespace seaflow::sim {

const char* fault_kind_name(FaultKind k) {
    switch (k) {
        case FaultKind::Spike: return "Spike";
        case FaultKind::Stuck: return "Stuck";
        case FaultKind::Drift: return "Drift";
        case FaultKind::OutOfRange: return "OutOfRange";
        case FaultKind::NodeDead: return "NodeDead";
        case FaultKind::LinkDown: return "LinkDown";
    }
    return "?";
}

std::optional<FaultKind> fault_kind_from_name(const std::string& name) {
    if (name == "Spike") return FaultKind::Spike;
    if (name == "Stuck") return FaultKind::Stuck;
    if (name == "Drift") return FaultKind::Drift;
    if (name == "OutOfRange") return FaultKind::OutOfRange;
    if (name == "NodeDead") return FaultKind::NodeDead;
    if (name == "LinkDown") return FaultKind::LinkDown;
    return std::nullopt;
}

const char* channel_kind_name(ChannelKind k) {
    switch (k) {
        case ChannelKind::UAC: return "UAC";
        case ChannelKind::Serial: return "Serial";
        case ChannelKind::OTA: return "OTA";
    }
    return "?";
}

std::int64_t joules_to_nj(double j) {
    return static_cast<std::int64_t>(std::llround(j * 1e9));
}

double nj_to_joules(std::int64_t nj) { return static_cast<double>(nj) * 1e-9; }

}  // namespace seaflow::sim
