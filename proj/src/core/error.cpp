#include "seaflow/core/error.hpp"

namespace seaflow {

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::Ok: return "Ok";
        case Errc::NotAuthorized: return "NotAuthorized";
        case Errc::UnknownPrincipal: return "UnknownPrincipal";
        case Errc::GrantExceedsRole: return "GrantExceedsRole";
        case Errc::BadSignature: return "BadSignature";
        case Errc::Expired: return "Expired";
        case Errc::InvalidTopic: return "InvalidTopic";
        case Errc::MalformedPacket: return "MalformedPacket";
        case Errc::ProtocolViolation: return "ProtocolViolation";
        case Errc::UnparseablePayload: return "UnparseablePayload";
        case Errc::SourceUnavailable: return "SourceUnavailable";
        case Errc::MappingNotFound: return "MappingNotFound";
        case Errc::IncompleteMapping: return "IncompleteMapping";
        case Errc::ConversionError: return "ConversionError";
        case Errc::TimeRegression: return "TimeRegression";
        case Errc::NodeDead: return "NodeDead";
        case Errc::NegativeCounterDelta: return "NegativeCounterDelta";
        case Errc::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace seaflow
