#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seaflow/core/flags.hpp"

namespace seaflow {

std::vector<std::string> split_topic(std::string_view s);

/// Concrete topic: non-empty, no wildcard characters.
bool valid_topic(std::string_view topic);

/// Subscription filter: '+' must occupy a whole level, '#' only as the final
/// level on its own.
bool valid_filter(std::string_view filter);

/// MQTT 3.1.1 wildcard match. '#' also matches the parent itself, so
/// "sport/#" matches "sport".
bool match_filter(std::string_view filter, std::string_view topic);

/// Org segment of a scheme topic: data/<cat>/<org>/..., or <prefix>/<org>/...
/// for ingest, quarantine and alarms. nullopt for anything else.
std::optional<std::string> topic_org(std::string_view topic);

/// Category segment of a data/ or quarantine topic. Quarantined flows keep
/// their org prefix but carry no category, so only data/ topics resolve.
std::optional<DataCategory> topic_category(std::string_view topic);

std::string data_topic(DataCategory cat, const std::string& org,
                       const std::string& platform, const std::string& parameter);
std::string quarantine_topic(const std::string& org, const std::string& parameter);
std::string ingest_topic(const std::string& org, const std::string& platform);
std::string alarm_topic(const std::string& org, const std::string& kind);

}  // namespace seaflow
