#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "seaflow/core/observation.hpp"

namespace seaflow::triage {

/// Absent fields match anything; present fields must match exactly.
struct MatchSpec {
    std::optional<std::string> org_id;
    std::optional<std::string> platform_id;
    std::optional<std::string> parameter;

    bool matches(const Observation& obs) const;
};

struct TriageRule {
    MatchSpec match;
    DataCategory category = DataCategory::BusinessCritical;
};

/**
 * TriagePolicy - ordered classification rules, first match wins, with a
 * mandatory fallback category and the set of overall flags that divert a
 * record to quarantine instead of its consumer topic.
 */
struct TriagePolicy {
    std::vector<TriageRule> rules;
    DataCategory default_category = DataCategory::BusinessCritical;
    std::set<AttributeFlag> quarantine_flags{AttributeFlag::Bad};
};

Expected<TriagePolicy> policy_from_json_text(const std::string& text);
Expected<TriagePolicy> policy_from_json_file(const std::string& path);

/// Category of the first matching rule, else the policy default.
DataCategory classify(const Observation& obs, const TriagePolicy& policy);

/**
 * Topic the observation is published under: category-scoped
 * data/<category>/<org>/<platform>/<parameter>, or
 * quarantine/<org>/<parameter> when its overall flag is quarantined.
 * Assumes obs.category was already assigned.
 */
std::string route(const Observation& obs, const TriagePolicy& policy);

bool quarantined(const Observation& obs, const TriagePolicy& policy);

struct TriageOutcome {
    DataCategory category = DataCategory::BusinessCritical;
    std::string topic;
    bool quarantined = false;
};

/// Classifies, stamps the category and a triage lineage step, and routes.
TriageOutcome triage_observation(Observation& obs, const TriagePolicy& policy,
                                 TimestampMs now);

}  // namespace seaflow::triage
