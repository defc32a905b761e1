#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>

namespace seaflow {

/**
 * AttributeFlag - per-attribute quality verdict.
 *
 * Total order Good < ProbablyGood < ProbablyBad < Bad < Missing drives
 * worst-of aggregation. NotEvaluated stands outside the ladder and is
 * skipped when aggregating.
 */
enum class AttributeFlag : std::uint8_t {
    Good = 0,
    ProbablyGood = 1,
    ProbablyBad = 2,
    Bad = 3,
    Missing = 4,
    NotEvaluated = 5,
};

const char* flag_name(AttributeFlag f);
std::optional<AttributeFlag> flag_from_name(const std::string& name);

/// Maximum under the flag order, ignoring NotEvaluated.
/// All-NotEvaluated (or empty) input yields NotEvaluated.
AttributeFlag worst_flag(std::span<const AttributeFlag> flags);
AttributeFlag worst_flag(std::initializer_list<AttributeFlag> flags);

/**
 * DataCategory - openness tier assigned at triage.
 *
 * Pre-triage observations default to BusinessCritical, the most restrictive
 * tier short of a legal restriction.
 */
enum class DataCategory : std::uint8_t {
    OpenAccess = 0,
    BusinessCritical = 1,
    LegallyRestricted = 2,
};

const char* category_name(DataCategory c);
/// Topic-level spelling: open_access / business_critical / legally_restricted.
const char* category_topic_segment(DataCategory c);
std::optional<DataCategory> category_from_name(const std::string& name);

constexpr DataCategory kAllCategories[] = {
    DataCategory::OpenAccess,
    DataCategory::BusinessCritical,
    DataCategory::LegallyRestricted,
};

}  // namespace seaflow
