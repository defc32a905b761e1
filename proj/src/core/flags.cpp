#include "seaflow/core/flags.hpp"

namespace seaflow {

const char* flag_name(AttributeFlag f) {
    switch (f) {
        case AttributeFlag::Good: return "Good";
        case AttributeFlag::ProbablyGood: return "ProbablyGood";
        case AttributeFlag::ProbablyBad: return "ProbablyBad";
        case AttributeFlag::Bad: return "Bad";
        case AttributeFlag::Missing: return "Missing";
        case AttributeFlag::NotEvaluated: return "NotEvaluated";
    }
    return "NotEvaluated";
}

std::optional<AttributeFlag> flag_from_name(const std::string& name) {
    for (auto f : {AttributeFlag::Good, AttributeFlag::ProbablyGood,
                   AttributeFlag::ProbablyBad, AttributeFlag::Bad,
                   AttributeFlag::Missing, AttributeFlag::NotEvaluated}) {
        if (name == flag_name(f)) return f;
    }
    return std::nullopt;
}

AttributeFlag worst_flag(std::span<const AttributeFlag> flags) {
    AttributeFlag worst = AttributeFlag::NotEvaluated;
    bool any = false;
    for (AttributeFlag f : flags) {
        if (f == AttributeFlag::NotEvaluated) continue;
        if (!any || static_cast<int>(f) > static_cast<int>(worst)) worst = f;
        any = true;
    }
    return any ? worst : AttributeFlag::NotEvaluated;
}

AttributeFlag worst_flag(std::initializer_list<AttributeFlag> flags) {
    return worst_flag(std::span<const AttributeFlag>(flags.begin(), flags.size()));
}

const char* category_name(DataCategory c) {
    switch (c) {
        case DataCategory::OpenAccess: return "OpenAccess";
        case DataCategory::BusinessCritical: return "BusinessCritical";
        case DataCategory::LegallyRestricted: return "LegallyRestricted";
    }
    return "BusinessCritical";
}

const char* category_topic_segment(DataCategory c) {
    switch (c) {
        case DataCategory::OpenAccess: return "open_access";
        case DataCategory::BusinessCritical: return "business_critical";
        case DataCategory::LegallyRestricted: return "legally_restricted";
    }
    return "business_critical";
}

std::optional<DataCategory> category_from_name(const std::string& name) {
    for (auto c : kAllCategories) {
        if (name == category_name(c) || name == category_topic_segment(c)) return c;
    }
    return std::nullopt;
}

}  // namespace seaflow
