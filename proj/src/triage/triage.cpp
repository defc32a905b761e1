#include "seaflow/triage/triage.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace seaflow::triage {

bool MatchSpec::matches(const Observation& obs) const {
    if (org_id && *org_id != obs.org_id) return false;
    if (platform_id && *platform_id != obs.platform_id) return false;
    if (parameter && *parameter != obs.parameter) return false;
    return true;
}

Expected<TriagePolicy> policy_from_json_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        return Error{Errc::ConfigError, std::string("policy file: ") + e.what()};
    }
    if (!doc.is_object() || !doc.contains("default"))
        return Error{Errc::ConfigError, "policy file needs a default category"};

    TriagePolicy policy;
    try {
        auto def = category_from_name(doc.at("default").get<std::string>());
        if (!def)
            return Error{Errc::ConfigError,
                         "unknown category " + doc["default"].dump()};
        policy.default_category = *def;

        if (doc.contains("quarantine")) {
            policy.quarantine_flags.clear();
            for (const auto& f : doc.at("quarantine")) {
                auto flag = flag_from_name(f.get<std::string>());
                if (!flag)
                    return Error{Errc::ConfigError,
                                 "unknown quarantine flag " + f.dump()};
                policy.quarantine_flags.insert(*flag);
            }
        }
        for (const auto& r : doc.value("rules", nlohmann::json::array())) {
            TriageRule rule;
            if (r.contains("org")) rule.match.org_id = r["org"].get<std::string>();
            if (r.contains("platform"))
                rule.match.platform_id = r["platform"].get<std::string>();
            if (r.contains("parameter"))
                rule.match.parameter = r["parameter"].get<std::string>();
            auto cat = category_from_name(r.at("category").get<std::string>());
            if (!cat)
                return Error{Errc::ConfigError,
                             "unknown category " + r["category"].dump()};
            rule.category = *cat;
            policy.rules.push_back(std::move(rule));
        }
    } catch (const nlohmann::json::exception& e) {
        return Error{Errc::ConfigError, std::string("policy file: ") + e.what()};
    }
    return policy;
}

Expected<TriagePolicy> policy_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) return Error{Errc::ConfigError, "cannot open policy file " + path};
    std::ostringstream buf;
    buf << in.rdbuf();
    return policy_from_json_text(buf.str());
}

DataCategory classify(const Observation& obs, const TriagePolicy& policy) {
    for (const TriageRule& rule : policy.rules)
        if (rule.match.matches(obs)) return rule.category;
    return policy.default_category;
}

bool quarantined(const Observation& obs, const TriagePolicy& policy) {
    return policy.quarantine_flags.count(obs.qc.overall) > 0;
}

std::string route(const Observation& obs, const TriagePolicy& policy) {
    if (quarantined(obs, policy))
        return "quarantine/" + obs.org_id + "/" + obs.parameter;
    return std::string("data/") + category_topic_segment(obs.category) + "/" +
           obs.org_id + "/" + obs.platform_id + "/" + obs.parameter;
}

TriageOutcome triage_observation(Observation& obs, const TriagePolicy& policy,
                                 TimestampMs now) {
    TriageOutcome out;
    out.category = classify(obs, policy);
    obs.category = out.category;
    out.quarantined = quarantined(obs, policy);
    out.topic = route(obs, policy);

    TimestampMs at = now;
    if (!obs.lineage.empty()) at = std::max(at, obs.lineage.back().at);
    std::string detail = std::string(category_name(out.category));
    if (out.quarantined) detail += ", quarantined";
    if (auto next = append_lineage(obs, "triage", at, detail); next.ok())
        obs = std::move(*next);
    return out;
}

}  // namespace seaflow::triage
