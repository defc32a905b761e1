#include <doctest.h>

#include <cstdio>
#include <random>

#include "seaflow/triage/triage.hpp"

using namespace seaflow;
using namespace seaflow::triage;

namespace {

Observation obs_of(const std::string& org, const std::string& platform,
                   const std::string& parameter,
                   AttributeFlag overall = AttributeFlag::Good) {
    Observation o;
    o.org_id = org;
    o.platform_id = platform;
    o.sensor_id = "s1";
    o.parameter = parameter;
    o.unit = "degC";
    o.value = 10.0;
    o.measured_at = 1704067200000;
    o.ingested_at = 1704067205000;
    o.observation_id = make_observation_id(org, platform, "s1", o.measured_at);
    o.qc.accuracy = overall;
    o.qc.completeness = AttributeFlag::Good;
    o.qc.consistency = AttributeFlag::NotEvaluated;
    o.qc.currentness = AttributeFlag::Good;
    o.qc.finalize();
    if (overall == AttributeFlag::Missing) {
        o.value.reset();
        o.qc = {};
        o.qc.completeness = AttributeFlag::Missing;
        o.qc.finalize();
    }
    o.lineage.push_back({"transform", o.ingested_at, "test"});
    return o;
}

TriagePolicy sample_policy() {
    TriagePolicy p;
    p.rules.push_back({{std::nullopt, std::nullopt, "bathymetry"},
                       DataCategory::LegallyRestricted});
    p.rules.push_back({{"org7", std::nullopt, std::nullopt},
                       DataCategory::OpenAccess});
    p.default_category = DataCategory::BusinessCritical;
    return p;
}

}  // namespace

TEST_CASE("classification takes the first matching rule") {
    TriagePolicy policy = sample_policy();

    SUBCASE("a parameter rule catches restricted data from any org") {
        CHECK(classify(obs_of("org7", "p1", "bathymetry"), policy) ==
              DataCategory::LegallyRestricted);
        CHECK(classify(obs_of("org8", "p9", "bathymetry"), policy) ==
              DataCategory::LegallyRestricted);
    }

    SUBCASE("later rules apply only when earlier ones pass") {
        // bathymetry from org7 matches both rules; the restricted one is first
        CHECK(classify(obs_of("org7", "p1", "bathymetry"), policy) ==
              DataCategory::LegallyRestricted);
        CHECK(classify(obs_of("org7", "p1", "temperature"), policy) ==
              DataCategory::OpenAccess);
    }

    SUBCASE("no match falls back to the default") {
        CHECK(classify(obs_of("org8", "p1", "temperature"), policy) ==
              DataCategory::BusinessCritical);
        TriagePolicy open;
        open.default_category = DataCategory::OpenAccess;
        CHECK(classify(obs_of("org8", "p1", "temperature"), open) ==
              DataCategory::OpenAccess);
    }

    SUBCASE("all present fields of a match spec must agree") {
        TriagePolicy narrow;
        narrow.rules.push_back(
            {{"org7", "st-1", "temperature"}, DataCategory::OpenAccess});
        narrow.default_category = DataCategory::BusinessCritical;
        CHECK(classify(obs_of("org7", "st-1", "temperature"), narrow) ==
              DataCategory::OpenAccess);
        CHECK(classify(obs_of("org7", "st-2", "temperature"), narrow) ==
              DataCategory::BusinessCritical);
        CHECK(classify(obs_of("org8", "st-1", "temperature"), narrow) ==
              DataCategory::BusinessCritical);
    }
}

TEST_CASE("routing scopes topics by category and diverts bad data") {
    TriagePolicy policy = sample_policy();

    SUBCASE("good data lands on its category topic") {
        Observation o = obs_of("org7", "p1", "temperature");
        o.category = DataCategory::OpenAccess;
        CHECK(route(o, policy) == "data/open_access/org7/p1/temperature");

        o.category = DataCategory::LegallyRestricted;
        CHECK(route(o, policy) == "data/legally_restricted/org7/p1/temperature");
    }

    SUBCASE("an overall Bad observation goes to quarantine") {
        Observation o = obs_of("org7", "p1", "temperature", AttributeFlag::Bad);
        o.category = DataCategory::OpenAccess;
        CHECK(quarantined(o, policy));
        CHECK(route(o, policy) == "quarantine/org7/temperature");
    }

    SUBCASE("missing records are not quarantined by default") {
        Observation o =
            obs_of("org7", "p1", "temperature", AttributeFlag::Missing);
        o.category = DataCategory::OpenAccess;
        CHECK_FALSE(quarantined(o, policy));
        CHECK(route(o, policy) == "data/open_access/org7/p1/temperature");
    }

    SUBCASE("the quarantine set is a policy choice") {
        TriagePolicy strict = policy;
        strict.quarantine_flags = {AttributeFlag::Bad, AttributeFlag::ProbablyBad};
        Observation o =
            obs_of("org7", "p1", "temperature", AttributeFlag::ProbablyBad);
        o.category = DataCategory::OpenAccess;
        CHECK(route(o, strict) == "quarantine/org7/temperature");
        CHECK(route(o, policy) == "data/open_access/org7/p1/temperature");
    }
}

TEST_CASE("triage stamps category and lineage and yields one topic") {
    TriagePolicy policy = sample_policy();

    SUBCASE("the outcome mirrors what was stamped") {
        Observation o = obs_of("org7", "p1", "temperature");
        TriageOutcome out = triage_observation(o, policy, o.ingested_at + 500);
        CHECK(out.category == DataCategory::OpenAccess);
        CHECK(o.category == DataCategory::OpenAccess);
        CHECK_FALSE(out.quarantined);
        CHECK(out.topic == "data/open_access/org7/p1/temperature");
        REQUIRE(o.lineage.size() == 2);
        CHECK(o.lineage.back().stage == "triage");
        CHECK(o.lineage.back().detail == "OpenAccess");
    }

    SUBCASE("quarantined outcomes say so") {
        Observation o = obs_of("org7", "p1", "temperature", AttributeFlag::Bad);
        TriageOutcome out = triage_observation(o, policy, o.ingested_at + 500);
        CHECK(out.quarantined);
        CHECK(out.topic == "quarantine/org7/temperature");
        CHECK(o.lineage.back().detail == "OpenAccess, quarantined");
    }

    SUBCASE("restricted data never routes to a broader data topic") {
        std::mt19937 gen(99);
        const char* orgs[] = {"org7", "org8"};
        const char* platforms[] = {"p1", "st-1"};
        const char* parameters[] = {"temperature", "bathymetry", "salinity"};
        const AttributeFlag flags[] = {
            AttributeFlag::Good, AttributeFlag::ProbablyGood,
            AttributeFlag::ProbablyBad, AttributeFlag::Bad,
            AttributeFlag::Missing};
        for (int i = 0; i < 500; ++i) {
            Observation o = obs_of(orgs[gen() % 2], platforms[gen() % 2],
                                   parameters[gen() % 3], flags[gen() % 5]);
            TriageOutcome out = triage_observation(o, policy, o.ingested_at + 1);
            // exactly one destination, and restricted stays restricted
            CHECK(!out.topic.empty());
            if (out.category == DataCategory::LegallyRestricted) {
                CHECK(out.topic.find("data/open_access/") == std::string::npos);
                CHECK(out.topic.find("data/business_critical/") ==
                      std::string::npos);
            }
            if (out.quarantined)
                CHECK(out.topic.rfind("quarantine/", 0) == 0);
            else
                CHECK(out.topic.rfind("data/", 0) == 0);
        }
    }
}

TEST_CASE("triage policies load from json") {
    const std::string text = R"({
      "default": "business_critical",
      "quarantine": ["Bad", "ProbablyBad"],
      "rules": [
        {"parameter": "bathymetry", "category": "legally_restricted"},
        {"org": "org7", "platform": "st-1", "category": "open_access"}
      ]
    })";

    SUBCASE("a valid policy round-trips") {
        auto p = policy_from_json_text(text);
        REQUIRE(p.ok());
        CHECK(p->default_category == DataCategory::BusinessCritical);
        CHECK(p->quarantine_flags ==
              std::set<AttributeFlag>{AttributeFlag::Bad,
                                      AttributeFlag::ProbablyBad});
        REQUIRE(p->rules.size() == 2);
        CHECK(p->rules[0].match.parameter == "bathymetry");
        CHECK_FALSE(p->rules[0].match.org_id.has_value());
        CHECK(p->rules[1].match.org_id == "org7");
        CHECK(p->rules[1].match.platform_id == "st-1");
        CHECK(classify(obs_of("org5", "p", "bathymetry"), *p) ==
              DataCategory::LegallyRestricted);
    }

    SUBCASE("the same text loads from disk") {
        const char* path = "triage_policy_test.json";
        {
            std::FILE* f = std::fopen(path, "w");
            REQUIRE(f != nullptr);
            std::fwrite(text.data(), 1, text.size(), f);
            std::fclose(f);
        }
        auto p = policy_from_json_file(path);
        std::remove(path);
        REQUIRE(p.ok());
        CHECK(p->rules.size() == 2);
    }

    SUBCASE("defective policies are configuration errors") {
        auto bad = policy_from_json_text("{");
        REQUIRE_FALSE(bad.ok());
        CHECK(bad.error().code == Errc::ConfigError);

        bad = policy_from_json_text(R"({"rules":[]})");
        REQUIRE_FALSE(bad.ok());
        CHECK(bad.error().message.find("default") != std::string::npos);

        bad = policy_from_json_text(R"({"default":"secret"})");
        REQUIRE_FALSE(bad.ok());
        CHECK(bad.error().message.find("unknown category") != std::string::npos);

        bad = policy_from_json_text(
            R"({"default":"open_access","quarantine":["Terrible"]})");
        REQUIRE_FALSE(bad.ok());
        CHECK(bad.error().message.find("unknown quarantine flag") !=
              std::string::npos);

        bad = policy_from_json_text(
            R"({"default":"open_access","rules":[{"org":"o"}]})");
        REQUIRE_FALSE(bad.ok());

        auto missing = policy_from_json_file("no_such_policy.json");
        REQUIRE_FALSE(missing.ok());
        CHECK(missing.error().code == Errc::ConfigError);
    }
}
