#include <doctest.h>

#include <algorithm>
#include <vector>

#include "seaflow/core/json_codec.hpp"
#include "seaflow/core/observation.hpp"
#include "seaflow/core/time.hpp"
#include "seaflow/util/bytes.hpp"
#include "seaflow/util/rng.hpp"

using namespace seaflow;

namespace {

Observation legal_observation() {
    Observation obs;
    obs.observation_id = "org7/p1/s1@1704067200000";
    obs.org_id = "org7";
    obs.platform_id = "p1";
    obs.sensor_id = "s1";
    obs.parameter = "temperature";
    obs.unit = "Cel";
    obs.value = 9.8;
    obs.measured_at = 1704067200000;
    obs.ingested_at = 1704067201000;
    obs.location = {60.4, 5.3, 12.0};
    obs.qc.completeness = AttributeFlag::Good;
    obs.category = DataCategory::OpenAccess;
    obs.lineage = {{"transform", 1704067201000, ""}};
    return obs;
}

bool has_error(const std::vector<ValidationError>& errs, const std::string& field) {
    return std::any_of(errs.begin(), errs.end(),
                       [&](const ValidationError& e) { return e.field == field; });
}

// Independent calendar oracle: walk whole years and months from 1970.
std::int64_t epoch_days_by_enumeration(int year, int month, int day) {
    auto leap = [](int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; };
    const int md[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    std::int64_t days = 0;
    for (int y = 1970; y < year; ++y) days += leap(y) ? 366 : 365;
    for (int m = 1; m < month; ++m) days += md[m - 1] + (m == 2 && leap(year) ? 1 : 0);
    return days + day - 1;
}

}  // namespace

TEST_CASE("validate_observation flags bound violations") {
    Observation obs = legal_observation();
    obs.location.lat = 91.0;
    auto errs = validate_observation(obs);
    REQUIRE(errs.size() == 1);
    CHECK(errs[0].field == "location.lat");
}

TEST_CASE("validate_observation accepts a fully legal record") {
    CHECK(validate_observation(legal_observation()).empty());
}

TEST_CASE("validate_observation rejects measured_at after ingested_at") {
    Observation obs = legal_observation();
    obs.measured_at = obs.ingested_at + 1;
    CHECK(has_error(validate_observation(obs), "measured_at"));
}

TEST_CASE("validate_observation ties absent value to Missing completeness") {
    Observation obs = legal_observation();
    obs.value.reset();
    CHECK(has_error(validate_observation(obs), "qc.completeness"));
    obs.qc.completeness = AttributeFlag::Missing;
    CHECK(validate_observation(obs).empty());

    Observation present = legal_observation();
    present.qc.completeness = AttributeFlag::Missing;
    CHECK(has_error(validate_observation(present), "qc.completeness"));
}

TEST_CASE("validate_observation rejects lineage time regressions") {
    Observation obs = legal_observation();
    obs.lineage.push_back({"qc", obs.lineage.back().at - 1, ""});
    CHECK(has_error(validate_observation(obs), "lineage"));
}

TEST_CASE("worst_flag picks the maximum of the ladder") {
    using F = AttributeFlag;
    CHECK(worst_flag({F::Good, F::Good, F::Good, F::Good}) == F::Good);
    CHECK(worst_flag({F::Good, F::Bad, F::Good, F::Good}) == F::Bad);
    CHECK(worst_flag({F::NotEvaluated, F::ProbablyBad}) == F::ProbablyBad);
    CHECK(worst_flag({F::NotEvaluated, F::NotEvaluated}) == F::NotEvaluated);
}

TEST_CASE("worst_flag is idempotent, commutative, and associative") {
    using F = AttributeFlag;
    const F all[] = {F::Good, F::ProbablyGood, F::ProbablyBad, F::Bad, F::Missing,
                     F::NotEvaluated};
    for (F a : all) {
        CHECK(worst_flag({a, a}) == worst_flag({a}));
        for (F b : all) {
            CHECK(worst_flag({a, b}) == worst_flag({b, a}));
            for (F c : all) {
                CHECK(worst_flag({worst_flag({a, b}), c}) ==
                      worst_flag({a, worst_flag({b, c})}));
            }
        }
    }
}

TEST_CASE("append_lineage appends exactly one step") {
    Observation obs = legal_observation();
    obs.lineage.clear();

    auto r1 = append_lineage(obs, "transform", 1000);
    REQUIRE(r1.ok());
    CHECK(r1.value().lineage.size() == 1);

    auto r2 = append_lineage(r1.value(), "qc", 1000);  // equal timestamps allowed
    REQUIRE(r2.ok());
    CHECK(r2.value().lineage.size() == 2);

    auto r3 = append_lineage(r2.value(), "qc", 999);
    REQUIRE(!r3.ok());
    CHECK(r3.error().code == Errc::TimeRegression);
}

TEST_CASE("iso8601 epoch conversion matches calendar enumeration") {
    const std::int64_t days = epoch_days_by_enumeration(2024, 1, 1);
    CHECK(days * 86400000 == 1704067200000);

    auto parsed = parse_iso8601("2024-01-01T00:00:00Z");
    REQUIRE(parsed.has_value());
    CHECK(*parsed == 1704067200000);

    CHECK(parse_iso8601("2024-02-29T12:30:45.250Z") ==
          (epoch_days_by_enumeration(2024, 2, 29) * 86400000 + 12 * kMsPerHour +
           30 * kMsPerMinute + 45 * kMsPerSecond + 250));

    CHECK(!parse_iso8601("2023-02-29T00:00:00Z").has_value());
    CHECK(!parse_iso8601("2024-01-01 00:00:00Z").has_value());
    CHECK(!parse_iso8601("2024-01-01T00:00:00+01:00").has_value());
}

TEST_CASE("iso8601 format/parse round-trips random timestamps") {
    DetRng rng(42);
    for (int i = 0; i < 2000; ++i) {
        const auto t = static_cast<TimestampMs>(rng.next_below(4102444800000ull));  // < 2100
        CHECK(parse_iso8601(format_iso8601(t)) == t);
    }
}

TEST_CASE("canonical json round-trips observations") {
    DetRng rng(7);
    const char* params[] = {"temperature", "salinity", "oxygen", "bathymetry"};
    for (int i = 0; i < 500; ++i) {
        Observation obs = legal_observation();
        obs.sensor_id = "s" + std::to_string(rng.next_below(50));
        obs.parameter = params[rng.next_below(4)];
        obs.measured_at = static_cast<TimestampMs>(rng.next_below(4102444800000ull));
        obs.ingested_at = obs.measured_at + static_cast<TimestampMs>(rng.next_below(600000));
        obs.location.lat = rng.next_double() * 180.0 - 90.0;
        obs.location.lon = rng.next_double() * 360.0 - 180.0;
        obs.location.depth_m = rng.next_double() * 4000.0;
        if (rng.chance(0.2)) {
            obs.value.reset();
            obs.qc.completeness = AttributeFlag::Missing;
        } else {
            obs.value = rng.next_gaussian() * 5.0 + 10.0;
        }
        obs.qc.accuracy = static_cast<AttributeFlag>(rng.next_below(6));
        obs.qc.finalize();
        obs.category = static_cast<DataCategory>(rng.next_below(3));
        for (std::uint64_t k = 0; k < rng.next_below(4); ++k) {
            obs.lineage.push_back(
                {"stage" + std::to_string(k), obs.lineage.back().at + 5, "d"});
        }

        auto back = observation_from_line(observation_to_line(obs));
        REQUIRE(back.ok());
        CHECK(back.value() == obs);
    }
}

TEST_CASE("observation json carries schema_version and canonical keys") {
    auto j = observation_to_json(legal_observation());
    CHECK(j["schema_version"] == "1");
    CHECK(j.begin().key() == "schema_version");
    CHECK(j["qc"]["overall"] == "NotEvaluated");
    CHECK(j["category"] == "OpenAccess");
}

TEST_CASE("varint and zigzag round-trip") {
    DetRng rng(11);
    Bytes buf;
    std::vector<std::int64_t> values;
    for (int i = 0; i < 200; ++i) {
        std::int64_t v = static_cast<std::int64_t>(rng.next_u64());
        if (i % 3 == 0) v = static_cast<std::int64_t>(rng.next_below(128));
        values.push_back(v);
        put_varint(buf, zigzag_encode(v));
    }
    size_t pos = 0;
    for (std::int64_t expected : values) {
        auto got = get_varint(buf, pos);
        REQUIRE(got.has_value());
        CHECK(zigzag_decode(*got) == expected);
    }
    CHECK(pos == buf.size());
}

TEST_CASE("base64 and hex round-trip") {
    DetRng rng(13);
    for (int i = 0; i < 100; ++i) {
        std::string s;
        const auto n = rng.next_below(64);
        for (std::uint64_t k = 0; k < n; ++k)
            s.push_back(static_cast<char>(rng.next_below(256)));
        CHECK(base64_decode(base64_encode(s)) == s);
        CHECK(from_hex(to_hex(s)) == Bytes(s.begin(), s.end()));
    }
    CHECK(base64_encode("seaflow") == "c2VhZmxvdw==");
}

TEST_CASE("per-entity rng substreams are independent of sibling entities") {
    DetRng a1 = DetRng::for_entity(99, "node-a");
    DetRng a2 = DetRng::for_entity(99, "node-a");
    DetRng b = DetRng::for_entity(99, "node-b");
    const auto va = a1.next_u64();
    CHECK(va == a2.next_u64());
    CHECK(va != b.next_u64());
}
