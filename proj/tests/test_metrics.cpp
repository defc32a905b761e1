#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "seaflow/metrics/registry.hpp"
#include "seaflow/metrics/slo.hpp"
#include "seaflow/util/rng.hpp"

using namespace seaflow;
using namespace seaflow::metrics;

namespace {

// Minimal exposition-format reader used as an independent check on the
// renderer: returns name+labels -> numeric value for plain sample lines.
struct ParsedExposition {
    std::map<std::string, double> samples;  // "name{labels}" -> value
    std::map<std::string, std::string> types;
    std::vector<std::string> sample_keys_in_order;
};

ParsedExposition parse_exposition(const std::string& text) {
    ParsedExposition out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        REQUIRE(!line.empty());
        if (line.rfind("# TYPE ", 0) == 0) {
            std::istringstream ls(line.substr(7));
            std::string name, kind;
            ls >> name >> kind;
            REQUIRE((kind == "counter" || kind == "gauge" || kind == "histogram"));
            out.types[name] = kind;
            continue;
        }
        REQUIRE(line[0] != '#');
        auto space = line.rfind(' ');
        REQUIRE(space != std::string::npos);
        std::string key = line.substr(0, space);
        std::string value_str = line.substr(space + 1);
        double value = 0.0;
        if (value_str == "+Inf") value = HUGE_VAL;
        else value = std::stod(value_str);
        REQUIRE(out.samples.find(key) == out.samples.end());
        out.samples[key] = value;
        out.sample_keys_in_order.push_back(key);
    }
    return out;
}

}  // namespace

TEST_CASE("counter increments accumulate and reject negative deltas") {
    Registry reg;
    CHECK(reg.counter_inc("ingest_records_total", {{"org", "org7"}}, 3).ok());
    CHECK(reg.counter_value("ingest_records_total", {{"org", "org7"}}) == 3.0);

    auto res = reg.counter_inc("ingest_records_total", {{"org", "org7"}}, -1);
    REQUIRE(!res.ok());
    CHECK(res.code() == Errc::NegativeCounterDelta);
    // failed increment leaves the series untouched
    CHECK(reg.counter_value("ingest_records_total", {{"org", "org7"}}) == 3.0);

    CHECK(reg.counter_inc("ingest_records_total", {{"org", "org7"}}, 0).ok());
    CHECK(reg.counter_value("ingest_records_total", {{"org", "org7"}}) == 3.0);
}

TEST_CASE("gauge set overwrites") {
    Registry reg;
    reg.gauge_set("node_battery_j", {{"node", "n1"}}, 500.0);
    reg.gauge_set("node_battery_j", {{"node", "n1"}}, 450.5);
    CHECK(reg.gauge_value("node_battery_j", {{"node", "n1"}}) == 450.5);
    CHECK(reg.gauge_value("node_battery_j", {{"node", "missing"}}) == 0.0);
}

TEST_CASE("histogram observation lands in the right buckets") {
    Registry reg;
    reg.declare_histogram("delivery_latency_seconds", {1.0, 5.0, 30.0});
    reg.histogram_observe("delivery_latency_seconds", {}, 2.3);

    auto samples = reg.snapshot();
    REQUIRE(samples.size() == 1);
    const HistogramData& h = samples[0].histogram;
    REQUIRE(h.bounds == std::vector<double>{1.0, 5.0, 30.0});
    CHECK(h.cumulative == std::vector<std::uint64_t>{0, 1, 1, 1});
    CHECK(h.count == 1);
    CHECK(h.sum == 2.3);

    reg.histogram_observe("delivery_latency_seconds", {}, 0.4);
    reg.histogram_observe("delivery_latency_seconds", {}, 100.0);
    samples = reg.snapshot();
    CHECK(samples[0].histogram.cumulative == std::vector<std::uint64_t>{1, 2, 2, 3});
    CHECK(samples[0].histogram.count == 3);
}

TEST_CASE("histogram cumulative counts against a brute-force oracle") {
    DetRng rng = DetRng::for_entity(77, "metrics-hist");
    std::vector<double> bounds = {0.1, 0.5, 2.0, 10.0};
    Registry reg;
    reg.declare_histogram("h", bounds);
    std::vector<double> observed;
    for (int i = 0; i < 500; ++i) {
        double v = rng.next_double() * 12.0;
        observed.push_back(v);
        reg.histogram_observe("h", {}, v);
    }
    auto samples = reg.snapshot();
    REQUIRE(samples.size() == 1);
    const HistogramData& h = samples[0].histogram;
    double sum = 0.0;
    for (double v : observed) sum += v;
    CHECK(h.sum == doctest::Approx(sum).epsilon(1e-12));
    CHECK(h.count == observed.size());
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        auto expect = static_cast<std::uint64_t>(std::count_if(
            observed.begin(), observed.end(), [&](double v) { return v <= bounds[i]; }));
        CHECK(h.cumulative[i] == expect);
    }
    CHECK(h.cumulative.back() == observed.size());
}

TEST_CASE("exposition format") {
    Registry reg;

    SUBCASE("empty registry renders empty string") {
        CHECK(reg.render_exposition() == "");
    }

    SUBCASE("one counter renders the documented template") {
        REQUIRE(reg.counter_inc("ingest_records_total", {{"org", "org7"}}, 3).ok());
        CHECK(reg.render_exposition() ==
              "# TYPE ingest_records_total counter\n"
              "ingest_records_total{org=\"org7\"} 3\n");
    }

    SUBCASE("render twice without updates is byte-identical") {
        REQUIRE(reg.counter_inc("a_total", {}, 1).ok());
        reg.gauge_set("b_gauge", {{"x", "1"}}, 2.5);
        reg.declare_histogram("c_hist", {1.0});
        reg.histogram_observe("c_hist", {}, 0.5);
        std::string first = reg.render_exposition();
        std::string second = reg.render_exposition();
        CHECK(first == second);
        CHECK(!first.empty());
    }

    SUBCASE("ordering is lexicographic by name then labels") {
        reg.gauge_set("zz", {}, 1);
        REQUIRE(reg.counter_inc("aa_total", {{"org", "org8"}}, 1).ok());
        REQUIRE(reg.counter_inc("aa_total", {{"org", "org7"}}, 1).ok());
        auto parsed = parse_exposition(reg.render_exposition());
        REQUIRE(parsed.sample_keys_in_order.size() == 3);
        CHECK(parsed.sample_keys_in_order[0] == "aa_total{org=\"org7\"}");
        CHECK(parsed.sample_keys_in_order[1] == "aa_total{org=\"org8\"}");
        CHECK(parsed.sample_keys_in_order[2] == "zz");
    }

    SUBCASE("label values are escaped") {
        reg.gauge_set("g", {{"k", "a\"b\\c\nd"}}, 1);
        CHECK(reg.render_exposition() ==
              "# TYPE g gauge\n"
              "g{k=\"a\\\"b\\\\c\\nd\"} 1\n");
    }

    SUBCASE("histogram renders bucket, sum and count lines") {
        reg.declare_histogram("lat", {1.0, 5.0});
        reg.histogram_observe("lat", {{"org", "org7"}}, 2.0);
        reg.histogram_observe("lat", {{"org", "org7"}}, 7.0);
        auto parsed = parse_exposition(reg.render_exposition());
        CHECK(parsed.types["lat"] == "histogram");
        CHECK(parsed.samples["lat_bucket{le=\"1\",org=\"org7\"}"] == 0);
        CHECK(parsed.samples["lat_bucket{le=\"5\",org=\"org7\"}"] == 1);
        CHECK(parsed.samples["lat_bucket{le=\"+Inf\",org=\"org7\"}"] == 2);
        CHECK(parsed.samples["lat_sum{org=\"org7\"}"] == 9.0);
        CHECK(parsed.samples["lat_count{org=\"org7\"}"] == 2);
    }
}

TEST_CASE("counters stay monotone across an exposition sequence") {
    Registry reg;
    DetRng rng = DetRng::for_entity(5, "metrics-mono");
    std::map<std::string, double> last_seen;
    for (int round = 0; round < 50; ++round) {
        for (int k = 0; k < 4; ++k) {
            Labels labels = {{"org", k % 2 == 0 ? "org7" : "org8"}};
            REQUIRE(reg.counter_inc(k < 2 ? "ingest_records_total" : "ota_cost_total",
                                    labels, static_cast<double>(rng.next_below(5)))
                        .ok());
        }
        auto parsed = parse_exposition(reg.render_exposition());
        for (const auto& [key, value] : parsed.samples) {
            auto it = last_seen.find(key);
            if (it != last_seen.end()) CHECK(value >= it->second);
            last_seen[key] = value;
        }
    }
}

TEST_CASE("slo evaluation") {
    Registry reg;

    SUBCASE("no rules yields no breaches") {
        SloEvaluator ev({});
        REQUIRE(reg.counter_inc("missing_alarms_total", {}, 2).ok());
        CHECK(ev.evaluate(reg, 1000).empty());
    }

    SUBCASE("counter rate over window breaches an at-most-zero rule once") {
        SloRule rule;
        rule.id = "no-missing";
        rule.metric = "missing_alarms_total";
        rule.aggregation = SloAggregation::Rate;
        rule.bound = SloBound::AtMost;
        rule.threshold = 0.0;
        rule.window_s = 3600;
        SloEvaluator ev({rule});

        CHECK(ev.evaluate(reg, 0).empty());  // metric absent, nothing to check
        REQUIRE(reg.counter_inc("missing_alarms_total", {{"org", "org8"}}, 0).ok());
        CHECK(ev.evaluate(reg, 0).empty());  // baseline, zero rate

        REQUIRE(reg.counter_inc("missing_alarms_total", {{"org", "org8"}}, 2).ok());
        auto breaches = ev.evaluate(reg, 600 * 1000);
        REQUIRE(breaches.size() == 1);
        CHECK(breaches[0].rule_id == "no-missing");
        CHECK(breaches[0].observed == doctest::Approx(2.0 / 3600.0));
        CHECK(breaches[0].threshold == 0.0);

        // steady counter: rate decays back to zero once the window passes
        auto later = ev.evaluate(reg, 2 * 3600 * 1000);
        CHECK(later.empty());
    }

    SUBCASE("gauge below an at-least threshold breaches") {
        SloRule rule;
        rule.id = "battery-floor";
        rule.metric = "node_battery_j";
        rule.aggregation = SloAggregation::Value;
        rule.bound = SloBound::AtLeast;
        rule.threshold = 1000.0;
        SloEvaluator ev({rule});

        reg.gauge_set("node_battery_j", {{"node", "n1"}}, 500.0);
        auto breaches = ev.evaluate(reg, 0);
        REQUIRE(breaches.size() == 1);
        CHECK(breaches[0].observed == 500.0);

        reg.gauge_set("node_battery_j", {{"node", "n1"}}, 1000.0);
        CHECK(ev.evaluate(reg, 0).empty());  // bound is ≥, equality passes
    }

    SUBCASE("label matcher restricts which series a rule sees") {
        SloRule rule;
        rule.metric = "node_battery_j";
        rule.labels = {{"node", "n2"}};
        rule.aggregation = SloAggregation::Value;
        rule.bound = SloBound::AtLeast;
        rule.threshold = 1000.0;
        SloEvaluator ev({rule});
        reg.gauge_set("node_battery_j", {{"node", "n1"}}, 10.0);
        CHECK(ev.evaluate(reg, 0).empty());
        reg.gauge_set("node_battery_j", {{"node", "n2"}}, 10.0);
        auto breaches = ev.evaluate(reg, 0);
        REQUIRE(breaches.size() == 1);
        CHECK(breaches[0].rule_id == "node_battery_j");  // id defaults to metric
    }

    SUBCASE("p95 of a histogram against a sorted-sample oracle") {
        std::vector<double> bounds = {0.1, 0.5, 1.0, 5.0, 30.0};
        reg.declare_histogram("delivery_latency_seconds", bounds);
        DetRng rng = DetRng::for_entity(11, "metrics-p95");
        std::vector<double> values;
        for (int i = 0; i < 400; ++i) {
            double v = rng.next_double() * 8.0;
            values.push_back(v);
            reg.histogram_observe("delivery_latency_seconds", {}, v);
        }
        std::sort(values.begin(), values.end());
        double exact = values[static_cast<std::size_t>(0.95 * values.size()) - 1];

        SloRule rule;
        rule.metric = "delivery_latency_seconds";
        rule.aggregation = SloAggregation::P95;
        rule.bound = SloBound::AtMost;
        rule.threshold = 0.0;  // always breach so the estimate is reported
        SloEvaluator ev({rule});
        auto breaches = ev.evaluate(reg, 0);
        REQUIRE(breaches.size() == 1);
        // estimate can only be as fine as the buckets: it must land in the
        // same bucket as the exact p95
        auto bucket_of = [&](double v) {
            std::size_t i = 0;
            while (i < bounds.size() && v > bounds[i]) ++i;
            return i;
        };
        CHECK(bucket_of(breaches[0].observed) == bucket_of(exact));
    }

    SUBCASE("p95 interpolation converges with fine buckets") {
        std::vector<double> bounds;
        for (double b = 0.25; b <= 8.01; b += 0.25) bounds.push_back(b);
        reg.declare_histogram("fine", bounds);
        DetRng rng = DetRng::for_entity(12, "metrics-p95-fine");
        std::vector<double> values;
        for (int i = 0; i < 2000; ++i) {
            double v = rng.next_double() * 8.0;
            values.push_back(v);
            reg.histogram_observe("fine", {}, v);
        }
        std::sort(values.begin(), values.end());
        double exact = values[static_cast<std::size_t>(0.95 * values.size()) - 1];

        auto samples = reg.snapshot();
        REQUIRE(samples.size() == 1);
        auto est = histogram_quantile(samples[0].histogram, 0.95);
        REQUIRE(est.has_value());
        CHECK(std::abs(*est - exact) < 0.25);  // within one bucket width
    }
}
