#include "seaflow/scenario/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "seaflow/core/time.hpp"

namespace seaflow::scenario {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const char* kTraceNames[] = {"push", "fetch", "edge"};

Error fail(const std::string& source, const std::string& where,
           const std::string& what) {
    return Error{Errc::ConfigError, source + ": " + where + ": " + what};
}

Expected<void> check_keys(const json& obj, const std::string& source,
                          const std::string& where,
                          std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) return fail(source, where, "unknown field " + key);
    }
    return {};
}

Expected<double> number_field(const json& obj, const std::string& source,
                              const std::string& where, const char* key,
                              double fallback, bool required = false) {
    if (!obj.contains(key)) {
        if (required) return fail(source, where, std::string(key) + " is required");
        return fallback;
    }
    const json& v = obj[key];
    if (!v.is_number()) return fail(source, where, std::string(key) + " must be a number");
    return v.get<double>();
}

Expected<std::string> string_field(const json& obj, const std::string& source,
                                   const std::string& where, const char* key,
                                   const std::string& fallback,
                                   bool required = false) {
    if (!obj.contains(key)) {
        if (required) return fail(source, where, std::string(key) + " is required");
        return fallback;
    }
    const json& v = obj[key];
    if (!v.is_string()) return fail(source, where, std::string(key) + " must be a string");
    return v.get<std::string>();
}

std::optional<sim::ChannelKind> channel_kind_from_name(const std::string& name) {
    if (name == "UAC") return sim::ChannelKind::UAC;
    if (name == "Serial") return sim::ChannelKind::Serial;
    if (name == "OTA") return sim::ChannelKind::OTA;
    return std::nullopt;
}

Expected<std::vector<sim::FaultEvent>> parse_faults(
    const json& arr, const std::string& source, const std::string& where,
    TimestampMs start_at, std::initializer_list<sim::FaultKind> allowed) {
    std::vector<sim::FaultEvent> out;
    if (!arr.is_array()) return fail(source, where, "faults must be an array");
    for (const json& f : arr) {
        if (!f.is_object()) return fail(source, where, "fault must be an object");
        if (auto res = check_keys(f, source, where,
                                  {"kind", "start_s", "end_s", "magnitude"});
            !res.ok())
            return res.error();
        auto kind_name = string_field(f, source, where, "kind", "", true);
        if (!kind_name.ok()) return kind_name.error();
        auto kind = sim::fault_kind_from_name(*kind_name);
        if (!kind) return fail(source, where, "unknown fault kind " + *kind_name);
        bool ok_kind = false;
        for (sim::FaultKind k : allowed) ok_kind = ok_kind || k == *kind;
        if (!ok_kind)
            return fail(source, where, *kind_name + " does not apply here");
        auto start_s = number_field(f, source, where, "start_s", 0, true);
        if (!start_s.ok()) return start_s.error();
        auto end_s = number_field(f, source, where, "end_s", 0, true);
        if (!end_s.ok()) return end_s.error();
        if (*end_s <= *start_s)
            return fail(source, where, "fault window must end after it starts");
        auto magnitude = number_field(f, source, where, "magnitude", 0.0);
        if (!magnitude.ok()) return magnitude.error();
        sim::FaultEvent ev;
        ev.kind = *kind;
        ev.start = start_at + static_cast<TimestampMs>(*start_s * 1000.0);
        ev.end = start_at + static_cast<TimestampMs>(*end_s * 1000.0);
        ev.magnitude = *magnitude;
        out.push_back(ev);
    }
    return out;
}

Expected<sim::ChannelModel> parse_channel(const json& obj,
                                          const std::string& source,
                                          const std::string& where,
                                          TimestampMs start_at,
                                          sim::ChannelKind default_kind) {
    if (!obj.is_object()) return fail(source, where, "channel must be an object");
    if (auto res = check_keys(obj, source, where,
                              {"kind", "bandwidth_bps", "base_latency_s",
                               "jitter_s", "frame_loss_prob", "bit_error_rate",
                               "duty", "cost_per_kb", "faults"});
        !res.ok())
        return res.error();
    sim::ChannelModel ch;
    ch.kind = default_kind;
    if (obj.contains("kind")) {
        auto name = string_field(obj, source, where, "kind", "", true);
        if (!name.ok()) return name.error();
        auto kind = channel_kind_from_name(*name);
        if (!kind) return fail(source, where, "unknown channel kind " + *name);
        ch.kind = *kind;
    }
    auto bw = number_field(obj, source, where, "bandwidth_bps", ch.bandwidth_bps);
    if (!bw.ok()) return bw.error();
    ch.bandwidth_bps = *bw;
    auto lat = number_field(obj, source, where, "base_latency_s", ch.base_latency_s);
    if (!lat.ok()) return lat.error();
    ch.base_latency_s = *lat;
    auto jit = number_field(obj, source, where, "jitter_s", ch.jitter_s);
    if (!jit.ok()) return jit.error();
    ch.jitter_s = *jit;
    auto loss = number_field(obj, source, where, "frame_loss_prob", ch.frame_loss_prob);
    if (!loss.ok()) return loss.error();
    ch.frame_loss_prob = *loss;
    auto ber = number_field(obj, source, where, "bit_error_rate", ch.bit_error_rate);
    if (!ber.ok()) return ber.error();
    ch.bit_error_rate = *ber;
    auto cost = number_field(obj, source, where, "cost_per_kb", ch.cost_per_kb);
    if (!cost.ok()) return cost.error();
    ch.cost_per_kb = *cost;

    if (obj.contains("duty")) {
        if (!obj["duty"].is_array())
            return fail(source, where, "duty must be an array");
        for (const json& w : obj["duty"]) {
            if (auto res = check_keys(w, source, where, {"start_s", "end_s"});
                !res.ok())
                return res.error();
            auto ws = number_field(w, source, where, "start_s", 0, true);
            if (!ws.ok()) return ws.error();
            auto we = number_field(w, source, where, "end_s", 0, true);
            if (!we.ok()) return we.error();
            if (*we <= *ws)
                return fail(source, where, "duty window must end after it starts");
            ch.duty.push_back({static_cast<std::int64_t>(*ws),
                               static_cast<std::int64_t>(*we)});
        }
    }
    if (obj.contains("faults")) {
        auto faults = parse_faults(obj["faults"], source, where, start_at,
                                   {sim::FaultKind::LinkDown});
        if (!faults.ok()) return faults.error();
        ch.fault_plan = std::move(*faults);
    }

    if (ch.bandwidth_bps <= 0)
        return fail(source, where, "bandwidth_bps must be positive");
    if (ch.base_latency_s < 0 || ch.jitter_s < 0)
        return fail(source, where, "latency and jitter cannot be negative");
    if (ch.frame_loss_prob < 0 || ch.frame_loss_prob > 1)
        return fail(source, where, "frame_loss_prob must lie in [0,1]");
    if (ch.bit_error_rate < 0 || ch.bit_error_rate > 1)
        return fail(source, where, "bit_error_rate must lie in [0,1]");
    if (ch.cost_per_kb < 0)
        return fail(source, where, "cost_per_kb cannot be negative");
    if (ch.kind == sim::ChannelKind::UAC && ch.bandwidth_bps > 10000)
        return fail(source, where, "acoustic bandwidth is capped at 10 kbps");
    if (ch.kind == sim::ChannelKind::Serial && ch.frame_loss_prob != 0)
        return fail(source, where, "a wired serial link cannot lose frames");
    return ch;
}

Expected<sim::EnergyCosts> parse_energy(const json& obj,
                                        const std::string& source,
                                        const std::string& where) {
    sim::EnergyCosts costs;
    if (!obj.is_object()) return fail(source, where, "energy must be an object");
    if (auto res = check_keys(obj, source, where,
                              {"sample_nj", "cpu_per_record_nj",
                               "tx_per_byte_nj", "rx_per_byte_nj"});
        !res.ok())
        return res.error();
    auto get = [&](const char* key, std::int64_t fallback)
        -> Expected<std::int64_t> {
        auto v = number_field(obj, source, where, key,
                              static_cast<double>(fallback));
        if (!v.ok()) return v.error();
        if (*v < 0) return fail(source, where, std::string(key) + " cannot be negative");
        return static_cast<std::int64_t>(*v);
    };
    auto sample = get("sample_nj", costs.sample_nj);
    if (!sample.ok()) return sample.error();
    costs.sample_nj = *sample;
    auto cpu = get("cpu_per_record_nj", costs.cpu_per_record_nj);
    if (!cpu.ok()) return cpu.error();
    costs.cpu_per_record_nj = *cpu;
    auto tx = get("tx_per_byte_nj", costs.tx_per_byte_nj);
    if (!tx.ok()) return tx.error();
    costs.tx_per_byte_nj = *tx;
    auto rx = get("rx_per_byte_nj", costs.rx_per_byte_nj);
    if (!rx.ok()) return rx.error();
    costs.rx_per_byte_nj = *rx;
    if (costs.tx_per_byte_nj <= costs.cpu_per_record_nj)
        return fail(source, where,
                    "tx_per_byte_nj must exceed cpu_per_record_nj; "
                    "transmission dominates the budget");
    return costs;
}

Expected<sim::AggregationPolicy> parse_aggregation(const json& obj,
                                                   const std::string& source,
                                                   const std::string& where) {
    sim::AggregationPolicy policy;
    if (!obj.is_object())
        return fail(source, where, "aggregation must be an object");
    if (auto res = check_keys(obj, source, where,
                              {"mode", "window_s", "event_threshold"});
        !res.ok())
        return res.error();
    auto mode = string_field(obj, source, where, "mode", "Raw");
    if (!mode.ok()) return mode.error();
    if (*mode == "Raw") {
        policy.mode = sim::AggregationMode::Raw;
    } else if (*mode == "MeanOverWindow") {
        policy.mode = sim::AggregationMode::MeanOverWindow;
    } else if (*mode == "EventOnly") {
        policy.mode = sim::AggregationMode::EventOnly;
    } else {
        return fail(source, where, "unknown aggregation mode " + *mode);
    }
    auto window = number_field(obj, source, where, "window_s", 0);
    if (!window.ok()) return window.error();
    policy.window_s = static_cast<std::int64_t>(*window);
    auto threshold = number_field(obj, source, where, "event_threshold", 0.0);
    if (!threshold.ok()) return threshold.error();
    policy.event_threshold = *threshold;
    if (policy.mode == sim::AggregationMode::MeanOverWindow && policy.window_s <= 0)
        return fail(source, where, "MeanOverWindow needs window_s > 0");
    if (policy.mode == sim::AggregationMode::EventOnly && policy.event_threshold <= 0)
        return fail(source, where, "EventOnly needs event_threshold > 0");
    return policy;
}

Expected<sim::SensorSpec> parse_sensor(const json& obj,
                                       const std::string& source,
                                       const std::string& org,
                                       TimestampMs start_at,
                                       std::int64_t cadence_s) {
    if (!obj.is_object())
        return fail(source, org, "sensor must be an object");
    auto id = string_field(obj, source, org, "sensor_id", "", true);
    if (!id.ok()) return id.error();
    const std::string where = org + "/" + *id;
    if (auto res = check_keys(obj, source, where,
                              {"sensor_id", "parameter", "unit",
                               "sampling_interval_s", "valid_min", "valid_max",
                               "signal", "faults"});
        !res.ok())
        return res.error();
    sim::SensorSpec s;
    s.sensor_id = *id;
    auto parameter = string_field(obj, source, where, "parameter", "", true);
    if (!parameter.ok()) return parameter.error();
    s.parameter = *parameter;
    auto unit = string_field(obj, source, where, "unit", "", true);
    if (!unit.ok()) return unit.error();
    s.unit = *unit;
    auto interval = number_field(obj, source, where, "sampling_interval_s",
                                 static_cast<double>(cadence_s));
    if (!interval.ok()) return interval.error();
    s.sampling_interval_s = static_cast<std::int64_t>(*interval);
    if (s.sampling_interval_s <= 0)
        return fail(source, where, "sampling_interval_s must be positive");
    if (s.sampling_interval_s > cadence_s)
        return fail(source, where,
                    "sampling_interval_s exceeds the platform cadence");
    auto vmin = number_field(obj, source, where, "valid_min", 0, true);
    if (!vmin.ok()) return vmin.error();
    auto vmax = number_field(obj, source, where, "valid_max", 0, true);
    if (!vmax.ok()) return vmax.error();
    if (!(*vmin < *vmax))
        return fail(source, where, "valid_min must lie below valid_max");
    s.valid_min = *vmin;
    s.valid_max = *vmax;
    if (obj.contains("signal")) {
        const json& sig = obj["signal"];
        if (auto res = check_keys(sig, source, where,
                                  {"base", "diurnal_amplitude", "noise_stddev"});
            !res.ok())
            return res.error();
        auto base = number_field(sig, source, where, "base", 0, true);
        if (!base.ok()) return base.error();
        s.signal.base = *base;
        auto amp = number_field(sig, source, where, "diurnal_amplitude", 0.0);
        if (!amp.ok()) return amp.error();
        s.signal.diurnal_amplitude = *amp;
        auto noise = number_field(sig, source, where, "noise_stddev", 0.0);
        if (!noise.ok()) return noise.error();
        if (*noise < 0) return fail(source, where, "noise_stddev cannot be negative");
        s.signal.noise_stddev = *noise;
    }
    if (obj.contains("faults")) {
        auto faults = parse_faults(obj["faults"], source, where, start_at,
                                   {sim::FaultKind::Spike, sim::FaultKind::Stuck,
                                    sim::FaultKind::Drift,
                                    sim::FaultKind::OutOfRange});
        if (!faults.ok()) return faults.error();
        s.fault_plan = std::move(*faults);
    }
    return s;
}

Expected<Location> parse_location(const json& obj, const std::string& source,
                                  const std::string& where) {
    if (!obj.is_object()) return fail(source, where, "location must be an object");
    if (auto res = check_keys(obj, source, where, {"lat", "lon", "depth_m"});
        !res.ok())
        return res.error();
    Location loc;
    auto lat = number_field(obj, source, where, "lat", 0, true);
    if (!lat.ok()) return lat.error();
    loc.lat = *lat;
    auto lon = number_field(obj, source, where, "lon", 0, true);
    if (!lon.ok()) return lon.error();
    loc.lon = *lon;
    auto depth = number_field(obj, source, where, "depth_m", 0.0);
    if (!depth.ok()) return depth.error();
    loc.depth_m = *depth;
    if (loc.lat < -90 || loc.lat > 90 || loc.lon < -180 || loc.lon > 180 ||
        loc.depth_m < 0)
        return fail(source, where, "location out of range");
    return loc;
}

Expected<qc::QcConfig> parse_qc(const json& obj, const std::string& source) {
    qc::QcConfig cfg;
    if (!obj.is_object()) return fail(source, "qc", "qc must be an object");
    if (auto res = check_keys(obj, source, "qc",
                              {"spike_k", "stuck_n", "window_w",
                               "gap_tolerance_factor", "currentness_max_age_s",
                               "alarm_horizon_s", "consistency"});
        !res.ok())
        return res.error();
    auto spike = number_field(obj, source, "qc", "spike_k", cfg.spike_k);
    if (!spike.ok()) return spike.error();
    cfg.spike_k = *spike;
    auto stuck = number_field(obj, source, "qc", "stuck_n", cfg.stuck_n);
    if (!stuck.ok()) return stuck.error();
    cfg.stuck_n = static_cast<int>(*stuck);
    auto window = number_field(obj, source, "qc", "window_w", cfg.window_w);
    if (!window.ok()) return window.error();
    cfg.window_w = static_cast<int>(*window);
    auto gap = number_field(obj, source, "qc", "gap_tolerance_factor",
                            cfg.gap_tolerance_factor);
    if (!gap.ok()) return gap.error();
    cfg.gap_tolerance_factor = *gap;
    auto age = number_field(obj, source, "qc", "currentness_max_age_s",
                            static_cast<double>(cfg.currentness_max_age_s));
    if (!age.ok()) return age.error();
    cfg.currentness_max_age_s = static_cast<std::int64_t>(*age);
    auto horizon = number_field(obj, source, "qc", "alarm_horizon_s",
                                static_cast<double>(cfg.alarm_horizon_s));
    if (!horizon.ok()) return horizon.error();
    cfg.alarm_horizon_s = static_cast<std::int64_t>(*horizon);
    if (obj.contains("consistency")) {
        const json& c = obj["consistency"];
        if (auto res = check_keys(c, source, "qc",
                                  {"neighbor_radius_m", "max_delta"});
            !res.ok())
            return res.error();
        auto radius = number_field(c, source, "qc", "neighbor_radius_m",
                                   cfg.consistency.neighbor_radius_m);
        if (!radius.ok()) return radius.error();
        cfg.consistency.neighbor_radius_m = *radius;
        auto delta = number_field(c, source, "qc", "max_delta",
                                  cfg.consistency.max_delta);
        if (!delta.ok()) return delta.error();
        cfg.consistency.max_delta = *delta;
    }
    if (auto res = qc::validate_qc_config(cfg); !res.ok())
        return fail(source, "qc", res.error().message);
    return cfg;
}

Expected<auth::Grant> parse_grant(const json& obj, const std::string& source,
                                  const std::string& where) {
    if (!obj.is_object()) return fail(source, where, "grant must be an object");
    if (auto res = check_keys(obj, source, where,
                              {"action", "topic_filter", "categories", "org_id"});
        !res.ok())
        return res.error();
    auto action_name = string_field(obj, source, where, "action", "", true);
    if (!action_name.ok()) return action_name.error();
    auto action = auth::action_from_name(*action_name);
    if (!action) return fail(source, where, "unknown action " + *action_name);
    auth::Grant g;
    g.action = *action;
    auto filter = string_field(obj, source, where, "topic_filter", "");
    if (!filter.ok()) return filter.error();
    g.topic_filter = *filter;
    auto org = string_field(obj, source, where, "org_id", "");
    if (!org.ok()) return org.error();
    g.org_id = *org;
    if (obj.contains("categories")) {
        if (!obj["categories"].is_array())
            return fail(source, where, "categories must be an array");
        for (const json& c : obj["categories"]) {
            auto cat = category_from_name(c.is_string() ? c.get<std::string>() : "");
            if (!cat) return fail(source, where, "unknown category");
            g.categories.push_back(*cat);
        }
    }
    return g;
}

Expected<metrics::SloRule> parse_slo(const json& obj, const std::string& source) {
    if (!obj.is_object()) return fail(source, "slos", "rule must be an object");
    auto id = string_field(obj, source, "slos", "id", "", true);
    if (!id.ok()) return id.error();
    const std::string where = "slos/" + *id;
    if (auto res = check_keys(obj, source, where,
                              {"id", "metric", "labels", "aggregation", "bound",
                               "threshold", "window_s"});
        !res.ok())
        return res.error();
    metrics::SloRule rule;
    rule.id = *id;
    auto metric = string_field(obj, source, where, "metric", "", true);
    if (!metric.ok()) return metric.error();
    rule.metric = *metric;
    auto agg = string_field(obj, source, where, "aggregation", "Value");
    if (!agg.ok()) return agg.error();
    if (*agg == "Rate") {
        rule.aggregation = metrics::SloAggregation::Rate;
    } else if (*agg == "Value") {
        rule.aggregation = metrics::SloAggregation::Value;
    } else if (*agg == "P95") {
        rule.aggregation = metrics::SloAggregation::P95;
    } else {
        return fail(source, where, "unknown aggregation " + *agg);
    }
    auto bound = string_field(obj, source, where, "bound", "AtMost");
    if (!bound.ok()) return bound.error();
    if (*bound == "AtMost") {
        rule.bound = metrics::SloBound::AtMost;
    } else if (*bound == "AtLeast") {
        rule.bound = metrics::SloBound::AtLeast;
    } else {
        return fail(source, where, "unknown bound " + *bound);
    }
    auto threshold = number_field(obj, source, where, "threshold", 0, true);
    if (!threshold.ok()) return threshold.error();
    rule.threshold = *threshold;
    auto window = number_field(obj, source, where, "window_s",
                               static_cast<double>(rule.window_s));
    if (!window.ok()) return window.error();
    rule.window_s = static_cast<std::int64_t>(*window);
    if (rule.window_s <= 0) return fail(source, where, "window_s must be positive");
    if (obj.contains("labels")) {
        if (!obj["labels"].is_object())
            return fail(source, where, "labels must be an object");
        for (const auto& [k, v] : obj["labels"].items()) {
            if (!v.is_string())
                return fail(source, where, "label values must be strings");
            rule.labels[k] = v.get<std::string>();
        }
    }
    return rule;
}

Expected<OrgScenario> parse_org(const json& obj, const std::string& source,
                                const ScenarioConfig& cfg,
                                std::set<std::string>& node_ids,
                                std::set<std::string>& sensor_ids) {
    if (!obj.is_object())
        return fail(source, "organizations", "organization must be an object");
    auto org_id = string_field(obj, source, "organizations", "org_id", "", true);
    if (!org_id.ok()) return org_id.error();
    const std::string& where = *org_id;
    if (auto res = check_keys(obj, source, where,
                              {"org_id", "ingestion_trace", "wire_format",
                               "publish_qos", "fetch_poll_interval_s",
                               "gateway", "platforms"});
        !res.ok())
        return res.error();

    OrgScenario org;
    org.org_id = *org_id;
    org.world.org_id = *org_id;
    org.world.seed = cfg.seed;
    org.world.start_at = cfg.start_at;

    auto trace = string_field(obj, source, where, "ingestion_trace", "push");
    if (!trace.ok()) return trace.error();
    auto trace_val = ingestion_trace_from_name(*trace);
    if (!trace_val) return fail(source, where, "unknown ingestion_trace " + *trace);
    org.trace = *trace_val;

    auto format = string_field(obj, source, where, "wire_format", "json-v1");
    if (!format.ok()) return format.error();
    if (*format == "json-v1") {
        org.wire_format = ingest::SourceFormat::JsonV1;
    } else if (*format == "xml-v1") {
        org.wire_format = ingest::SourceFormat::XmlV1;
    } else {
        return fail(source, where, "unknown wire_format " + *format);
    }
    org.world.wire_format = org.wire_format;

    auto qos = number_field(obj, source, where, "publish_qos", 1);
    if (!qos.ok()) return qos.error();
    if (*qos != 0 && *qos != 1 && *qos != 2)
        return fail(source, where, "publish_qos must be 0, 1 or 2");
    org.publish_qos = static_cast<broker::QoS>(static_cast<int>(*qos));
    org.world.publish_qos = org.publish_qos;

    auto poll = number_field(obj, source, where, "fetch_poll_interval_s",
                             static_cast<double>(org.fetch_poll_interval_s));
    if (!poll.ok()) return poll.error();
    org.fetch_poll_interval_s = static_cast<std::int64_t>(*poll);
    if (org.fetch_poll_interval_s <= 0)
        return fail(source, where, "fetch_poll_interval_s must be positive");

    if (!obj.contains("gateway"))
        return fail(source, where, "gateway is required");
    const json& gw_obj = obj["gateway"];
    if (auto res = check_keys(gw_obj, source, where + "/gateway",
                              {"gateway_id", "battery_j", "energy", "ota",
                               "buffer_capacity", "faults"});
        !res.ok())
        return res.error();
    sim::GatewayConfig gw;
    auto gw_id = string_field(gw_obj, source, where + "/gateway", "gateway_id",
                              "", true);
    if (!gw_id.ok()) return gw_id.error();
    gw.node_id = *gw_id;
    if (!node_ids.insert(gw.node_id).second)
        return fail(source, where, "duplicate node id " + gw.node_id);
    auto gw_batt = number_field(gw_obj, source, where + "/gateway", "battery_j",
                                gw.battery_j);
    if (!gw_batt.ok()) return gw_batt.error();
    if (*gw_batt <= 0)
        return fail(source, where + "/gateway", "battery_j must be positive");
    gw.battery_j = *gw_batt;
    if (gw_obj.contains("energy")) {
        auto costs = parse_energy(gw_obj["energy"], source, where + "/gateway");
        if (!costs.ok()) return costs.error();
        gw.costs = *costs;
    }
    auto buffer = number_field(gw_obj, source, where + "/gateway",
                               "buffer_capacity",
                               static_cast<double>(gw.buffer_capacity));
    if (!buffer.ok()) return buffer.error();
    if (*buffer < 1)
        return fail(source, where + "/gateway", "buffer_capacity must be positive");
    gw.buffer_capacity = static_cast<std::size_t>(*buffer);
    if (gw_obj.contains("ota")) {
        auto ota = parse_channel(gw_obj["ota"], source, where + "/gateway/ota",
                                 cfg.start_at, sim::ChannelKind::OTA);
        if (!ota.ok()) return ota.error();
        gw.ota = *ota;
    } else {
        gw.ota.kind = sim::ChannelKind::OTA;
        gw.ota.bandwidth_bps = 100000;
        gw.ota.base_latency_s = 0.05;
        gw.ota.frame_loss_prob = 0.0;
    }
    if (gw_obj.contains("faults")) {
        auto faults = parse_faults(gw_obj["faults"], source, where + "/gateway",
                                   cfg.start_at, {sim::FaultKind::NodeDead});
        if (!faults.ok()) return faults.error();
        gw.faults = std::move(*faults);
    }
    gw.edge_adapter = org.trace == IngestionTrace::Edge;
    gw.sink = org.trace == IngestionTrace::Fetcher ? sim::GatewaySink::Dataset
                                                   : sim::GatewaySink::Publish;
    org.world.gateways.push_back(std::move(gw));

    if (!obj.contains("platforms") || !obj["platforms"].is_array() ||
        obj["platforms"].empty())
        return fail(source, where, "platforms must be a non-empty array");
    for (const json& p : obj["platforms"]) {
        if (!p.is_object())
            return fail(source, where, "platform must be an object");
        auto pid = string_field(p, source, where, "platform_id", "", true);
        if (!pid.ok()) return pid.error();
        const std::string pwhere = where + "/" + *pid;
        if (auto res = check_keys(p, source, pwhere,
                                  {"platform_id", "cadence_s", "battery_j",
                                   "location", "aggregation", "energy", "link",
                                   "sensors", "faults"});
            !res.ok())
            return res.error();
        sim::SensingNodeConfig node;
        node.node_id = *pid;
        node.gateway_id = org.world.gateways.front().node_id;
        if (!node_ids.insert(node.node_id).second)
            return fail(source, where, "duplicate node id " + node.node_id);
        auto cadence = number_field(p, source, pwhere, "cadence_s", 0, true);
        if (!cadence.ok()) return cadence.error();
        const std::int64_t cadence_s = static_cast<std::int64_t>(*cadence);
        if (cadence_s <= 0)
            return fail(source, pwhere, "cadence_s must be positive");
        org.max_cadence_s = std::max(org.max_cadence_s, cadence_s);
        auto batt = number_field(p, source, pwhere, "battery_j", node.battery_j);
        if (!batt.ok()) return batt.error();
        if (*batt <= 0) return fail(source, pwhere, "battery_j must be positive");
        node.battery_j = *batt;
        if (p.contains("location")) {
            auto loc = parse_location(p["location"], source, pwhere);
            if (!loc.ok()) return loc.error();
            org.platform_locations[node.node_id] = *loc;
        }
        if (p.contains("aggregation")) {
            auto policy = parse_aggregation(p["aggregation"], source, pwhere);
            if (!policy.ok()) return policy.error();
            node.policy = *policy;
        }
        if (p.contains("energy")) {
            auto costs = parse_energy(p["energy"], source, pwhere);
            if (!costs.ok()) return costs.error();
            node.costs = *costs;
        }
        if (p.contains("link")) {
            auto link = parse_channel(p["link"], source, pwhere + "/link",
                                      cfg.start_at, sim::ChannelKind::UAC);
            if (!link.ok()) return link.error();
            node.uac = *link;
        }
        if (p.contains("faults")) {
            auto faults = parse_faults(p["faults"], source, pwhere, cfg.start_at,
                                       {sim::FaultKind::NodeDead});
            if (!faults.ok()) return faults.error();
            node.faults = std::move(*faults);
        }
        if (!p.contains("sensors") || !p["sensors"].is_array() ||
            p["sensors"].empty())
            return fail(source, pwhere, "sensors must be a non-empty array");
        for (const json& s : p["sensors"]) {
            auto sensor = parse_sensor(s, source, pwhere, cfg.start_at, cadence_s);
            if (!sensor.ok()) return sensor.error();
            if (!sensor_ids.insert(sensor->sensor_id).second)
                return fail(source, pwhere,
                            "duplicate sensor id " + sensor->sensor_id);
            node.sensors.push_back(std::move(*sensor));
        }
        org.world.nodes.push_back(std::move(node));
    }
    return org;
}

template <typename T>
json labels_to_json(const T& labels) {
    json j = json::object();
    for (const auto& [k, v] : labels) j[k] = v;
    return j;
}

}  // namespace

const char* ingestion_trace_name(IngestionTrace t) {
    return kTraceNames[static_cast<int>(t)];
}

std::optional<IngestionTrace> ingestion_trace_from_name(const std::string& name) {
    if (name == "push") return IngestionTrace::Pusher;
    if (name == "fetch") return IngestionTrace::Fetcher;
    if (name == "edge") return IngestionTrace::Edge;
    return std::nullopt;
}

Expected<ScenarioConfig> scenario_from_json_text(const std::string& text,
                                                 const std::string& source) {
    json root = json::parse(text, nullptr, false);
    if (root.is_discarded() || !root.is_object())
        return fail(source, "document", "not a JSON object");
    if (auto res = check_keys(root, source, "document",
                              {"name", "seed", "duration_s", "start_at", "qc",
                               "triage", "journal", "principals", "slos",
                               "organizations"});
        !res.ok())
        return res.error();

    ScenarioConfig cfg;
    auto name = string_field(root, source, "document", "name", "");
    if (!name.ok()) return name.error();
    cfg.name = *name;
    auto seed = number_field(root, source, "document", "seed", 1);
    if (!seed.ok()) return seed.error();
    cfg.seed = static_cast<std::uint64_t>(*seed);
    auto duration = number_field(root, source, "document", "duration_s", 0, true);
    if (!duration.ok()) return duration.error();
    cfg.duration_s = static_cast<std::int64_t>(*duration);
    if (cfg.duration_s <= 0)
        return fail(source, "document", "duration_s must be positive");

    if (root.contains("start_at")) {
        const json& at = root["start_at"];
        if (at.is_number_integer()) {
            cfg.start_at = at.get<TimestampMs>();
        } else if (at.is_string()) {
            auto parsed = parse_iso8601(at.get<std::string>());
            if (!parsed)
                return fail(source, "document", "start_at is not a UTC instant");
            cfg.start_at = *parsed;
        } else {
            return fail(source, "document",
                        "start_at must be epoch milliseconds or ISO 8601");
        }
    }

    if (root.contains("qc")) {
        auto qc = parse_qc(root["qc"], source);
        if (!qc.ok()) return qc.error();
        cfg.qc = *qc;
    }
    if (root.contains("triage")) {
        auto policy = triage::policy_from_json_text(root["triage"].dump());
        if (!policy.ok())
            return fail(source, "triage", policy.error().message);
        cfg.triage = *policy;
    }
    auto journal = string_field(root, source, "document", "journal", "");
    if (!journal.ok()) return journal.error();
    cfg.journal_path = *journal;

    if (root.contains("principals")) {
        if (!root["principals"].is_array())
            return fail(source, "principals", "must be an array");
        for (const json& p : root["principals"]) {
            if (!p.is_object())
                return fail(source, "principals", "entry must be an object");
            auto pid = string_field(p, source, "principals", "principal_id", "",
                                    true);
            if (!pid.ok()) return pid.error();
            const std::string where = "principals/" + *pid;
            if (auto res = check_keys(p, source, where,
                                      {"principal_id", "org_id", "roles",
                                       "grants"});
                !res.ok())
                return res.error();
            PrincipalConfig pc;
            pc.principal.principal_id = *pid;
            auto org = string_field(p, source, where, "org_id", "", true);
            if (!org.ok()) return org.error();
            pc.principal.org_id = *org;
            if (!p.contains("roles") || !p["roles"].is_array() ||
                p["roles"].empty())
                return fail(source, where, "roles must be a non-empty array");
            for (const json& r : p["roles"]) {
                auto role =
                    auth::role_from_name(r.is_string() ? r.get<std::string>() : "");
                if (!role) return fail(source, where, "unknown role");
                pc.principal.roles.insert(*role);
            }
            if (p.contains("grants")) {
                if (!p["grants"].is_array())
                    return fail(source, where, "grants must be an array");
                for (const json& g : p["grants"]) {
                    auto grant = parse_grant(g, source, where);
                    if (!grant.ok()) return grant.error();
                    pc.grants.push_back(std::move(*grant));
                }
            }
            cfg.principals.push_back(std::move(pc));
        }
    }

    if (root.contains("slos")) {
        if (!root["slos"].is_array())
            return fail(source, "slos", "must be an array");
        for (const json& rule : root["slos"]) {
            auto parsed = parse_slo(rule, source);
            if (!parsed.ok()) return parsed.error();
            cfg.slos.push_back(std::move(*parsed));
        }
    }

    std::set<std::string> org_ids;
    std::set<std::string> node_ids;
    std::set<std::string> sensor_ids;
    if (root.contains("organizations")) {
        if (!root["organizations"].is_array())
            return fail(source, "organizations", "must be an array");
        for (const json& o : root["organizations"]) {
            auto org = parse_org(o, source, cfg, node_ids, sensor_ids);
            if (!org.ok()) return org.error();
            if (!org_ids.insert(org->org_id).second)
                return fail(source, "organizations",
                            "duplicate org_id " + org->org_id);
            cfg.orgs.push_back(std::move(*org));
        }
    }
    return cfg;
}

Expected<ScenarioConfig> load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        return Error{Errc::ConfigError, path + ": document: cannot open file"};
    std::ostringstream buf;
    buf << in.rdbuf();
    return scenario_from_json_text(buf.str(), path);
}

std::string report_text(const RunReport& r) {
    std::ostringstream out;
    out << "scenario " << (r.name.empty() ? "(unnamed)" : r.name) << " seed "
        << r.seed << " duration " << r.duration_s << "s\n";
    for (const OrgReport& org : r.orgs) {
        const OrgCounts& c = org.counts;
        out << org.org_id << ": samples " << c.samples << ", ingested "
            << c.records_ingested << ", stored " << c.observations_stored
            << ", missing " << c.missing_synthesized << ", quarantined "
            << c.quarantined << ", frames " << c.frames_sent << "/"
            << c.frames_lost << " lost, uplink " << c.uplink_sent << "/"
            << c.uplink_lost << " lost, ota cost " << org.ota_cost;
        if (!c.alarms.empty()) {
            out << ", alarms";
            for (const auto& [kind, n] : c.alarms) out << " " << kind << "=" << n;
        }
        out << "\n";
    }
    if (!r.session_alarms.empty()) {
        out << "sessions:";
        for (const auto& [kind, n] : r.session_alarms)
            out << " " << kind << "=" << n;
        out << "\n";
    }
    out << "slo breaches: " << r.slo_breaches.size() << "\n";
    return out.str();
}

std::string report_json(const RunReport& r) {
    ordered_json j;
    j["name"] = r.name;
    j["seed"] = r.seed;
    j["duration_s"] = r.duration_s;
    j["start_at"] = r.start_at;
    j["orgs"] = ordered_json::array();
    for (const OrgReport& org : r.orgs) {
        ordered_json o;
        o["org_id"] = org.org_id;
        const OrgCounts& c = org.counts;
        o["samples"] = c.samples;
        o["frames_sent"] = c.frames_sent;
        o["frames_lost"] = c.frames_lost;
        o["uplink_sent"] = c.uplink_sent;
        o["uplink_lost"] = c.uplink_lost;
        o["buffer_drops"] = c.buffer_drops;
        o["records_ingested"] = c.records_ingested;
        o["rejects"] = c.rejects;
        o["transform_errors"] = c.transform_errors;
        o["dedup_drops"] = c.dedup_drops;
        o["observations_stored"] = c.observations_stored;
        o["missing_synthesized"] = c.missing_synthesized;
        o["quarantined"] = c.quarantined;
        o["alarms"] = labels_to_json(c.alarms);
        o["ota_cost"] = org.ota_cost;
        o["nodes"] = ordered_json::array();
        for (const NodeEnergyReport& n : org.nodes) {
            ordered_json nj;
            nj["node_id"] = n.node_id;
            nj["battery_start_nj"] = n.battery_start_nj;
            nj["battery_end_nj"] = n.battery_end_nj;
            nj["sample_nj"] = n.sample_nj;
            nj["cpu_nj"] = n.cpu_nj;
            nj["tx_nj"] = n.tx_nj;
            nj["rx_nj"] = n.rx_nj;
            nj["tx_bytes"] = n.tx_bytes;
            nj["rx_bytes"] = n.rx_bytes;
            o["nodes"].push_back(std::move(nj));
        }
        j["orgs"].push_back(std::move(o));
    }
    j["session_alarms"] = labels_to_json(r.session_alarms);
    j["slo_breaches"] = ordered_json::array();
    for (const SloBreachReport& b : r.slo_breaches) {
        ordered_json bj;
        bj["rule_id"] = b.rule_id;
        bj["metric"] = b.metric;
        bj["labels"] = labels_to_json(b.labels);
        bj["observed"] = b.observed;
        bj["threshold"] = b.threshold;
        bj["at"] = b.at;
        j["slo_breaches"].push_back(std::move(bj));
    }
    j["metrics_text"] = r.metrics_text;
    j["event_log_path"] = r.event_log_path;
    return j.dump(2) + "\n";
}

Expected<RunReport> report_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        return Error{Errc::ConfigError, "report: not a JSON object"};
    try {
        RunReport r;
        r.name = j.value("name", "");
        r.seed = j.value("seed", std::uint64_t{0});
        r.duration_s = j.value("duration_s", std::int64_t{0});
        r.start_at = j.value("start_at", TimestampMs{0});
        for (const json& o : j.value("orgs", json::array())) {
            OrgReport org;
            org.org_id = o.value("org_id", "");
            OrgCounts& c = org.counts;
            c.samples = o.value("samples", std::uint64_t{0});
            c.frames_sent = o.value("frames_sent", std::uint64_t{0});
            c.frames_lost = o.value("frames_lost", std::uint64_t{0});
            c.uplink_sent = o.value("uplink_sent", std::uint64_t{0});
            c.uplink_lost = o.value("uplink_lost", std::uint64_t{0});
            c.buffer_drops = o.value("buffer_drops", std::uint64_t{0});
            c.records_ingested = o.value("records_ingested", std::uint64_t{0});
            c.rejects = o.value("rejects", std::uint64_t{0});
            c.transform_errors = o.value("transform_errors", std::uint64_t{0});
            c.dedup_drops = o.value("dedup_drops", std::uint64_t{0});
            c.observations_stored = o.value("observations_stored", std::uint64_t{0});
            c.missing_synthesized = o.value("missing_synthesized", std::uint64_t{0});
            c.quarantined = o.value("quarantined", std::uint64_t{0});
            for (const auto& [k, v] : o.value("alarms", json::object()).items())
                c.alarms[k] = v.get<std::uint64_t>();
            org.ota_cost = o.value("ota_cost", 0.0);
            for (const json& n : o.value("nodes", json::array())) {
                NodeEnergyReport ne;
                ne.node_id = n.value("node_id", "");
                ne.battery_start_nj = n.value("battery_start_nj", std::int64_t{0});
                ne.battery_end_nj = n.value("battery_end_nj", std::int64_t{0});
                ne.sample_nj = n.value("sample_nj", std::int64_t{0});
                ne.cpu_nj = n.value("cpu_nj", std::int64_t{0});
                ne.tx_nj = n.value("tx_nj", std::int64_t{0});
                ne.rx_nj = n.value("rx_nj", std::int64_t{0});
                ne.tx_bytes = n.value("tx_bytes", std::uint64_t{0});
                ne.rx_bytes = n.value("rx_bytes", std::uint64_t{0});
                org.nodes.push_back(std::move(ne));
            }
            r.orgs.push_back(std::move(org));
        }
        for (const auto& [k, v] : j.value("session_alarms", json::object()).items())
            r.session_alarms[k] = v.get<std::uint64_t>();
        for (const json& b : j.value("slo_breaches", json::array())) {
            SloBreachReport br;
            br.rule_id = b.value("rule_id", "");
            br.metric = b.value("metric", "");
            for (const auto& [k, v] : b.value("labels", json::object()).items())
                br.labels[k] = v.get<std::string>();
            br.observed = b.value("observed", 0.0);
            br.threshold = b.value("threshold", 0.0);
            br.at = b.value("at", TimestampMs{0});
            r.slo_breaches.push_back(std::move(br));
        }
        r.metrics_text = j.value("metrics_text", "");
        r.event_log_path = j.value("event_log_path", "");
        return r;
    } catch (const json::exception& e) {
        return Error{Errc::ConfigError, std::string("report: ") + e.what()};
    }
}

Expected<void> verify_report(const RunReport& r) {
    for (const OrgReport& org : r.orgs) {
        const OrgCounts& c = org.counts;
        const std::uint64_t accounted =
            c.observations_stored + c.transform_errors + c.dedup_drops;
        if (accounted != c.records_ingested)
            return Error{Errc::ConfigError,
                         org.org_id + ": " + std::to_string(accounted) +
                             " records accounted for but " +
                             std::to_string(c.records_ingested) + " ingested"};
        for (const NodeEnergyReport& n : org.nodes) {
            if (n.battery_start_nj - n.battery_end_nj != n.spent_nj())
                return Error{Errc::ConfigError,
                             n.node_id + ": energy ledger does not balance"};
        }
    }
    return {};
}

}  // namespace seaflow::scenario
