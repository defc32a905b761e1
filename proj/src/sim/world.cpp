#include "seaflow/sim/world.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

#include "seaflow/broker/topic.hpp"

namespace seaflow::sim {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string dec3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

/// End of the latest NodeDead window covering t, if any.
std::optional<TimestampMs> dead_until(const std::vector<FaultEvent>& plan,
                                      TimestampMs t) {
    std::optional<TimestampMs> until;
    for (const FaultEvent& f : plan) {
        if (f.kind == FaultKind::NodeDead && f.active_at(t))
            until = std::max(until.value_or(f.end), f.end);
    }
    return until;
}

}  // namespace

World::World(WorldConfig cfg) : cfg_(std::move(cfg)), sched_(cfg_.start_at) {
    for (const GatewayConfig& gw : cfg_.gateways) {
        if (!nodes_
                 .try_emplace(gw.node_id, gw.node_id, NodeRole::Gateway,
                              gw.battery_j, gw.costs, AggregationPolicy{},
                              gw.buffer_capacity)
                 .second)
            throw ConfigException{"world", "gateways",
                                  "duplicate node id " + gw.node_id};
        nodes_.at(gw.node_id).fault_plan = gw.faults;
        gateway_cfg_[gw.node_id] = &gw;
        link_rngs_.emplace("ota:" + gw.node_id,
                           DetRng::for_entity(cfg_.seed, "ota:" + gw.node_id));
        flush_pending_[gw.node_id] = false;
        ota_cost_[gw.node_id] = 0.0;
    }
    for (const SensingNodeConfig& n : cfg_.nodes) {
        if (!gateway_cfg_.count(n.gateway_id))
            throw ConfigException{"world", "nodes",
                                  n.node_id + " names unknown gateway " +
                                      n.gateway_id};
        if (!nodes_
                 .try_emplace(n.node_id, n.node_id, NodeRole::Sensing,
                              n.battery_j, n.costs, n.policy)
                 .second)
            throw ConfigException{"world", "nodes",
                                  "duplicate node id " + n.node_id};
        nodes_.at(n.node_id).fault_plan = n.faults;
        node_cfg_[n.node_id] = &n;
        link_rngs_.emplace("uac:" + n.node_id,
                           DetRng::for_entity(cfg_.seed, "uac:" + n.node_id));
        for (const SensorSpec& s : n.sensors) {
            table_.add(s.sensor_id);
            auto [it, fresh] = sensors_.try_emplace(
                s.sensor_id,
                SensorSlot{n.node_id,
                           SensorRuntime(s, DetRng::for_entity(
                                                cfg_.seed,
                                                "sensor:" + s.sensor_id))});
            if (!fresh)
                throw ConfigException{"world", "sensors",
                                      "duplicate sensor id " + s.sensor_id};
            if (s.sampling_interval_s <= 0)
                throw ConfigException{"world", "sensors",
                                      s.sensor_id + " needs interval > 0"};
            schedule_sample(n.node_id, s.sensor_id,
                            cfg_.start_at + s.sampling_interval_s * 1000);
        }
    }
}

void World::run_until(TimestampMs t) { sched_.run_until(t); }

const NodeRuntime* World::node(const std::string& node_id) const {
    auto it = nodes_.find(node_id);
    return it == nodes_.end() ? nullptr : &it->second;
}

const SensorSpec* World::sensor(const std::string& sensor_id) const {
    auto it = sensors_.find(sensor_id);
    return it == sensors_.end() ? nullptr : &it->second.runtime.spec();
}

double World::ota_cost(const std::string& gateway_id) const {
    auto it = ota_cost_.find(gateway_id);
    return it == ota_cost_.end() ? 0.0 : it->second;
}

double World::ota_cost_total() const {
    double sum = 0.0;
    for (const auto& [id, c] : ota_cost_) sum += c;
    return sum;
}

NodeRuntime* World::find_node(const std::string& node_id) {
    auto it = nodes_.find(node_id);
    return it == nodes_.end() ? nullptr : &it->second;
}

void World::log(TimestampMs at, const char* kind,
                std::initializer_list<std::pair<const char*, std::string>> kv) {
    ordered_json j;
    j["at"] = at;
    j["kind"] = kind;
    for (const auto& [k, v] : kv) j[k] = v;
    log_.push_back(j.dump());
}

void World::schedule_sample(const std::string& node_id,
                            const std::string& sensor_id, TimestampMs at) {
    sched_.at(at, [this, node_id, sensor_id] {
        handle_sample(node_id, sensor_id);
    });
}

void World::handle_sample(const std::string& node_id,
                          const std::string& sensor_id) {
    const TimestampMs t = sched_.now();
    NodeRuntime& nr = nodes_.at(node_id);
    SensorSlot& slot = sensors_.at(sensor_id);
    const SensorSpec& spec = slot.runtime.spec();
    const TimestampMs interval_ms = spec.sampling_interval_s * 1000;

    if (nr.battery_dead()) {
        if (!dead_logged_[node_id]) {
            dead_logged_[node_id] = true;
            log(t, "node_dead", {{"node", node_id}});
        }
        return;  // battery never recovers; stop sampling this sensor
    }
    if (!nr.alive_at(t)) {
        log(t, "sample_skipped",
            {{"node", node_id}, {"sensor", sensor_id}, {"reason", "node_down"}});
        schedule_sample(node_id, sensor_id, t + interval_ms);
        return;
    }
    if (nr.debit(nr.costs().sample_nj, EnergyKind::Sample) <
        nr.costs().sample_nj) {
        dead_logged_[node_id] = true;
        log(t, "node_dead", {{"node", node_id}});
        return;
    }

    RawReading reading = slot.runtime.sample(t);
    truth_[{sensor_id, t}] = reading.true_fault;
    ++stats_.samples;
    log(t, "sample",
        {{"node", node_id},
         {"sensor", sensor_id},
         {"value", dec3(reading.value)}});

    for (const OutRecord& rec :
         nr.process(reading, spec.sampling_interval_s)) {
        ++stats_.records;
        auto frame = encode_frame(rec, table_);
        if (!frame) {
            log(t, "encode_error",
                {{"sensor", rec.sensor_id}, {"error", frame.error().message}});
            continue;
        }
        send_frame(node_id, std::move(*frame));
    }
    schedule_sample(node_id, sensor_id, t + interval_ms);
}

void World::send_frame(const std::string& node_id, Bytes frame) {
    const TimestampMs t = sched_.now();
    NodeRuntime& nr = nodes_.at(node_id);
    const SensingNodeConfig& ncfg = *node_cfg_.at(node_id);
    DetRng& rng = link_rngs_.at("uac:" + node_id);

    auto res = transmit(nr, ncfg.uac, frame.size(), t, rng);
    if (!res) {
        log(t, "uac_drop", {{"node", node_id}, {"reason", "battery"}});
        return;
    }
    switch (res->status) {
        case TransmitResult::Status::Deferred:
            log(t, "uac_deferred",
                {{"node", node_id},
                 {"retry_at", std::to_string(res->retry_at)}});
            sched_.at(res->retry_at, [this, node_id, f = std::move(frame)] {
                send_frame(node_id, f);
            });
            return;
        case TransmitResult::Status::Lost:
            ++stats_.uac_sent;
            ++stats_.uac_lost;
            log(t, "uac_lost", {{"node", node_id}});
            return;  // acoustic frames are fire-and-forget
        case TransmitResult::Status::Delivered:
            ++stats_.uac_sent;
            log(t, "uac_tx",
                {{"node", node_id},
                 {"bytes", std::to_string(frame.size())},
                 {"arrival_at", std::to_string(res->arrival_at)}});
            sched_.at(res->arrival_at,
                      [this, gw = ncfg.gateway_id, f = std::move(frame)] {
                          gateway_rx(gw, f);
                      });
            return;
    }
}

void World::gateway_rx(const std::string& gateway_id, Bytes frame) {
    const TimestampMs t = sched_.now();
    NodeRuntime& nr = nodes_.at(gateway_id);
    if (!nr.alive_at(t)) {
        log(t, "gw_rx_drop", {{"node", gateway_id}, {"reason", "node_down"}});
        return;
    }
    const std::int64_t want =
        nr.costs().rx_per_byte_nj * static_cast<std::int64_t>(frame.size());
    if (nr.debit(want, EnergyKind::Rx) < want) {
        if (!dead_logged_[gateway_id]) {
            dead_logged_[gateway_id] = true;
            log(t, "node_dead", {{"node", gateway_id}});
        }
        return;
    }
    nr.rx_bytes += frame.size();

    std::size_t pos = 0;
    auto rec = decode_frame(frame, pos, table_);
    if (!rec) {
        log(t, "gw_rx_malformed",
            {{"node", gateway_id}, {"error", rec.error().message}});
        return;
    }
    ++stats_.uac_arrived;
    if (nr.buffer.size() >= nr.buffer_capacity()) {
        ++stats_.buffer_drops;
        log(t, "buffer_drop",
            {{"node", gateway_id}, {"sensor", rec->sensor_id}});
        return;
    }
    log(t, "gw_rx", {{"node", gateway_id}, {"sensor", rec->sensor_id}});
    nr.buffer.push_back(std::move(*rec));
    request_flush(gateway_id, t);
}

void World::request_flush(const std::string& gateway_id, TimestampMs at) {
    if (flush_pending_[gateway_id]) return;
    flush_pending_[gateway_id] = true;
    sched_.at(at, [this, gateway_id] { flush(gateway_id); });
}

void World::flush(const std::string& gateway_id) {
    flush_pending_[gateway_id] = false;
    const TimestampMs t = sched_.now();
    NodeRuntime& nr = nodes_.at(gateway_id);
    const GatewayConfig& gcfg = *gateway_cfg_.at(gateway_id);

    if (nr.battery_dead()) {
        log(t, "flush_blocked", {{"node", gateway_id}, {"reason", "battery"}});
        return;  // records stay buffered; battery will not recover
    }
    if (!nr.alive_at(t)) {
        auto resume = dead_until(nr.fault_plan, t);
        log(t, "flush_blocked",
            {{"node", gateway_id}, {"reason", "node_down"}});
        if (resume) request_flush(gateway_id, *resume);
        return;
    }

    DetRng& rng = link_rngs_.at("ota:" + gateway_id);
    while (!nr.buffer.empty()) {
        const OutRecord& rec = nr.buffer.front();
        auto sit = sensors_.find(rec.sensor_id);
        if (sit == sensors_.end()) {
            log(t, "flush_unknown_sensor", {{"sensor", rec.sensor_id}});
            nr.buffer.pop_front();
            continue;
        }
        const SensorSpec& spec = sit->second.runtime.spec();
        const std::string& station = sit->second.node_id;
        ingest::WireReading wr;
        wr.sensor_id = rec.sensor_id;
        wr.parameter = spec.parameter;
        wr.unit = spec.unit;
        wr.measured_at = rec.measured_at;
        wr.value = rec.value;
        wr.min_value = rec.min_value;
        wr.max_value = rec.max_value;
        wr.count = rec.count;
        std::string payload =
            ingest::serialize_batch(cfg_.wire_format, station, {wr});

        if (gcfg.edge_adapter) {
            nr.buffer.pop_front();
            log(t, "edge_tx", {{"node", gateway_id}, {"station", station}});
            emit(gcfg, station, std::move(payload), t);
            continue;
        }

        auto res = transmit(nr, gcfg.ota, payload.size(), t, rng);
        if (!res) {
            if (!dead_logged_[gateway_id]) {
                dead_logged_[gateway_id] = true;
                log(t, "node_dead", {{"node", gateway_id}});
            }
            return;  // remaining records retained
        }
        if (res->status == TransmitResult::Status::Deferred) {
            log(t, "ota_deferred",
                {{"node", gateway_id},
                 {"retry_at", std::to_string(res->retry_at)}});
            request_flush(gateway_id, res->retry_at);
            return;
        }
        ota_cost_[gateway_id] +=
            gcfg.ota.cost_per_kb * static_cast<double>(payload.size()) / 1024.0;
        ++stats_.ota_sent;
        if (res->status == TransmitResult::Status::Lost) {
            ++stats_.ota_lost;
            log(t, "ota_lost", {{"node", gateway_id}});
            nr.buffer.pop_front();
            continue;
        }
        log(t, "ota_tx",
            {{"node", gateway_id},
             {"bytes", std::to_string(payload.size())},
             {"arrival_at", std::to_string(res->arrival_at)}});
        nr.buffer.pop_front();
        emit(gcfg, station, std::move(payload), res->arrival_at);
    }
}

void World::emit(const GatewayConfig& gw, const std::string& station,
                 std::string payload, TimestampMs at) {
    sched_.at(at, [this, &gw, station, p = std::move(payload)] {
        const TimestampMs now = sched_.now();
        if (gw.sink == GatewaySink::Dataset) {
            dataset_.push_back({now, p});
            log(now, "dataset_append",
                {{"node", gw.node_id}, {"station", station}});
            return;
        }
        ++stats_.publishes;
        log(now, "publish", {{"node", gw.node_id}, {"station", station}});
        if (on_publish) {
            PublishOut out;
            out.at = now;
            out.topic = ingest_topic(cfg_.org_id, station);
            out.payload = p;
            out.qos = cfg_.publish_qos;
            out.gateway_id = gw.node_id;
            on_publish(out);
        }
    });
}

}  // namespace seaflow::sim
