#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "seaflow/broker/packet.hpp"
#include "seaflow/ingest/wire.hpp"
#include "seaflow/sim/channel.hpp"
#include "seaflow/sim/frame.hpp"
#include "seaflow/sim/node.hpp"
#include "seaflow/sim/signal.hpp"
#include "seaflow/util/scheduler.hpp"

namespace seaflow::sim {

struct SensingNodeConfig {
    std::string node_id;
    std::string gateway_id;
    double battery_j = 1000.0;
    EnergyCosts costs;
    AggregationPolicy policy;
    ChannelModel uac;  // node to gateway, acoustic
    std::vector<SensorSpec> sensors;
    std::vector<FaultEvent> faults;  // NodeDead windows
};

/// Where a gateway's records end up once they reach shore.
enum class GatewaySink { Publish, Dataset };

struct GatewayConfig {
    std::string node_id;
    double battery_j = 50000.0;
    EnergyCosts costs;
    ChannelModel ota;           // gateway to shore
    bool edge_adapter = false;  // wired path: no OTA transmit, no carrier cost
    GatewaySink sink = GatewaySink::Publish;
    std::size_t buffer_capacity = 4096;
    std::vector<FaultEvent> faults;  // NodeDead windows
};

struct WorldConfig {
    std::string org_id;
    ingest::SourceFormat wire_format = ingest::SourceFormat::JsonV1;
    broker::QoS publish_qos = broker::QoS::AtLeastOnce;
    std::uint64_t seed = 1;
    TimestampMs start_at = 0;
    std::vector<SensingNodeConfig> nodes;
    std::vector<GatewayConfig> gateways;
};

/// One shore-side publish produced by a gateway.
struct PublishOut {
    TimestampMs at = 0;
    std::string topic;
    std::string payload;
    broker::QoS qos = broker::QoS::AtLeastOnce;
    std::string gateway_id;
};

/// Record landed in an org-local dataset, for the poll-based ingestion path.
struct DatasetEntry {
    TimestampMs arrived_at = 0;
    std::string payload;
};

struct WorldStats {
    std::uint64_t samples = 0;
    std::uint64_t records = 0;
    std::uint64_t uac_sent = 0;
    std::uint64_t uac_lost = 0;
    std::uint64_t uac_arrived = 0;
    std::uint64_t ota_sent = 0;
    std::uint64_t ota_lost = 0;
    std::uint64_t buffer_drops = 0;
    std::uint64_t publishes = 0;
};

/**
 * World - deterministic discrete-event engine for one organization's
 * deployment: sensing nodes sample and aggregate, frames cross a lossy
 * acoustic channel to a gateway, the gateway serializes records into the
 * org wire format and moves them ashore over its carrier uplink (or a wired
 * edge path). Everything is a pure function of (config, seed).
 */
class World {
public:
    explicit World(WorldConfig cfg);

    World(const World&) = delete;
    World& operator=(const World&) = delete;

    /// Called at delivery time for every shore-side publish.
    std::function<void(const PublishOut&)> on_publish;

    void run_until(TimestampMs t);
    TimestampMs now() const { return sched_.now(); }

    const WorldConfig& config() const { return cfg_; }
    const NodeRuntime* node(const std::string& node_id) const;
    const SensorSpec* sensor(const std::string& sensor_id) const;
    const FrameTable& frames() const { return table_; }
    const WorldStats& stats() const { return stats_; }
    const std::vector<std::string>& event_log() const { return log_; }
    const std::vector<DatasetEntry>& dataset() const { return dataset_; }

    /// Carrier charges accrued per gateway, in account currency.
    double ota_cost(const std::string& gateway_id) const;
    double ota_cost_total() const;

    /// True fault behind the value sampled at (sensor, t); nullopt entry
    /// means the sample was clean. Used as classification ground truth.
    const std::map<std::pair<std::string, TimestampMs>,
                   std::optional<FaultKind>>&
    ground_truth() const {
        return truth_;
    }

private:
    struct SensorSlot {
        std::string node_id;
        SensorRuntime runtime;
    };

    NodeRuntime* find_node(const std::string& node_id);
    void log(TimestampMs at, const char* kind,
             std::initializer_list<std::pair<const char*, std::string>> kv);
    void schedule_sample(const std::string& node_id,
                         const std::string& sensor_id, TimestampMs at);
    void handle_sample(const std::string& node_id,
                       const std::string& sensor_id);
    void send_frame(const std::string& node_id, Bytes frame);
    void gateway_rx(const std::string& gateway_id, Bytes frame);
    void request_flush(const std::string& gateway_id, TimestampMs at);
    void flush(const std::string& gateway_id);
    void emit(const GatewayConfig& gw, const std::string& station,
              std::string payload, TimestampMs at);

    WorldConfig cfg_;
    VirtualScheduler sched_;
    FrameTable table_;
    std::map<std::string, NodeRuntime> nodes_;  // sensing and gateway
    std::map<std::string, SensorSlot> sensors_;
    std::map<std::string, DetRng> link_rngs_;
    std::map<std::string, const GatewayConfig*> gateway_cfg_;
    std::map<std::string, const SensingNodeConfig*> node_cfg_;
    std::map<std::string, bool> flush_pending_;
    std::map<std::string, double> ota_cost_;
    std::map<std::string, bool> dead_logged_;
    std::map<std::pair<std::string, TimestampMs>, std::optional<FaultKind>>
        truth_;
    std::vector<DatasetEntry> dataset_;
    std::vector<std::string> log_;
    WorldStats stats_;
};

}  // namespace seaflow::sim
