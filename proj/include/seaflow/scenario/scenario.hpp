#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "seaflow/auth/identity.hpp"
#include "seaflow/broker/broker.hpp"
#include "seaflow/broker/client.hpp"
#include "seaflow/ingest/ingest.hpp"
#include "seaflow/metrics/slo.hpp"
#include "seaflow/qc/qc.hpp"
#include "seaflow/sim/world.hpp"
#include "seaflow/store/data_space.hpp"
#include "seaflow/transform/transform.hpp"
#include "seaflow/triage/triage.hpp"

namespace seaflow::scenario {

enum class IngestionTrace { Pusher, Fetcher, Edge };

const char* ingestion_trace_name(IngestionTrace t);
std::optional<IngestionTrace> ingestion_trace_from_name(const std::string& name);

/**
 * OrgScenario - one organization's deployment plus the trace its records
 * take ashore. The world config is fully materialized at load time: fault
 * windows absolute, per-platform sensing nodes, one gateway.
 */
struct OrgScenario {
    std::string org_id;
    IngestionTrace trace = IngestionTrace::Pusher;
    ingest::SourceFormat wire_format = ingest::SourceFormat::JsonV1;
    broker::QoS publish_qos = broker::QoS::AtLeastOnce;
    std::int64_t fetch_poll_interval_s = 60;
    std::int64_t max_cadence_s = 0;  // slowest sensor, for sweep math
    sim::WorldConfig world;
    std::map<std::string, Location> platform_locations;
};

struct PrincipalConfig {
    auth::Principal principal;
    std::vector<auth::Grant> grants;
};

struct ScenarioConfig {
    std::string name;
    std::uint64_t seed = 1;
    std::int64_t duration_s = 0;
    TimestampMs start_at = 1704067200000;  // 2024-01-01T00:00:00Z
    std::vector<OrgScenario> orgs;
    qc::QcConfig qc;
    triage::TriagePolicy triage;
    std::vector<PrincipalConfig> principals;
    std::vector<metrics::SloRule> slos;
    std::string journal_path;
};

Expected<ScenarioConfig> scenario_from_json_text(const std::string& text,
                                                 const std::string& source);
Expected<ScenarioConfig> load_scenario(const std::string& path);

/// Per-node battery movement in exact nanojoules; conservation means
/// start - end == sample + cpu + tx + rx.
struct NodeEnergyReport {
    std::string node_id;
    std::int64_t battery_start_nj = 0;
    std::int64_t battery_end_nj = 0;
    std::int64_t sample_nj = 0;
    std::int64_t cpu_nj = 0;
    std::int64_t tx_nj = 0;
    std::int64_t rx_nj = 0;
    std::uint64_t tx_bytes = 0;
    std::uint64_t rx_bytes = 0;

    bool operator==(const NodeEnergyReport&) const = default;
    std::int64_t spent_nj() const {
        return sample_nj + cpu_nj + tx_nj + rx_nj;
    }
};

struct OrgCounts {
    std::uint64_t samples = 0;
    std::uint64_t frames_sent = 0;  // acoustic hop
    std::uint64_t frames_lost = 0;
    std::uint64_t uplink_sent = 0;  // carrier hop
    std::uint64_t uplink_lost = 0;
    std::uint64_t buffer_drops = 0;
    std::uint64_t records_ingested = 0;
    std::uint64_t rejects = 0;
    std::uint64_t transform_errors = 0;
    std::uint64_t dedup_drops = 0;
    std::uint64_t observations_stored = 0;
    std::uint64_t missing_synthesized = 0;
    std::uint64_t quarantined = 0;
    std::map<std::string, std::uint64_t> alarms;  // by kind name

    bool operator==(const OrgCounts&) const = default;
};

struct OrgReport {
    std::string org_id;
    OrgCounts counts;
    std::vector<NodeEnergyReport> nodes;
    double ota_cost = 0.0;

    bool operator==(const OrgReport&) const = default;
};

struct SloBreachReport {
    std::string rule_id;
    std::string metric;
    metrics::Labels labels;
    double observed = 0.0;
    double threshold = 0.0;
    TimestampMs at = 0;

    bool operator==(const SloBreachReport&) const = default;
};

struct RunReport {
    std::string name;
    std::uint64_t seed = 0;
    std::int64_t duration_s = 0;
    TimestampMs start_at = 0;
    std::vector<OrgReport> orgs;
    std::map<std::string, std::uint64_t> session_alarms;  // broker-level
    std::vector<SloBreachReport> slo_breaches;
    std::string metrics_text;
    std::string event_log_path;

    bool operator==(const RunReport&) const = default;
};

std::string report_text(const RunReport& r);
std::string report_json(const RunReport& r);
Expected<RunReport> report_from_json(const std::string& text);

/// Every ledger must balance and every record be accounted for:
/// stored + transform_errors + dedup_drops == records_ingested per org,
/// battery_start - battery_end == ledger total per node.
Expected<void> verify_report(const RunReport& r);

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> duration_s;
    std::string event_log_path;  // empty: keep the log in memory only
    std::string journal_path;    // overrides the scenario's store journal
};

/**
 * Runner - wires one scenario end to end: per-org world and trace adapter,
 * ingestion broker, transform, QC, triage, core broker, data space, metrics
 * and alarms, all on the virtual clock. Deterministic for a given
 * (config, seed). Construct, optionally attach extra observers to the core
 * broker, then run().
 */
class Runner {
public:
    static Expected<std::unique_ptr<Runner>> create(ScenarioConfig cfg,
                                                    const RunOverrides& ov = {});
    ~Runner();

    Runner(const Runner&) = delete;
    Runner& operator=(const Runner&) = delete;

    void run();

    RunReport report() const;

    broker::Broker& ingestion_broker() { return *ingestion_; }
    broker::Broker& core_broker() { return *core_; }
    store::DataSpace& data_space() { return *space_; }
    metrics::Registry& registry() { return *registry_; }
    const auth::PrincipalStore& principals() const { return principals_; }
    const std::string& secret() const { return secret_; }
    sim::World* world(const std::string& org_id);
    TimestampMs now() const { return now_; }
    const ScenarioConfig& config() const { return cfg_; }
    const std::vector<std::string>& event_log() const { return event_log_; }

    /// Verified context for a configured principal holding all its grants.
    Expected<auth::AuthContext> context_for(const std::string& principal_id);

private:
    struct OrgRuntime;

    explicit Runner(ScenarioConfig cfg, const RunOverrides& ov);
    Expected<void> init();
    void step_to(TimestampMs t);
    void sweep(TimestampMs t);
    void handle_ingest_delivery(const broker::Delivery& d);
    void handle_store_delivery(const broker::Delivery& d);
    void pipeline_observation(OrgRuntime& rt, Observation obs);
    void emit_alarm(OrgRuntime& rt, const qc::Alarm& alarm);
    void check_batteries(TimestampMs t);
    OrgRuntime* org_for(const std::string& org_id);

    ScenarioConfig cfg_;
    RunOverrides overrides_;
    std::string secret_;
    TimestampMs now_ = 0;
    TimestampMs end_at_ = 0;
    bool ran_ = false;

    auth::PrincipalStore principals_;
    std::unique_ptr<metrics::Registry> registry_;
    std::unique_ptr<broker::Broker> ingestion_;
    std::unique_ptr<broker::Broker> core_;
    std::unique_ptr<store::DataSpace> space_;
    std::unique_ptr<metrics::SloEvaluator> slo_;

    std::vector<std::unique_ptr<OrgRuntime>> org_rt_;
    std::map<std::string, std::uint64_t> session_alarms_;
    std::vector<SloBreachReport> breaches_;
    std::set<std::string> active_breaches_;
    std::vector<std::string> event_log_;

    broker::ConnId svc_ingest_pub_ = 0;
    broker::ConnId svc_pipeline_sub_ = 0;
    broker::ConnId svc_core_pub_ = 0;
    broker::ConnId svc_store_sub_ = 0;
    std::unique_ptr<broker::Client> pipeline_client_;
    std::unique_ptr<broker::Client> store_client_;
};

/// Loads, runs and reports in one call; the CLI run verb wraps this.
Expected<RunReport> run_scenario(const ScenarioConfig& cfg,
                                 const RunOverrides& ov = {});

}  // namespace seaflow::scenario
