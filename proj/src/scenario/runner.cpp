#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "seaflow/broker/topic.hpp"
#include "seaflow/core/json_codec.hpp"
#include "seaflow/scenario/scenario.hpp"

namespace seaflow::scenario {

namespace {

using nlohmann::ordered_json;

constexpr const char* kSecret = "scenario-shared-secret";
constexpr TimestampMs kQuantumMs = 60'000;
constexpr TimestampMs kDrainStepMs = 1'000;
constexpr TimestampMs kDrainMs = 10'000;

const std::vector<double> kLatencyBuckets = {0.5, 1,   2,    5,    10,
                                             30,  60,  300,  1800, 7200};

std::string alarm_payload(const qc::Alarm& alarm) {
    ordered_json j;
    j["kind"] = qc::alarm_kind_name(alarm.kind);
    j["key"] = alarm.key;
    j["at"] = alarm.at;
    j["detail"] = alarm.detail;
    return j.dump();
}

bool unlocated(const Location& loc) {
    return loc.lat == 0.0 && loc.lon == 0.0 && loc.depth_m == 0.0;
}

}  // namespace

struct Runner::OrgRuntime {
    OrgScenario spec;
    OrgCounts counts;
    std::unique_ptr<sim::World> world;
    std::unique_ptr<qc::QcEngine> qc;
    std::unique_ptr<transform::Transformer> transformer;
    transform::MappingRegistry mappings;
    std::unique_ptr<ingest::Pusher> pusher;
    std::unique_ptr<ingest::EdgeAdapter> edge;
    std::unique_ptr<ingest::FetchSource> fetch;
    std::string producer_token;
    std::set<std::string> battery_alarmed;
};

Runner::Runner(ScenarioConfig cfg, const RunOverrides& ov)
    : cfg_(std::move(cfg)), overrides_(ov), secret_(kSecret) {
    if (ov.seed) cfg_.seed = *ov.seed;
    if (ov.duration_s) cfg_.duration_s = *ov.duration_s;
    for (OrgScenario& org : cfg_.orgs) org.world.seed = cfg_.seed;
    now_ = cfg_.start_at;
    end_at_ = cfg_.start_at + cfg_.duration_s * kMsPerSecond;
}

Runner::~Runner() = default;

Expected<std::unique_ptr<Runner>> Runner::create(ScenarioConfig cfg,
                                                 const RunOverrides& ov) {
    std::unique_ptr<Runner> r(new Runner(std::move(cfg), ov));
    if (auto res = r->init(); !res.ok()) return res.error();
    return r;
}

Expected<void> Runner::init() {
    registry_ = std::make_unique<metrics::Registry>();
    registry_->declare_histogram("delivery_latency_seconds", kLatencyBuckets);

    // service identities the pipeline itself runs under
    auto add_principal = [&](const std::string& id, const std::string& org,
                             auth::Role role) -> Expected<void> {
        if (auto res = principals_.add({id, org, {role}}); !res.ok())
            return res.error();
        return {};
    };
    if (auto r = add_principal("svc-ingest", "platform", auth::Role::Operator);
        !r.ok())
        return r;
    if (auto r = add_principal("svc-pipeline", "platform", auth::Role::Operator);
        !r.ok())
        return r;
    if (auto r = add_principal("svc-store", "platform", auth::Role::Operator);
        !r.ok())
        return r;
    for (const OrgScenario& org : cfg_.orgs) {
        if (auto r = add_principal("producer-" + org.org_id, org.org_id,
                                   auth::Role::Producer);
            !r.ok())
            return r;
    }
    for (const PrincipalConfig& pc : cfg_.principals) {
        if (auto res = principals_.add(pc.principal); !res.ok())
            return res.error();
    }

    broker::BrokerConfig ingestion_cfg;
    ingestion_cfg.name = "ingestion";
    ingestion_ = std::make_unique<broker::Broker>(ingestion_cfg, &principals_,
                                                  secret_, registry_.get());
    broker::BrokerConfig core_cfg;
    core_cfg.name = "core";
    core_ = std::make_unique<broker::Broker>(core_cfg, &principals_, secret_,
                                             registry_.get());

    const std::string journal = !overrides_.journal_path.empty()
                                    ? overrides_.journal_path
                                    : cfg_.journal_path;
    if (journal.empty()) {
        space_ = std::make_unique<store::DataSpace>();
    } else {
        auto opened = store::DataSpace::open(journal);
        if (!opened.ok()) return opened.error();
        space_ = std::make_unique<store::DataSpace>(std::move(*opened));
    }

    if (!cfg_.slos.empty())
        slo_ = std::make_unique<metrics::SloEvaluator>(cfg_.slos);

    // session failures surface as alarms, not silent log lines
    auto session_alarm = [this](const std::string& broker_name) {
        return [this, broker_name](const std::string& client_id,
                                   const std::string& reason) {
            session_alarms_["SessionFailed"] += 1;
            (void)registry_->counter_inc("alarms_total",
                                         {{"kind", "SessionFailed"}}, 1);
            qc::Alarm alarm{qc::AlarmKind::SessionFailed, client_id, now_,
                            reason};
            (void)core_->publish(svc_core_pub_,
                                 alarm_topic(broker_name, "SessionFailed"),
                                 alarm_payload(alarm), broker::QoS::AtLeastOnce,
                                 now_);
        };
    };
    ingestion_->on_session_failed = session_alarm("ingestion");
    core_->on_session_failed = session_alarm("core");

    auto service_ctx = [&](const std::string& id,
                           std::vector<auth::Grant> grants) {
        auth::AuthContext ctx;
        ctx.principal = *principals_.find(id);
        ctx.grants = std::move(grants);
        ctx.token_id = "svc-" + id;
        return ctx;
    };

    std::vector<auth::Grant> ingest_pub_grants;
    std::vector<auth::Grant> core_pub_grants;
    for (const OrgScenario& org : cfg_.orgs) {
        auth::Grant g;
        g.action = auth::Action::Publish;
        g.topic_filter = "ingest/" + org.org_id + "/#";
        g.org_id = org.org_id;
        ingest_pub_grants.push_back(g);
        auth::Grant c;
        c.action = auth::Action::Publish;
        c.topic_filter = "#";
        c.org_id = org.org_id;
        core_pub_grants.push_back(c);
    }
    for (const char* pseudo : {"ingestion", "core"}) {
        auth::Grant c;
        c.action = auth::Action::Publish;
        c.topic_filter = "#";
        c.org_id = pseudo;
        core_pub_grants.push_back(c);
    }
    auth::Grant sub_all;
    sub_all.action = auth::Action::Subscribe;
    sub_all.topic_filter = "#";

    svc_ingest_pub_ = ingestion_->accept_local(
        "svc-ingest", service_ctx("svc-ingest", ingest_pub_grants), nullptr);

    pipeline_client_ = std::make_unique<broker::Client>(
        broker::ClientConfig{"svc-pipeline", 5000, 8, 256});
    svc_pipeline_sub_ = ingestion_->accept_local(
        "svc-pipeline", service_ctx("svc-pipeline", {sub_all}),
        [this](const broker::Packet& p) { pipeline_client_->on_packet(p, now_); });
    pipeline_client_->send = [this](const broker::Packet& p) {
        ingestion_->handle_packet(svc_pipeline_sub_, p, now_);
    };
    pipeline_client_->on_message = [this](const broker::Delivery& d) {
        handle_ingest_delivery(d);
    };
    if (auto sub = ingestion_->subscribe(
            svc_pipeline_sub_, {{"ingest/#", broker::QoS::ExactlyOnce}}, now_);
        !sub.ok())
        return sub.error();

    svc_core_pub_ = core_->accept_local(
        "svc-pipeline", service_ctx("svc-pipeline", core_pub_grants), nullptr);

    store_client_ = std::make_unique<broker::Client>(
        broker::ClientConfig{"svc-store", 5000, 8, 256});
    svc_store_sub_ = core_->accept_local(
        "svc-store", service_ctx("svc-store", {sub_all}),
        [this](const broker::Packet& p) { store_client_->on_packet(p, now_); });
    store_client_->send = [this](const broker::Packet& p) {
        core_->handle_packet(svc_store_sub_, p, now_);
    };
    store_client_->on_message = [this](const broker::Delivery& d) {
        handle_store_delivery(d);
    };
    if (auto sub = core_->subscribe(svc_store_sub_,
                                    {{"data/#", broker::QoS::AtLeastOnce},
                                     {"quarantine/#", broker::QoS::AtLeastOnce}},
                                    now_);
        !sub.ok())
        return sub.error();

    for (OrgScenario& spec : cfg_.orgs) {
        auto rt = std::make_unique<OrgRuntime>();
        rt->spec = spec;
        OrgRuntime* raw = rt.get();

        auto jm = transform::org_json_mapping(spec.org_id);
        if (auto res = rt->mappings.register_mapping(jm); !res.ok())
            return res.error();
        auto xm = transform::org_xml_mapping(spec.org_id);
        if (auto res = rt->mappings.register_mapping(xm); !res.ok())
            return res.error();
        rt->transformer = std::make_unique<transform::Transformer>(
            rt->mappings, registry_.get());

        rt->qc = std::make_unique<qc::QcEngine>(cfg_.qc, registry_.get());
        for (const sim::SensingNodeConfig& node : spec.world.nodes) {
            for (const sim::SensorSpec& s : node.sensors) {
                rt->qc->register_stream(
                    {s.sensor_id, s.parameter}, s.sampling_interval_s,
                    qc::ValueRange{s.valid_min, s.valid_max});
            }
        }

        try {
            rt->world = std::make_unique<sim::World>(spec.world);
        } catch (const ConfigException& e) {
            return Error{Errc::ConfigError,
                         e.path + ": " + e.field + ": " + e.message};
        }

        switch (spec.trace) {
            case IngestionTrace::Pusher: {
                auth::IssueRequest req;
                req.principal_id = "producer-" + spec.org_id;
                auth::Grant g;
                g.action = auth::Action::Ingest;
                g.topic_filter = "ingest/" + spec.org_id + "/#";
                g.org_id = spec.org_id;
                req.grants = {g};
                req.ttl_s = cfg_.duration_s + 3600;
                auto token =
                    auth::issue_token(principals_, req, now_, secret_);
                if (!token.ok()) return token.error();
                rt->producer_token = auth::serialize_token(*token, secret_);
                rt->pusher = std::make_unique<ingest::Pusher>(
                    *ingestion_, svc_ingest_pub_, principals_, secret_,
                    spec.publish_qos, registry_.get());
                rt->world->on_publish = [this, raw](const sim::PublishOut& out) {
                    now_ = out.at;
                    auto receipt = raw->pusher->push(
                        raw->producer_token, raw->spec.org_id,
                        raw->spec.wire_format, out.payload, out.at);
                    if (!receipt.ok())
                        raw->counts.rejects += 1;
                    else
                        raw->counts.rejects += receipt->rejected.size();
                };
                break;
            }
            case IngestionTrace::Edge: {
                rt->edge = std::make_unique<ingest::EdgeAdapter>(
                    *ingestion_, svc_ingest_pub_, spec.org_id, spec.wire_format,
                    spec.publish_qos, registry_.get());
                rt->world->on_publish = [this, raw](const sim::PublishOut& out) {
                    now_ = out.at;
                    auto receipt = raw->edge->integrate(out.payload, out.at);
                    if (!receipt.ok())
                        raw->counts.rejects += 1;
                    else
                        raw->counts.rejects += receipt->rejected.size();
                };
                break;
            }
            case IngestionTrace::Fetcher: {
                ingest::FetchConfig fc;
                fc.source_id = spec.org_id + "-dataset";
                fc.org_id = spec.org_id;
                fc.format = spec.wire_format;
                fc.poll_interval_s = spec.fetch_poll_interval_s;
                fc.initial_cursor = -1;
                sim::World* w = rt->world.get();
                rt->fetch = std::make_unique<ingest::FetchSource>(
                    fc, [w]() -> Expected<std::vector<std::string>> {
                        std::vector<std::string> payloads;
                        payloads.reserve(w->dataset().size());
                        for (const sim::DatasetEntry& e : w->dataset())
                            payloads.push_back(e.payload);
                        return payloads;
                    });
                break;
            }
        }
        org_rt_.push_back(std::move(rt));
    }
    return {};
}

Runner::OrgRuntime* Runner::org_for(const std::string& org_id) {
    for (auto& rt : org_rt_)
        if (rt->spec.org_id == org_id) return rt.get();
    return nullptr;
}

sim::World* Runner::world(const std::string& org_id) {
    OrgRuntime* rt = org_for(org_id);
    return rt ? rt->world.get() : nullptr;
}

Expected<auth::AuthContext> Runner::context_for(const std::string& principal_id) {
    for (const PrincipalConfig& pc : cfg_.principals) {
        if (pc.principal.principal_id != principal_id) continue;
        auth::IssueRequest req;
        req.principal_id = principal_id;
        req.grants = pc.grants;
        req.ttl_s = cfg_.duration_s + 3600;
        auto token = auth::issue_token(principals_, req, cfg_.start_at, secret_);
        if (!token.ok()) return token.error();
        return auth::verify_token(principals_,
                                  auth::serialize_token(*token, secret_),
                                  cfg_.start_at + 1, secret_);
    }
    return Error{Errc::UnknownPrincipal, "no principal " + principal_id};
}

void Runner::handle_ingest_delivery(const broker::Delivery& d) {
    auto org_id = topic_org(d.topic);
    if (!org_id) return;
    OrgRuntime* rt = org_for(*org_id);
    if (rt == nullptr) return;

    auto batch = ingest::normalize_payload(*org_id, rt->spec.wire_format,
                                           d.payload, now_);
    if (!batch.ok()) {
        rt->counts.rejects += 1;
        return;
    }
    rt->counts.rejects += batch->rejects.size();
    for (const ingest::RawRecord& rec : batch->records) {
        rt->counts.records_ingested += 1;
        auto out = rt->transformer->apply(rec);
        if (!out.ok()) {
            rt->counts.transform_errors += 1;
            continue;
        }
        if (!out->has_value()) {
            rt->counts.dedup_drops += 1;
            continue;
        }
        pipeline_observation(*rt, std::move(**out));
    }
}

void Runner::pipeline_observation(OrgRuntime& rt, Observation obs) {
    if (unlocated(obs.location)) {
        auto it = rt.spec.platform_locations.find(obs.platform_id);
        if (it != rt.spec.platform_locations.end()) obs.location = it->second;
    }
    const auto neighbors = space_->latest(
        obs.parameter, obs.location, cfg_.qc.consistency.neighbor_radius_m);
    auto outcome = rt.qc->process(obs, now_, neighbors);

    auto forward = [&](Observation o) {
        auto routed = triage::triage_observation(o, cfg_.triage, now_);
        (void)core_->publish(svc_core_pub_, routed.topic,
                             observation_to_line(o), broker::QoS::AtLeastOnce,
                             now_);
    };
    for (Observation& m : outcome.missing) forward(std::move(m));
    forward(std::move(outcome.obs));
    for (const qc::Alarm& alarm : outcome.alarms) emit_alarm(rt, alarm);
}

void Runner::handle_store_delivery(const broker::Delivery& d) {
    auto obs = observation_from_line(d.payload);
    if (!obs.ok()) return;
    OrgRuntime* rt = org_for(obs->org_id);
    const bool synthesized = !obs->value.has_value();
    const double latency_s =
        static_cast<double>(now_ - obs->measured_at) / 1000.0;
    if (auto res = space_->append(*obs); !res.ok()) return;
    registry_->histogram_observe("delivery_latency_seconds",
                                 {{"org", obs->org_id}},
                                 std::max(0.0, latency_s));
    (void)registry_->counter_inc("store_rows_total", {{"org", obs->org_id}}, 1);
    if (rt == nullptr) return;
    if (synthesized)
        rt->counts.missing_synthesized += 1;
    else
        rt->counts.observations_stored += 1;
    if (d.topic.rfind("quarantine/", 0) == 0) rt->counts.quarantined += 1;
}

void Runner::emit_alarm(OrgRuntime& rt, const qc::Alarm& alarm) {
    const char* kind = qc::alarm_kind_name(alarm.kind);
    rt.counts.alarms[kind] += 1;
    if (alarm.kind == qc::AlarmKind::LowBattery)
        (void)registry_->counter_inc("alarms_total", {{"kind", kind}}, 1);
    ordered_json ev;
    ev["at"] = alarm.at;
    ev["kind"] = "alarm";
    ev["alarm"] = kind;
    ev["key"] = alarm.key;
    event_log_.push_back(ev.dump());
    (void)core_->publish(svc_core_pub_, alarm_topic(rt.spec.org_id, kind),
                         alarm_payload(alarm), broker::QoS::AtLeastOnce, now_);
}

void Runner::check_batteries(TimestampMs t) {
    for (auto& rt : org_rt_) {
        auto probe = [&](const std::string& node_id) {
            const sim::NodeRuntime* node = rt->world->node(node_id);
            if (node == nullptr) return;
            registry_->gauge_set(
                "node_battery_j",
                {{"org", rt->spec.org_id}, {"node", node_id}},
                sim::nj_to_joules(node->battery_nj()));
            if (node->battery_dead() &&
                rt->battery_alarmed.insert(node_id).second) {
                emit_alarm(*rt, {qc::AlarmKind::LowBattery, node_id, t,
                                 "battery exhausted"});
            }
        };
        for (const sim::SensingNodeConfig& n : rt->spec.world.nodes)
            probe(n.node_id);
        for (const sim::GatewayConfig& g : rt->spec.world.gateways)
            probe(g.node_id);
        registry_->gauge_set("ota_cost_total", {{"org", rt->spec.org_id}},
                             rt->world->ota_cost_total());
    }
}

void Runner::sweep(TimestampMs t) {
    for (auto& rt : org_rt_) {
        auto batch = rt->qc->sweep(t);
        for (Observation& m : batch.missing) {
            auto routed = triage::triage_observation(m, cfg_.triage, t);
            (void)core_->publish(svc_core_pub_, routed.topic,
                                 observation_to_line(m),
                                 broker::QoS::AtLeastOnce, t);
        }
        for (const qc::Alarm& alarm : batch.alarms) emit_alarm(*rt, alarm);
    }
}

void Runner::step_to(TimestampMs t) {
    for (auto& rt : org_rt_) rt->world->run_until(t);
    now_ = t;
    for (auto& rt : org_rt_) {
        if (rt->fetch == nullptr || !rt->fetch->due(t)) continue;
        auto polled = rt->fetch->poll(t);
        if (!polled.ok()) continue;  // source backoff; cursor unmoved
        for (const ingest::RawRecord& rec : *polled) {
            (void)registry_->counter_inc(
                "ingest_records_total",
                {{"org", rt->spec.org_id}, {"trace", "fetch"}}, 1);
            (void)ingestion_->publish(
                svc_ingest_pub_,
                ingest_topic(rt->spec.org_id, ingest::record_platform(rec)),
                ingest::reserialize_record(rec), rt->spec.publish_qos, t);
        }
    }
    ingestion_->tick(t);
    core_->tick(t);
    check_batteries(t);
}

void Runner::run() {
    if (ran_) return;
    ran_ = true;

    auto evaluate_slos = [this](TimestampMs t) {
        if (!slo_) return;
        std::set<std::string> breached_now;
        for (const metrics::SloBreach& b : slo_->evaluate(*registry_, t)) {
            std::string key = b.rule_id + "|" + metrics::render_labels(b.labels);
            breached_now.insert(key);
            // record on the rising edge only; a standing breach is one entry
            if (!active_breaches_.count(key))
                breaches_.push_back({b.rule_id, b.metric, b.labels, b.observed,
                                     b.threshold, b.at});
        }
        active_breaches_ = std::move(breached_now);
    };

    TimestampMs t = cfg_.start_at;
    while (t < end_at_) {
        t = std::min(t + kQuantumMs, end_at_);
        step_to(t);
        sweep(t);
        evaluate_slos(t);
    }
    // drain: let in-flight frames land without opening new sample slots
    for (TimestampMs d = end_at_ + kDrainStepMs; d <= end_at_ + kDrainMs;
         d += kDrainStepMs)
        step_to(d);

    // merge the per-org event logs into one time-ordered stream
    std::vector<std::pair<TimestampMs, std::string>> merged;
    for (auto& rt : org_rt_) {
        for (const std::string& line : rt->world->event_log()) {
            auto j = nlohmann::json::parse(line, nullptr, false);
            TimestampMs at =
                j.is_object() ? j.value("at", TimestampMs{0}) : 0;
            merged.emplace_back(at, line);
        }
    }
    for (const std::string& line : event_log_) {
        auto j = nlohmann::json::parse(line, nullptr, false);
        merged.emplace_back(j.value("at", TimestampMs{0}), line);
    }
    std::stable_sort(merged.begin(), merged.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    event_log_.clear();
    for (auto& [at, line] : merged) event_log_.push_back(std::move(line));
    if (!overrides_.event_log_path.empty()) {
        std::ofstream out(overrides_.event_log_path);
        for (const std::string& line : event_log_) out << line << "\n";
    }
}

RunReport Runner::report() const {
    RunReport r;
    r.name = cfg_.name;
    r.seed = cfg_.seed;
    r.duration_s = cfg_.duration_s;
    r.start_at = cfg_.start_at;
    for (const auto& rt : org_rt_) {
        OrgReport org;
        org.org_id = rt->spec.org_id;
        org.counts = rt->counts;
        const sim::WorldStats& s = rt->world->stats();
        org.counts.samples = s.samples;
        org.counts.frames_sent = s.uac_sent;
        org.counts.frames_lost = s.uac_lost;
        org.counts.uplink_sent = s.ota_sent;
        org.counts.uplink_lost = s.ota_lost;
        org.counts.buffer_drops = s.buffer_drops;
        org.ota_cost = rt->world->ota_cost_total();
        auto energy_of = [&](const std::string& node_id, double battery_j) {
            const sim::NodeRuntime* node = rt->world->node(node_id);
            NodeEnergyReport ne;
            ne.node_id = node_id;
            ne.battery_start_nj = sim::joules_to_nj(battery_j);
            if (node != nullptr) {
                ne.battery_start_nj = node->initial_battery_nj();
                ne.battery_end_nj = node->battery_nj();
                ne.sample_nj = node->ledger().sample_nj;
                ne.cpu_nj = node->ledger().cpu_nj;
                ne.tx_nj = node->ledger().tx_nj;
                ne.rx_nj = node->ledger().rx_nj;
                ne.tx_bytes = node->tx_bytes;
                ne.rx_bytes = node->rx_bytes;
            }
            org.nodes.push_back(ne);
        };
        for (const sim::SensingNodeConfig& n : rt->spec.world.nodes)
            energy_of(n.node_id, n.battery_j);
        for (const sim::GatewayConfig& g : rt->spec.world.gateways)
            energy_of(g.node_id, g.battery_j);
        r.orgs.push_back(std::move(org));
    }
    r.session_alarms = session_alarms_;
    r.slo_breaches = breaches_;
    r.metrics_text = registry_->render_exposition();
    r.event_log_path = overrides_.event_log_path;
    return r;
}

Expected<RunReport> run_scenario(const ScenarioConfig& cfg,
                                 const RunOverrides& ov) {
    auto runner = Runner::create(cfg, ov);
    if (!runner.ok()) return runner.error();
    (*runner)->run();
    return (*runner)->report();
}

}  // namespace seaflow::scenario
