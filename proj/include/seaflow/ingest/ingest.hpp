#pragma once

#include <functional>

#include "seaflow/broker/broker.hpp"
#include "seaflow/ingest/wire.hpp"
#include "seaflow/metrics/registry.hpp"

namespace seaflow::ingest {

struct IngestReceipt {
    std::size_t accepted = 0;
    std::vector<ParseReject> rejected;
};

/**
 * Pusher - the producer-push trace. Producers bring a bearer token and a
 * wire-format batch; every valid record is republished one-per-message on
 * ingest/<org>/<station>, rejects are itemized and never block siblings.
 * The pusher's own broker session does the publishing; the caller's token
 * only has to authorize ingest for the org.
 */
class Pusher {
public:
    Pusher(broker::Broker& broker, broker::ConnId conn,
           const auth::PrincipalStore& principals, std::string secret,
           broker::QoS qos, metrics::Registry* metrics = nullptr,
           std::int64_t clock_skew_ms = 0);

    Expected<IngestReceipt> push(const std::string& token,
                                 const std::string& org_id,
                                 SourceFormat format,
                                 const std::string& payload, TimestampMs now);

private:
    broker::Broker& broker_;
    broker::ConnId conn_;
    const auth::PrincipalStore& principals_;
    std::string secret_;
    broker::QoS qos_;
    metrics::Registry* metrics_;
    std::int64_t clock_skew_ms_;
};

/**
 * EdgeAdapter - the edge-integration trace. Runs beside a gateway on the
 * wired side, so records enter the ingestion path directly: no carrier
 * link, no carrier cost, no token round-trip (co-located trust).
 */
class EdgeAdapter {
public:
    EdgeAdapter(broker::Broker& broker, broker::ConnId conn,
                std::string org_id, SourceFormat format, broker::QoS qos,
                metrics::Registry* metrics = nullptr);

    Expected<IngestReceipt> integrate(const std::string& payload,
                                      TimestampMs now);

private:
    broker::Broker& broker_;
    broker::ConnId conn_;
    std::string org_id_;
    SourceFormat format_;
    broker::QoS qos_;
    metrics::Registry* metrics_;
};

struct FetchConfig {
    std::string source_id;
    std::string org_id;
    SourceFormat format = SourceFormat::JsonV1;
    std::int64_t poll_interval_s = 60;
    std::int64_t backoff_base_s = 2;
    std::int64_t backoff_cap_s = 300;
    TimestampMs initial_cursor = -1;  // everything strictly newer is fetched
};

/**
 * FetchSource - the pull trace. Polls a remote dataset, keeps a resume
 * cursor on measured_at, and only ever returns records strictly newer than
 * the cursor, so overlapping polls cannot duplicate. An unavailable source
 * backs off exponentially (base 2 s, cap 5 min) without moving the cursor.
 */
class FetchSource {
public:
    /// Returns every payload batch the source currently holds.
    using Provider = std::function<Expected<std::vector<std::string>>()>;

    FetchSource(FetchConfig cfg, Provider provider);

    bool due(TimestampMs now) const { return now >= next_poll_at_; }
    Expected<std::vector<RawRecord>> poll(TimestampMs now);

    TimestampMs cursor() const { return cursor_; }
    TimestampMs next_poll_at() const { return next_poll_at_; }
    std::int64_t backoff_s() const { return backoff_s_; }
    const FetchConfig& config() const { return cfg_; }

private:
    FetchConfig cfg_;
    Provider provider_;
    TimestampMs cursor_;
    TimestampMs next_poll_at_ = 0;
    std::int64_t backoff_s_ = 0;  // 0: healthy
};

struct NormalizedBatch {
    std::vector<RawRecord> records;  // parsed and validated
    std::vector<ParseReject> rejects;
    std::string trace;  // via field when present, else "push"
};

/**
 * Turns one broker payload from ingest/<org>/... back into validated
 * RawRecords for the transform stage. Gateways publish plain batches; the
 * pusher, fetcher and edge adapter stamp theirs with a via field.
 */
Expected<NormalizedBatch> normalize_payload(const std::string& org_id,
                                            SourceFormat format,
                                            const std::string& payload,
                                            TimestampMs received_at);

}  // namespace seaflow::ingest
