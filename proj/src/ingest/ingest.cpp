#include "seaflow/ingest/ingest.hpp"

#include <algorithm>
#include <set>

#include "seaflow/broker/topic.hpp"

namespace seaflow::ingest {

namespace {

void stamp_via(RawRecord& rec, const char* trace) {
    rec.ingest_trace = trace;
    for (auto& [k, v] : rec.fields) {
        if (k == "via") {
            v = trace;
            return;
        }
    }
    rec.fields.emplace_back("via", trace);
}

void count(metrics::Registry* metrics, const char* name,
           const std::string& org, const std::string& trace, double delta) {
    if (metrics == nullptr || delta == 0) return;
    (void)metrics->counter_inc(name, {{"org", org}, {"trace", trace}}, delta);
}

/// Original batch positions of the parsed records: every index not taken
/// by a parse reject, in order.
std::vector<std::size_t> surviving_indices(const ParseOutcome& parsed) {
    std::set<std::size_t> rejected;
    for (const ParseReject& r : parsed.rejects) rejected.insert(r.index);
    std::vector<std::size_t> out;
    std::size_t idx = 0;
    while (out.size() < parsed.records.size()) {
        if (!rejected.count(idx)) out.push_back(idx);
        ++idx;
    }
    return out;
}

/// Validates, stamps and publishes every parsed record; shared by the push
/// and edge traces.
IngestReceipt publish_records(broker::Broker& broker, broker::ConnId conn,
                              ParseOutcome parsed, const std::string& org_id,
                              broker::QoS qos, TimestampMs now,
                              const char* trace,
                              const auth::AuthContext* caller) {
    IngestReceipt receipt;
    receipt.rejected = parsed.rejects;
    const std::vector<std::size_t> positions = surviving_indices(parsed);

    for (std::size_t i = 0; i < parsed.records.size(); ++i) {
        RawRecord& rec = parsed.records[i];
        const std::size_t pos = positions[i];
        if (auto valid = validate_record(rec); !valid.ok()) {
            receipt.rejected.push_back({pos, valid.error().message});
            continue;
        }
        const std::string topic = ingest_topic(org_id, record_platform(rec));
        if (caller != nullptr) {
            auto decision =
                auth::authorize_topic(*caller, auth::Action::Ingest, topic);
            if (!decision.allow) {
                receipt.rejected.push_back({pos, decision.reason});
                continue;
            }
        }
        stamp_via(rec, trace);
        if (auto sent =
                broker.publish(conn, topic, reserialize_record(rec), qos, now);
            !sent.ok()) {
            receipt.rejected.push_back({pos, sent.error().message});
            continue;
        }
        ++receipt.accepted;
    }
    std::sort(receipt.rejected.begin(), receipt.rejected.end(),
              [](const ParseReject& a, const ParseReject& b) {
                  return a.index < b.index;
              });
    return receipt;
}

}  // namespace

Pusher::Pusher(broker::Broker& broker, broker::ConnId conn,
               const auth::PrincipalStore& principals, std::string secret,
               broker::QoS qos, metrics::Registry* metrics,
               std::int64_t clock_skew_ms)
    : broker_(broker),
      conn_(conn),
      principals_(principals),
      secret_(std::move(secret)),
      qos_(qos),
      metrics_(metrics),
      clock_skew_ms_(clock_skew_ms) {}

Expected<IngestReceipt> Pusher::push(const std::string& token,
                                     const std::string& org_id,
                                     SourceFormat format,
                                     const std::string& payload,
                                     TimestampMs now) {
    auto ctx = auth::verify_token(principals_, token, now, secret_,
                                  clock_skew_ms_);
    if (!ctx.ok()) {
        count(metrics_, "ingest_denied_total", org_id, "push", 1);
        return Error{Errc::NotAuthorized,
                     "token rejected: " + ctx.error().message};
    }
    const bool operator_role =
        ctx->principal.roles.count(auth::Role::Operator) > 0;
    if (!operator_role && ctx->principal.org_id != org_id) {
        count(metrics_, "ingest_denied_total", org_id, "push", 1);
        return Error{Errc::NotAuthorized,
                     ctx->principal.principal_id + " of " +
                         ctx->principal.org_id + " cannot push for " + org_id};
    }

    auto parsed = parse_payload(format, payload, org_id, now);
    if (!parsed.ok()) return parsed.error();

    IngestReceipt receipt = publish_records(broker_, conn_, std::move(*parsed),
                                            org_id, qos_, now, "push", &*ctx);
    count(metrics_, "ingest_records_total", org_id, "push",
          static_cast<double>(receipt.accepted));
    count(metrics_, "ingest_rejected_total", org_id, "push",
          static_cast<double>(receipt.rejected.size()));
    return receipt;
}

EdgeAdapter::EdgeAdapter(broker::Broker& broker, broker::ConnId conn,
                         std::string org_id, SourceFormat format,
                         broker::QoS qos, metrics::Registry* metrics)
    : broker_(broker),
      conn_(conn),
      org_id_(std::move(org_id)),
      format_(format),
      qos_(qos),
      metrics_(metrics) {}

Expected<IngestReceipt> EdgeAdapter::integrate(const std::string& payload,
                                               TimestampMs now) {
    auto parsed = parse_payload(format_, payload, org_id_, now);
    if (!parsed.ok()) return parsed.error();
    IngestReceipt receipt = publish_records(broker_, conn_, std::move(*parsed),
                                            org_id_, qos_, now, "edge", nullptr);
    count(metrics_, "ingest_records_total", org_id_, "edge",
          static_cast<double>(receipt.accepted));
    count(metrics_, "ingest_rejected_total", org_id_, "edge",
          static_cast<double>(receipt.rejected.size()));
    return receipt;
}

FetchSource::FetchSource(FetchConfig cfg, Provider provider)
    : cfg_(std::move(cfg)),
      provider_(std::move(provider)),
      cursor_(cfg_.initial_cursor) {}

Expected<std::vector<RawRecord>> FetchSource::poll(TimestampMs now) {
    if (!due(now)) return std::vector<RawRecord>{};

    auto batches = provider_();
    if (!batches.ok()) {
        backoff_s_ = backoff_s_ == 0
                         ? cfg_.backoff_base_s
                         : std::min(backoff_s_ * 2, cfg_.backoff_cap_s);
        next_poll_at_ = now + backoff_s_ * 1000;
        return Error{Errc::SourceUnavailable,
                     cfg_.source_id + ": " + batches.error().message};
    }
    backoff_s_ = 0;
    next_poll_at_ = now + cfg_.poll_interval_s * 1000;

    std::vector<RawRecord> fresh;
    TimestampMs high = cursor_;
    for (const std::string& payload : *batches) {
        auto parsed = parse_payload(cfg_.format, payload, cfg_.org_id, now);
        if (!parsed.ok()) continue;  // a corrupt batch never blocks the rest
        for (RawRecord& rec : parsed->records) {
            if (!validate_record(rec).ok()) continue;
            auto measured = record_measured_at(rec);
            if (!measured || *measured <= cursor_) continue;
            stamp_via(rec, "fetch");
            high = std::max(high, *measured);
            fresh.push_back(std::move(rec));
        }
    }
    cursor_ = high;
    return fresh;
}

Expected<NormalizedBatch> normalize_payload(const std::string& org_id,
                                            SourceFormat format,
                                            const std::string& payload,
                                            TimestampMs received_at) {
    auto parsed = parse_payload(format, payload, org_id, received_at);
    if (!parsed.ok()) return parsed.error();

    NormalizedBatch out;
    out.rejects = parsed->rejects;
    out.trace = "push";
    for (RawRecord& rec : parsed->records) {
        if (auto valid = validate_record(rec); !valid.ok()) {
            out.rejects.push_back({out.records.size(), valid.error().message});
            continue;
        }
        if (const std::string* via = rec.field("via")) out.trace = *via;
        rec.ingest_trace = rec.field("via") ? *rec.field("via") : "push";
        out.records.push_back(std::move(rec));
    }
    return out;
}

}  // namespace seaflow::ingest
