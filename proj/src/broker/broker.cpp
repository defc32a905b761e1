#include "seaflow/broker/broker.hpp"

#include <algorithm>

#include "seaflow/broker/topic.hpp"

namespace seaflow::broker {

Broker::Broker(BrokerConfig cfg, const auth::PrincipalStore* principals,
               std::string secret, metrics::Registry* metrics)
    : cfg_(std::move(cfg)),
      principals_(principals),
      secret_(std::move(secret)),
      metrics_(metrics) {}

ConnId Broker::accept(PacketSink sink) {
    ConnId id = next_conn_++;
    auto s = std::make_unique<Session>(cfg_);
    s->conn = id;
    s->sink = std::move(sink);
    sessions_[id] = std::move(s);
    return id;
}

ConnId Broker::accept_local(const std::string& client_id, auth::AuthContext ctx,
                            PacketSink sink) {
    ConnId id = accept(std::move(sink));
    Session& s = *sessions_[id];
    s.client_id = client_id;
    s.auth = std::move(ctx);
    s.connected = true;
    s.local = true;
    return id;
}

Broker::Session* Broker::find(ConnId conn) {
    auto it = sessions_.find(conn);
    return it == sessions_.end() ? nullptr : it->second.get();
}

const Broker::Session* Broker::find(ConnId conn) const {
    auto it = sessions_.find(conn);
    return it == sessions_.end() ? nullptr : it->second.get();
}

void Broker::send(Session& s, const Packet& p) {
    if (s.sink) s.sink(p);
}

void Broker::count(const char* metric, const std::string& org, double delta) {
    if (!metrics_) return;
    metrics::Labels labels{{"instance", cfg_.name}};
    if (!org.empty()) labels["org"] = org;
    (void)metrics_->counter_inc(metric, labels, delta);
}

void Broker::update_inflight_gauge() {
    if (!metrics_) return;
    double total = 0;
    for (const auto& [id, s] : sessions_) total += static_cast<double>(s->sender.inflight());
    metrics_->gauge_set("broker_inflight", {{"instance", cfg_.name}}, total);
}

void Broker::fail_session(Session& s, const std::string& reason) {
    if (s.failed) return;
    s.failed = true;
    s.connected = false;
    send(s, Packet{});  // defaulted packet is Disconnect
    if (on_session_failed) on_session_failed(s.client_id, reason);
    update_inflight_gauge();
}

bool Broker::session_failed(ConnId conn) const {
    const Session* s = find(conn);
    return s != nullptr && s->failed;
}

bool Broker::session_connected(ConnId conn) const {
    const Session* s = find(conn);
    return s != nullptr && s->connected;
}

void Broker::disconnect(ConnId conn) {
    sessions_.erase(conn);
    update_inflight_gauge();
}

void Broker::handle_packet(ConnId conn, const Packet& p, TimestampMs now) {
    Session* sp = find(conn);
    if (sp == nullptr || sp->failed) return;
    Session& s = *sp;

    if (p.kind == PacketKind::Connect) {
        if (s.connected) {
            fail_session(s, "second Connect on live session");
            return;
        }
        auto ctx = auth::verify_token(*principals_, p.password, now, secret_,
                                      cfg_.clock_skew_ms);
        Packet ack;
        ack.kind = PacketKind::ConnAck;
        if (ctx.ok()) {
            s.client_id = p.client_id.empty() ? ctx.value().principal.principal_id
                                              : p.client_id;
            s.auth = std::move(ctx.value());
            s.connected = true;
            ack.connack_code = 0;
            send(s, ack);
        } else {
            ack.connack_code = ctx.code() == Errc::BadSignature ? 4 : 5;
            send(s, ack);
            count("broker_connect_rejected_total", "");
            s.failed = true;
        }
        return;
    }
    if (!s.connected) {
        fail_session(s, "packet before Connect");
        return;
    }

    switch (p.kind) {
        case PacketKind::Publish: {
            auto decision = auth::authorize_topic(s.auth, auth::Action::Publish, p.topic);
            if (!decision.allow) {
                count("broker_authz_denied_total", topic_org(p.topic).value_or(""));
                fail_session(s, "publish denied: " + decision.reason);
                return;
            }
            auto res = s.receiver.on_publish(p);
            for (const Packet& reply : res.replies) send(s, reply);
            if (res.violation) {
                fail_session(s, "publish protocol violation");
                return;
            }
            if (res.deliver) {
                accepted_publishes_ += 1;
                route(p, now);
            }
            break;
        }
        case PacketKind::PubRel: {
            auto res = s.receiver.on_pubrel(p.packet_id);
            for (const Packet& reply : res.replies) send(s, reply);
            if (res.violation) fail_session(s, "PubRel for unknown packet_id");
            break;
        }
        case PacketKind::PubAck: {
            auto res = s.sender.on_puback(p.packet_id);
            if (res.kind == QosSender::AckKind::Violation)
                fail_session(s, "PubAck for unknown packet_id");
            update_inflight_gauge();
            break;
        }
        case PacketKind::PubRec: {
            auto res = s.sender.on_pubrec(p.packet_id, now);
            if (res.kind == QosSender::AckKind::Violation) {
                fail_session(s, "PubRec for unknown packet_id");
                return;
            }
            if (res.reply) send(s, *res.reply);
            break;
        }
        case PacketKind::PubComp: {
            auto res = s.sender.on_pubcomp(p.packet_id);
            if (res.kind == QosSender::AckKind::Violation)
                fail_session(s, "PubComp for unknown packet_id");
            update_inflight_gauge();
            break;
        }
        case PacketKind::Subscribe: {
            Packet ack;
            ack.kind = PacketKind::SubAck;
            ack.packet_id = p.packet_id;
            for (const auto& [filter, qos] : p.subscriptions) {
                if (!valid_filter(filter)) {
                    ack.suback_codes.push_back(0x80);
                    continue;
                }
                auto existing = std::find_if(
                    s.subscriptions.begin(), s.subscriptions.end(),
                    [&](const auto& sub) { return sub.first == filter; });
                if (existing != s.subscriptions.end())
                    existing->second = qos;
                else
                    s.subscriptions.emplace_back(filter, qos);
                ack.suback_codes.push_back(static_cast<std::uint8_t>(qos));
            }
            send(s, ack);
            break;
        }
        case PacketKind::Disconnect:
            disconnect(conn);
            break;
        default:
            fail_session(s, std::string("client sent ") + packet_kind_name(p.kind));
            break;
    }
}

Expected<void> Broker::publish(ConnId conn, const std::string& topic,
                               const std::string& payload, QoS qos, TimestampMs now) {
    Session* s = find(conn);
    if (s == nullptr || !s->connected)
        return Error{Errc::ProtocolViolation, "publish on dead session"};
    if (!valid_topic(topic))
        return Error{Errc::InvalidTopic, "invalid topic: " + topic};
    auto decision = auth::authorize_topic(s->auth, auth::Action::Publish, topic);
    if (!decision.allow) {
        count("broker_authz_denied_total", topic_org(topic).value_or(""));
        return Error{Errc::NotAuthorized, decision.reason};
    }
    // local sessions hand the message over in-process, which is already
    // exactly-once; the requested qos governs the subscriber-side hops
    Packet p = make_publish(topic, payload, qos,
                            qos == QoS::AtMostOnce ? 0 : s->sender.alloc_id());
    accepted_publishes_ += 1;
    route(p, now);
    return {};
}

Expected<std::vector<QoS>> Broker::subscribe(
    ConnId conn, const std::vector<std::pair<std::string, QoS>>& filters,
    TimestampMs now) {
    (void)now;
    Session* s = find(conn);
    if (s == nullptr || !s->connected)
        return Error{Errc::ProtocolViolation, "subscribe on dead session"};
    std::vector<QoS> granted;
    for (const auto& [filter, qos] : filters) {
        if (!valid_filter(filter))
            return Error{Errc::InvalidTopic, "invalid filter: " + filter};
        auto existing =
            std::find_if(s->subscriptions.begin(), s->subscriptions.end(),
                         [&](const auto& sub) { return sub.first == filter; });
        if (existing != s->subscriptions.end())
            existing->second = qos;
        else
            s->subscriptions.emplace_back(filter, qos);
        granted.push_back(qos);
    }
    return granted;
}

void Broker::route(const Packet& publish, TimestampMs now) {
    for (auto& [id, sp] : sessions_) {
        Session& sub = *sp;
        if (!sub.connected || sub.failed || !sub.sink) continue;
        const QoS* best = nullptr;
        for (const auto& [filter, qos] : sub.subscriptions) {
            if (!match_filter(filter, publish.topic)) continue;
            if (best == nullptr || static_cast<int>(qos) > static_cast<int>(*best))
                best = &qos;
        }
        if (best == nullptr) continue;
        auto decision =
            auth::authorize_topic(sub.auth, auth::Action::Subscribe, publish.topic);
        if (!decision.allow) {
            count("broker_authz_denied_total", topic_org(publish.topic).value_or(""));
            continue;
        }
        QoS effective = std::min(publish.qos, *best,
                                 [](QoS a, QoS b) {
                                     return static_cast<int>(a) < static_cast<int>(b);
                                 });
        deliver(sub, publish, effective, now);
    }
}

void Broker::deliver(Session& sub, const Packet& publish, QoS effective,
                     TimestampMs now) {
    if (effective == QoS::AtMostOnce) {
        send(sub, make_publish(publish.topic, publish.payload, QoS::AtMostOnce));
        return;
    }
    Packet out = make_publish(publish.topic, publish.payload, effective,
                              sub.sender.alloc_id());
    if (!sub.sender.start(out, now)) {
        // inflight window full: drop rather than buffer unboundedly
        count("broker_dropped_total", topic_org(publish.topic).value_or(""));
        return;
    }
    update_inflight_gauge();
    send(sub, out);
}

void Broker::tick(TimestampMs now) {
    for (auto& [id, sp] : sessions_) {
        Session& s = *sp;
        if (s.failed || !s.connected) continue;
        auto resend = s.sender.expired(now);
        if (s.sender.failed()) {
            fail_session(s, "retransmit budget exhausted");
            continue;
        }
        for (const Packet& p : resend) send(s, p);
    }
    update_inflight_gauge();
}

}  // namespace seaflow::broker
