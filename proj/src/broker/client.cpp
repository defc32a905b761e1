#include "seaflow/broker/client.hpp"

namespace seaflow::broker {

Client::Client(ClientConfig cfg)
    : cfg_(cfg),
      sender_(cfg.retransmit_timeout_ms, cfg.max_retries, cfg.max_inflight) {}

void Client::out(const Packet& p) {
    if (send) send(p);
}

void Client::connect(const std::string& token) {
    Packet p;
    p.kind = PacketKind::Connect;
    p.client_id = cfg_.client_id;
    p.password = token;
    out(p);
}

void Client::subscribe(const std::vector<std::pair<std::string, QoS>>& filters) {
    Packet p;
    p.kind = PacketKind::Subscribe;
    p.packet_id = next_sub_id_;
    next_sub_id_ = next_sub_id_ == 65535 ? 1 : static_cast<std::uint16_t>(next_sub_id_ + 1);
    p.subscriptions = filters;
    out(p);
}

Expected<void> Client::publish(const std::string& topic, const std::string& payload,
                               QoS qos, TimestampMs now) {
    if (qos == QoS::AtMostOnce) {
        out(make_publish(topic, payload, qos));
        return {};
    }
    Packet p = make_publish(topic, payload, qos, sender_.alloc_id());
    if (!sender_.start(p, now))
        return Error{Errc::ProtocolViolation,
                     sender_.failed() ? "client session failed" : "inflight window full"};
    out(p);
    return {};
}

void Client::on_packet(const Packet& p, TimestampMs now) {
    switch (p.kind) {
        case PacketKind::ConnAck:
            connack_received_ = true;
            connack_code_ = p.connack_code;
            break;
        case PacketKind::SubAck:
            break;
        case PacketKind::Publish: {
            auto res = receiver_.on_publish(p);
            for (const Packet& reply : res.replies) out(reply);
            if (res.violation) {
                errors.push_back("malformed publish from broker");
                break;
            }
            if (res.deliver) {
                delivered_ += 1;
                if (on_message) on_message({p.topic, p.payload, p.qos, p.dup});
            }
            break;
        }
        case PacketKind::PubRel: {
            auto res = receiver_.on_pubrel(p.packet_id);
            for (const Packet& reply : res.replies) out(reply);
            if (res.violation) errors.push_back("PubRel for unknown packet_id");
            break;
        }
        case PacketKind::PubAck: {
            auto res = sender_.on_puback(p.packet_id);
            if (res.kind == QosSender::AckKind::Done) acked_ += 1;
            if (res.kind == QosSender::AckKind::Violation)
                errors.push_back("PubAck for unknown packet_id");
            break;
        }
        case PacketKind::PubRec: {
            auto res = sender_.on_pubrec(p.packet_id, now);
            if (res.kind == QosSender::AckKind::Violation)
                errors.push_back("PubRec for unknown packet_id");
            if (res.reply) out(*res.reply);
            break;
        }
        case PacketKind::PubComp: {
            auto res = sender_.on_pubcomp(p.packet_id);
            if (res.kind == QosSender::AckKind::Done) acked_ += 1;
            if (res.kind == QosSender::AckKind::Violation)
                errors.push_back("PubComp for unknown packet_id");
            break;
        }
        case PacketKind::Disconnect:
            break;
        default:
            errors.push_back(std::string("unexpected ") + packet_kind_name(p.kind));
            break;
    }
}

void Client::tick(TimestampMs now) {
    for (const Packet& p : sender_.expired(now)) out(p);
}

}  // namespace seaflow::broker
