#include "seaflow/broker/session.hpp"

namespace seaflow::broker {

void CompletedRing::add(std::uint16_t id) {
    order_.push_back(id);
    lookup_.insert(id);
    if (order_.size() > capacity_) {
        lookup_.erase(lookup_.find(order_.front()));
        order_.pop_front();
    }
}

std::uint16_t QosSender::alloc_id() {
    for (int tries = 0; tries < 65535; ++tries) {
        std::uint16_t id = next_id_;
        next_id_ = next_id_ == 65535 ? 1 : static_cast<std::uint16_t>(next_id_ + 1);
        if (outbound_.find(id) == outbound_.end()) return id;
    }
    return 0;  // 65535 concurrent inflight ids; unreachable with sane windows
}

bool QosSender::start(const Packet& publish, TimestampMs now) {
    if (failed_ || outbound_.size() >= max_inflight_) return false;
    if (publish.qos == QoS::AtMostOnce || publish.packet_id == 0) return false;
    Entry e;
    e.publish = publish;
    e.phase = publish.qos == QoS::AtLeastOnce ? Phase::AwaitingPubAck
                                              : Phase::AwaitingPubRec;
    e.deadline = now + timeout_ms_;
    auto [it, inserted] = outbound_.emplace(publish.packet_id, std::move(e));
    (void)it;
    return inserted;
}

QosSender::AckResult QosSender::on_puback(std::uint16_t id) {
    auto it = outbound_.find(id);
    if (it == outbound_.end()) {
        if (completed_.contains(id)) return {AckKind::Duplicate, std::nullopt};
        return {AckKind::Violation, std::nullopt};
    }
    if (it->second.phase != Phase::AwaitingPubAck)
        return {AckKind::Violation, std::nullopt};
    outbound_.erase(it);
    completed_.add(id);
    return {AckKind::Done, std::nullopt};
}

QosSender::AckResult QosSender::on_pubrec(std::uint16_t id, TimestampMs now) {
    auto it = outbound_.find(id);
    if (it == outbound_.end()) {
        // PubRel may have been lost; repeat it so the peer can finish
        if (completed_.contains(id))
            return {AckKind::Duplicate, make_ack(PacketKind::PubRel, id)};
        return {AckKind::Violation, std::nullopt};
    }
    Entry& e = it->second;
    if (e.phase == Phase::AwaitingPubComp) {
        // duplicate PubRec: answer with PubRel again
        return {AckKind::Duplicate, make_ack(PacketKind::PubRel, id)};
    }
    if (e.phase != Phase::AwaitingPubRec) return {AckKind::Violation, std::nullopt};
    e.phase = Phase::AwaitingPubComp;
    e.retries = 0;
    e.deadline = now + timeout_ms_;
    return {AckKind::Progress, make_ack(PacketKind::PubRel, id)};
}

QosSender::AckResult QosSender::on_pubcomp(std::uint16_t id) {
    auto it = outbound_.find(id);
    if (it == outbound_.end()) {
        if (completed_.contains(id)) return {AckKind::Duplicate, std::nullopt};
        return {AckKind::Violation, std::nullopt};
    }
    if (it->second.phase != Phase::AwaitingPubComp)
        return {AckKind::Violation, std::nullopt};
    outbound_.erase(it);
    completed_.add(id);
    return {AckKind::Done, std::nullopt};
}

std::vector<Packet> QosSender::expired(TimestampMs now) {
    std::vector<Packet> resend;
    if (failed_) return resend;
    for (auto& [id, e] : outbound_) {
        if (e.deadline > now) continue;
        if (e.retries >= max_retries_) {
            failed_ = true;
            resend.clear();
            return resend;
        }
        e.retries += 1;
        e.deadline = now + timeout_ms_;
        if (e.phase == Phase::AwaitingPubComp) {
            resend.push_back(make_ack(PacketKind::PubRel, id));
        } else {
            Packet p = e.publish;
            p.dup = true;
            resend.push_back(std::move(p));
        }
    }
    return resend;
}

QosReceiver::RecvResult QosReceiver::on_publish(const Packet& p) {
    RecvResult r;
    switch (p.qos) {
        case QoS::AtMostOnce:
            r.deliver = true;
            return r;
        case QoS::AtLeastOnce:
            if (p.packet_id == 0) {
                r.violation = true;
                return r;
            }
            r.deliver = true;  // duplicates re-deliver; at-least-once permits it
            r.replies.push_back(make_ack(PacketKind::PubAck, p.packet_id));
            return r;
        case QoS::ExactlyOnce: {
            if (p.packet_id == 0) {
                r.violation = true;
                return r;
            }
            const bool first = seen_.insert(p.packet_id).second;
            r.deliver = first;
            r.replies.push_back(make_ack(PacketKind::PubRec, p.packet_id));
            return r;
        }
    }
    r.violation = true;
    return r;
}

QosReceiver::RecvResult QosReceiver::on_pubrel(std::uint16_t id) {
    RecvResult r;
    auto it = seen_.find(id);
    if (it != seen_.end()) {
        seen_.erase(it);
        completed_.add(id);
        r.replies.push_back(make_ack(PacketKind::PubComp, id));
        return r;
    }
    if (completed_.contains(id)) {
        // our PubComp was lost; repeat it
        r.replies.push_back(make_ack(PacketKind::PubComp, id));
        return r;
    }
    r.violation = true;
    return r;
}

}  // namespace seaflow::broker
