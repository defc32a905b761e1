#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "seaflow/broker/packet.hpp"
#include "seaflow/core/time.hpp"

namespace seaflow::broker {

/// Recently retired packet ids. Re-acks for these are tolerated (the peer may
/// not have seen our final ack); ids outside ring and inflight are protocol
/// violations.
class CompletedRing {
public:
    explicit CompletedRing(std::size_t capacity = 1024) : capacity_(capacity) {}
    void add(std::uint16_t id);
    bool contains(std::uint16_t id) const { return lookup_.count(id) > 0; }

private:
    std::size_t capacity_;
    std::deque<std::uint16_t> order_;
    std::multiset<std::uint16_t> lookup_;
};

/**
 * QosSender - outbound half of the QoS 1/2 handshakes.
 *
 * Owns the inflight map and retransmission deadlines. QoS1 entries wait for
 * PubAck; QoS2 entries go Publish -> PubRec -> PubRel -> PubComp. Resends
 * carry dup=true and the original packet_id. After max_retries expiries the
 * sender is failed and stops accepting work.
 */
class QosSender {
public:
    QosSender(std::int64_t retransmit_timeout_ms, int max_retries,
              std::size_t max_inflight)
        : timeout_ms_(retransmit_timeout_ms),
          max_retries_(max_retries),
          max_inflight_(max_inflight) {}

    /// Next free nonzero packet id, round-robin over 1..65535.
    std::uint16_t alloc_id();

    /// Registers a qos>0 publish and arms its deadline. Returns false when
    /// the inflight window is full or the sender has failed.
    bool start(const Packet& publish, TimestampMs now);

    enum class AckKind { Progress, Done, Duplicate, Violation };
    struct AckResult {
        AckKind kind = AckKind::Violation;
        std::optional<Packet> reply;  // PubRel when a PubRec makes progress
    };
    AckResult on_puback(std::uint16_t id);
    AckResult on_pubrec(std::uint16_t id, TimestampMs now);
    AckResult on_pubcomp(std::uint16_t id);

    /// Packets to retransmit; marks the sender failed once an entry passes
    /// max_retries.
    std::vector<Packet> expired(TimestampMs now);

    bool failed() const { return failed_; }
    std::size_t inflight() const { return outbound_.size(); }
    std::size_t max_inflight() const { return max_inflight_; }

private:
    enum class Phase { AwaitingPubAck, AwaitingPubRec, AwaitingPubComp };
    struct Entry {
        Packet publish;  // resent verbatim apart from the dup flag
        Phase phase = Phase::AwaitingPubAck;
        TimestampMs deadline = 0;
        int retries = 0;
    };

    std::int64_t timeout_ms_;
    int max_retries_;
    std::size_t max_inflight_;
    std::uint16_t next_id_ = 1;
    bool failed_ = false;
    std::map<std::uint16_t, Entry> outbound_;
    CompletedRing completed_;
};

/**
 * QosReceiver - inbound half.
 *
 * QoS2 publishes are delivered to the application on first receipt and the id
 * is held in the seen-set until PubRel, so replays between Publish and PubRel
 * never deliver twice. A PubRel for a recently completed id gets its PubComp
 * again; a PubRel for an id never seen is a violation.
 */
class QosReceiver {
public:
    struct RecvResult {
        bool deliver = false;
        std::vector<Packet> replies;
        bool violation = false;
    };

    RecvResult on_publish(const Packet& p);
    RecvResult on_pubrel(std::uint16_t id);

    bool seen(std::uint16_t id) const { return seen_.count(id) > 0; }

private:
    std::set<std::uint16_t> seen_;  // ids between Publish and PubRel
    CompletedRing completed_;
};

}  // namespace seaflow::broker
