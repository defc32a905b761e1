#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "seaflow/broker/packet.hpp"
#include "seaflow/broker/session.hpp"
#include "seaflow/core/error.hpp"

namespace seaflow::broker {

struct ClientConfig {
    std::string client_id;
    std::int64_t retransmit_timeout_ms = 5000;
    int max_retries = 8;
    std::size_t max_inflight = 64;
};

struct Delivery {
    std::string topic;
    std::string payload;
    QoS qos = QoS::AtMostOnce;
    bool dup = false;
};

/**
 * Client - peer-side half of the broker protocol.
 *
 * Runs the same QoS machinery as the broker: acks inbound publishes, dedups
 * inbound QoS2, retransmits its own publishes on tick. `send` carries packets
 * toward the broker; the owner wires it to a link or an in-process call.
 */
class Client {
public:
    explicit Client(ClientConfig cfg);

    std::function<void(const Packet&)> send;
    std::function<void(const Delivery&)> on_message;
    /// Protocol violations observed locally (stray acks etc).
    std::vector<std::string> errors;

    void connect(const std::string& token);
    void subscribe(const std::vector<std::pair<std::string, QoS>>& filters);
    Expected<void> publish(const std::string& topic, const std::string& payload,
                           QoS qos, TimestampMs now);
    void on_packet(const Packet& p, TimestampMs now);
    void tick(TimestampMs now);

    bool connack_received() const { return connack_received_; }
    std::uint8_t connack_code() const { return connack_code_; }
    bool failed() const { return sender_.failed(); }
    std::size_t inflight() const { return sender_.inflight(); }

    /// Application-level delivery counters, for test oracles.
    std::uint64_t delivered() const { return delivered_; }
    std::uint64_t acked_publishes() const { return acked_; }

private:
    void out(const Packet& p);

    ClientConfig cfg_;
    QosSender sender_;
    QosReceiver receiver_;
    bool connack_received_ = false;
    std::uint8_t connack_code_ = 0;
    std::uint16_t next_sub_id_ = 1;
    std::uint64_t delivered_ = 0;
    std::uint64_t acked_ = 0;
};

}  // namespace seaflow::broker
