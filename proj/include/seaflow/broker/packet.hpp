#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace seaflow::broker {

enum class QoS : std::uint8_t {
    AtMostOnce = 0,
    AtLeastOnce = 1,
    ExactlyOnce = 2,
};

/// Wire type numbers follow MQTT 3.1.1 (unsupported kinds omitted).
enum class PacketKind : std::uint8_t {
    Connect = 1,
    ConnAck = 2,
    Publish = 3,
    PubAck = 4,
    PubRec = 5,
    PubRel = 6,
    PubComp = 7,
    Subscribe = 8,
    SubAck = 9,
    Disconnect = 14,
};

const char* packet_kind_name(PacketKind k);

/// One decoded control packet. Only the fields for the packet's kind are
/// meaningful; the rest stay defaulted so equality tests stay simple.
struct Packet {
    PacketKind kind = PacketKind::Disconnect;

    // Connect
    std::string client_id;
    std::string password;  // bearer token rides here

    // ConnAck (0 accepted, 4 bad credentials, 5 not authorized)
    std::uint8_t connack_code = 0;

    // Publish
    std::string topic;
    std::string payload;
    QoS qos = QoS::AtMostOnce;
    bool dup = false;

    // Publish (qos > 0), ack family, Subscribe, SubAck
    std::uint16_t packet_id = 0;

    // Subscribe
    std::vector<std::pair<std::string, QoS>> subscriptions;

    // SubAck (granted qos per filter, 0x80 = failure)
    std::vector<std::uint8_t> suback_codes;

    bool operator==(const Packet&) const = default;
};

Packet make_publish(std::string topic, std::string payload, QoS qos,
                    std::uint16_t packet_id = 0, bool dup = false);
Packet make_ack(PacketKind kind, std::uint16_t packet_id);

}  // namespace seaflow::broker
