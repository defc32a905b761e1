#include "seaflow/broker/packet.hpp"

namespace seaflow::broker {

const char* packet_kind_name(PacketKind k) {
    switch (k) {
        case PacketKind::Connect: return "Connect";
        case PacketKind::ConnAck: return "ConnAck";
        case PacketKind::Publish: return "Publish";
        case PacketKind::PubAck: return "PubAck";
        case PacketKind::PubRec: return "PubRec";
        case PacketKind::PubRel: return "PubRel";
        case PacketKind::PubComp: return "PubComp";
        case PacketKind::Subscribe: return "Subscribe";
        case PacketKind::SubAck: return "SubAck";
        case PacketKind::Disconnect: return "Disconnect";
    }
    return "?";
}

Packet make_publish(std::string topic, std::string payload, QoS qos,
                    std::uint16_t packet_id, bool dup) {
    Packet p;
    p.kind = PacketKind::Publish;
    p.topic = std::move(topic);
    p.payload = std::move(payload);
    p.qos = qos;
    p.packet_id = packet_id;
    p.dup = dup;
    return p;
}

Packet make_ack(PacketKind kind, std::uint16_t packet_id) {
    Packet p;
    p.kind = kind;
    p.packet_id = packet_id;
    return p;
}

}  // namespace seaflow::broker
