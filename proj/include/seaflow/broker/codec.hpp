#pragma once

#include <cstddef>
#include <string>

#include "seaflow/broker/packet.hpp"
#include "seaflow/core/error.hpp"
#include "seaflow/util/bytes.hpp"

namespace seaflow::broker {

/// MQTT 3.1.1 frame for the supported packet kinds. Rejects invariant
/// breaches (qos>0 publish with id 0, wildcard publish topic, empty
/// subscribe) instead of emitting illegal frames.
Expected<Bytes> encode_packet(const Packet& p);

enum class DecodeStatus { Ok, NeedMore, Malformed };

struct DecodeResult {
    DecodeStatus status = DecodeStatus::Malformed;
    Packet packet;
    std::size_t consumed = 0;  // bytes eaten on Ok
    std::string error;         // set on Malformed
};

/// Incremental decode from a stream buffer: NeedMore means the frame is not
/// complete yet, Malformed means the connection should be dropped.
DecodeResult decode_packet(const std::uint8_t* data, std::size_t len);

/// Whole-buffer convenience; trailing bytes count as malformed.
Expected<Packet> decode_one(const Bytes& frame);

}  // namespace seaflow::broker
