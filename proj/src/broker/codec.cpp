#include "seaflow/broker/codec.hpp"

#include "seaflow/broker/topic.hpp"

namespace seaflow::broker {

namespace {

void put_u16(Bytes& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

void put_string(Bytes& out, const std::string& s) {
    put_u16(out, static_cast<std::uint16_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

// remaining-length field: 7 bits per byte, continuation in the high bit
void put_remaining(Bytes& out, std::size_t n) {
    do {
        std::uint8_t b = n % 128;
        n /= 128;
        if (n > 0) b |= 0x80;
        out.push_back(b);
    } while (n > 0);
}

Bytes with_header(std::uint8_t first_byte, const Bytes& body) {
    Bytes out;
    out.push_back(first_byte);
    put_remaining(out, body.size());
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

Error malformed(std::string msg) { return {Errc::MalformedPacket, std::move(msg)}; }

struct Reader {
    const std::uint8_t* data;
    std::size_t len;
    std::size_t pos = 0;

    bool u8(std::uint8_t& v) {
        if (pos + 1 > len) return false;
        v = data[pos++];
        return true;
    }
    bool u16(std::uint16_t& v) {
        if (pos + 2 > len) return false;
        v = static_cast<std::uint16_t>((data[pos] << 8) | data[pos + 1]);
        pos += 2;
        return true;
    }
    bool str(std::string& v) {
        std::uint16_t n = 0;
        if (!u16(n)) return false;
        if (pos + n > len) return false;
        v.assign(reinterpret_cast<const char*>(data + pos), n);
        pos += n;
        return true;
    }
    std::size_t rest() const { return len - pos; }
};

}  // namespace

Expected<Bytes> encode_packet(const Packet& p) {
    Bytes body;
    switch (p.kind) {
        case PacketKind::Connect: {
            put_string(body, "MQTT");
            body.push_back(0x04);  // protocol level 3.1.1
            std::uint8_t flags = 0x02;  // clean session
            if (!p.password.empty()) flags |= 0xC0;  // username+password present
            body.push_back(flags);
            put_u16(body, 0);  // keepalive unused under the virtual clock
            put_string(body, p.client_id);
            if (!p.password.empty()) {
                put_string(body, "");  // username carries nothing
                put_string(body, p.password);
            }
            return with_header(0x10, body);
        }
        case PacketKind::ConnAck:
            body.push_back(0x00);  // session-present: persistent sessions unsupported
            body.push_back(p.connack_code);
            return with_header(0x20, body);
        case PacketKind::Publish: {
            if (!valid_topic(p.topic))
                return Error{Errc::InvalidTopic, "publish topic invalid: " + p.topic};
            if (p.qos != QoS::AtMostOnce && p.packet_id == 0)
                return malformed("qos>0 publish requires nonzero packet_id");
            if (p.qos == QoS::AtMostOnce && p.dup)
                return malformed("dup is only legal on qos>0 resends");
            put_string(body, p.topic);
            if (p.qos != QoS::AtMostOnce) put_u16(body, p.packet_id);
            body.insert(body.end(), p.payload.begin(), p.payload.end());
            std::uint8_t first = 0x30;
            if (p.dup) first |= 0x08;
            first |= static_cast<std::uint8_t>(p.qos) << 1;
            return with_header(first, body);
        }
        case PacketKind::PubAck:
        case PacketKind::PubRec:
        case PacketKind::PubRel:
        case PacketKind::PubComp: {
            if (p.packet_id == 0) return malformed("ack requires nonzero packet_id");
            put_u16(body, p.packet_id);
            std::uint8_t first =
                static_cast<std::uint8_t>(static_cast<std::uint8_t>(p.kind) << 4);
            if (p.kind == PacketKind::PubRel) first |= 0x02;
            return with_header(first, body);
        }
        case PacketKind::Subscribe: {
            if (p.packet_id == 0) return malformed("subscribe requires packet_id");
            if (p.subscriptions.empty())
                return malformed("subscribe requires at least one filter");
            put_u16(body, p.packet_id);
            for (const auto& [filter, qos] : p.subscriptions) {
                if (!valid_filter(filter))
                    return Error{Errc::InvalidTopic, "bad filter: " + filter};
                put_string(body, filter);
                body.push_back(static_cast<std::uint8_t>(qos));
            }
            return with_header(0x82, body);
        }
        case PacketKind::SubAck: {
            if (p.packet_id == 0) return malformed("suback requires packet_id");
            if (p.suback_codes.empty()) return malformed("suback requires codes");
            put_u16(body, p.packet_id);
            for (std::uint8_t c : p.suback_codes) body.push_back(c);
            return with_header(0x90, body);
        }
        case PacketKind::Disconnect:
            return with_header(0xE0, body);
    }
    return malformed("unsupported packet kind");
}

DecodeResult decode_packet(const std::uint8_t* data, std::size_t len) {
    DecodeResult r;
    if (len < 2) {
        r.status = DecodeStatus::NeedMore;
        return r;
    }
    const std::uint8_t first = data[0];
    const std::uint8_t type = first >> 4;
    const std::uint8_t flags = first & 0x0f;

    // remaining length varint, max 4 bytes
    std::size_t remaining = 0;
    std::size_t multiplier = 1;
    std::size_t header_len = 1;
    while (true) {
        if (header_len >= len) {
            r.status = DecodeStatus::NeedMore;
            return r;
        }
        const std::uint8_t b = data[header_len++];
        remaining += static_cast<std::size_t>(b & 0x7f) * multiplier;
        if ((b & 0x80) == 0) break;
        multiplier *= 128;
        if (header_len - 1 >= 4) {
            r.error = "remaining length overlong";
            return r;
        }
    }
    if (len < header_len + remaining) {
        r.status = DecodeStatus::NeedMore;
        return r;
    }

    Reader in{data + header_len, remaining};
    Packet& p = r.packet;
    r.consumed = header_len + remaining;
    auto fail = [&](std::string msg) {
        r.status = DecodeStatus::Malformed;
        r.error = std::move(msg);
        return r;
    };
    auto need_flags = [&](std::uint8_t want) { return flags == want; };

    switch (type) {
        case 1: {  // Connect
            if (!need_flags(0x00)) return fail("connect flags reserved");
            p.kind = PacketKind::Connect;
            std::string proto;
            std::uint8_t level = 0, cflags = 0;
            std::uint16_t keepalive = 0;
            if (!in.str(proto) || !in.u8(level) || !in.u8(cflags) || !in.u16(keepalive))
                return fail("connect header truncated");
            if (proto != "MQTT" || level != 0x04)
                return fail("unsupported protocol " + proto);
            if (cflags & 0x01) return fail("connect reserved bit set");
            if (cflags & 0x04) return fail("will messages unsupported");
            if (!in.str(p.client_id)) return fail("client_id truncated");
            if (cflags & 0x80) {
                std::string username;
                if (!in.str(username)) return fail("username truncated");
            }
            if (cflags & 0x40) {
                if (!(cflags & 0x80)) return fail("password without username");
                if (!in.str(p.password)) return fail("password truncated");
            }
            break;
        }
        case 2: {  // ConnAck
            if (!need_flags(0x00)) return fail("connack flags reserved");
            p.kind = PacketKind::ConnAck;
            std::uint8_t present = 0;
            if (!in.u8(present) || !in.u8(p.connack_code))
                return fail("connack truncated");
            break;
        }
        case 3: {  // Publish
            p.kind = PacketKind::Publish;
            p.dup = (flags & 0x08) != 0;
            const std::uint8_t qos_bits = (flags >> 1) & 0x03;
            if (qos_bits == 3) return fail("qos 3 is reserved");
            if (flags & 0x01) return fail("retain unsupported");
            p.qos = static_cast<QoS>(qos_bits);
            if (p.qos == QoS::AtMostOnce && p.dup) return fail("dup on qos0");
            if (!in.str(p.topic)) return fail("topic truncated");
            if (!valid_topic(p.topic)) return fail("publish topic invalid");
            if (p.qos != QoS::AtMostOnce) {
                if (!in.u16(p.packet_id)) return fail("packet_id truncated");
                if (p.packet_id == 0) return fail("packet_id 0 on qos>0");
            }
            p.payload.assign(reinterpret_cast<const char*>(in.data + in.pos),
                             in.rest());
            in.pos = in.len;
            break;
        }
        case 4:
        case 5:
        case 6:
        case 7: {  // PubAck / PubRec / PubRel / PubComp
            const std::uint8_t want = type == 6 ? 0x02 : 0x00;
            if (!need_flags(want)) return fail("ack flags reserved");
            if (remaining != 2) return fail("ack length must be 2");
            p.kind = static_cast<PacketKind>(type);
            if (!in.u16(p.packet_id) || p.packet_id == 0)
                return fail("ack packet_id invalid");
            break;
        }
        case 8: {  // Subscribe
            if (!need_flags(0x02)) return fail("subscribe flags must be 0010");
            p.kind = PacketKind::Subscribe;
            if (!in.u16(p.packet_id) || p.packet_id == 0)
                return fail("subscribe packet_id invalid");
            while (in.rest() > 0) {
                std::string filter;
                std::uint8_t q = 0;
                if (!in.str(filter) || !in.u8(q)) return fail("subscription truncated");
                if (q > 2) return fail("subscription qos invalid");
                if (!valid_filter(filter)) return fail("subscription filter invalid");
                p.subscriptions.emplace_back(std::move(filter), static_cast<QoS>(q));
            }
            if (p.subscriptions.empty()) return fail("subscribe without filters");
            break;
        }
        case 9: {  // SubAck
            if (!need_flags(0x00)) return fail("suback flags reserved");
            p.kind = PacketKind::SubAck;
            if (!in.u16(p.packet_id) || p.packet_id == 0)
                return fail("suback packet_id invalid");
            while (in.rest() > 0) {
                std::uint8_t c = 0;
                in.u8(c);
                if (c > 2 && c != 0x80) return fail("suback code invalid");
                p.suback_codes.push_back(c);
            }
            if (p.suback_codes.empty()) return fail("suback without codes");
            break;
        }
        case 14: {  // Disconnect
            if (!need_flags(0x00)) return fail("disconnect flags reserved");
            if (remaining != 0) return fail("disconnect carries no body");
            p.kind = PacketKind::Disconnect;
            break;
        }
        default:
            return fail("unsupported packet type " + std::to_string(type));
    }
    if (in.pos != in.len) return fail("trailing bytes in packet body");
    r.status = DecodeStatus::Ok;
    return r;
}

Expected<Packet> decode_one(const Bytes& frame) {
    DecodeResult r = decode_packet(frame.data(), frame.size());
    switch (r.status) {
        case DecodeStatus::Ok:
            if (r.consumed != frame.size())
                return Error{Errc::MalformedPacket, "trailing bytes after frame"};
            return r.packet;
        case DecodeStatus::NeedMore:
            return Error{Errc::MalformedPacket, "truncated frame"};
        case DecodeStatus::Malformed:
            return Error{Errc::MalformedPacket, r.error};
    }
    return Error{Errc::MalformedPacket, "unreachable"};
}

}  // namespace seaflow::broker
