#include "seaflow/sim/frame.hpp"

#include <cmath>

namespace seaflow::sim {

std::uint32_t FrameTable::add(const std::string& sensor_id) {
    auto it = index_.find(sensor_id);
    if (it != index_.end()) return it->second;
    auto idx = static_cast<std::uint32_t>(sensors_.size());
    sensors_.push_back(sensor_id);
    index_[sensor_id] = idx;
    return idx;
}

std::optional<std::uint32_t> FrameTable::index_of(const std::string& sensor_id) const {
    auto it = index_.find(sensor_id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

const std::string* FrameTable::sensor_at(std::uint32_t index) const {
    if (index >= sensors_.size()) return nullptr;
    return &sensors_[index];
}

namespace {

std::int64_t scale_value(double v) {
    return static_cast<std::int64_t>(std::llround(v * kValueScale));
}

}  // namespace

Expected<Bytes> encode_frame(const OutRecord& rec, const FrameTable& table) {
    auto idx = table.index_of(rec.sensor_id);
    if (!idx)
        return Error{Errc::ConfigError, "sensor not in frame table: " + rec.sensor_id};
    Bytes payload;
    put_varint(payload, *idx);
    put_varint(payload, zigzag_encode(rec.measured_at));
    const bool windowed = rec.count > 1;
    payload.push_back(windowed ? 1 : 0);
    put_varint(payload, zigzag_encode(scale_value(rec.value)));
    if (windowed) {
        put_varint(payload, zigzag_encode(scale_value(rec.min_value)));
        put_varint(payload, zigzag_encode(scale_value(rec.max_value)));
        put_varint(payload, rec.count);
    }
    Bytes frame;
    put_varint(frame, payload.size());
    frame.insert(frame.end(), payload.begin(), payload.end());
    return frame;
}

Expected<OutRecord> decode_frame(const Bytes& data, std::size_t& pos,
                                 const FrameTable& table) {
    auto truncated = [] {
        return Error{Errc::MalformedPacket, "acoustic frame truncated"};
    };
    auto len = get_varint(data, pos);
    if (!len || pos + *len > data.size()) return truncated();
    const std::size_t end = pos + static_cast<std::size_t>(*len);

    auto idx = get_varint(data, pos);
    if (!idx || pos > end) return truncated();
    const std::string* sensor = table.sensor_at(static_cast<std::uint32_t>(*idx));
    if (sensor == nullptr)
        return Error{Errc::MalformedPacket, "unknown sensor index in frame"};

    OutRecord rec;
    rec.sensor_id = *sensor;
    auto at = get_varint(data, pos);
    if (!at || pos > end) return truncated();
    rec.measured_at = zigzag_decode(*at);
    if (pos >= end) return truncated();
    const std::uint8_t flags = data[pos++];
    auto v = get_varint(data, pos);
    if (!v || pos > end) return truncated();
    rec.value = static_cast<double>(zigzag_decode(*v)) / kValueScale;
    rec.min_value = rec.value;
    rec.max_value = rec.value;
    rec.count = 1;
    if (flags & 1) {
        auto mn = get_varint(data, pos);
        auto mx = get_varint(data, pos);
        auto cnt = get_varint(data, pos);
        if (!mn || !mx || !cnt || pos > end) return truncated();
        rec.min_value = static_cast<double>(zigzag_decode(*mn)) / kValueScale;
        rec.max_value = static_cast<double>(zigzag_decode(*mx)) / kValueScale;
        rec.count = static_cast<std::uint32_t>(*cnt);
    }
    if (pos != end)
        return Error{Errc::MalformedPacket, "trailing bytes in acoustic frame"};
    return rec;
}

}  // namespace seaflow::sim
