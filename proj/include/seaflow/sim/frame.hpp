#pragma once

#include <map>
#include <string>
#include <vector>

#include "seaflow/core/error.hpp"
#include "seaflow/sim/model.hpp"
#include "seaflow/util/bytes.hpp"

namespace seaflow::sim {

/**
 * Acoustic frame codec: length-prefixed compact binary.
 *
 * Sensor identity crosses the water as a dictionary index; both ends hold
 * the same table, built in config order. Values travel as zigzag varints of
 * round(value * 1000), so three decimals survive the wire.
 *
 * payload := varint(sensor_index) zz(measured_at_ms) flags zz(value_scaled)
 *            [zz(min_scaled) zz(max_scaled) varint(count)]   when flags&1
 * frame   := varint(len(payload)) payload
 */
class FrameTable {
public:
    std::uint32_t add(const std::string& sensor_id);
    std::optional<std::uint32_t> index_of(const std::string& sensor_id) const;
    const std::string* sensor_at(std::uint32_t index) const;
    std::size_t size() const { return sensors_.size(); }

private:
    std::vector<std::string> sensors_;
    std::map<std::string, std::uint32_t> index_;
};

constexpr double kValueScale = 1000.0;

Expected<Bytes> encode_frame(const OutRecord& rec, const FrameTable& table);

/// Decodes one frame starting at pos; advances pos past it.
Expected<OutRecord> decode_frame(const Bytes& data, std::size_t& pos,
                                 const FrameTable& table);

}  // namespace seaflow::sim
