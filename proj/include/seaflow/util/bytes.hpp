#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace seaflow {

using Bytes = std::vector<std::uint8_t>;

/// LEB128-style unsigned varint.
void put_varint(Bytes& out, std::uint64_t v);
std::optional<std::uint64_t> get_varint(const Bytes& in, size_t& pos);

constexpr std::uint64_t zigzag_encode(std::int64_t v) {
    return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
}
constexpr std::int64_t zigzag_decode(std::uint64_t v) {
    return static_cast<std::int64_t>(v >> 1) ^ -static_cast<std::int64_t>(v & 1);
}

std::string to_hex(const Bytes& data);
std::string to_hex(const std::string& data);
std::optional<Bytes> from_hex(const std::string& hex);

std::string base64_encode(const std::string& data);
std::optional<std::string> base64_decode(const std::string& b64);

}  // namespace seaflow
