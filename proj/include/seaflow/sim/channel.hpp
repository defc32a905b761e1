#pragma once

#include "seaflow/core/error.hpp"
#include "seaflow/sim/node.hpp"
#include "seaflow/util/rng.hpp"

namespace seaflow::sim {

struct TransmitResult {
    enum class Status { Delivered, Lost, Deferred };
    Status status = Status::Lost;
    TimestampMs arrival_at = 0;  // Delivered
    TimestampMs retry_at = 0;    // Deferred: next legal transmit instant
};

/// Earliest instant at or after t when the duty cycle permits transmission;
/// t itself when the channel is open (or has no duty windows).
TimestampMs next_duty_open(const ChannelModel& ch, TimestampMs t);

/**
 * One frame over a channel. LinkDown and closed duty windows defer without
 * spending energy (carrier-sense first). Otherwise the battery pays
 * tx_per_byte for the whole frame whether or not it survives the loss roll.
 * Caller accrues OTA cost from the returned outcome (anything that actually
 * transmitted, Delivered or Lost).
 */
Expected<TransmitResult> transmit(NodeRuntime& node, const ChannelModel& ch,
                                  std::size_t frame_len, TimestampMs t, DetRng& rng);

}  // namespace seaflow::sim
