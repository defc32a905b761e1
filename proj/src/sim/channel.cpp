#include "seaflow/sim/channel.hpp"

#include <cmath>

namespace seaflow::sim {

namespace {
constexpr std::int64_t kDayMs = 86'400'000;
}

TimestampMs next_duty_open(const ChannelModel& ch, TimestampMs t) {
    if (ch.duty.empty()) return t;
    const std::int64_t second_of_day = (t / 1000) % 86400;
    for (const DutyWindow& w : ch.duty) {
        if (second_of_day >= w.start_s && second_of_day < w.end_s) return t;
    }
    const TimestampMs day_start = t - (t % kDayMs);
    TimestampMs best = 0;
    bool have = false;
    for (const DutyWindow& w : ch.duty) {
        TimestampMs open = day_start + w.start_s * 1000;
        if (open <= t) open += kDayMs;
        if (!have || open < best) {
            best = open;
            have = true;
        }
    }
    return best;
}

Expected<TransmitResult> transmit(NodeRuntime& node, const ChannelModel& ch,
                                  std::size_t frame_len, TimestampMs t, DetRng& rng) {
    if (!node.alive_at(t))
        return Error{Errc::NodeDead, node.node_id() + " cannot transmit while dead"};

    TransmitResult r;
    if (auto until = ch.linkdown_until(t)) {
        r.status = TransmitResult::Status::Deferred;
        r.retry_at = *until;
        return r;
    }
    const TimestampMs open = next_duty_open(ch, t);
    if (open > t) {
        r.status = TransmitResult::Status::Deferred;
        r.retry_at = open;
        return r;
    }

    const std::int64_t want =
        node.costs().tx_per_byte_nj * static_cast<std::int64_t>(frame_len);
    const std::int64_t got = node.debit(want, EnergyKind::Tx);
    node.tx_bytes += frame_len;
    if (got < want)
        return Error{Errc::NodeDead, node.node_id() + " battery exhausted mid-frame"};

    if (rng.chance(ch.frame_loss_prob)) {
        r.status = TransmitResult::Status::Lost;
        return r;
    }
    if (ch.bit_error_rate > 0.0) {
        const double frame_error =
            1.0 - std::pow(1.0 - ch.bit_error_rate,
                           static_cast<double>(frame_len) * 8.0);
        if (rng.chance(frame_error)) {
            r.status = TransmitResult::Status::Lost;
            return r;
        }
    }

    TimestampMs arrival = t + static_cast<TimestampMs>(std::llround(
                                  ch.base_latency_s * 1000.0));
    if (ch.bandwidth_bps > 0.0) {
        arrival += static_cast<TimestampMs>(
            std::llround(static_cast<double>(frame_len) * 8000.0 / ch.bandwidth_bps));
    }
    if (ch.jitter_s > 0.0) {
        const auto jitter_ms = static_cast<std::uint64_t>(ch.jitter_s * 1000.0);
        if (jitter_ms > 0) arrival += static_cast<TimestampMs>(rng.next_below(jitter_ms));
    }
    r.status = TransmitResult::Status::Delivered;
    r.arrival_at = arrival;
    return r;
}

}  // namespace seaflow::sim
