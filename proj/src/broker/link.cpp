#include "seaflow/broker/link.hpp"

namespace seaflow::broker {

LossyLink::LossyLink(VirtualScheduler& sched, LinkParams params, std::uint64_t seed,
                     const std::string& link_id)
    : sched_(sched), params_(params), rng_(DetRng::for_entity(seed, link_id)) {}

void LossyLink::offer(const Packet& p) {
    offered_ += 1;
    auto frame = encode_packet(p);
    if (!frame.ok()) {
        dropped_ += 1;  // unencodable packets never reach the wire
        return;
    }
    if (rng_.chance(params_.drop_p)) {
        dropped_ += 1;
        return;
    }
    schedule(frame.value(), params_.delay_ms);
    if (rng_.chance(params_.dup_p)) {
        duplicated_ += 1;
        schedule(frame.value(), params_.delay_ms + params_.dup_gap_ms);
    }
}

void LossyLink::schedule(const Bytes& frame, std::int64_t delay) {
    bytes_carried_ += frame.size();
    sched_.after(delay, [this, frame]() {
        delivered_frames_ += 1;
        auto decoded = decode_one(frame);
        if (decoded.ok() && deliver) deliver(decoded.value());
    });
}

}  // namespace seaflow::broker
