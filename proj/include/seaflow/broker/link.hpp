#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "seaflow/broker/codec.hpp"
#include "seaflow/broker/packet.hpp"
#include "seaflow/util/rng.hpp"
#include "seaflow/util/scheduler.hpp"

namespace seaflow::broker {

struct LinkParams {
    double drop_p = 0.0;      // independent per frame
    double dup_p = 0.0;       // extra copy of a frame that survived the drop roll
    std::int64_t delay_ms = 0;
    std::int64_t dup_gap_ms = 1;  // spacing of the duplicate copy
};

/**
 * LossyLink - one direction of an unreliable transport.
 *
 * Every packet crosses the wire codec, so link tests double as codec tests.
 * Drop and duplicate decisions come from a dedicated RNG substream; two links
 * with the same id and seed replay identical fates.
 */
class LossyLink {
public:
    LossyLink(VirtualScheduler& sched, LinkParams params, std::uint64_t seed,
              const std::string& link_id);

    /// Destination; receives decoded packets after loss/dup/delay treatment.
    std::function<void(const Packet&)> deliver;

    /// Source side entry point.
    void offer(const Packet& p);

    /// Loss parameters may change mid-run (fault scripts, test setup).
    void set_params(LinkParams params) { params_ = params; }
    const LinkParams& params() const { return params_; }

    std::uint64_t offered() const { return offered_; }
    std::uint64_t dropped() const { return dropped_; }
    std::uint64_t duplicated() const { return duplicated_; }
    std::uint64_t delivered_frames() const { return delivered_frames_; }
    std::uint64_t bytes_carried() const { return bytes_carried_; }

private:
    void schedule(const Bytes& frame, std::int64_t delay);

    VirtualScheduler& sched_;
    LinkParams params_;
    DetRng rng_;
    std::uint64_t offered_ = 0;
    std::uint64_t dropped_ = 0;
    std::uint64_t duplicated_ = 0;
    std::uint64_t delivered_frames_ = 0;
    std::uint64_t bytes_carried_ = 0;
};

/// Convenience: wires client <-> broker through two lossy directions.
struct DuplexLink {
    LossyLink up;    // client -> broker
    LossyLink down;  // broker -> client

    DuplexLink(VirtualScheduler& sched, LinkParams up_params, LinkParams down_params,
               std::uint64_t seed, const std::string& link_id)
        : up(sched, up_params, seed, link_id + "/up"),
          down(sched, down_params, seed, link_id + "/down") {}
};

}  // namespace seaflow::broker
