#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "seaflow/auth/identity.hpp"
#include "seaflow/broker/packet.hpp"
#include "seaflow/broker/session.hpp"
#include "seaflow/core/error.hpp"
#include "seaflow/metrics/registry.hpp"

namespace seaflow::broker {

struct BrokerConfig {
    std::string name = "broker";  // instance label on metrics
    std::int64_t retransmit_timeout_ms = 5000;
    int max_retries = 8;
    std::size_t max_inflight = 64;
    /// Tokens older than this skew are rejected at Connect; 0 under the
    /// virtual clock.
    std::int64_t clock_skew_ms = 0;
};

using ConnId = std::uint64_t;
using PacketSink = std::function<void(const Packet&)>;

/**
 * Broker - topic-routing core used for both the ingestion and the core
 * instance; the two differ only in config and the principal store handed in.
 *
 * Single-threaded: callers serialize access and drive time through `now`
 * arguments plus tick(). Wire clients attach with accept() and speak packets;
 * pipeline stages attach with accept_local() and an already-verified
 * identity. Authorization is enforced on publish and again per delivery, so
 * a subscription never outlives the grants that justified it.
 */
class Broker {
public:
    Broker(BrokerConfig cfg, const auth::PrincipalStore* principals,
           std::string secret, metrics::Registry* metrics = nullptr);

    /// Registers a transport connection; the broker emits packets for this
    /// peer through `sink`. The session starts unauthenticated until Connect.
    ConnId accept(PacketSink sink);

    /// Attaches an in-process session, already authenticated.
    ConnId accept_local(const std::string& client_id, auth::AuthContext ctx,
                        PacketSink sink);

    void handle_packet(ConnId conn, const Packet& p, TimestampMs now);

    /// Retransmits expired handshakes; sessions exceeding max_retries fail
    /// and surface through on_session_failed.
    void tick(TimestampMs now);

    /// In-process publish for pipeline stages (same routing and auth path as
    /// a wire Publish from this session).
    Expected<void> publish(ConnId conn, const std::string& topic,
                           const std::string& payload, QoS qos, TimestampMs now);

    /// In-process subscribe; granted QoS mirrors SubAck.
    Expected<std::vector<QoS>> subscribe(
        ConnId conn, const std::vector<std::pair<std::string, QoS>>& filters,
        TimestampMs now);

    void disconnect(ConnId conn);

    std::function<void(const std::string& client_id, const std::string& reason)>
        on_session_failed;

    bool session_failed(ConnId conn) const;
    bool session_connected(ConnId conn) const;
    std::size_t session_count() const { return sessions_.size(); }
    const BrokerConfig& config() const { return cfg_; }

    /// Messages accepted from publishers (after dedup), per topic root.
    std::uint64_t accepted_publishes() const { return accepted_publishes_; }

private:
    struct Session {
        ConnId conn = 0;
        std::string client_id;
        bool connected = false;
        bool failed = false;
        bool local = false;
        auth::AuthContext auth;
        PacketSink sink;
        QosSender sender;
        QosReceiver receiver;
        std::vector<std::pair<std::string, QoS>> subscriptions;

        Session(const BrokerConfig& cfg)
            : sender(cfg.retransmit_timeout_ms, cfg.max_retries, cfg.max_inflight) {}
    };

    Session* find(ConnId conn);
    const Session* find(ConnId conn) const;
    void send(Session& s, const Packet& p);
    void fail_session(Session& s, const std::string& reason);
    void route(const Packet& publish, TimestampMs now);
    void deliver(Session& sub, const Packet& publish, QoS effective, TimestampMs now);
    void update_inflight_gauge();
    void count(const char* metric, const std::string& org, double delta = 1);

    BrokerConfig cfg_;
    const auth::PrincipalStore* principals_;
    std::string secret_;
    metrics::Registry* metrics_;
    ConnId next_conn_ = 1;
    std::map<ConnId, std::unique_ptr<Session>> sessions_;
    std::uint64_t accepted_publishes_ = 0;
};

}  // namespace seaflow::broker
