#include <doctest.h>

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "seaflow/auth/identity.hpp"
#include "seaflow/broker/broker.hpp"
#include "seaflow/broker/client.hpp"
#include "seaflow/broker/codec.hpp"
#include "seaflow/broker/link.hpp"
#include "seaflow/broker/topic.hpp"
#include "seaflow/util/rng.hpp"
#include "seaflow/util/scheduler.hpp"

using namespace seaflow;
using namespace seaflow::broker;

namespace {

const std::string kSecret = "broker-test-secret";

struct Fixture {
    auth::PrincipalStore store;

    Fixture() {
        auto s = auth::PrincipalStore::from_json_text(R"({
          "principals": [
            {"principal_id": "prod7", "org_id": "org7", "roles": ["Producer"]},
            {"principal_id": "viewer", "org_id": "acme", "roles": ["Consumer"]},
            {"principal_id": "spy", "org_id": "evil", "roles": ["Consumer"]},
            {"principal_id": "ops", "org_id": "desk", "roles": ["Operator"]}
          ]})");
        REQUIRE(s.ok());
        store = std::move(s.value());
    }

    std::string token(const std::string& principal, std::vector<auth::Grant> grants,
                      TimestampMs now = 0, std::int64_t ttl_s = 86400) {
        auto tok = auth::issue_token(store, {principal, std::move(grants), ttl_s},
                                     now, kSecret);
        REQUIRE(tok.ok());
        return serialize_token(tok.value(), kSecret);
    }

    auth::AuthContext ctx(const std::string& principal, std::vector<auth::Grant> grants,
                          TimestampMs now = 0) {
        auto c = auth::verify_token(store, token(principal, std::move(grants), now),
                                    now, kSecret);
        REQUIRE(c.ok());
        return std::move(c.value());
    }

    auth::Grant pub7() { return {auth::Action::Publish, "", {}, "org7"}; }
    auth::Grant sub_all() { return {auth::Action::Subscribe, "#", {}, ""}; }
};

const char* kTopic = "data/open_access/org7/p1/temperature";

}  // namespace

TEST_CASE("topic filter matching") {
    CHECK(match_filter("data/+/org7/#", "data/open/org7/p1/temp"));
    CHECK(!match_filter("data/open", "data/open/x"));
    CHECK(match_filter("#", "a"));
    CHECK(match_filter("#", "data/open/org7/p1/temp"));
    CHECK(match_filter("sport/#", "sport"));  // '#' includes the parent level
    CHECK(match_filter("a/b", "a/b"));
    CHECK(!match_filter("a/b", "a"));
    CHECK(!match_filter("a/+", "a/b/c"));
    CHECK(match_filter("a/+/c", "a/x/c"));
    CHECK(!match_filter("+", "a/b"));

    CHECK(valid_filter("#"));
    CHECK(valid_filter("a/+/b"));
    CHECK(!valid_filter("a/#/b"));   // '#' must be final
    CHECK(!valid_filter("a+b"));     // '+' must fill the level
    CHECK(!valid_filter("a/b#"));
    CHECK(!valid_filter(""));
    CHECK(valid_topic("a/b"));
    CHECK(!valid_topic("a/+"));
    CHECK(!valid_topic(""));
}

TEST_CASE("codec round-trips a hand-assembled reference frame") {
    Packet p = make_publish("a/b", "x", QoS::AtLeastOnce, 7);
    auto frame = encode_packet(p);
    REQUIRE(frame.ok());
    // fixed header 0x32 = publish qos1, remaining 8,
    // topic len 3 "a/b", packet id 7, payload "x"
    Bytes want = {0x32, 0x08, 0x00, 0x03, 'a', '/', 'b', 0x00, 0x07, 'x'};
    CHECK(frame.value() == want);
    auto back = decode_one(frame.value());
    REQUIRE(back.ok());
    CHECK(back.value() == p);
}

TEST_CASE("codec rejects malformed input") {
    CHECK(!decode_one({}).ok());
    CHECK(!decode_one({0x32}).ok());              // truncated fixed header
    CHECK(!decode_one({0x32, 0x08, 0x00}).ok());  // truncated body
    CHECK(!decode_one({0x36, 0x02, 0x00, 0x01}).ok());  // qos 3 reserved
    CHECK(!decode_one({0x62, 0x02, 0x00, 0x00}).ok());  // pubrel id 0
    CHECK(!decode_one({0x60, 0x02, 0x00, 0x01}).ok());  // pubrel flags wrong
    CHECK(!decode_one({0xF0, 0x00}).ok());              // reserved type 15
    CHECK(!decode_one({0xE0, 0x01, 0x00}).ok());        // disconnect with body

    // encode-side invariants
    CHECK(!encode_packet(make_publish("a", "x", QoS::AtLeastOnce, 0)).ok());
    CHECK(!encode_packet(make_publish("a/+", "x", QoS::AtMostOnce)).ok());
    Packet sub;
    sub.kind = PacketKind::Subscribe;
    sub.packet_id = 1;
    CHECK(!encode_packet(sub).ok());  // no filters
}

TEST_CASE("codec round-trip property over randomized packets") {
    DetRng rng = DetRng::for_entity(901, "codec-roundtrip");
    auto rand_string = [&](std::size_t max_len) {
        std::string s;
        std::size_t n = rng.next_below(max_len + 1);
        for (std::size_t i = 0; i < n; ++i)
            s += static_cast<char>('a' + rng.next_below(26));
        return s;
    };
    int done = 0;
    for (int i = 0; i < 4000; ++i) {
        Packet p;
        switch (rng.next_below(10)) {
            case 0: {
                p.kind = PacketKind::Connect;
                p.client_id = rand_string(12);
                p.password = rand_string(40);
                break;
            }
            case 1: {
                p.kind = PacketKind::ConnAck;
                p.connack_code = static_cast<std::uint8_t>(rng.next_below(6));
                break;
            }
            case 2:
            case 3: {
                QoS q = static_cast<QoS>(rng.next_below(3));
                std::string topic = "t";
                int levels = static_cast<int>(rng.next_below(4));
                for (int l = 0; l < levels; ++l) topic += "/" + rand_string(5);
                std::uint16_t id =
                    q == QoS::AtMostOnce
                        ? 0
                        : static_cast<std::uint16_t>(1 + rng.next_below(65535));
                bool dup = q != QoS::AtMostOnce && rng.chance(0.3);
                std::string payload;
                std::size_t plen = rng.next_below(64);
                for (std::size_t b = 0; b < plen; ++b)
                    payload += static_cast<char>(rng.next_below(256));
                p = make_publish(topic, payload, q, id, dup);
                break;
            }
            case 4:
            case 5:
            case 6:
            case 7: {
                PacketKind kinds[] = {PacketKind::PubAck, PacketKind::PubRec,
                                      PacketKind::PubRel, PacketKind::PubComp};
                p = make_ack(kinds[rng.next_below(4)],
                             static_cast<std::uint16_t>(1 + rng.next_below(65535)));
                break;
            }
            case 8: {
                p.kind = PacketKind::Subscribe;
                p.packet_id = static_cast<std::uint16_t>(1 + rng.next_below(65535));
                std::size_t n = 1 + rng.next_below(3);
                for (std::size_t f = 0; f < n; ++f) {
                    std::string filter = rand_string(4);
                    if (filter.empty()) filter = "x";
                    if (rng.chance(0.3)) filter += "/+";
                    if (rng.chance(0.3)) filter += "/#";
                    p.subscriptions.emplace_back(filter,
                                                 static_cast<QoS>(rng.next_below(3)));
                }
                break;
            }
            default: {
                if (rng.chance(0.5)) {
                    p.kind = PacketKind::SubAck;
                    p.packet_id = static_cast<std::uint16_t>(1 + rng.next_below(65535));
                    std::size_t n = 1 + rng.next_below(3);
                    for (std::size_t c = 0; c < n; ++c)
                        p.suback_codes.push_back(
                            rng.chance(0.2) ? 0x80
                                            : static_cast<std::uint8_t>(rng.next_below(3)));
                } else {
                    p.kind = PacketKind::Disconnect;
                }
                break;
            }
        }
        auto frame = encode_packet(p);
        REQUIRE(frame.ok());
        auto back = decode_one(frame.value());
        REQUIRE(back.ok());
        REQUIRE(back.value() == p);
        ++done;
    }
    CHECK(done == 4000);
}

TEST_CASE("incremental decode finds frame boundaries in a stream") {
    Bytes stream;
    std::vector<Packet> sent;
    for (int i = 1; i <= 20; ++i) {
        Packet p = make_publish("s/t", std::string(static_cast<std::size_t>(i * 7), 'z'),
                                QoS::AtLeastOnce, static_cast<std::uint16_t>(i));
        auto frame = encode_packet(p);
        REQUIRE(frame.ok());
        stream.insert(stream.end(), frame.value().begin(), frame.value().end());
        sent.push_back(p);
    }
    // partial prefix: NeedMore, never Malformed
    for (std::size_t cut = 0; cut < 12; ++cut) {
        auto r = decode_packet(stream.data(), cut);
        CHECK(r.status == (cut < 12 ? DecodeStatus::NeedMore : DecodeStatus::Ok));
    }
    std::size_t pos = 0;
    for (const Packet& want : sent) {
        auto r = decode_packet(stream.data() + pos, stream.size() - pos);
        REQUIRE(r.status == DecodeStatus::Ok);
        CHECK(r.packet == want);
        pos += r.consumed;
    }
    CHECK(pos == stream.size());
}

TEST_CASE("qos1 scripted lossy trace follows the retransmit sequence") {
    Fixture fx;
    Broker broker({}, &fx.store, kSecret);
    std::vector<Packet> to_sub;
    ConnId sub = broker.accept_local("sub", fx.ctx("viewer", {fx.sub_all()}),
                                     [&](const Packet& p) { to_sub.push_back(p); });
    REQUIRE(broker.subscribe(sub, {{"data/#", QoS::AtLeastOnce}}, 0).ok());
    ConnId pub = broker.accept_local("pub", fx.ctx("prod7", {fx.pub7()}), nullptr);

    REQUIRE(broker.publish(pub, kTopic, "v1", QoS::AtLeastOnce, 0).ok());
    REQUIRE(to_sub.size() == 1);
    CHECK(to_sub[0].kind == PacketKind::Publish);
    CHECK(to_sub[0].qos == QoS::AtLeastOnce);
    CHECK(to_sub[0].dup == false);
    const std::uint16_t id = to_sub[0].packet_id;
    CHECK(id != 0);

    // the first Publish is lost: no ack arrives
    broker.tick(4999);
    CHECK(to_sub.size() == 1);  // deadline not reached, nothing resent
    broker.tick(5000);
    REQUIRE(to_sub.size() == 2);
    CHECK(to_sub[1].kind == PacketKind::Publish);
    CHECK(to_sub[1].dup == true);
    CHECK(to_sub[1].packet_id == id);
    CHECK(to_sub[1].payload == "v1");

    // ack lands, inflight clears, no further resends
    broker.handle_packet(sub, make_ack(PacketKind::PubAck, id), 5100);
    broker.tick(60000);
    CHECK(to_sub.size() == 2);
    CHECK(!broker.session_failed(sub));
}

TEST_CASE("session fails after max_retries and raises the alarm hook") {
    Fixture fx;
    BrokerConfig cfg;
    cfg.max_retries = 2;
    Broker broker(cfg, &fx.store, kSecret);
    std::vector<std::pair<std::string, std::string>> alarms;
    broker.on_session_failed = [&](const std::string& cid, const std::string& why) {
        alarms.emplace_back(cid, why);
    };
    std::vector<Packet> to_sub;
    ConnId sub = broker.accept_local("flaky", fx.ctx("viewer", {fx.sub_all()}),
                                     [&](const Packet& p) { to_sub.push_back(p); });
    REQUIRE(broker.subscribe(sub, {{"#", QoS::AtLeastOnce}}, 0).ok());
    ConnId pub = broker.accept_local("pub", fx.ctx("prod7", {fx.pub7()}), nullptr);
    REQUIRE(broker.publish(pub, kTopic, "v", QoS::AtLeastOnce, 0).ok());

    broker.tick(5000);   // retry 1
    broker.tick(10000);  // retry 2
    CHECK(alarms.empty());
    broker.tick(15000);  // budget exhausted
    REQUIRE(alarms.size() == 1);
    CHECK(alarms[0].first == "flaky");
    CHECK(broker.session_failed(sub));
    CHECK(to_sub.back().kind == PacketKind::Disconnect);

    // failed sessions receive nothing further
    const std::size_t n = to_sub.size();
    REQUIRE(broker.publish(pub, kTopic, "v2", QoS::AtMostOnce, 16000).ok());
    CHECK(to_sub.size() == n);
}

TEST_CASE("broker-side qos2 receiver dedups and tolerates handshake replays") {
    Fixture fx;
    Broker broker({}, &fx.store, kSecret);
    std::vector<Packet> to_sub;
    ConnId sub = broker.accept_local("sub", fx.ctx("viewer", {fx.sub_all()}),
                                     [&](const Packet& p) { to_sub.push_back(p); });
    REQUIRE(broker.subscribe(sub, {{"data/#", QoS::AtMostOnce}}, 0).ok());

    std::vector<Packet> to_pub;
    ConnId pub = broker.accept(
        [&](const Packet& p) { to_pub.push_back(p); });
    Packet connect;
    connect.kind = PacketKind::Connect;
    connect.client_id = "wire-pub";
    connect.password = fx.token("prod7", {fx.pub7()});
    broker.handle_packet(pub, connect, 0);
    REQUIRE(to_pub.size() == 1);
    CHECK(to_pub[0].kind == PacketKind::ConnAck);
    CHECK(to_pub[0].connack_code == 0);

    Packet publish = make_publish(kTopic, "m1", QoS::ExactlyOnce, 9);
    broker.handle_packet(pub, publish, 10);
    CHECK(broker.accepted_publishes() == 1);
    CHECK(to_sub.size() == 1);  // delivered on first receipt
    REQUIRE(to_pub.size() == 2);
    CHECK(to_pub[1] == make_ack(PacketKind::PubRec, 9));

    publish.dup = true;  // retransmit before PubRel: no second delivery
    broker.handle_packet(pub, publish, 20);
    CHECK(broker.accepted_publishes() == 1);
    CHECK(to_sub.size() == 1);
    REQUIRE(to_pub.size() == 3);
    CHECK(to_pub[2] == make_ack(PacketKind::PubRec, 9));

    broker.handle_packet(pub, make_ack(PacketKind::PubRel, 9), 30);
    REQUIRE(to_pub.size() == 4);
    CHECK(to_pub[3] == make_ack(PacketKind::PubComp, 9));

    // PubComp was lost: publisher repeats PubRel, broker repeats PubComp
    broker.handle_packet(pub, make_ack(PacketKind::PubRel, 9), 40);
    REQUIRE(to_pub.size() == 5);
    CHECK(to_pub[4] == make_ack(PacketKind::PubComp, 9));
    CHECK(!broker.session_failed(pub));

    // a PubRel for an id this session never published is a violation
    broker.handle_packet(pub, make_ack(PacketKind::PubRel, 777), 50);
    CHECK(broker.session_failed(pub));
    CHECK(to_sub.size() == 1);
}

TEST_CASE("stray acks for never-known ids are protocol violations") {
    Fixture fx;
    Broker broker({}, &fx.store, kSecret);
    ConnId conn = broker.accept_local("c", fx.ctx("viewer", {fx.sub_all()}), nullptr);
    CHECK(!broker.session_failed(conn));
    broker.handle_packet(conn, make_ack(PacketKind::PubAck, 77), 0);
    CHECK(broker.session_failed(conn));
}

TEST_CASE("qos2 handshake replay prefixes never deliver twice") {
    // receiver-side oracle on the Client: any in-order replay with repeats of
    // [Publish id5, PubRel id5] yields at most one application delivery
    DetRng rng = DetRng::for_entity(321, "qos2-replay");
    for (int round = 0; round < 300; ++round) {
        Client client({"replay"});
        std::vector<Packet> outgoing;
        client.send = [&](const Packet& p) { outgoing.push_back(p); };
        int deliveries = 0;
        client.on_message = [&](const Delivery&) { ++deliveries; };

        Packet first = make_publish("t/x", "v", QoS::ExactlyOnce, 5);
        Packet dup = first;
        dup.dup = true;
        Packet rel = make_ack(PacketKind::PubRel, 5);

        // walk the handshake script monotonically, repeating steps at random
        int step = 0;  // 0: before publish, 1: publish sent, 2: pubrel sent
        int sent_publish = 0;
        std::vector<Packet> fed;
        for (int i = 0; i < 12; ++i) {
            if (step == 0) {
                fed.push_back(first);
                ++sent_publish;
                step = 1;
                continue;
            }
            const double roll = rng.next_double();
            if (step == 1) {
                if (roll < 0.4) {
                    fed.push_back(dup);
                    ++sent_publish;
                } else if (roll < 0.8) {
                    fed.push_back(rel);
                    step = 2;
                } else {
                    break;  // sender stalls: prefix ends here
                }
            } else {
                if (roll < 0.4) fed.push_back(rel);
                else break;
            }
        }
        for (const Packet& p : fed) client.on_packet(p, 0);

        CHECK(deliveries == 1);  // first Publish always present
        CHECK(client.errors.empty());
        // every publish got a PubRec, every PubRel a PubComp
        int pubrec = 0, pubcomp = 0;
        for (const Packet& p : outgoing) {
            if (p.kind == PacketKind::PubRec) ++pubrec;
            if (p.kind == PacketKind::PubComp) ++pubcomp;
        }
        CHECK(pubrec == sent_publish);
        CHECK(pubcomp == static_cast<int>(fed.size()) - sent_publish);
    }
}

TEST_CASE("effective delivery qos is the minimum of publish and subscription") {
    Fixture fx;
    for (int pub_q = 0; pub_q <= 2; ++pub_q) {
        for (int sub_q = 0; sub_q <= 2; ++sub_q) {
            Broker broker({}, &fx.store, kSecret);
            std::vector<Packet> got;
            ConnId sub = broker.accept_local(
                "s", fx.ctx("viewer", {fx.sub_all()}),
                [&](const Packet& p) { got.push_back(p); });
            REQUIRE(broker.subscribe(sub, {{"data/#", static_cast<QoS>(sub_q)}}, 0).ok());
            ConnId pub = broker.accept_local("p", fx.ctx("prod7", {fx.pub7()}), nullptr);
            REQUIRE(broker.publish(pub, kTopic, "v", static_cast<QoS>(pub_q), 0).ok());
            REQUIRE(got.size() == 1);
            CHECK(static_cast<int>(got[0].qos) == std::min(pub_q, sub_q));
            if (std::min(pub_q, sub_q) > 0) CHECK(got[0].packet_id != 0);
        }
    }
}

TEST_CASE("no delivery without a matching filter and no delivery without a grant") {
    Fixture fx;
    Broker broker({}, &fx.store, kSecret);

    std::vector<Packet> matched, unmatched, spy_got;
    ConnId ok_sub = broker.accept_local("ok", fx.ctx("viewer", {fx.sub_all()}),
                                        [&](const Packet& p) { matched.push_back(p); });
    REQUIRE(broker.subscribe(ok_sub, {{"data/open_access/#", QoS::AtMostOnce}}, 0).ok());

    ConnId other = broker.accept_local("other", fx.ctx("viewer", {fx.sub_all()}),
                                       [&](const Packet& p) { unmatched.push_back(p); });
    REQUIRE(broker.subscribe(other, {{"data/business_critical/#", QoS::AtMostOnce}}, 0).ok());

    // wildcard subscription but zero grants: must never see a message
    ConnId spy = broker.accept_local("spy", fx.ctx("spy", {}),
                                     [&](const Packet& p) { spy_got.push_back(p); });
    REQUIRE(broker.subscribe(spy, {{"#", QoS::AtMostOnce}}, 0).ok());

    ConnId pub = broker.accept_local("p", fx.ctx("prod7", {fx.pub7()}), nullptr);
    REQUIRE(broker.publish(pub, kTopic, "v", QoS::AtMostOnce, 0).ok());

    CHECK(matched.size() == 1);
    CHECK(unmatched.empty());
    CHECK(spy_got.empty());
}

TEST_CASE("publish without a grant is rejected with zero deliveries") {
    Fixture fx;
    Broker broker({}, &fx.store, kSecret);
    std::vector<Packet> got;
    ConnId sub = broker.accept_local("s", fx.ctx("viewer", {fx.sub_all()}),
                                     [&](const Packet& p) { got.push_back(p); });
    REQUIRE(broker.subscribe(sub, {{"#", QoS::AtMostOnce}}, 0).ok());

    // producer for org7 must not publish into org8's space
    ConnId pub = broker.accept_local("p", fx.ctx("prod7", {fx.pub7()}), nullptr);
    auto res = broker.publish(pub, "data/open_access/org8/p1/temperature", "v",
                              QoS::AtMostOnce, 0);
    REQUIRE(!res.ok());
    CHECK(res.code() == Errc::NotAuthorized);
    CHECK(got.empty());

    ConnId authorized = broker.accept_local("p2", fx.ctx("prod7", {fx.pub7()}), nullptr);
    REQUIRE(broker.publish(authorized, kTopic, "v", QoS::AtMostOnce, 0).ok());
    CHECK(got.size() == 1);
}

TEST_CASE("wire connect is validated against the token") {
    Fixture fx;
    BrokerConfig cfg;
    Broker broker(cfg, &fx.store, kSecret);

    SUBCASE("valid token connects") {
        std::vector<Packet> got;
        ConnId c = broker.accept([&](const Packet& p) { got.push_back(p); });
        Packet connect;
        connect.kind = PacketKind::Connect;
        connect.client_id = "w";
        connect.password = fx.token("viewer", {fx.sub_all()});
        broker.handle_packet(c, connect, 0);
        REQUIRE(got.size() == 1);
        CHECK(got[0].connack_code == 0);
        CHECK(broker.session_connected(c));
    }

    SUBCASE("forged signature gets connack 4") {
        std::vector<Packet> got;
        ConnId c = broker.accept([&](const Packet& p) { got.push_back(p); });
        auto tok = auth::issue_token(fx.store, {"viewer", {fx.sub_all()}, 60}, 0,
                                     kSecret);
        REQUIRE(tok.ok());
        Packet connect;
        connect.kind = PacketKind::Connect;
        connect.password = serialize_token(tok.value(), "wrong-secret");
        broker.handle_packet(c, connect, 0);
        REQUIRE(got.size() == 1);
        CHECK(got[0].connack_code == 4);
        CHECK(!broker.session_connected(c));
    }

    SUBCASE("expired token gets connack 5") {
        std::vector<Packet> got;
        ConnId c = broker.accept([&](const Packet& p) { got.push_back(p); });
        Packet connect;
        connect.kind = PacketKind::Connect;
        connect.password = fx.token("viewer", {fx.sub_all()}, 0, 60);
        broker.handle_packet(c, connect, 120 * 1000);
        REQUIRE(got.size() == 1);
        CHECK(got[0].connack_code == 5);
    }

    SUBCASE("packets before connect kill the connection") {
        ConnId c = broker.accept(nullptr);
        broker.handle_packet(c, make_publish("a/b", "x", QoS::AtMostOnce), 0);
        CHECK(broker.session_failed(c));
    }
}

namespace {

/// Full wire topology: local publisher -> broker -> lossy duplex -> client.
struct WireWorld {
    Fixture fx;
    VirtualScheduler sched;
    Broker broker;
    Client client;
    std::unique_ptr<DuplexLink> link;
    ConnId wire_conn = 0;
    ConnId pub_conn = 0;
    std::map<std::string, int> received;  // payload -> count

    WireWorld(BrokerConfig cfg, LinkParams down, LinkParams up, std::uint64_t seed,
              ClientConfig ccfg = {"wire-sub"})
        : broker(cfg, &fx.store, kSecret), client(ccfg) {
        link = std::make_unique<DuplexLink>(sched, up, down, seed, "test-link");
        wire_conn = broker.accept([&](const Packet& p) { link->down.offer(p); });
        link->down.deliver = [&](const Packet& p) { client.on_packet(p, sched.now()); };
        client.send = [&](const Packet& p) { link->up.offer(p); };
        link->up.deliver = [&](const Packet& p) {
            broker.handle_packet(wire_conn, p, sched.now());
        };
        client.on_message = [&](const Delivery& d) { received[d.payload] += 1; };
        pub_conn = broker.accept_local("pub", fx.ctx("prod7", {fx.pub7()}), nullptr);
    }

    void connect_and_subscribe(QoS sub_qos) {
        // handshake happens before the weather turns: loss applies to the
        // data phase being measured, not to session setup
        LinkParams up_saved = link->up.params();
        LinkParams down_saved = link->down.params();
        link->up.set_params({});
        link->down.set_params({});
        client.connect(fx.token("viewer", {fx.sub_all()}));
        client.subscribe({{"data/#", sub_qos}});
        sched.run_until(sched.now() + 10);
        REQUIRE(client.connack_received());
        REQUIRE(client.connack_code() == 0);
        link->up.set_params(up_saved);
        link->down.set_params(down_saved);
    }

    void arm_ticks(std::int64_t every, TimestampMs until) {
        sched.after(every, [this, every, until]() {
            broker.tick(sched.now());
            client.tick(sched.now());
            if (sched.now() < until) arm_ticks(every, until);
        });
    }
};

}  // namespace

TEST_CASE("qos0 delivered fraction converges to 1 - drop_p") {
    LinkParams down;
    down.drop_p = 0.3;
    down.dup_p = 0.1;
    down.delay_ms = 2;
    WireWorld w({}, down, {}, 4242);
    w.connect_and_subscribe(QoS::AtMostOnce);

    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        REQUIRE(w.broker
                    .publish(w.pub_conn, kTopic, std::to_string(i), QoS::AtMostOnce,
                             w.sched.now())
                    .ok());
        w.sched.run_until(w.sched.now() + 1);
    }
    w.sched.run_until(w.sched.now() + 1000);

    // distinct messages: duplicates add copies, never new messages
    const double fraction = static_cast<double>(w.received.size()) / n;
    CHECK(fraction > 0.68);
    CHECK(fraction < 0.72);
    // duplicate injection visible as extra copies on top of distinct count
    std::uint64_t copies = 0;
    for (const auto& [payload, cnt] : w.received) copies += cnt;
    CHECK(copies > w.received.size());
    CHECK(w.link->down.duplicated() > 0);
}

TEST_CASE("qos1 delivers every message at least once over a lossy duplex") {
    BrokerConfig cfg;
    cfg.retransmit_timeout_ms = 2000;
    cfg.max_retries = 50;
    cfg.max_inflight = 2048;
    LinkParams lossy;
    lossy.drop_p = 0.3;
    lossy.delay_ms = 5;
    WireWorld w(cfg, lossy, lossy, 777);
    w.connect_and_subscribe(QoS::AtLeastOnce);

    const int n = 400;
    const TimestampMs deadline = n * 20 + 600 * 1000;
    w.arm_ticks(500, deadline);
    for (int i = 0; i < n; ++i) {
        REQUIRE(w.broker
                    .publish(w.pub_conn, kTopic, std::to_string(i), QoS::AtLeastOnce,
                             w.sched.now())
                    .ok());
        w.sched.run_until(w.sched.now() + 20);
    }
    w.sched.run_until(deadline);

    CHECK(!w.broker.session_failed(w.wire_conn));
    REQUIRE(w.received.size() == static_cast<std::size_t>(n));
    std::uint64_t total = 0;
    for (int i = 0; i < n; ++i) {
        auto it = w.received.find(std::to_string(i));
        REQUIRE(it != w.received.end());
        CHECK(it->second >= 1);  // duplicates permitted at qos1
        total += static_cast<std::uint64_t>(it->second);
    }
    CHECK(total >= static_cast<std::uint64_t>(n));
}

TEST_CASE("qos2 delivers every message exactly once under drop and dup injection") {
    BrokerConfig cfg;
    cfg.retransmit_timeout_ms = 2000;
    cfg.max_retries = 60;
    cfg.max_inflight = 2048;
    LinkParams lossy;
    lossy.drop_p = 0.25;
    lossy.dup_p = 0.15;
    lossy.delay_ms = 5;
    WireWorld w(cfg, lossy, lossy, 90125);
    w.connect_and_subscribe(QoS::ExactlyOnce);

    const int n = 400;
    const TimestampMs deadline = n * 20 + 900 * 1000;
    w.arm_ticks(500, deadline);
    for (int i = 0; i < n; ++i) {
        REQUIRE(w.broker
                    .publish(w.pub_conn, kTopic, std::to_string(i), QoS::ExactlyOnce,
                             w.sched.now())
                    .ok());
        w.sched.run_until(w.sched.now() + 20);
    }
    w.sched.run_until(deadline);

    CHECK(!w.broker.session_failed(w.wire_conn));
    REQUIRE(w.received.size() == static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto it = w.received.find(std::to_string(i));
        REQUIRE(it != w.received.end());
        CHECK(it->second == 1);  // the exactly-once contract
    }
    CHECK(w.client.errors.empty());
}
