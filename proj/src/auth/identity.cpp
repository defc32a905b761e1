#include "seaflow/auth/identity.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <openssl/crypto.h>
#include <openssl/hmac.h>

#include "seaflow/broker/topic.hpp"
#include "seaflow/util/bytes.hpp"
#include "seaflow/util/rng.hpp"

namespace seaflow::auth {

using nlohmann::ordered_json;

const char* role_name(Role r) {
    switch (r) {
        case Role::Producer: return "Producer";
        case Role::Consumer: return "Consumer";
        case Role::Operator: return "Operator";
    }
    return "?";
}

const char* action_name(Action a) {
    switch (a) {
        case Action::Publish: return "Publish";
        case Action::Subscribe: return "Subscribe";
        case Action::QueryPull: return "QueryPull";
        case Action::Ingest: return "Ingest";
    }
    return "?";
}

std::optional<Role> role_from_name(const std::string& name) {
    if (name == "Producer") return Role::Producer;
    if (name == "Consumer") return Role::Consumer;
    if (name == "Operator") return Role::Operator;
    return std::nullopt;
}

std::optional<Action> action_from_name(const std::string& name) {
    if (name == "Publish") return Action::Publish;
    if (name == "Subscribe") return Action::Subscribe;
    if (name == "QueryPull") return Action::QueryPull;
    if (name == "Ingest") return Action::Ingest;
    return std::nullopt;
}

std::string hmac_sha256_hex(const std::string& key, const std::string& data) {
    unsigned char mac[EVP_MAX_MD_SIZE];
    unsigned int mac_len = 0;
    HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()),
         reinterpret_cast<const unsigned char*>(data.data()), data.size(), mac,
         &mac_len);
    return to_hex(std::string(reinterpret_cast<const char*>(mac), mac_len));
}

Expected<void> PrincipalStore::add(Principal p) {
    if (p.principal_id.empty())
        return Error{Errc::ConfigError, "principal_id must be non-empty"};
    if (p.roles.empty())
        return Error{Errc::ConfigError, "principal " + p.principal_id + " has no roles"};
    auto [it, inserted] = principals_.try_emplace(p.principal_id, std::move(p));
    (void)it;
    if (!inserted)
        return Error{Errc::ConfigError, "duplicate principal_id"};
    return {};
}

const Principal* PrincipalStore::find(const std::string& principal_id) const {
    auto it = principals_.find(principal_id);
    return it == principals_.end() ? nullptr : &it->second;
}

Expected<PrincipalStore> PrincipalStore::from_json_text(const std::string& text) {
    auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded())
        return Error{Errc::ConfigError, "principal store: invalid JSON"};
    const nlohmann::json* list = &j;
    if (j.is_object()) {
        if (!j.contains("principals") || !j["principals"].is_array())
            return Error{Errc::ConfigError, "principal store: missing principals array"};
        list = &j["principals"];
    } else if (!j.is_array()) {
        return Error{Errc::ConfigError, "principal store: expected array or object"};
    }
    PrincipalStore store;
    for (const auto& entry : *list) {
        Principal p;
        if (!entry.contains("principal_id") || !entry["principal_id"].is_string())
            return Error{Errc::ConfigError, "principal entry: missing principal_id"};
        p.principal_id = entry["principal_id"].get<std::string>();
        p.org_id = entry.value("org_id", std::string{});
        if (!entry.contains("roles") || !entry["roles"].is_array())
            return Error{Errc::ConfigError,
                         "principal " + p.principal_id + ": missing roles"};
        for (const auto& r : entry["roles"]) {
            auto role = role_from_name(r.is_string() ? r.get<std::string>() : "");
            if (!role)
                return Error{Errc::ConfigError,
                             "principal " + p.principal_id + ": unknown role"};
            p.roles.insert(*role);
        }
        if (auto res = store.add(std::move(p)); !res.ok()) return res.error();
    }
    return store;
}

Expected<PrincipalStore> PrincipalStore::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        return Error{Errc::ConfigError, "cannot open principal store: " + path};
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

namespace {

ordered_json grant_to_json(const Grant& g) {
    ordered_json j;
    j["action"] = action_name(g.action);
    if (!g.topic_filter.empty()) j["topic_filter"] = g.topic_filter;
    if (!g.categories.empty()) {
        ordered_json cats = ordered_json::array();
        for (DataCategory c : g.categories) cats.push_back(category_name(c));
        j["categories"] = cats;
    }
    if (!g.org_id.empty()) j["org_id"] = g.org_id;
    return j;
}

std::optional<Grant> grant_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("action") || !j["action"].is_string())
        return std::nullopt;
    auto action = action_from_name(j["action"].get<std::string>());
    if (!action) return std::nullopt;
    Grant g;
    g.action = *action;
    g.topic_filter = j.value("topic_filter", std::string{});
    if (j.contains("categories")) {
        if (!j["categories"].is_array()) return std::nullopt;
        for (const auto& c : j["categories"]) {
            auto cat = category_from_name(c.is_string() ? c.get<std::string>() : "");
            if (!cat) return std::nullopt;
            g.categories.push_back(*cat);
        }
    }
    g.org_id = j.value("org_id", std::string{});
    return g;
}

std::string token_body_json(const Token& t) {
    ordered_json j;
    j["token_id"] = t.token_id;
    j["principal_id"] = t.principal_id;
    ordered_json grants = ordered_json::array();
    for (const Grant& g : t.grants) grants.push_back(grant_to_json(g));
    j["grants"] = grants;
    j["issued_at"] = t.issued_at;
    j["expires_at"] = t.expires_at;
    return j.dump();
}

// Role-allowed grant space. Operators may hold anything for any org.
Expected<void> check_grant_against_roles(const Principal& p, const Grant& g) {
    const bool op = p.roles.count(Role::Operator) > 0;
    switch (g.action) {
        case Action::Publish:
        case Action::Ingest: {
            if (!op && p.roles.count(Role::Producer) == 0)
                return Error{Errc::GrantExceedsRole,
                             std::string(action_name(g.action)) + " needs Producer role"};
            if (g.org_id.empty())
                return Error{Errc::GrantExceedsRole,
                             std::string(action_name(g.action)) + " grant must name an org"};
            if (!op && g.org_id != p.org_id)
                return Error{Errc::GrantExceedsRole,
                             "producer " + p.principal_id + " cannot act for " + g.org_id};
            break;
        }
        case Action::Subscribe:
        case Action::QueryPull: {
            if (!op && p.roles.count(Role::Consumer) == 0)
                return Error{Errc::GrantExceedsRole,
                             std::string(action_name(g.action)) + " needs Consumer role"};
            break;
        }
    }
    if (!g.topic_filter.empty() && !valid_filter(g.topic_filter))
        return Error{Errc::GrantExceedsRole, "invalid topic filter in grant"};
    return {};
}

}  // namespace

std::string serialize_token(const Token& t, const std::string& secret) {
    const std::string body = token_body_json(t);
    return base64_encode(body) + "." + hmac_sha256_hex(secret, body);
}

Expected<Token> issue_token(const PrincipalStore& store, const IssueRequest& req,
                            TimestampMs now, const std::string& secret) {
    (void)secret;
    const Principal* p = store.find(req.principal_id);
    if (!p)
        return Error{Errc::UnknownPrincipal, "no principal " + req.principal_id};
    if (req.ttl_s <= 0)
        return Error{Errc::ConfigError, "token ttl must be positive"};
    for (const Grant& g : req.grants) {
        if (auto res = check_grant_against_roles(*p, g); !res.ok()) return res.error();
    }
    Token t;
    std::uint64_t h = fnv1a64(req.principal_id) ^
                      splitmix64(static_cast<std::uint64_t>(now) ^
                                 (static_cast<std::uint64_t>(req.grants.size()) << 48));
    t.token_id = "t" + to_hex(std::string(reinterpret_cast<const char*>(&h), sizeof(h)));
    t.principal_id = req.principal_id;
    t.grants = req.grants;
    t.issued_at = now;
    t.expires_at = now + req.ttl_s * kMsPerSecond;
    return t;
}

Expected<AuthContext> verify_token(const PrincipalStore& store,
                                   const std::string& serialized, TimestampMs now,
                                   const std::string& secret, std::int64_t skew_ms) {
    auto dot = serialized.rfind('.');
    if (dot == std::string::npos)
        return Error{Errc::BadSignature, "token missing signature separator"};
    auto body_opt = base64_decode(serialized.substr(0, dot));
    if (!body_opt)
        return Error{Errc::BadSignature, "token body is not valid base64"};
    const std::string& body = *body_opt;
    const std::string given_mac = serialized.substr(dot + 1);
    const std::string want_mac = hmac_sha256_hex(secret, body);
    if (given_mac.size() != want_mac.size() ||
        CRYPTO_memcmp(given_mac.data(), want_mac.data(), want_mac.size()) != 0)
        return Error{Errc::BadSignature, "token signature mismatch"};

    auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        return Error{Errc::BadSignature, "token body is not JSON"};
    Token t;
    t.token_id = j.value("token_id", std::string{});
    t.principal_id = j.value("principal_id", std::string{});
    t.issued_at = j.value("issued_at", std::int64_t{0});
    t.expires_at = j.value("expires_at", std::int64_t{0});
    if (j.contains("grants")) {
        if (!j["grants"].is_array())
            return Error{Errc::BadSignature, "token grants malformed"};
        for (const auto& gj : j["grants"]) {
            auto g = grant_from_json(gj);
            if (!g) return Error{Errc::BadSignature, "token grant malformed"};
            t.grants.push_back(*g);
        }
    }
    // validity window is [issued_at, expires_at), widened by the skew
    if (now + skew_ms < t.issued_at || now >= t.expires_at + skew_ms)
        return Error{Errc::Expired, "token expired at " + std::to_string(t.expires_at)};
    const Principal* p = store.find(t.principal_id);
    if (!p)
        return Error{Errc::UnknownPrincipal, "no principal " + t.principal_id};
    return AuthContext{*p, std::move(t.grants), std::move(t.token_id)};
}

namespace {

bool filter_covers_category(const std::string& filter, DataCategory cat) {
    auto f = split_topic(filter);
    if (f.empty()) return false;
    if (f[0] == "#") return true;
    if (f[0] != "data" && f[0] != "+") return false;
    if (f.size() < 2) return false;
    if (f[1] == "#" || f[1] == "+") return true;
    return f[1] == category_topic_segment(cat);
}

}  // namespace

Decision authorize_topic(const AuthContext& ctx, Action action,
                         const std::string& topic) {
    if (!valid_topic(topic)) return Decision::denied("invalid topic");
    for (const Grant& g : ctx.grants) {
        if (g.action != action) continue;
        if (action == Action::Publish || action == Action::Ingest) {
            auto org = topic_org(topic);
            if (!org || *org != g.org_id) continue;
        }
        bool scope_ok = false;
        if (!g.topic_filter.empty()) {
            scope_ok = match_filter(g.topic_filter, topic);
        } else if (!g.categories.empty()) {
            auto cat = topic_category(topic);
            scope_ok = cat && std::find(g.categories.begin(), g.categories.end(),
                                        *cat) != g.categories.end();
        } else {
            // bare org-scoped grant: any topic within the org
            scope_ok = action == Action::Publish || action == Action::Ingest;
        }
        if (scope_ok) return Decision::allowed();
    }
    return Decision::denied(std::string("no ") + action_name(action) + " grant covers " +
                            topic);
}

Decision authorize_category(const AuthContext& ctx, Action action, DataCategory cat) {
    for (const Grant& g : ctx.grants) {
        if (g.action != action) continue;
        if (!g.categories.empty()) {
            if (std::find(g.categories.begin(), g.categories.end(), cat) !=
                g.categories.end())
                return Decision::allowed();
            continue;
        }
        if (!g.topic_filter.empty() && filter_covers_category(g.topic_filter, cat))
            return Decision::allowed();
    }
    return Decision::denied(std::string("no ") + action_name(action) + " grant covers " +
                            category_name(cat));
}

}  // namespace seaflow::auth
