#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "seaflow/core/error.hpp"
#include "seaflow/core/flags.hpp"
#include "seaflow/core/time.hpp"

namespace seaflow::auth {

enum class Role { Producer, Consumer, Operator };
enum class Action { Publish, Subscribe, QueryPull, Ingest };

const char* role_name(Role r);
const char* action_name(Action a);
std::optional<Role> role_from_name(const std::string& name);
std::optional<Action> action_from_name(const std::string& name);

struct Principal {
    std::string principal_id;
    std::string org_id;
    std::set<Role> roles;  // never empty for a stored principal
};

/// Scope is either a topic filter or a category set. Publish and Ingest
/// grants additionally carry the org they are scoped to.
struct Grant {
    Action action = Action::Subscribe;
    std::string topic_filter;              // empty when category-scoped
    std::vector<DataCategory> categories;  // empty when topic-scoped
    std::string org_id;                    // required for Publish/Ingest

    bool operator==(const Grant&) const = default;
};

struct Token {
    std::string token_id;
    std::string principal_id;
    std::vector<Grant> grants;
    TimestampMs issued_at = 0;
    TimestampMs expires_at = 0;
};

struct Decision {
    bool allow = false;
    std::string reason;  // set when denied
    static Decision allowed() { return {true, ""}; }
    static Decision denied(std::string why) { return {false, std::move(why)}; }
};

class PrincipalStore {
public:
    Expected<void> add(Principal p);
    const Principal* find(const std::string& principal_id) const;
    static Expected<PrincipalStore> from_json_text(const std::string& text);
    static Expected<PrincipalStore> from_json_file(const std::string& path);
    std::size_t size() const { return principals_.size(); }

private:
    std::map<std::string, Principal> principals_;
};

/// Serialized token: base64(json body) "." hex(hmac-sha256 of the body).
std::string serialize_token(const Token& t, const std::string& secret);

struct IssueRequest {
    std::string principal_id;
    std::vector<Grant> grants;
    std::int64_t ttl_s = 0;
};

/// Grants must fit inside the principal's role-allowed space; Producers can
/// only hold Publish/Ingest scoped to their own org.
Expected<Token> issue_token(const PrincipalStore& store, const IssueRequest& req,
                            TimestampMs now, const std::string& secret);

struct AuthContext {
    Principal principal;
    std::vector<Grant> grants;
    std::string token_id;
};

/// skew_ms widens the validity window on both ends; 0 under the virtual
/// clock, 30 s in service mode.
Expected<AuthContext> verify_token(const PrincipalStore& store,
                                   const std::string& serialized, TimestampMs now,
                                   const std::string& secret,
                                   std::int64_t skew_ms = 0);

/// Topic resources go through match_filter; category-scoped grants apply to
/// data/<category>/... topics so push and pull access stay symmetric.
Decision authorize_topic(const AuthContext& ctx, Action action,
                         const std::string& topic);
Decision authorize_category(const AuthContext& ctx, Action action, DataCategory cat);

std::string hmac_sha256_hex(const std::string& key, const std::string& data);

constexpr std::int64_t kServiceClockSkewMs = 30 * 1000;

}  // namespace seaflow::auth
