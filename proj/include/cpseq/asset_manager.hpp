#pragma once
// Permissioned front door over the ledger and proxies: owners grant
// scoped access, users query sequences (low-frequency path) or open
// proxy handles (high-frequency path), and transfers route through the
// ledger. Ownership truth always comes from the backing directory's
// confirmed ledger view; the manager keeps no ownership table.

#include "cpseq/errors.hpp"
#include "cpseq/identification.hpp"
#include "cpseq/ledger.hpp"
#include "cpseq/metadata.hpp"

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace cpseq::am {

using ScopeMask = std::uint8_t;
inline constexpr ScopeMask kScopeIdentityRead = 1;
inline constexpr ScopeMask kScopeMetadataRead = 2;
inline constexpr ScopeMask kScopeProxyStream = 4;
inline constexpr ScopeMask kScopeAll =
    kScopeIdentityRead | kScopeMetadataRead | kScopeProxyStream;

std::string scope_to_string(ScopeMask mask);  // "IdentityRead|ProxyStream"
std::optional<ScopeMask> parse_scope(std::string_view text);

enum class RequestKind { identity, metadata, proxy_stream };

std::string_view to_string(RequestKind kind);
std::optional<RequestKind> parse_request_kind(std::string_view text);

struct AccessGrant {
    std::string owner_id;  // grantor; grant dies if they lose ownership
    std::string user_id;
    std::string identity_id;
    ScopeMask scope = 0;
    Tick granted_at = 0;
    bool revoked = false;
};

struct QueryResult {
    enum class Kind { sequence, proxy_handle, denied };
    Kind kind = Kind::denied;
    std::optional<meta::CPSSequence> sequence;
    std::string proxy_handle;
    std::string denied_reason;
};

// What the manager needs from the rest of the system. The harness backs
// this with the live registries and a ledger node; tests can fake it.
class AssetDirectory {
public:
    virtual ~AssetDirectory() = default;

    virtual bool known_identity(const std::string& identity_id) const = 0;
    virtual std::string confirmed_owner(const std::string& identity_id) const = 0;
    virtual ident::Identity identity(const std::string& identity_id) const = 0;
    virtual const meta::MetadataBundle* bundle(const std::string& identity_id) const = 0;
    virtual std::string proxy_locator(const std::string& identity_id) const = 0;
    virtual ledger::Transaction submit_transfer(const std::string& identity_id,
                                                const std::string& acting_owner,
                                                const std::string& new_owner, Tick now) = 0;
    virtual void record_custody(const std::string& identity_id, const std::string& from_owner,
                                const std::string& to_owner, Tick now) = 0;
};

class AssetManager {
public:
    explicit AssetManager(AssetDirectory& directory) : directory_(directory) {}

    // One active grant per (user, identity); re-granting replaces it.
    AccessGrant grant(const std::string& owner_id, const std::string& user_id,
                      const std::string& identity_id, ScopeMask scope, Tick now);
    void revoke(const std::string& owner_id, const std::string& user_id,
                const std::string& identity_id);

    QueryResult query(const std::string& user_id, const std::string& identity_id,
                      RequestKind requested);

    // Ledger transfer plus a custody event; grants from the old owner
    // stop being effective once the ledger view flips.
    ledger::Transaction transfer(const std::string& owner_id, const std::string& new_owner_id,
                                 const std::string& identity_id, Tick now);

    bool handle_valid(const std::string& handle) const;
    std::optional<AccessGrant> active_grant(const std::string& user_id,
                                            const std::string& identity_id) const;

    // Tick boundary: every open proxy handle is rechecked against the
    // current ownership and grants; failing handles are invalidated.
    void on_tick(Tick now);

    // Line protocol: one JSON request in, one JSON response out. Verbs
    // GRANT, REVOKE, QUERY, TRANSFER.
    std::string serve_line(const std::string& line, Tick now);

private:
    ScopeMask effective_scope_locked(const std::string& user_id,
                                     const std::string& identity_id) const;

    struct HandleInfo {
        std::string user_id;
        std::string identity_id;
        bool valid = true;
    };

    AssetDirectory& directory_;
    mutable std::mutex mutex_;
    std::map<std::pair<std::string, std::string>, AccessGrant> grants_;  // (user, identity)
    std::map<std::string, HandleInfo> handles_;
    std::uint64_t next_handle_ = 1;
};

}  // namespace cpseq::am
