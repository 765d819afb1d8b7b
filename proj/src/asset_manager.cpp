#include "cpseq/asset_manager.hpp"

#include "json.hpp"

#include <sstream>
#include <vector>

namespace cpseq::am {

std::string scope_to_string(ScopeMask mask) {
    std::vector<std::string_view> parts;
    if (mask & kScopeIdentityRead) parts.push_back("IdentityRead");
    if (mask & kScopeMetadataRead) parts.push_back("MetadataRead");
    if (mask & kScopeProxyStream) parts.push_back("ProxyStream");
    if (parts.empty()) return "None";
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i != 0) out += "|";
        out += parts[i];
    }
    return out;
}

std::optional<ScopeMask> parse_scope(std::string_view text) {
    if (text == "None") return ScopeMask{0};
    ScopeMask mask = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find('|', start), text.size());
        const std::string_view part = text.substr(start, end - start);
        if (part == "IdentityRead") {
            mask |= kScopeIdentityRead;
        } else if (part == "MetadataRead") {
            mask |= kScopeMetadataRead;
        } else if (part == "ProxyStream") {
            mask |= kScopeProxyStream;
        } else {
            return std::nullopt;
        }
        if (end == text.size()) break;
        start = end + 1;
    }
    return mask;
}

std::string_view to_string(RequestKind kind) {
    switch (kind) {
        case RequestKind::identity: return "Identity";
        case RequestKind::metadata: return "Metadata";
        case RequestKind::proxy_stream: return "ProxyStream";
    }
    return "Identity";
}

std::optional<RequestKind> parse_request_kind(std::string_view text) {
    if (text == "Identity") return RequestKind::identity;
    if (text == "Metadata") return RequestKind::metadata;
    if (text == "ProxyStream") return RequestKind::proxy_stream;
    return std::nullopt;
}

AccessGrant AssetManager::grant(const std::string& owner_id, const std::string& user_id,
                                const std::string& identity_id, ScopeMask scope, Tick now) {
    if (scope == 0) fail(Errc::validation, "grant needs a non-empty scope");
    if (!directory_.known_identity(identity_id)) {
        fail(Errc::unknown_asset, "unknown identity '" + identity_id + "'");
    }
    if (directory_.confirmed_owner(identity_id) != owner_id) {
        fail(Errc::authorization,
             "'" + owner_id + "' is not the confirmed owner of '" + identity_id + "'");
    }
    std::lock_guard<std::mutex> lock(mutex_);
    AccessGrant grant{owner_id, user_id, identity_id, scope, now, false};
    grants_[{user_id, identity_id}] = grant;
    return grant;
}

void AssetManager::revoke(const std::string& owner_id, const std::string& user_id,
                          const std::string& identity_id) {
    if (!directory_.known_identity(identity_id)) {
        fail(Errc::unknown_asset, "unknown identity '" + identity_id + "'");
    }
    if (directory_.confirmed_owner(identity_id) != owner_id) {
        fail(Errc::authorization,
             "'" + owner_id + "' is not the confirmed owner of '" + identity_id + "'");
    }
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = grants_.find({user_id, identity_id});
    if (it == grants_.end() || it->second.revoked) {
        fail(Errc::validation, "no active grant for '" + user_id + "' on '" + identity_id + "'");
    }
    it->second.revoked = true;
}

ScopeMask AssetManager::effective_scope_locked(const std::string& user_id,
                                               const std::string& identity_id) const {
    const std::string owner = directory_.confirmed_owner(identity_id);
    if (!owner.empty() && owner == user_id) return kScopeAll;
    auto it = grants_.find({user_id, identity_id});
    if (it == grants_.end() || it->second.revoked) return 0;
    // A grant only carries authority while its grantor still owns the
    // asset in the confirmed view.
    if (it->second.owner_id != owner) return 0;
    return it->second.scope;
}

QueryResult AssetManager::query(const std::string& user_id, const std::string& identity_id,
                                RequestKind requested) {
    if (!directory_.known_identity(identity_id)) {
        fail(Errc::unknown_asset, "unknown identity '" + identity_id + "'");
    }
    std::lock_guard<std::mutex> lock(mutex_);
    const ScopeMask scope = effective_scope_locked(user_id, identity_id);
    QueryResult result;
    switch (requested) {
        case RequestKind::identity: {
            if (!(scope & kScopeIdentityRead)) {
                result.denied_reason = "insufficient scope for Identity";
                return result;
            }
            result.kind = QueryResult::Kind::sequence;
            result.sequence = meta::compose_sequence(directory_.identity(identity_id),
                                                     meta::MetadataBundle{},
                                                     directory_.proxy_locator(identity_id));
            return result;
        }
        case RequestKind::metadata: {
            if (!(scope & kScopeMetadataRead)) {
                result.denied_reason = "insufficient scope for Metadata";
                return result;
            }
            const meta::MetadataBundle* bundle = directory_.bundle(identity_id);
            result.kind = QueryResult::Kind::sequence;
            result.sequence = meta::compose_sequence(directory_.identity(identity_id),
                                                     bundle ? *bundle : meta::MetadataBundle{},
                                                     directory_.proxy_locator(identity_id));
            return result;
        }
        case RequestKind::proxy_stream: {
            if (!(scope & kScopeProxyStream)) {
                result.denied_reason = "insufficient scope for ProxyStream";
                return result;
            }
            std::string handle = "ph-" + std::to_string(next_handle_++) + "-" + identity_id;
            handles_[handle] = HandleInfo{user_id, identity_id, true};
            result.kind = QueryResult::Kind::proxy_handle;
            result.proxy_handle = std::move(handle);
            return result;
        }
    }
    return result;
}

ledger::Transaction AssetManager::transfer(const std::string& owner_id,
                                           const std::string& new_owner_id,
                                           const std::string& identity_id, Tick now) {
    if (!directory_.known_identity(identity_id)) {
        fail(Errc::unknown_asset, "unknown identity '" + identity_id + "'");
    }
    if (directory_.confirmed_owner(identity_id) != owner_id) {
        fail(Errc::authorization,
             "'" + owner_id + "' is not the confirmed owner of '" + identity_id + "'");
    }
    std::lock_guard<std::mutex> lock(mutex_);
    ledger::Transaction tx =
        directory_.submit_transfer(identity_id, owner_id, new_owner_id, now);
    directory_.record_custody(identity_id, owner_id, new_owner_id, now);
    return tx;
}

bool AssetManager::handle_valid(const std::string& handle) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = handles_.find(handle);
    return it != handles_.end() && it->second.valid;
}

std::optional<AccessGrant> AssetManager::active_grant(const std::string& user_id,
                                                      const std::string& identity_id) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = grants_.find({user_id, identity_id});
    if (it == grants_.end() || it->second.revoked) return std::nullopt;
    return it->second;
}

void AssetManager::on_tick(Tick) {
    std::lock_guard<std::mutex> lock(mutex_);
    for (auto& [handle, info] : handles_) {
        if (!info.valid) continue;
        const ScopeMask scope = effective_scope_locked(info.user_id, info.identity_id);
        if (!(scope & kScopeProxyStream)) info.valid = false;
    }
}

std::string AssetManager::serve_line(const std::string& line, Tick now) {
    nlohmann::ordered_json response;
    try {
        const auto request = nlohmann::json::parse(line);
        const std::string verb = request.at("verb").get<std::string>();
        if (verb == "GRANT") {
            auto scope = parse_scope(request.at("scope").get<std::string>());
            if (!scope) fail(Errc::validation, "unknown scope");
            const AccessGrant granted =
                grant(request.at("owner").get<std::string>(), request.at("user").get<std::string>(),
                      request.at("identity").get<std::string>(), *scope, now);
            response["status"] = "ok";
            response["scope"] = scope_to_string(granted.scope);
            response["granted_at"] = granted.granted_at;
        } else if (verb == "REVOKE") {
            revoke(request.at("owner").get<std::string>(), request.at("user").get<std::string>(),
                   request.at("identity").get<std::string>());
            response["status"] = "ok";
        } else if (verb == "QUERY") {
            auto kind = parse_request_kind(request.at("request").get<std::string>());
            if (!kind) fail(Errc::validation, "unknown request kind");
            const QueryResult result = query(request.at("user").get<std::string>(),
                                             request.at("identity").get<std::string>(), *kind);
            response["status"] = "ok";
            switch (result.kind) {
                case QueryResult::Kind::sequence:
                    response["result"] = "sequence";
                    response["identity"] = result.sequence->identity.identity_id;
                    response["bundle_events"] = result.sequence->bundle.size();
                    response["digest"] = result.sequence->digest.hex();
                    break;
                case QueryResult::Kind::proxy_handle:
                    response["result"] = "proxy_handle";
                    response["handle"] = result.proxy_handle;
                    break;
                case QueryResult::Kind::denied:
                    response["result"] = "denied";
                    response["reason"] = result.denied_reason;
                    break;
            }
        } else if (verb == "TRANSFER") {
            const ledger::Transaction tx =
                transfer(request.at("owner").get<std::string>(),
                         request.at("new_owner").get<std::string>(),
                         request.at("identity").get<std::string>(), now);
            response["status"] = "ok";
            response["tx_id"] = tx.tx_id.hex();
        } else {
            fail(Errc::validation, "unknown verb '" + verb + "'");
        }
    } catch (const Error& e) {
        response = nlohmann::ordered_json{};
        response["status"] = "error";
        response["code"] = to_string(e.code());
        response["message"] = e.what();
    } catch (const nlohmann::json::exception& e) {
        response = nlohmann::ordered_json{};
        response["status"] = "error";
        response["code"] = to_string(Errc::validation);
        response["message"] = std::string("malformed request: ") + e.what();
    }
    return response.dump();
}

}  // namespace cpseq::am
