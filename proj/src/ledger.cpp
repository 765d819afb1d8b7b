#include "cpseq/ledger.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace cpseq::ledger {

namespace {

void set_bit(std::vector<std::uint64_t>& bits, std::uint32_t i) {
    bits[i >> 6] |= std::uint64_t{1} << (i & 63);
}

void write_fields(FieldWriter& writer, const Transaction& tx) {
    writer.field(to_string(tx.kind))
        .field(tx.identity_id)
        .field_digest(tx.sequence_digest)
        .field(tx.proxy_locator)
        .field(tx.owner_id)
        .field(tx.prev_owner_id)
        .field_digest(tx.parent_a)
        .field_digest(tx.parent_b)
        .field(tx.issuer_node)
        .field_u64(tx.logical_timestamp);
}

// Winner of a conflict: heavier first, then the smaller tx_id.
bool beats(std::uint64_t weight_a, const TxId& id_a, std::uint64_t weight_b, const TxId& id_b) {
    if (weight_a != weight_b) return weight_a > weight_b;
    return id_a < id_b;
}

}  // namespace

std::string_view to_string(TxKind kind) {
    switch (kind) {
        case TxKind::genesis: return "Genesis";
        case TxKind::mint: return "Mint";
        case TxKind::metadata_update: return "MetadataUpdate";
        case TxKind::ownership_transfer: return "OwnershipTransfer";
    }
    return "Mint";
}

std::optional<TxKind> parse_tx_kind(std::string_view text) {
    if (text == "Genesis") return TxKind::genesis;
    if (text == "Mint") return TxKind::mint;
    if (text == "MetadataUpdate") return TxKind::metadata_update;
    if (text == "OwnershipTransfer") return TxKind::ownership_transfer;
    return std::nullopt;
}

Digest tx_digest(const Transaction& tx) {
    FieldWriter writer;
    write_fields(writer, tx);
    return writer.digest();
}

std::string encode_tx(const Transaction& tx) {
    FieldWriter record;
    record.field_digest(tx.tx_id);
    write_fields(record, tx);
    FieldWriter outer;
    outer.field(record.str());
    return outer.str();
}

std::optional<Transaction> decode_tx(std::string_view wire) {
    FieldReader outer(wire);
    auto record = outer.field();
    if (!record || !outer.at_end()) return std::nullopt;

    FieldReader reader(*record);
    Transaction tx;
    auto tx_id = reader.field_digest();
    auto kind_text = reader.field();
    if (!tx_id || !kind_text) return std::nullopt;
    auto kind = parse_tx_kind(*kind_text);
    if (!kind) return std::nullopt;
    tx.tx_id = *tx_id;
    tx.kind = *kind;

    auto identity = reader.field();
    auto sequence_digest = reader.field_digest();
    auto locator = reader.field();
    auto owner = reader.field();
    auto prev_owner = reader.field();
    auto parent_a = reader.field_digest();
    auto parent_b = reader.field_digest();
    auto issuer = reader.field();
    auto timestamp = reader.field_u64();
    if (!identity || !sequence_digest || !locator || !owner || !prev_owner || !parent_a ||
        !parent_b || !issuer || !timestamp || !reader.at_end()) {
        return std::nullopt;
    }
    tx.identity_id = std::move(*identity);
    tx.sequence_digest = *sequence_digest;
    tx.proxy_locator = std::move(*locator);
    tx.owner_id = std::move(*owner);
    tx.prev_owner_id = std::move(*prev_owner);
    tx.parent_a = *parent_a;
    tx.parent_b = *parent_b;
    tx.issuer_node = std::move(*issuer);
    tx.logical_timestamp = *timestamp;

    if (tx_digest(tx) != tx.tx_id) return std::nullopt;
    return tx;
}

// ============================ DagLedger ============================

const Transaction& DagLedger::genesis_tx() {
    static const Transaction genesis = [] {
        Transaction tx;
        tx.kind = TxKind::genesis;
        tx.issuer_node = "origin";
        tx.logical_timestamp = 0;
        tx.tx_id = tx_digest(tx);
        return tx;
    }();
    return genesis;
}

DagLedger::DagLedger() {
    const Transaction& genesis = genesis_tx();
    genesis_id_ = genesis.tx_id;
    TxNode node;
    node.tx = genesis;
    arena_.push_back(std::move(node));
    index_.emplace(genesis_id_, 0);
    tip_idx_.push_back(0);
}

bool DagLedger::contains(const TxId& id) const { return index_.count(id) != 0; }

const Transaction* DagLedger::find(const TxId& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &arena_[it->second].tx;
}

std::vector<Transaction> DagLedger::all() const {
    std::vector<Transaction> out;
    out.reserve(arena_.size());
    for (const auto& node : arena_) out.push_back(node.tx);
    return out;
}

bool DagLedger::past_contains(const TxNode& node, std::uint32_t idx) const {
    const std::size_t word = idx >> 6;
    return word < node.past.size() && ((node.past[word] >> (idx & 63)) & 1) != 0;
}

bool DagLedger::insert(const Transaction& tx) {
    if (index_.count(tx.tx_id) != 0) return false;
    if (tx.kind == TxKind::genesis) {
        fail(Errc::validation, "only the shared genesis transaction may lack parents");
    }
    if (tx_digest(tx) != tx.tx_id) fail(Errc::validation, "transaction id does not match contents");
    auto pa = index_.find(tx.parent_a);
    auto pb = index_.find(tx.parent_b);
    if (pa == index_.end() || pb == index_.end()) {
        fail(Errc::validation, "transaction parents are not present in the DAG");
    }

    const auto idx = static_cast<std::uint32_t>(arena_.size());
    TxNode node;
    node.tx = tx;
    node.past.assign((idx + 63) / 64, 0);
    for (std::uint32_t parent : {pa->second, pb->second}) {
        const auto& parent_past = arena_[parent].past;
        for (std::size_t w = 0; w < parent_past.size(); ++w) node.past[w] |= parent_past[w];
        set_bit(node.past, parent);
    }

    // One pass over the ancestor bitset: count it and push this tx's
    // weight contribution down to every ancestor.
    std::uint64_t count = 0;
    for (std::size_t w = 0; w < node.past.size(); ++w) {
        std::uint64_t bits = node.past[w];
        count += static_cast<std::uint64_t>(std::popcount(bits));
        while (bits != 0) {
            const int b = std::countr_zero(bits);
            bits &= bits - 1;
            arena_[(w << 6) + static_cast<std::uint32_t>(b)].weight += 1;
        }
    }
    node.past_count = count;

    arena_[pa->second].approvers += 1;
    if (pb->second != pa->second) arena_[pb->second].approvers += 1;
    for (std::uint32_t parent : {pa->second, pb->second}) {
        std::erase(tip_idx_, parent);
    }
    tip_idx_.push_back(idx);

    if (tx.kind == TxKind::mint) {
        auto& mints = mints_by_identity_[tx.identity_id];
        mints.push_back(idx);
        if (mints.size() == 2) conflicted_identities_.push_back(tx.identity_id);
    }
    index_.emplace(tx.tx_id, idx);
    arena_.push_back(std::move(node));
    return true;
}

std::uint64_t DagLedger::cumulative_weight(const TxId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) fail(Errc::unknown_asset, "unknown transaction id");
    return arena_[it->second].weight;
}

std::uint64_t DagLedger::past_size(const TxId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) fail(Errc::unknown_asset, "unknown transaction id");
    return arena_[it->second].past_count + 1;
}

bool DagLedger::approves(const TxId& descendant, const TxId& ancestor) const {
    auto d = index_.find(descendant);
    auto a = index_.find(ancestor);
    if (d == index_.end() || a == index_.end()) {
        fail(Errc::unknown_asset, "unknown transaction id");
    }
    return past_contains(arena_[d->second], a->second);
}

std::vector<TxId> DagLedger::tips() const {
    std::vector<TxId> out;
    out.reserve(tip_idx_.size());
    for (std::uint32_t idx : tip_idx_) out.push_back(arena_[idx].tx.tx_id);
    return out;
}

bool DagLedger::pair_is_conflict_free(std::uint32_t a, std::uint32_t b) const {
    if (conflicted_identities_.empty()) return true;
    auto in_cone = [&](std::uint32_t m) {
        return m == a || m == b || past_contains(arena_[a], m) || past_contains(arena_[b], m);
    };
    for (const auto& identity : conflicted_identities_) {
        const auto& mints = mints_by_identity_.at(identity);
        int seen = 0;
        for (std::uint32_t m : mints) {
            if (in_cone(m) && ++seen >= 2) return false;
        }
    }
    return true;
}

std::pair<TxId, TxId> DagLedger::select_tips(double alpha, Rng& rng) const {
    if (tip_idx_.empty()) fail(Errc::validation, "ledger has no tips");
    if (tip_idx_.size() == 1) {
        const TxId& only = arena_[tip_idx_[0]].tx.tx_id;
        return {only, only};
    }

    std::uint64_t max_score = 0;
    for (std::uint32_t idx : tip_idx_) {
        max_score = std::max(max_score, arena_[idx].past_count + 1);
    }
    std::vector<double> weights(tip_idx_.size());
    for (std::size_t i = 0; i < tip_idx_.size(); ++i) {
        const double score = static_cast<double>(arena_[tip_idx_[i]].past_count + 1);
        weights[i] = std::exp(alpha * (score - static_cast<double>(max_score)));
    }

    for (int attempt = 0; attempt < 16; ++attempt) {
        const std::size_t a = rng.pick_weighted(weights);
        const double saved = weights[a];
        weights[a] = 0.0;
        const std::size_t b = rng.pick_weighted(weights);
        weights[a] = saved;
        if (pair_is_conflict_free(tip_idx_[a], tip_idx_[b])) {
            return {arena_[tip_idx_[a]].tx.tx_id, arena_[tip_idx_[b]].tx.tx_id};
        }
    }

    // No conflict-free distinct pair found; settle on the heaviest tip
    // alone (earliest wins a tie).
    std::size_t best = 0;
    for (std::size_t i = 1; i < tip_idx_.size(); ++i) {
        if (arena_[tip_idx_[i]].past_count > arena_[tip_idx_[best]].past_count) best = i;
    }
    const TxId& id = arena_[tip_idx_[best]].tx.tx_id;
    return {id, id};
}

std::set<TxId> DagLedger::confirmed_set(const ConsensusConfig& config) const {
    const std::uint64_t threshold = config.confirmation_weight_threshold;
    if (threshold < 1) fail(Errc::configuration, "confirmation threshold must be >= 1");

    std::vector<char> in(arena_.size(), 0);
    for (std::size_t i = 0; i < arena_.size(); ++i) {
        in[i] = arena_[i].weight >= threshold ? 1 : 0;
    }

    // Double-mints: keep only the winning mint of each identity.
    for (const auto& [identity, mints] : mints_by_identity_) {
        if (mints.size() < 2) continue;
        std::optional<std::uint32_t> winner;
        for (std::uint32_t m : mints) {
            if (!in[m]) continue;
            if (!winner || beats(arena_[m].weight, arena_[m].tx.tx_id, arena_[*winner].weight,
                                 arena_[*winner].tx.tx_id)) {
                winner = m;
            }
        }
        if (!winner) continue;
        for (std::uint32_t m : mints) {
            if (m != *winner) in[m] = 0;
        }
    }

    // Transfers spending the same owner state: same winner rule.
    std::map<std::pair<std::string, std::string>, std::vector<std::uint32_t>> spends;
    for (std::size_t i = 0; i < arena_.size(); ++i) {
        if (in[i] && arena_[i].tx.kind == TxKind::ownership_transfer) {
            spends[{arena_[i].tx.identity_id, arena_[i].tx.prev_owner_id}].push_back(
                static_cast<std::uint32_t>(i));
        }
    }
    for (const auto& [state, group] : spends) {
        if (group.size() < 2) continue;
        std::uint32_t winner = group.front();
        for (std::uint32_t t : group) {
            if (beats(arena_[t].weight, arena_[t].tx.tx_id, arena_[winner].weight,
                      arena_[winner].tx.tx_id)) {
                winner = t;
            }
        }
        for (std::uint32_t t : group) {
            if (t != winner) in[t] = 0;
        }
    }

    std::set<TxId> out;
    for (std::size_t i = 0; i < arena_.size(); ++i) {
        if (in[i]) out.insert(arena_[i].tx.tx_id);
    }
    return out;
}

std::string DagLedger::confirmed_owner(const std::string& identity_id,
                                       const ConsensusConfig& config) const {
    const auto confirmed = confirmed_set(config);

    auto mints_it = mints_by_identity_.find(identity_id);
    if (mints_it == mints_by_identity_.end()) return {};
    std::string owner;
    for (std::uint32_t m : mints_it->second) {
        if (confirmed.count(arena_[m].tx.tx_id) != 0) {
            owner = arena_[m].tx.owner_id;
            break;
        }
    }
    if (owner.empty()) return {};

    // Follow the confirmed transfer chain from the minted owner. Each
    // owner state has at most one confirmed spend, and every hop
    // consumes a distinct transfer, so the walk terminates.
    std::vector<std::uint32_t> transfers;
    for (std::size_t i = 0; i < arena_.size(); ++i) {
        if (arena_[i].tx.kind == TxKind::ownership_transfer &&
            arena_[i].tx.identity_id == identity_id &&
            confirmed.count(arena_[i].tx.tx_id) != 0) {
            transfers.push_back(static_cast<std::uint32_t>(i));
        }
    }
    std::vector<char> used(transfers.size(), 0);
    bool moved = true;
    while (moved) {
        moved = false;
        for (std::size_t i = 0; i < transfers.size(); ++i) {
            if (!used[i] && arena_[transfers[i]].tx.prev_owner_id == owner) {
                owner = arena_[transfers[i]].tx.owner_id;
                used[i] = 1;
                moved = true;
                break;
            }
        }
    }
    return owner;
}

bool DagLedger::has_mint(const std::string& identity_id) const {
    auto it = mints_by_identity_.find(identity_id);
    return it != mints_by_identity_.end() && !it->second.empty();
}

std::string DagLedger::to_dot() const {
    std::ostringstream out;
    out << "digraph ledger {\n  rankdir=RL;\n";
    for (const auto& node : arena_) {
        const std::string label = node.tx.tx_id.hex().substr(0, 8);
        out << "  \"" << label << "\" [label=\"" << label << "\\n" << to_string(node.tx.kind);
        if (!node.tx.identity_id.empty()) out << "\\n" << node.tx.identity_id;
        out << "\\nw=" << node.weight << "\"];\n";
        if (node.tx.kind != TxKind::genesis) {
            out << "  \"" << label << "\" -> \"" << node.tx.parent_a.hex().substr(0, 8) << "\";\n";
            if (node.tx.parent_b != node.tx.parent_a) {
                out << "  \"" << label << "\" -> \"" << node.tx.parent_b.hex().substr(0, 8)
                    << "\";\n";
            }
        }
    }
    out << "}\n";
    return out.str();
}

// ============================ LedgerNode ============================

LedgerNode::LedgerNode(std::string node_id, std::uint64_t rng_seed, bool honest)
    : node_id_(std::move(node_id)), honest_(honest), rng_(rng_seed) {}

std::pair<TxId, TxId> LedgerNode::select_tips(const ConsensusConfig& config) {
    return dag_.select_tips(config.tip_selection_bias, rng_);
}

Transaction LedgerNode::submit(TxKind kind, const std::string& identity_id,
                               const Digest& sequence_digest, const std::string& proxy_locator,
                               const std::string& owner_id, const std::string& acting_owner,
                               Tick now, const ConsensusConfig& config) {
    if (kind == TxKind::genesis) fail(Errc::validation, "genesis cannot be submitted");
    if (identity_id.empty()) fail(Errc::validation, "transaction needs an identity id");

    Transaction tx;
    tx.kind = kind;
    tx.identity_id = identity_id;
    tx.sequence_digest = sequence_digest;
    tx.issuer_node = node_id_;
    tx.logical_timestamp = now;

    switch (kind) {
        case TxKind::mint:
            if (dag_.has_mint(identity_id)) {
                fail(Errc::uniqueness,
                     "identity '" + identity_id + "' already has a mint in this node's view");
            }
            if (owner_id.empty()) fail(Errc::validation, "mint needs an owner id");
            tx.proxy_locator = proxy_locator;
            tx.owner_id = owner_id;
            break;
        case TxKind::metadata_update:
            if (!dag_.has_mint(identity_id)) {
                fail(Errc::unknown_asset, "no mint for identity '" + identity_id + "' in view");
            }
            break;
        case TxKind::ownership_transfer: {
            if (!dag_.has_mint(identity_id)) {
                fail(Errc::unknown_asset, "no mint for identity '" + identity_id + "' in view");
            }
            if (owner_id.empty()) fail(Errc::validation, "transfer needs a new owner id");
            const std::string current = dag_.confirmed_owner(identity_id, config);
            if (current.empty() || current != acting_owner) {
                fail(Errc::authorization, "'" + acting_owner + "' is not the confirmed owner of '" +
                                              identity_id + "'");
            }
            tx.owner_id = owner_id;
            tx.prev_owner_id = acting_owner;
            break;
        }
        case TxKind::genesis:
            break;
    }

    auto [parent_a, parent_b] = dag_.select_tips(config.tip_selection_bias, rng_);
    tx.parent_a = parent_a;
    tx.parent_b = parent_b;
    tx.tx_id = tx_digest(tx);
    dag_.insert(tx);
    return tx;
}

void LedgerNode::receive(const Transaction& tx) {
    if (dag_.contains(tx.tx_id)) return;
    if (dag_.contains(tx.parent_a) && dag_.contains(tx.parent_b)) {
        dag_.insert(tx);
        drain_pending();
    } else {
        pending_.push_back(tx);
    }
}

void LedgerNode::receive_wire(std::string_view wire) {
    auto tx = decode_tx(wire);
    if (!tx) {
        malformed_seen_ += 1;
        return;
    }
    receive(*tx);
}

void LedgerNode::drain_pending() {
    bool progressed = true;
    while (progressed) {
        progressed = false;
        for (auto it = pending_.begin(); it != pending_.end();) {
            if (dag_.contains(it->tx_id)) {
                it = pending_.erase(it);
                progressed = true;
            } else if (dag_.contains(it->parent_a) && dag_.contains(it->parent_b)) {
                dag_.insert(*it);
                it = pending_.erase(it);
                progressed = true;
            } else {
                ++it;
            }
        }
    }
}

GossipStats gossip_round(std::vector<LedgerNode*>& nodes) {
    GossipStats stats;
    std::map<std::string, std::vector<Transaction>> snapshots;
    for (LedgerNode* node : nodes) snapshots[node->node_id()] = node->dag().all();

    for (LedgerNode* receiver : nodes) {
        const std::uint64_t malformed_before = receiver->malformed_seen();
        for (const std::string& peer_id : receiver->peers()) {
            auto snapshot = snapshots.find(peer_id);
            if (snapshot == snapshots.end()) continue;
            for (const Transaction& tx : snapshot->second) {
                if (receiver->dag().contains(tx.tx_id)) {
                    stats.duplicates += 1;
                    continue;
                }
                const std::size_t before = receiver->dag().size();
                receiver->receive_wire(encode_tx(tx));
                if (receiver->dag().size() > before) stats.delivered += 1;
            }
        }
        stats.malformed_dropped += receiver->malformed_seen() - malformed_before;
        stats.orphans_pending += receiver->pending_count();
    }
    return stats;
}

// ============================ Attack simulation ============================

std::string AttackReport::to_text() const {
    std::ostringstream out;
    out << "attack fraction=" << adversary_fraction << " seed=" << seed << " rounds=" << rounds
        << " honest=" << honest_count << " reversions=" << reverted_confirmations
        << " success=" << (success ? "true" : "false");
    if (target_confirmed_round) {
        out << " target_confirmed_round=" << *target_confirmed_round;
    }
    out << " target_weight=" << target_weight << " rival_weight=" << rival_weight;
    return out.str();
}

AttackReport run_attack(std::uint32_t honest_count, double adversary_fraction,
                        std::uint32_t rounds, std::uint64_t seed,
                        const ConsensusConfig& config) {
    if (!(adversary_fraction >= 0.0 && adversary_fraction < 1.0)) {
        fail(Errc::validation, "adversary fraction must be in [0, 1)");
    }
    if (honest_count == 0) fail(Errc::validation, "need at least one honest node");

    AttackReport report;
    report.adversary_fraction = adversary_fraction;
    report.seed = seed;
    report.rounds = rounds;
    report.honest_count = honest_count;

    // The honest network is modeled as one shared synchronous view:
    // issuance rotates across honest labels at one transaction per round
    // while the adversary publishes into the same view immediately.
    DagLedger dag;
    Rng rng(seed);
    const double alpha = config.tip_selection_bias;
    const std::uint64_t threshold = config.confirmation_weight_threshold;
    const double adversary_rate =
        adversary_fraction > 0.0 ? adversary_fraction / (1.0 - adversary_fraction) : 0.0;

    const std::string target_identity = "asset-target";
    constexpr std::uint32_t kTargetRound = 3;

    std::optional<TxId> target;       // the honest mint under attack
    std::optional<TxId> rival;        // the adversary's conflicting mint
    TxId target_parent_a, target_parent_b;
    // The adversary grows two parasite chains so a pair of parasite tips
    // is always available for honest tip selection to land on.
    TxId parasite_head_a, parasite_head_b;
    bool extend_a = true;
    double accumulator = 0.0;
    bool target_was_confirmed = false;
    bool rival_was_confirmed = false;

    auto confirmed_now = [&](const TxId& self, const std::optional<TxId>& other) {
        const std::uint64_t w = dag.cumulative_weight(self);
        if (w < threshold) return false;
        if (!other) return true;
        const std::uint64_t wo = dag.cumulative_weight(*other);
        if (wo < threshold) return true;
        return beats(w, self, wo, *other);
    };

    for (std::uint32_t round = 1; round <= rounds; ++round) {
        // Honest issuance: one mint of a fresh identity per round, except
        // the round that mints the attack target.
        Transaction tx;
        tx.kind = TxKind::mint;
        tx.issuer_node = "h" + std::to_string(round % honest_count);
        tx.logical_timestamp = round;
        if (round == kTargetRound) {
            tx.identity_id = target_identity;
            tx.owner_id = "alice";
        } else {
            tx.identity_id = "filler-" + std::to_string(round);
            tx.owner_id = "owner-" + std::to_string(round % honest_count);
        }
        auto [pa, pb] = dag.select_tips(alpha, rng);
        tx.parent_a = pa;
        tx.parent_b = pb;
        tx.tx_id = tx_digest(tx);
        dag.insert(tx);
        if (round == kTargetRound) {
            target = tx.tx_id;
            target_parent_a = pa;
            target_parent_b = pb;
        }

        // Adversary: once the target is confirmed, publish a conflicting
        // mint beside it and outgrow it with parasite transactions.
        if (target && adversary_rate > 0.0) {
            if (!rival && target_was_confirmed) {
                Transaction double_mint;
                double_mint.kind = TxKind::mint;
                double_mint.identity_id = target_identity;
                double_mint.owner_id = "mallory";
                double_mint.issuer_node = "adversary";
                double_mint.logical_timestamp = round;
                double_mint.parent_a = target_parent_a;
                double_mint.parent_b = target_parent_b;
                double_mint.tx_id = tx_digest(double_mint);
                dag.insert(double_mint);
                rival = double_mint.tx_id;
                parasite_head_a = *rival;
                parasite_head_b = *rival;
            } else if (rival) {
                accumulator += adversary_rate;
                std::uint32_t salt = 0;
                while (accumulator >= 1.0) {
                    accumulator -= 1.0;
                    Transaction parasite;
                    parasite.kind = TxKind::metadata_update;
                    parasite.identity_id = target_identity;
                    parasite.issuer_node = "adversary";
                    parasite.logical_timestamp = round;
                    parasite.proxy_locator = "p" + std::to_string(salt++);
                    parasite.parent_a = extend_a ? parasite_head_a : parasite_head_b;
                    parasite.parent_b = *rival;
                    parasite.tx_id = tx_digest(parasite);
                    dag.insert(parasite);
                    (extend_a ? parasite_head_a : parasite_head_b) = parasite.tx_id;
                    extend_a = !extend_a;
                }
            }
        }

        if (target) {
            const bool target_confirmed = confirmed_now(*target, rival);
            if (target_was_confirmed && !target_confirmed) {
                report.reverted_confirmations += 1;
                report.success = true;
            }
            if (target_confirmed && !target_was_confirmed && !report.target_confirmed_round) {
                report.target_confirmed_round = round;
            }
            target_was_confirmed = target_confirmed;
        }
        if (rival) {
            const bool rival_confirmed = confirmed_now(*rival, target);
            if (rival_was_confirmed && !rival_confirmed) {
                report.reverted_confirmations += 1;
                report.success = true;
            }
            rival_was_confirmed = rival_confirmed;
        }
    }

    if (target) report.target_weight = dag.cumulative_weight(*target);
    if (rival) report.rival_weight = dag.cumulative_weight(*rival);
    return report;
}

}  // namespace cpseq::ledger
