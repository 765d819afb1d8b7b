#pragma once
// Simulated DAG ledger holding the asset manifest: mint, metadata-update,
// and ownership-transfer transactions anchored by sequence digests. Nodes
// run seeded tip selection, cumulative-weight confirmation, synchronous
// gossip rounds, and an adversary simulation for reversion experiments.

#include "cpseq/digest.hpp"
#include "cpseq/errors.hpp"
#include "cpseq/rng.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cpseq::ledger {

using TxId = Digest;

enum class TxKind { genesis, mint, metadata_update, ownership_transfer };

std::string_view to_string(TxKind kind);
std::optional<TxKind> parse_tx_kind(std::string_view text);

struct Transaction {
    TxId tx_id;              // digest over every other field
    TxKind kind = TxKind::mint;
    std::string identity_id;
    Digest sequence_digest;
    std::string proxy_locator;  // mint only
    std::string owner_id;       // mint: initial owner; transfer: new owner
    std::string prev_owner_id;  // transfer only: owner state being spent
    TxId parent_a;              // zero for genesis
    TxId parent_b;
    std::string issuer_node;
    Tick logical_timestamp = 0;
};

// Digest over the canonical field encoding (everything except tx_id).
Digest tx_digest(const Transaction& tx);

// Length-prefixed wire record used by gossip; fields in fixed order,
// digests as raw bytes.
std::string encode_tx(const Transaction& tx);

// Returns the decoded transaction, or nothing when the record is
// malformed or its tx_id does not match the recomputed digest.
std::optional<Transaction> decode_tx(std::string_view wire);

struct ConsensusConfig {
    std::uint64_t confirmation_weight_threshold = 10;
    double adversary_fraction = 0.0;  // in [0, 1)
    double tip_selection_bias = 0.05;  // softmax alpha, >= 0
};

// Single node's DAG. Transactions live in an append-only arena; each
// carries a bitset of its ancestors, so reachability and past-cone size
// are O(1) lookups and cumulative weights stay incremental.
class DagLedger {
public:
    DagLedger();  // seeded with the shared genesis transaction

    static const Transaction& genesis_tx();
    const TxId& genesis_id() const { return genesis_id_; }

    std::size_t size() const { return arena_.size(); }
    bool contains(const TxId& id) const;
    const Transaction* find(const TxId& id) const;
    std::vector<Transaction> all() const;  // insertion (topological) order

    // Inserts a fully formed transaction. Parents must already be
    // present; duplicates are ignored. Returns whether it was new.
    bool insert(const Transaction& tx);

    // 1 + number of distinct transactions approving tx.
    std::uint64_t cumulative_weight(const TxId& id) const;
    // Size of tx's past cone including itself; the tip-selection score.
    std::uint64_t past_size(const TxId& id) const;
    // True when `descendant` reaches `ancestor` through parent links.
    bool approves(const TxId& descendant, const TxId& ancestor) const;

    std::vector<TxId> tips() const;  // zero-approver txs, insertion order

    // Parent pair drawn tip-by-tip with probability proportional to
    // exp(alpha * past_size), without replacement when two or more tips
    // exist. Pairs whose merged cone would approve two different mints of
    // one identity are rejected and redrawn.
    std::pair<TxId, TxId> select_tips(double alpha, Rng& rng) const;

    // Weight-threshold confirmation with conflict exclusion: among
    // double-mints of one identity or transfers spending one owner
    // state, the heavier wins (ties to the smaller tx_id) and the loser
    // is excluded.
    std::set<TxId> confirmed_set(const ConsensusConfig& config) const;

    // Current owner per the confirmed mint followed by the chain of
    // confirmed transfers; empty when no mint is confirmed.
    std::string confirmed_owner(const std::string& identity_id,
                                const ConsensusConfig& config) const;

    // Any mint for the identity anywhere in the DAG, confirmed or not.
    bool has_mint(const std::string& identity_id) const;

    std::string to_dot() const;

private:
    struct TxNode {
        Transaction tx;
        std::vector<std::uint64_t> past;  // ancestor bitset over arena indices
        std::uint64_t past_count = 0;     // set bits in `past`
        std::uint64_t weight = 1;         // cumulative weight
        std::uint32_t approvers = 0;      // direct approvers
    };

    bool past_contains(const TxNode& node, std::uint32_t idx) const;
    bool pair_is_conflict_free(std::uint32_t a, std::uint32_t b) const;

    std::vector<TxNode> arena_;
    std::unordered_map<TxId, std::uint32_t, DigestHash> index_;
    std::vector<std::uint32_t> tip_idx_;
    std::map<std::string, std::vector<std::uint32_t>> mints_by_identity_;
    std::vector<std::string> conflicted_identities_;  // identities with >1 mint
    TxId genesis_id_;
};

struct GossipStats {
    std::uint64_t delivered = 0;
    std::uint64_t duplicates = 0;
    std::uint64_t malformed_dropped = 0;
    std::uint64_t orphans_pending = 0;
};

class LedgerNode {
public:
    LedgerNode(std::string node_id, std::uint64_t rng_seed, bool honest = true);

    const std::string& node_id() const { return node_id_; }
    bool honest() const { return honest_; }
    DagLedger& dag() { return dag_; }
    const DagLedger& dag() const { return dag_; }
    std::set<std::string>& peers() { return peers_; }
    const std::set<std::string>& peers() const { return peers_; }
    std::uint64_t malformed_seen() const { return malformed_seen_; }

    std::pair<TxId, TxId> select_tips(const ConsensusConfig& config);

    // Builds, validates, and inserts a new transaction on two selected
    // tips. Mint refuses identities already minted in this node's view;
    // updates and transfers need a mint in view; transfers must be acted
    // by the identity's current confirmed owner.
    Transaction submit(TxKind kind, const std::string& identity_id,
                       const Digest& sequence_digest, const std::string& proxy_locator,
                       const std::string& owner_id, const std::string& acting_owner, Tick now,
                       const ConsensusConfig& config);

    // Wire-level receive: malformed records are counted and dropped;
    // records with missing parents wait in a pending buffer until their
    // parents arrive.
    void receive_wire(std::string_view wire);
    void receive(const Transaction& tx);
    std::size_t pending_count() const { return pending_.size(); }

private:
    void drain_pending();

    std::string node_id_;
    bool honest_;
    Rng rng_;
    DagLedger dag_;
    std::set<std::string> peers_;
    std::vector<Transaction> pending_;
    std::uint64_t malformed_seen_ = 0;
};

// One synchronous exchange: every node offers the transactions its peers
// lack, based on ledgers as they stood at round start. Returns combined
// delivery counters.
GossipStats gossip_round(std::vector<LedgerNode*>& nodes);

struct AttackReport {
    double adversary_fraction = 0.0;
    std::uint64_t seed = 0;
    std::uint32_t rounds = 0;
    std::uint32_t honest_count = 0;
    std::uint64_t reverted_confirmations = 0;
    bool success = false;  // any previously confirmed tx later dropped
    std::optional<std::uint32_t> target_confirmed_round;
    std::uint64_t target_weight = 0;   // final weight of the attacked mint
    std::uint64_t rival_weight = 0;    // final weight of the conflicting mint
    std::string to_text() const;
};

// Round-driven double-mint attack: honest traffic issues one transaction
// per round against softmax tip selection; once the target mint
// confirms, an adversary with the given fraction of issuance power
// publishes a conflicting mint anchored beside it and grows a parasite
// cone on top, trying to outweigh the honest branch.
AttackReport run_attack(std::uint32_t honest_count, double adversary_fraction,
                        std::uint32_t rounds, std::uint64_t seed,
                        const ConsensusConfig& config);

}  // namespace cpseq::ledger
