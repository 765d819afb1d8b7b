// Acceptance gate: one self-contained check per release criterion, each
// printed as a single PASS/FAIL line. Every oracle here is computed
// independently of the implementation under test (closed forms, graph
// walks, hand-traced logs), so a pass means agreement, not tautology.

#include "cpseq/asset_manager.hpp"
#include "cpseq/config.hpp"
#include "cpseq/digest.hpp"
#include "cpseq/engine.hpp"
#include "cpseq/identification.hpp"
#include "cpseq/ledger.hpp"
#include "cpseq/metadata.hpp"
#include "cpseq/proxy.hpp"
#include "cpseq/rng.hpp"
#include "cpseq/scenario.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace cpseq;

namespace {

struct Outcome {
    bool ok = false;
    std::string detail;
};

std::string data_path(const std::string& rel) { return std::string(CPSEQ_DATA_DIR) + "/" + rel; }

std::string fmt(const char* format, ...) {
    char buffer[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buffer, sizeof(buffer), format, args);
    va_end(args);
    return buffer;
}

// ---------------------------------------------------------------- 1 ----

Outcome transcript_ranks_key_first() {
    auto config = config::builtins();
    auto answers = config::load_answers(data_path("key20q_answers.txt"));
    if (answers.size() != 17) return {false, fmt("expected 17 answers, got %zu", answers.size())};

    auto posterior = ident::classify(answers, config.catalog);
    if (posterior.entries.size() != 5) {
        return {false, fmt("expected 5 classes, got %zu", posterior.entries.size())};
    }
    const auto& top = posterior.entries[0];
    if (top.class_label != "key") {
        return {false, "top class is '" + top.class_label + "', not 'key'"};
    }
    if (!(top.probability > posterior.entries[1].probability)) {
        return {false, fmt("top probability %.6f not strictly above runner-up %.6f",
                           top.probability, posterior.entries[1].probability)};
    }
    return {true, fmt("p(key)=%.4f vs p(%s)=%.4f", top.probability,
                      posterior.entries[1].class_label.c_str(),
                      posterior.entries[1].probability)};
}

// ---------------------------------------------------------------- 2 ----

// The match gate is sized from the noise model: rescan noise is 1 sigma
// per feature, so squared normalized distance to the true identity is
// chi-square with 7 degrees of freedom. A threshold of 5 keeps over
// 99.9% of rescans inside the gate while 8-sigma spacing keeps every
// other identity far outside it.
constexpr double kMatchThreshold = 5.0;

struct SyntheticKey {
    std::vector<double> values;  // schema order
    std::string identity_id;
};

double normalized_distance(const ident::FeatureSchema& schema, const std::vector<double>& a,
                           const std::vector<double>& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < schema.features.size(); ++i) {
        const double d = (a[i] - b[i]) / schema.features[i].sigma;
        sum += d * d;
    }
    return std::sqrt(sum);
}

ident::Observation to_observation(const ident::FeatureSchema& schema,
                                  const std::vector<double>& values) {
    ident::Observation obs;
    for (std::size_t i = 0; i < schema.features.size(); ++i) {
        obs[schema.features[i].name] = values[i];
    }
    return obs;
}

std::vector<double> noisy_copy(const ident::FeatureSchema& schema,
                               const std::vector<double>& center, double noise_scale, Rng& rng) {
    std::vector<double> out(center.size());
    for (std::size_t i = 0; i < center.size(); ++i) {
        const auto& def = schema.features[i];
        out[i] = std::clamp(center[i] + rng.normal() * noise_scale * def.sigma, def.min_value,
                            def.max_value);
    }
    return out;
}

Outcome separated_keys_resolve_correctly() {
    auto config = config::builtins();
    const ident::FeatureSchema& schema = *config.schemas.find("key");
    Rng rng(424242);

    // 100 centers, pairwise >= 8 sigma apart, 3 sigma inside the bounds.
    std::vector<SyntheticKey> keys;
    int draws = 0;
    while (keys.size() < 100 && draws < 200000) {
        ++draws;
        std::vector<double> candidate(schema.features.size());
        for (std::size_t i = 0; i < schema.features.size(); ++i) {
            const auto& def = schema.features[i];
            const double lo = def.min_value + 3.0 * def.sigma;
            const double hi = def.max_value - 3.0 * def.sigma;
            candidate[i] = lo + rng.uniform01() * (hi - lo);
        }
        bool far_enough = true;
        for (const auto& existing : keys) {
            if (normalized_distance(schema, existing.values, candidate) < 8.0) {
                far_enough = false;
                break;
            }
        }
        if (far_enough) keys.push_back({std::move(candidate), ""});
    }
    if (keys.size() != 100) return {false, fmt("placed only %zu/100 centers", keys.size())};

    ident::IdentityRegistry registry(6.0);
    for (auto& key : keys) {
        auto fv = ident::characterize("key", to_observation(schema, key.values), config.schemas);
        auto resolution = registry.mint_or_resolve(fv, kMatchThreshold, 1);
        if (resolution.kind != ident::ResolutionKind::minted) {
            return {false, "a fresh center resolved into an existing identity"};
        }
        key.identity_id = resolution.identity.identity_id;
    }

    // Re-scan each key 20 times with full 1-sigma noise. A re-scan that
    // mints a fresh identity is merely incorrect; resolving to another
    // key's identity is a cross-resolution and must never happen.
    std::map<std::string, std::size_t> id_to_key;
    for (std::size_t k = 0; k < keys.size(); ++k) id_to_key[keys[k].identity_id] = k;

    int correct = 0;
    int cross = 0;
    int splits = 0;
    const int total = 100 * 20;
    for (std::size_t k = 0; k < keys.size(); ++k) {
        for (int r = 0; r < 20; ++r) {
            auto obs = noisy_copy(schema, keys[k].values, 1.0, rng);
            auto fv = ident::characterize("key", to_observation(schema, obs), config.schemas);
            auto resolution = registry.mint_or_resolve(fv, kMatchThreshold, 2);
            const std::string& got = resolution.identity.identity_id;
            if (resolution.kind == ident::ResolutionKind::minted) {
                ++splits;
                id_to_key[got] = k;  // own this key's satellite identity
            } else if (got == keys[k].identity_id) {
                ++correct;
            } else if (id_to_key.count(got) != 0 && id_to_key[got] == k) {
                ++splits;  // landed on an earlier satellite of the same key
            } else {
                ++cross;
            }
        }
    }
    const double rate = static_cast<double>(correct) / total;
    if (cross != 0) return {false, fmt("%d cross-resolutions", cross)};
    if (rate < 0.99) return {false, fmt("correct rate %.4f below 0.99", rate)};
    return {true, fmt("correct %d/%d (%.2f%%), crosses 0, new splits %d", correct, total,
                      100.0 * rate, splits)};
}

// ---------------------------------------------------------------- 3 ----

Outcome worn_twin_keys_stay_distinct() {
    auto config = config::builtins();
    const ident::FeatureSchema& schema = *config.schemas.find("key");
    Rng rng(777);

    // Identical cut pattern; only accumulated wear differs (11 sigma).
    const std::vector<double> fresh = {3.0, 2.0, 4.0, 1.5, 2.5, 0.10, 0.5};
    const std::vector<double> worn = {3.0, 2.0, 4.0, 1.5, 2.5, 0.65, 0.5};

    ident::IdentityRegistry registry(6.0);
    auto mint = [&](const std::vector<double>& values) {
        auto fv = ident::characterize("key", to_observation(schema, values), config.schemas);
        return registry.mint_or_resolve(fv, kMatchThreshold, 1);
    };
    auto first = mint(fresh);
    auto second = mint(worn);
    if (first.kind != ident::ResolutionKind::minted ||
        second.kind != ident::ResolutionKind::minted) {
        return {false, "the two keys did not mint as separate identities"};
    }
    if (first.identity.identity_id == second.identity.identity_id) {
        return {false, "both keys mapped to one identity"};
    }

    struct Probe {
        const std::vector<double>* center;
        std::string expected;
    };
    const Probe probes[] = {{&fresh, first.identity.identity_id},
                            {&worn, second.identity.identity_id}};
    int wrong = 0;
    for (int r = 0; r < 20; ++r) {
        for (const auto& probe : probes) {
            auto obs = noisy_copy(schema, *probe.center, 1.0, rng);
            auto fv = ident::characterize("key", to_observation(schema, obs), config.schemas);
            auto resolution = registry.mint_or_resolve(fv, kMatchThreshold, 2);
            if (resolution.kind != ident::ResolutionKind::resolved ||
                resolution.identity.identity_id != probe.expected) {
                ++wrong;
            }
        }
    }
    if (wrong != 0) return {false, fmt("%d/40 re-scans missed their own key", wrong)};
    return {true, "two identities, 40/40 re-scans resolved to their own key"};
}

// ---------------------------------------------------------------- 4 ----

Outcome provenance_mutations_detected() {
    Rng rng(99);
    const meta::EventKind kinds[] = {meta::EventKind::acquisition, meta::EventKind::modification,
                                     meta::EventKind::maintenance,
                                     meta::EventKind::custody_transfer,
                                     meta::EventKind::condition_trigger};

    std::vector<meta::MetadataBundle> bundles;
    for (int b = 0; b < 25; ++b) {
        meta::MetadataBundle bundle;
        const int count = 3 + static_cast<int>(rng.below(10));
        for (int e = 0; e < count; ++e) {
            std::optional<meta::SensorMetadata> sensor;
            if (rng.below(2) == 0) {
                meta::SensorMetadata s{"sensor-" + std::to_string(rng.below(5)),
                                       "variant-" + std::to_string(rng.below(3)), "utc",
                                       std::nullopt};
                if (rng.below(2) == 0) {
                    s.geospatial = meta::GeoPoint{-80.0 + 160.0 * rng.uniform01(),
                                                  -170.0 + 340.0 * rng.uniform01()};
                }
                sensor = std::move(s);
            }
            meta::Payload payload;
            const int fields = static_cast<int>(rng.below(4));
            for (int f = 0; f < fields; ++f) {
                payload["k" + std::to_string(f)] = "v" + std::to_string(rng.below(1000));
            }
            bundle.append(kinds[rng.below(5)], static_cast<Tick>(e + 1),
                          "actor-" + std::to_string(rng.below(7)), std::move(sensor),
                          std::move(payload));
        }
        bundles.push_back(std::move(bundle));
    }

    int detected = 0;
    const int trials = 1000;
    for (int trial = 0; trial < trials; ++trial) {
        const meta::MetadataBundle& source = bundles[rng.below(bundles.size())];
        auto events = source.provenance();
        const std::size_t k = rng.below(events.size());
        meta::ProvenanceEvent& ev = events[k];

        switch (rng.below(9)) {
            case 0:
                ev.kind = kinds[(static_cast<std::size_t>(ev.kind) + 1) % 5];
                break;
            case 1:
                ev.logical_timestamp += 1 + rng.below(100);
                break;
            case 2:
                ev.actor_id += "x";
                break;
            case 3:
                if (!ev.payload.empty()) ev.payload.begin()->second += "x";
                else ev.payload["zz"] = "1";
                break;
            case 4:
                ev.payload["extra-" + std::to_string(rng.below(1000))] = "1";
                break;
            case 5:
                ev.event_id += 1;
                break;
            case 6: {
                auto hex = ev.prev_digest.hex();
                hex[0] = hex[0] == 'a' ? 'b' : 'a';
                ev.prev_digest = *Digest::from_hex(hex);
                break;
            }
            case 7: {
                auto hex = ev.digest.hex();
                hex[0] = hex[0] == 'a' ? 'b' : 'a';
                ev.digest = *Digest::from_hex(hex);
                break;
            }
            case 8:
                if (ev.sensor_metadata) {
                    if (ev.sensor_metadata->geospatial) ev.sensor_metadata->geospatial->lat += 1e-6;
                    else ev.sensor_metadata->sensor_details += "x";
                } else {
                    ev.sensor_metadata = meta::SensorMetadata{"injected", "", "", std::nullopt};
                }
                break;
        }

        auto tampered = meta::MetadataBundle::from_events(std::move(events),
                                                          source.current_state());
        auto verdict = tampered.verify();
        if (verdict.broken_at.has_value() && *verdict.broken_at <= k + 1) ++detected;
    }
    if (detected != trials) return {false, fmt("only %d/%d mutations flagged in range", detected,
                                               trials)};
    return {true, fmt("%d/%d mutations flagged at or before the edited event", detected, trials)};
}

// ---------------------------------------------------------------- 5 ----

Outcome certification_matches_oracle() {
    // Scalar filter oracle: with a=1, c=1 the steady post-update variance
    // M solves M^2 + pq*M - pq*r = 0 (p = sampling period); the in-cycle
    // peak, just before the next update, is M + pq.
    const double q = 0.01;
    const double r = 0.04;
    proxy::StateSpaceModel scalar;
    scalar.A = Eigen::MatrixXd::Constant(1, 1, 1.0);
    scalar.C = Eigen::MatrixXd::Constant(1, 1, 1.0);
    scalar.Q = Eigen::MatrixXd::Constant(1, 1, q);
    scalar.R = Eigen::MatrixXd::Constant(1, 1, r);
    scalar.state_names = {"level"};
    scalar.state_units = {"unit"};
    scalar.channel_names = {"level"};

    proxy::QualityOfData loose{{1e6}};
    for (std::uint32_t period : {1u, 2u, 4u, 8u}) {
        const double pq = period * q;
        const double filtered = (-pq + std::sqrt(pq * pq + 4.0 * pq * r)) / 2.0;
        const double expected = std::sqrt(filtered + pq);
        auto cert = proxy::certify_policy(scalar, {period, {0}}, loose);
        if (!cert.certified || cert.steady_stddevs.size() != 1) {
            return {false, fmt("scalar certification failed at period %u", period)};
        }
        if (std::abs(cert.steady_stddevs[0] - expected) > 1e-6) {
            return {false, fmt("period %u stddev %.9f vs oracle %.9f", period,
                               cert.steady_stddevs[0], expected)};
        }
    }

    // Adaptation: for any feasible bound, the adapted policy must still
    // certify and must never cost more than the starting policy.
    auto config = config::builtins();
    const proxy::GeneralizedModel& key = *config.models.find("key");
    proxy::SamplingPolicy full{1, {0, 1}};
    auto base = proxy::certify_policy(key.model, full, proxy::QualityOfData{{1e6, 1e6}});
    if (!base.certified) return {false, "full-rate policy failed to certify"};

    Rng rng(31337);
    for (int i = 0; i < 50; ++i) {
        proxy::QualityOfData qod{{base.steady_stddevs[0] * (1.1 + 29.0 * rng.uniform01()),
                                  base.steady_stddevs[1] * (1.1 + 29.0 * rng.uniform01())}};
        auto adapted = proxy::adapt_policy(key.model, full, qod);
        auto cert = proxy::certify_policy(key.model, adapted, qod);
        if (!cert.certified) return {false, fmt("adapted policy %d failed certification", i)};
        if (adapted.cost() > full.cost() + 1e-12) {
            return {false, fmt("adaptation %d raised cost to %.4f", i, adapted.cost())};
        }
    }
    return {true, "4 scalar periods within 1e-6; 50/50 adaptations certified, cost never rose"};
}

// ---------------------------------------------------------------- 6 ----

// Independent reachability oracle: past cones recomputed from parent
// links alone, in insertion order.
std::map<ledger::TxId, std::set<ledger::TxId>> cones_of(const ledger::DagLedger& dag) {
    std::map<ledger::TxId, std::set<ledger::TxId>> cones;
    for (const auto& tx : dag.all()) {
        std::set<ledger::TxId> cone{tx.tx_id};
        if (tx.kind != ledger::TxKind::genesis) {
            cone.insert(cones.at(tx.parent_a).begin(), cones.at(tx.parent_a).end());
            cone.insert(cones.at(tx.parent_b).begin(), cones.at(tx.parent_b).end());
        }
        cones[tx.tx_id] = std::move(cone);
    }
    return cones;
}

struct Cluster {
    std::vector<std::unique_ptr<ledger::LedgerNode>> nodes;
    std::vector<ledger::LedgerNode*> ptrs;
};

Cluster random_cluster(std::size_t count, Rng& rng, std::uint64_t seed_base) {
    Cluster cluster;
    for (std::size_t i = 0; i < count; ++i) {
        cluster.nodes.push_back(std::make_unique<ledger::LedgerNode>(
            "n" + std::to_string(i), seed_base + i));
    }
    auto link = [&](std::size_t a, std::size_t b) {
        cluster.nodes[a]->peers().insert(cluster.nodes[b]->node_id());
        cluster.nodes[b]->peers().insert(cluster.nodes[a]->node_id());
    };
    for (std::size_t i = 1; i < count; ++i) link(i, rng.below(i));  // spanning tree
    for (int extra = 0; extra < 4; ++extra) {
        const std::size_t a = rng.below(count);
        const std::size_t b = rng.below(count);
        if (a != b) link(a, b);
    }
    for (auto& node : cluster.nodes) cluster.ptrs.push_back(node.get());
    return cluster;
}

bool quiesce(std::vector<ledger::LedgerNode*>& ptrs) {
    for (int round = 0; round < 200; ++round) {
        auto stats = ledger::gossip_round(ptrs);
        bool pending = false;
        for (const auto* node : ptrs) pending |= node->pending_count() != 0;
        if (stats.delivered == 0 && !pending) return true;
    }
    return false;
}

Outcome gossip_converges_with_exact_weights() {
    ledger::ConsensusConfig config;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(5000 + seed);
        auto cluster = random_cluster(8, rng, seed * 100);

        for (int i = 0; i < 50; ++i) {
            auto& node = *cluster.ptrs[rng.below(cluster.ptrs.size())];
            node.submit(ledger::TxKind::mint, fmt("c6-%llu-%d",
                        static_cast<unsigned long long>(seed), i),
                        Digest::of(fmt("seq-%d", i)), "loc", fmt("owner-%d", i), "",
                        static_cast<Tick>(i + 1), config);
            if (rng.below(3) == 0) ledger::gossip_round(cluster.ptrs);
        }
        if (!quiesce(cluster.ptrs)) {
            return {false, fmt("seed %llu never quiesced", static_cast<unsigned long long>(seed))};
        }

        const auto reference = cluster.ptrs[0]->dag().confirmed_set(config);
        for (const auto* node : cluster.ptrs) {
            if (node->dag().size() != 51) {
                return {false, fmt("seed %llu: node %s holds %zu txs, want 51",
                                   static_cast<unsigned long long>(seed),
                                   node->node_id().c_str(), node->dag().size())};
            }
            if (node->dag().confirmed_set(config) != reference) {
                return {false, fmt("seed %llu: confirmed sets diverge",
                                   static_cast<unsigned long long>(seed))};
            }
        }

        const auto& dag = cluster.ptrs[0]->dag();
        auto cones = cones_of(dag);
        for (const auto& [id, cone] : cones) {
            std::uint64_t weight = 0;
            for (const auto& [other, other_cone] : cones) {
                (void)other;
                if (other_cone.count(id) != 0) ++weight;
            }
            if (dag.cumulative_weight(id) != weight || dag.past_size(id) != cone.size()) {
                return {false, fmt("seed %llu: weight mismatch against reachability oracle",
                                   static_cast<unsigned long long>(seed))};
            }
        }
    }
    return {true, "20/20 topologies: one confirmed view, weights equal the graph-walk oracle"};
}

// ---------------------------------------------------------------- 7 ----

Outcome double_mints_confirm_once() {
    ledger::ConsensusConfig config;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(9000 + seed);
        auto cluster = random_cluster(4, rng, seed * 100 + 7);
        const std::string race = fmt("race-%llu", static_cast<unsigned long long>(seed));

        // Conflicting mints injected at two different nodes before any
        // gossip; both are locally valid.
        cluster.ptrs[0]->submit(ledger::TxKind::mint, race, Digest::of("seq-a"), "loc", "alice",
                                "", 1, config);
        cluster.ptrs[1]->submit(ledger::TxKind::mint, race, Digest::of("seq-b"), "loc",
                                "mallory", "", 1, config);

        for (int i = 0; i < 60; ++i) {
            auto& node = *cluster.ptrs[rng.below(cluster.ptrs.size())];
            node.submit(ledger::TxKind::mint, fmt("c7-%llu-%d",
                        static_cast<unsigned long long>(seed), i),
                        Digest::of(fmt("seq-%d", i)), "loc", "owner", "",
                        static_cast<Tick>(i + 2), config);
            ledger::gossip_round(cluster.ptrs);
        }
        if (!quiesce(cluster.ptrs)) {
            return {false, fmt("seed %llu never quiesced", static_cast<unsigned long long>(seed))};
        }

        const auto reference = cluster.ptrs[0]->dag().confirmed_set(config);
        for (const auto* node : cluster.ptrs) {
            const auto confirmed = node->dag().confirmed_set(config);
            if (confirmed != reference) {
                return {false, fmt("seed %llu: nodes disagree",
                                   static_cast<unsigned long long>(seed))};
            }
            std::map<std::string, int> mints_per_identity;
            for (const auto& id : confirmed) {
                const auto* tx = node->dag().find(id);
                if (tx != nullptr && tx->kind == ledger::TxKind::mint) {
                    mints_per_identity[tx->identity_id] += 1;
                }
            }
            for (const auto& [identity, count] : mints_per_identity) {
                if (count != 1) {
                    return {false, fmt("seed %llu: identity %s confirmed %d mints",
                                       static_cast<unsigned long long>(seed), identity.c_str(),
                                       count)};
                }
            }
            if (mints_per_identity.count(race) == 0) {
                return {false, fmt("seed %llu: race identity never confirmed",
                                   static_cast<unsigned long long>(seed))};
            }
        }
    }
    return {true, "20/20 races: exactly one mint per identity in every confirmed view"};
}

// ---------------------------------------------------------------- 8 ----

Outcome attack_sweep_is_monotone() {
    const double fractions[] = {0.10, 0.20, 0.30, 0.40, 0.45};
    ledger::ConsensusConfig config;
    std::vector<int> successes;
    std::string detail;
    for (double fraction : fractions) {
        ledger::ConsensusConfig cfg = config;
        cfg.adversary_fraction = fraction;
        int wins = 0;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            auto report = ledger::run_attack(10, fraction, 5000, seed, cfg);
            if (report.success != (report.reverted_confirmations > 0)) {
                return {false, "success flag disagrees with reversion count"};
            }
            if (report.success) ++wins;
        }
        successes.push_back(wins);
        detail += fmt("%s%.2f:%d/20", detail.empty() ? "" : " ", fraction, wins);
    }
    if (successes.front() != 0) {
        return {false, "reversions at 10% adversary: " + detail};
    }
    for (std::size_t i = 1; i < successes.size(); ++i) {
        if (successes[i] < successes[i - 1]) {
            return {false, "success rate not non-decreasing: " + detail};
        }
    }
    return {true, detail};
}

// ---------------------------------------------------------------- 9 ----

class MatrixDirectory final : public am::AssetDirectory {
public:
    std::map<std::string, std::string> owners;
    meta::BundleStore store;

    bool known_identity(const std::string& id) const override { return owners.count(id) != 0; }
    std::string confirmed_owner(const std::string& id) const override {
        auto it = owners.find(id);
        return it == owners.end() ? std::string{} : it->second;
    }
    ident::Identity identity(const std::string& id) const override {
        ident::Identity out;
        out.identity_id = id;
        return out;
    }
    const meta::MetadataBundle* bundle(const std::string& id) const override {
        return store.find(id);
    }
    std::string proxy_locator(const std::string& id) const override { return "proxy://" + id; }
    ledger::Transaction submit_transfer(const std::string& id, const std::string& acting,
                                        const std::string& next, Tick now) override {
        owners[id] = next;
        ledger::Transaction tx;
        tx.kind = ledger::TxKind::ownership_transfer;
        tx.identity_id = id;
        tx.owner_id = next;
        tx.prev_owner_id = acting;
        tx.logical_timestamp = now;
        tx.tx_id = ledger::tx_digest(tx);
        return tx;
    }
    void record_custody(const std::string&, const std::string&, const std::string&,
                        Tick) override {}
};

Outcome permission_matrix_is_exact() {
    MatrixDirectory directory;
    directory.owners["key-000001"] = "owner";
    am::AssetManager manager(directory);

    // One grantee per non-empty scope subset, plus the owner and a
    // stranger: 9 roles x 3 request kinds.
    struct Role {
        std::string user;
        am::ScopeMask mask;  // owner gets everything, stranger nothing
    };
    std::vector<Role> roles = {{"owner", am::kScopeAll}, {"stranger", 0}};
    for (am::ScopeMask mask = 1; mask <= 7; ++mask) {
        const std::string user = "grantee-" + std::to_string(mask);
        manager.grant("owner", user, "key-000001", mask, 1);
        roles.push_back({user, mask});
    }

    const std::pair<am::RequestKind, am::ScopeMask> requests[] = {
        {am::RequestKind::identity, am::kScopeIdentityRead},
        {am::RequestKind::metadata, am::kScopeMetadataRead},
        {am::RequestKind::proxy_stream, am::kScopeProxyStream},
    };

    int checked = 0;
    for (const auto& role : roles) {
        for (const auto& [request, bit] : requests) {
            const bool expect_allowed = (role.mask & bit) != 0;
            auto result = manager.query(role.user, "key-000001", request);
            const bool allowed = result.kind != am::QueryResult::Kind::denied;
            if (allowed != expect_allowed) {
                return {false, fmt("%s requesting %s: got %s, expected %s", role.user.c_str(),
                                   std::string(am::to_string(request)).c_str(),
                                   allowed ? "allow" : "deny",
                                   expect_allowed ? "allow" : "deny")};
            }
            if (allowed) {
                const bool handle = result.kind == am::QueryResult::Kind::proxy_handle;
                const bool want_handle = request == am::RequestKind::proxy_stream;
                if (handle != want_handle) {
                    return {false, fmt("%s got the wrong result shape", role.user.c_str())};
                }
            }
            ++checked;
        }
    }
    return {true, fmt("%d/%d role-request cells match", checked, checked)};
}

// --------------------------------------------------------------- 10 ----

// Expected log lines traced by hand from the scenario script: scans and
// mints at the scheduled ticks, grant/query/revoke outcomes per the
// access rules, the ownership handover at t=16 flipping later decisions.
const std::vector<std::string> kTenantTrace = {
    "[t=1] query asset=key_a -> error unknown_asset: asset not yet identified: key_a",
    "[t=2] scan asset=key_a class=key p=0.9",
    "minted identity=key-000001",
    "[t=2] mint identity=key-000001 owner=landlord node=n0 tx=",
    "[t=2] policy identity=key-000001 period=2 channels=[wear_index,usage_rate] cost=1.0000",
    "[t=3] scan asset=key_b class=key p=",
    "minted identity=key-000002",
    "[t=3] mint identity=key-000002 owner=landlord node=n1 tx=",
    "[t=3] policy identity=key-000002 period=2 channels=[wear_index,usage_rate] cost=1.0000",
    "[t=8] grant owner=landlord user=tenant_a asset=key_a scope=IdentityRead|MetadataRead -> ok",
    "[t=9] grant owner=landlord user=tenant_b asset=key_a scope=MetadataRead -> ok",
    "[t=10] query user=tenant_a asset=key_a request=Metadata -> sequence events=1",
    "[t=11] query user=tenant_b asset=key_a request=Metadata -> sequence events=1",
    "[t=12] query user=tenant_a asset=key_a request=ProxyStream -> denied: insufficient scope",
    "[t=13] grant owner=landlord user=tenant_b asset=key_b scope=ProxyStream -> ok",
    "[t=14] rescan asset=key_a resolved identity=key-000001",
    "[t=15] query user=tenant_b asset=key_b request=ProxyStream -> handle ph-1-key-000002",
    "[t=16] transfer owner=landlord new_owner=tenant_a asset=key_a -> tx=",
    "[t=20] query user=tenant_b asset=key_a request=Metadata -> denied: insufficient scope",
    "[t=21] query user=tenant_a asset=key_a request=Metadata -> sequence events=",
    "[t=22] revoke asset=key_a -> error authorization: 'landlord' is not the confirmed owner",
    "[t=24] revoke owner=tenant_a user=tenant_b asset=key_a -> ok",
    "[t=26] revoke owner=landlord user=tenant_b asset=key_b -> ok",
    "[t=27] query user=tenant_b asset=key_b request=ProxyStream -> denied: insufficient scope",
    "[end] identity=key-000001 class=key owner=tenant_a events=",
    "chain=ok",
    "confirmed=yes",
    "[end] identity=key-000002 class=key owner=landlord events=",
    "chain=ok",
    "confirmed=yes",
    "agree=yes",
};

std::optional<std::string> first_missing(const std::string& log,
                                         const std::vector<std::string>& needles) {
    std::size_t pos = 0;
    for (const auto& needle : needles) {
        const auto at = log.find(needle, pos);
        if (at == std::string::npos) return needle;
        pos = at + needle.size();
    }
    return std::nullopt;
}

Outcome tenant_scenario_is_reproducible() {
    auto scenario = sim::load_scenario(data_path("scenarios/tenant_keys.json"));
    auto first = sim::run_scenario(scenario);
    auto second = sim::run_scenario(scenario);
    if (first.log != second.log || first.summary_json != second.summary_json) {
        return {false, "re-running the same scenario changed the report"};
    }

    if (auto missing = first_missing(first.log, kTenantTrace)) {
        return {false, "log line missing or out of order: '" + *missing + "'"};
    }

    // The wear estimate must cross the 0.5 trigger once the handover-era
    // usage has accumulated: truth crosses near t=23, so the estimator
    // may fire a tick or two around it, and never for the fresh key.
    int firings = 0;
    std::istringstream lines(first.log);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.find("trigger identity=key-000002") != std::string::npos) {
            return {false, "the fresh key fired a wear trigger"};
        }
        const auto at = line.find("trigger identity=key-000001");
        if (at == std::string::npos) continue;
        ++firings;
        if (line.find("state=wear_index rising threshold=0.5000") == std::string::npos) {
            return {false, "unexpected trigger shape: " + line};
        }
        unsigned tick = 0;
        if (std::sscanf(line.c_str(), "[t=%u]", &tick) != 1 || tick < 15 || tick > 28) {
            return {false, "trigger fired outside the traced window: " + line};
        }
    }
    if (firings < 1) return {false, "wear trigger never fired"};

    auto summary = nlohmann::json::parse(first.summary_json);
    if (summary["assets"][0]["owner"] != "tenant_a" ||
        summary["assets"][0]["chain_valid"] != true ||
        summary["assets"][1]["chain_valid"] != true ||
        summary["ledger"]["agree"] != true) {
        return {false, "summary fields disagree with the traced outcome"};
    }
    return {true, fmt("byte-identical re-run; %zu traced lines in order; %d trigger firing(s)",
                      kTenantTrace.size(), firings)};
}

}  // namespace

int main() {
    struct Criterion {
        const char* description;
        Outcome (*check)();
    };
    const Criterion criteria[] = {
        {"transcript classification ranks key strictly first", transcript_ranks_key_first},
        {"well-separated keys re-resolve correctly under noise", separated_keys_resolve_correctly},
        {"same-cut keys with different wear stay distinct", worn_twin_keys_stay_distinct},
        {"provenance mutations detected at or before the edit", provenance_mutations_detected},
        {"certified error matches closed form; adaptation never raises cost",
         certification_matches_oracle},
        {"random gossip topologies converge with exact weights",
         gossip_converges_with_exact_weights},
        {"racing double mints confirm exactly once", double_mints_confirm_once},
        {"attack reversions absent at 10% and non-decreasing", attack_sweep_is_monotone},
        {"permission matrix matches the access rules", permission_matrix_is_exact},
        {"tenant-keys run is deterministic and matches the traced log",
         tenant_scenario_is_reproducible},
    };

    int failures = 0;
    int index = 0;
    for (const auto& criterion : criteria) {
        ++index;
        Outcome outcome;
        try {
            outcome = criterion.check();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        if (!outcome.ok) ++failures;
        std::printf("criterion %2d %s  %s%s%s%s\n", index, outcome.ok ? "PASS" : "FAIL",
                    criterion.description, outcome.detail.empty() ? "" : " (",
                    outcome.detail.c_str(), outcome.detail.empty() ? "" : ")");
    }
    std::printf("acceptance: %d/10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
