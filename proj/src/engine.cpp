#include "cpseq/engine.hpp"

#include "cpseq/asset_manager.hpp"
#include "cpseq/config.hpp"
#include "cpseq/identification.hpp"
#include "cpseq/ledger.hpp"
#include "cpseq/metadata.hpp"
#include "cpseq/proxy.hpp"
#include "cpseq/rng.hpp"

#include "json.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace cpseq::sim {

namespace {

std::string strf(const char* format, ...) {
    char buffer[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buffer, sizeof(buffer), format, args);
    va_end(args);
    return buffer;
}

std::string short_id(const Digest& digest) { return digest.hex().substr(0, 8); }

// Symmetric PSD square root, used to draw correlated noise vectors.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    Eigen::VectorXd scale = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * scale.asDiagonal() * es.eigenvectors().transpose();
}

std::string channels_text(const proxy::StateSpaceModel& model,
                          const std::vector<Eigen::Index>& channels) {
    std::string out = "[";
    for (std::size_t i = 0; i < channels.size(); ++i) {
        if (i > 0) out += ",";
        out += model.channel_names[static_cast<std::size_t>(channels[i])];
    }
    out += "]";
    return out;
}

struct Tracker {
    std::string asset_name;
    std::uint32_t asset_index = 0;
    std::string identity_id;
    std::string class_label;
    std::string resolution;  // "minted" or "resolved"
    double posterior = 0.0;
    bool flagged = false;
    bool primary = false;  // this asset minted the identity and drives it
    bool has_model = false;
    Tick created_at = 0;
    Tick last_tx_tick = 0;
    ledger::TxId mint_tx;
    Eigen::VectorXd x_true;
    Eigen::VectorXd drift;
    Eigen::MatrixXd lq;  // process noise square root
    Eigen::MatrixXd lr;  // measurement noise square root
};

class Engine final : public am::AssetDirectory {
public:
    explicit Engine(const Scenario& scenario)
        : scenario_(scenario),
          config_(scenario.catalog_path.empty() ? config::builtins()
                                                : config::load_catalog_file(scenario.catalog_path)),
          registry_(scenario.quantization_factor),
          manager_(*this),
          rng_(scenario.seed) {}

    RunReport run();

    // AssetDirectory: the manager's view of the live system.
    bool known_identity(const std::string& identity_id) const override {
        return registry_.find(identity_id).has_value();
    }
    std::string confirmed_owner(const std::string& identity_id) const override {
        return nodes_.front()->dag().confirmed_owner(identity_id, consensus());
    }
    ident::Identity identity(const std::string& identity_id) const override {
        auto found = registry_.find(identity_id);
        if (!found) fail(Errc::unknown_asset, "unknown identity: " + identity_id);
        return *found;
    }
    const meta::MetadataBundle* bundle(const std::string& identity_id) const override {
        return bundles_.find(identity_id);
    }
    std::string proxy_locator(const std::string& identity_id) const override {
        return "proxy://" + identity_id;
    }
    ledger::Transaction submit_transfer(const std::string& identity_id,
                                        const std::string& acting_owner,
                                        const std::string& new_owner, Tick now) override {
        return nodes_.front()->submit(ledger::TxKind::ownership_transfer, identity_id,
                                      current_sequence_digest(identity_id), "", new_owner,
                                      acting_owner, now, consensus());
    }
    void record_custody(const std::string& identity_id, const std::string& from_owner,
                        const std::string& to_owner, Tick now) override {
        bundles_.append(identity_id, meta::EventKind::custody_transfer, now, from_owner,
                        std::nullopt, {{"from", from_owner}, {"to", to_owner}});
    }

private:
    ledger::ConsensusConfig consensus() const {
        ledger::ConsensusConfig cfg = scenario_.consensus;
        cfg.adversary_fraction = 0.0;
        return cfg;
    }

    Digest current_sequence_digest(const std::string& identity_id) const {
        auto found = registry_.find(identity_id);
        if (!found) fail(Errc::unknown_asset, "unknown identity: " + identity_id);
        const meta::MetadataBundle* b = bundles_.find(identity_id);
        static const meta::MetadataBundle kEmpty;
        return meta::sequence_digest(*found, b ? *b : kEmpty, "proxy://" + identity_id);
    }

    void line(const std::string& text) { log_ << text << "\n"; }

    Eigen::VectorXd std_normal(Eigen::Index n) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = rng_.normal();
        return v;
    }

    Tracker* find_tracker(const std::string& asset_name) {
        for (auto& t : trackers_) {
            if (t.asset_name == asset_name) return &t;
        }
        return nullptr;
    }

    ledger::LedgerNode& home_node(std::uint32_t asset_index) {
        return *nodes_[asset_index % nodes_.size()];
    }

    void setup_nodes();
    void do_scans();
    void first_scan(std::uint32_t index, const ScenarioAsset& asset);
    void rescan(Tracker& tracker, const ScenarioAsset& asset);
    ident::Observation observe(const Tracker* tracker, const ScenarioAsset& asset,
                               const std::string& class_label);
    std::vector<ident::AttributeAnswer> stereotype_answers(const std::string& class_label);
    void do_evolution();
    void do_actions();
    void drain_gossip();
    void run_sweep(nlohmann::ordered_json& out);
    void finalize(nlohmann::ordered_json& out);

    const Scenario& scenario_;
    config::LoadedConfig config_;
    ident::IdentityRegistry registry_;
    meta::BundleStore bundles_;
    std::map<std::string, proxy::DataProxy> proxies_;  // identity -> proxy
    std::vector<Tracker> trackers_;
    std::vector<std::unique_ptr<ledger::LedgerNode>> nodes_;
    std::vector<ledger::LedgerNode*> node_ptrs_;
    am::AssetManager manager_;
    Rng rng_;
    std::ostringstream log_;
    nlohmann::ordered_json actions_json_ = nlohmann::ordered_json::array();
    std::uint64_t triggers_fired_ = 0;
    Tick now_ = 0;
};

void Engine::setup_nodes() {
    const std::uint32_t count = std::max<std::uint32_t>(1, scenario_.node_count);
    for (std::uint32_t i = 0; i < count; ++i) {
        nodes_.push_back(std::make_unique<ledger::LedgerNode>(
            "n" + std::to_string(i), scenario_.seed * 1000003 + i, true));
    }
    for (std::uint32_t i = 0; i < count; ++i) {
        for (std::uint32_t j = 0; j < count; ++j) {
            if (i == j) continue;
            const bool adjacent = (j == i + 1) || (i == j + 1);
            const bool wraps = (i == 0 && j == count - 1) || (j == 0 && i == count - 1);
            bool connect = false;
            if (scenario_.topology == "complete") connect = true;
            else if (scenario_.topology == "ring") connect = adjacent || wraps;
            else if (scenario_.topology == "line") connect = adjacent;
            if (connect) nodes_[i]->peers().insert(nodes_[j]->node_id());
        }
    }
    for (auto& node : nodes_) node_ptrs_.push_back(node.get());
}

std::vector<ident::AttributeAnswer> Engine::stereotype_answers(const std::string& class_label) {
    std::vector<ident::AttributeAnswer> answers;
    for (const auto& entry : config_.catalog.classes()) {
        if (entry.label != class_label) continue;
        for (std::size_t i = 0; i < entry.likelihood.size(); ++i) {
            ident::AnswerLevel level = ident::AnswerLevel::sometimes;
            if (entry.likelihood[i] > 0.8) level = ident::AnswerLevel::yes;
            else if (entry.likelihood[i] < 0.2) level = ident::AnswerLevel::no;
            answers.push_back({config_.catalog.questions()[i].id, level});
        }
        return answers;
    }
    fail(Errc::configuration, "class '" + class_label + "' is not in the catalog");
}

ident::Observation Engine::observe(const Tracker* tracker, const ScenarioAsset& asset,
                                   const std::string& class_label) {
    const ident::FeatureSchema* schema = config_.schemas.find(class_label);
    if (schema == nullptr) {
        fail(Errc::configuration, "no feature schema for class '" + class_label + "'");
    }
    const proxy::GeneralizedModel* generalized = config_.models.find(class_label);
    ident::Observation observation;
    for (const auto& def : schema->features) {
        double base = 0.0;
        std::optional<Eigen::Index> state;
        if (tracker != nullptr && tracker->primary && tracker->has_model &&
            generalized != nullptr) {
            state = generalized->model.state_index(def.name);
        }
        if (state) {
            base = tracker->x_true(*state);
        } else {
            auto it = asset.true_features.find(def.name);
            if (it == asset.true_features.end()) {
                fail(Errc::validation,
                     "asset '" + asset.name + "' lacks true value for '" + def.name + "'");
            }
            base = it->second;
        }
        const double noisy = base + rng_.normal() * scenario_.scan_noise_scale * def.sigma;
        observation[def.name] = std::clamp(noisy, def.min_value, def.max_value);
    }
    return observation;
}

void Engine::first_scan(std::uint32_t index, const ScenarioAsset& asset) {
    auto answers = asset.answers.empty() ? stereotype_answers(asset.class_label) : asset.answers;
    auto posterior = ident::classify(answers, config_.catalog);
    const auto& top = posterior.top();
    if (top.class_label != asset.class_label) {
        line(strf("[t=%llu] scan asset=%s misclassified as=%s expected=%s p=%.4f",
                  static_cast<unsigned long long>(now_), asset.name.c_str(),
                  top.class_label.c_str(), asset.class_label.c_str(), top.probability));
    }

    Tracker tracker;
    tracker.asset_name = asset.name;
    tracker.asset_index = index;
    tracker.class_label = top.class_label;
    tracker.posterior = top.probability;
    tracker.flagged = top.probability < scenario_.min_confidence;
    tracker.created_at = now_;

    const proxy::GeneralizedModel* generalized = config_.models.find(top.class_label);
    if (generalized != nullptr) {
        tracker.has_model = true;
        tracker.x_true = generalized->prior_mean;
        tracker.drift = Eigen::VectorXd::Zero(generalized->model.n());
        for (Eigen::Index i = 0; i < generalized->model.n(); ++i) {
            auto it = asset.true_features.find(generalized->model.state_names[
                static_cast<std::size_t>(i)]);
            if (it != asset.true_features.end()) tracker.x_true(i) = it->second;
        }
        for (const auto& [state, delta] : asset.drift) {
            auto idx = generalized->model.state_index(state);
            if (!idx) {
                line(strf("[t=%llu] warn asset=%s drift names unknown state '%s'",
                          static_cast<unsigned long long>(now_), asset.name.c_str(),
                          state.c_str()));
                continue;
            }
            tracker.drift(*idx) = delta;
        }
        tracker.lq = psd_sqrt(generalized->model.Q);
        tracker.lr = psd_sqrt(generalized->model.R);
    }

    // Until resolution we only know the classified class; characterize
    // with the provisional tracker so dynamic features read true state.
    tracker.primary = true;
    ident::Observation observation = observe(&tracker, asset, top.class_label);
    ident::FeatureVector fv =
        ident::characterize(top.class_label, observation, config_.schemas);
    auto resolution = registry_.mint_or_resolve(fv, scenario_.match_threshold, now_);
    tracker.identity_id = resolution.identity.identity_id;
    tracker.resolution =
        resolution.kind == ident::ResolutionKind::minted ? "minted" : "resolved";
    tracker.primary = resolution.kind == ident::ResolutionKind::minted;

    line(strf("[t=%llu] scan asset=%s class=%s p=%.4f %s identity=%s%s",
              static_cast<unsigned long long>(now_), asset.name.c_str(),
              top.class_label.c_str(), top.probability, tracker.resolution.c_str(),
              tracker.identity_id.c_str(), tracker.flagged ? " flagged" : ""));

    const std::string locator = "proxy://" + tracker.identity_id;
    if (resolution.kind == ident::ResolutionKind::minted) {
        meta::MetadataBundle& bundle = bundles_.open(tracker.identity_id);
        meta::SensorMetadata sensor{"simulated-scanner", "sim-1", "logical-tick", std::nullopt};
        bundle.append(meta::EventKind::acquisition, now_, asset.owner, sensor,
                      {{"asset", asset.name},
                       {"class", top.class_label},
                       {"resolution", "minted"}});
        try {
            ledger::Transaction tx = home_node(index).submit(
                ledger::TxKind::mint, tracker.identity_id,
                current_sequence_digest(tracker.identity_id), locator, asset.owner, "", now_,
                consensus());
            tracker.mint_tx = tx.tx_id;
            tracker.last_tx_tick = now_;
            line(strf("[t=%llu] mint identity=%s owner=%s node=%s tx=%s",
                      static_cast<unsigned long long>(now_), tracker.identity_id.c_str(),
                      asset.owner.c_str(), home_node(index).node_id().c_str(),
                      short_id(tx.tx_id).c_str()));
        } catch (const Error& e) {
            line(strf("[t=%llu] mint identity=%s -> error %s: %s",
                      static_cast<unsigned long long>(now_), tracker.identity_id.c_str(),
                      to_string(e.code()), e.what()));
        }
        if (tracker.has_model) {
            proxy::DataProxy p =
                proxy::instantiate_proxy(top.class_label, config_.models, now_);
            auto qod_it = scenario_.qod.find(top.class_label);
            if (qod_it != scenario_.qod.end()) {
                p.set_qod({qod_it->second});
                proxy::CertifyResult cert = p.adapt();
                line(strf("[t=%llu] policy identity=%s period=%u channels=%s cost=%.4f%s",
                          static_cast<unsigned long long>(now_), tracker.identity_id.c_str(),
                          p.policy().period,
                          channels_text(p.model(), p.policy().active_channels).c_str(),
                          p.policy().cost(), cert.certified ? "" : " uncertified"));
            }
            auto trig_it = scenario_.triggers.find(top.class_label);
            if (trig_it != scenario_.triggers.end()) {
                for (const auto& trigger : trig_it->second) p.add_trigger(trigger);
            }
            proxies_.emplace(tracker.identity_id, std::move(p));
        }
    } else {
        // Matched an existing identity; log the sighting in its bundle.
        bundles_.open(tracker.identity_id)
            .append(meta::EventKind::maintenance, now_, asset.owner, std::nullopt,
                    {{"asset", asset.name}, {"event", "matched-existing-identity"}});
        try {
            home_node(index).submit(ledger::TxKind::metadata_update, tracker.identity_id,
                                    current_sequence_digest(tracker.identity_id), "", "", "",
                                    now_, consensus());
            tracker.last_tx_tick = now_;
        } catch (const Error& e) {
            line(strf("[t=%llu] update identity=%s -> error %s: %s",
                      static_cast<unsigned long long>(now_), tracker.identity_id.c_str(),
                      to_string(e.code()), e.what()));
        }
    }
    trackers_.push_back(std::move(tracker));
}

void Engine::rescan(Tracker& tracker, const ScenarioAsset& asset) {
    ident::Observation observation = observe(&tracker, asset, tracker.class_label);
    ident::FeatureVector fv =
        ident::characterize(tracker.class_label, observation, config_.schemas);
    auto resolution = registry_.mint_or_resolve(fv, scenario_.match_threshold, now_);
    const bool same = resolution.identity.identity_id == tracker.identity_id;
    line(strf("[t=%llu] rescan asset=%s %s identity=%s%s",
              static_cast<unsigned long long>(now_), asset.name.c_str(),
              resolution.kind == ident::ResolutionKind::minted ? "minted" : "resolved",
              resolution.identity.identity_id.c_str(), same ? "" : " split"));
    bundles_.open(tracker.identity_id)
        .append(meta::EventKind::maintenance, now_, asset.owner, std::nullopt,
                {{"asset", asset.name},
                 {"event", "rescan"},
                 {"matched", resolution.identity.identity_id}});
    try {
        home_node(tracker.asset_index)
            .submit(ledger::TxKind::metadata_update, tracker.identity_id,
                    current_sequence_digest(tracker.identity_id), "", "", "", now_, consensus());
        tracker.last_tx_tick = now_;
    } catch (const Error& e) {
        line(strf("[t=%llu] update identity=%s -> error %s: %s",
                  static_cast<unsigned long long>(now_), tracker.identity_id.c_str(),
                  to_string(e.code()), e.what()));
    }
}

void Engine::do_scans() {
    for (std::uint32_t i = 0; i < scenario_.assets.size(); ++i) {
        const ScenarioAsset& asset = scenario_.assets[i];
        if (!std::binary_search(asset.scan_ticks.begin(), asset.scan_ticks.end(), now_)) {
            continue;
        }
        try {
            Tracker* tracker = find_tracker(asset.name);
            if (tracker == nullptr) first_scan(i, asset);
            else rescan(*tracker, asset);
        } catch (const Error& e) {
            line(strf("[t=%llu] scan asset=%s -> error %s: %s",
                      static_cast<unsigned long long>(now_), asset.name.c_str(),
                      to_string(e.code()), e.what()));
        }
    }
}

void Engine::do_evolution() {
    for (Tracker& tracker : trackers_) {
        if (!tracker.primary || !tracker.has_model || tracker.created_at == now_) continue;
        auto proxy_it = proxies_.find(tracker.identity_id);
        if (proxy_it == proxies_.end()) continue;
        proxy::DataProxy& proxy = proxy_it->second;
        const proxy::StateSpaceModel& model = proxy.model();

        tracker.x_true = model.A * tracker.x_true + tracker.drift +
                         tracker.lq * std_normal(model.n());

        std::optional<Eigen::VectorXd> measurement;
        if (proxy.sample_due(now_)) {
            Eigen::VectorXd noise = tracker.lr * std_normal(model.m());
            const auto& channels = proxy.policy().active_channels;
            Eigen::VectorXd z(static_cast<Eigen::Index>(channels.size()));
            for (std::size_t k = 0; k < channels.size(); ++k) {
                z(static_cast<Eigen::Index>(k)) =
                    model.C.row(channels[k]).dot(tracker.x_true) + noise(channels[k]);
            }
            measurement = std::move(z);
        }
        proxy.step(now_, measurement);
        bundles_.open(tracker.identity_id).update_state(proxy.snapshot(now_));

        for (const auto& firing : proxy.evaluate_triggers(now_)) {
            ++triggers_fired_;
            line(strf("[t=%llu] trigger identity=%s state=%s %s threshold=%.4f value=%.4f",
                      static_cast<unsigned long long>(now_), tracker.identity_id.c_str(),
                      firing.state_name.c_str(),
                      std::string(proxy::to_string(firing.direction)).c_str(),
                      firing.threshold, firing.value));
            bundles_.open(tracker.identity_id)
                .append(meta::EventKind::condition_trigger, now_, "proxy", std::nullopt,
                        {{"state", firing.state_name},
                         {"direction", std::string(proxy::to_string(firing.direction))},
                         {"threshold", strf("%.6f", firing.threshold)},
                         {"value", strf("%.6f", firing.value)}});
            try {
                home_node(tracker.asset_index)
                    .submit(ledger::TxKind::metadata_update, tracker.identity_id,
                            current_sequence_digest(tracker.identity_id), "", "", "", now_,
                            consensus());
                tracker.last_tx_tick = now_;
            } catch (const Error& e) {
                line(strf("[t=%llu] update identity=%s -> error %s: %s",
                          static_cast<unsigned long long>(now_), tracker.identity_id.c_str(),
                          to_string(e.code()), e.what()));
            }
        }

        // Periodic anchor keeps confirmation weight flowing even in
        // quiet stretches; skipped when this tick already issued one.
        if (tracker.last_tx_tick != now_) {
            try {
                home_node(tracker.asset_index)
                    .submit(ledger::TxKind::metadata_update, tracker.identity_id,
                            current_sequence_digest(tracker.identity_id), "", "", "", now_,
                            consensus());
                tracker.last_tx_tick = now_;
            } catch (const Error& e) {
                line(strf("[t=%llu] anchor identity=%s -> error %s: %s",
                          static_cast<unsigned long long>(now_), tracker.identity_id.c_str(),
                          to_string(e.code()), e.what()));
            }
        }
    }
}

void Engine::do_actions() {
    for (const ManagerAction& action : scenario_.actions) {
        if (action.tick != now_) continue;
        Tracker* tracker = find_tracker(action.asset);
        std::string outcome;
        std::string verb;
        try {
            if (tracker == nullptr) {
                fail(Errc::unknown_asset, "asset not yet identified: " + action.asset);
            }
            const std::string& id = tracker->identity_id;
            switch (action.verb) {
                case ActionVerb::grant: {
                    verb = "grant";
                    manager_.grant(action.owner, action.user, id, action.scope, now_);
                    outcome = "ok";
                    line(strf("[t=%llu] grant owner=%s user=%s asset=%s scope=%s -> ok",
                              static_cast<unsigned long long>(now_), action.owner.c_str(),
                              action.user.c_str(), action.asset.c_str(),
                              am::scope_to_string(action.scope).c_str()));
                    break;
                }
                case ActionVerb::revoke: {
                    verb = "revoke";
                    manager_.revoke(action.owner, action.user, id);
                    outcome = "ok";
                    line(strf("[t=%llu] revoke owner=%s user=%s asset=%s -> ok",
                              static_cast<unsigned long long>(now_), action.owner.c_str(),
                              action.user.c_str(), action.asset.c_str()));
                    break;
                }
                case ActionVerb::query: {
                    verb = "query";
                    am::QueryResult result = manager_.query(action.user, id, action.request);
                    switch (result.kind) {
                        case am::QueryResult::Kind::sequence:
                            outcome = strf("sequence events=%zu",
                                           result.sequence->bundle.size());
                            break;
                        case am::QueryResult::Kind::proxy_handle:
                            outcome = "handle " + result.proxy_handle;
                            break;
                        case am::QueryResult::Kind::denied:
                            outcome = "denied: " + result.denied_reason;
                            break;
                    }
                    line(strf("[t=%llu] query user=%s asset=%s request=%s -> %s",
                              static_cast<unsigned long long>(now_), action.user.c_str(),
                              action.asset.c_str(),
                              std::string(am::to_string(action.request)).c_str(),
                              outcome.c_str()));
                    break;
                }
                case ActionVerb::transfer: {
                    verb = "transfer";
                    ledger::Transaction tx =
                        manager_.transfer(action.owner, action.new_owner, id, now_);
                    outcome = "tx=" + short_id(tx.tx_id);
                    line(strf("[t=%llu] transfer owner=%s new_owner=%s asset=%s -> %s",
                              static_cast<unsigned long long>(now_), action.owner.c_str(),
                              action.new_owner.c_str(), action.asset.c_str(),
                              outcome.c_str()));
                    break;
                }
            }
        } catch (const Error& e) {
            outcome = strf("error %s: %s", to_string(e.code()), e.what());
            if (verb.empty()) {
                switch (action.verb) {
                    case ActionVerb::grant: verb = "grant"; break;
                    case ActionVerb::revoke: verb = "revoke"; break;
                    case ActionVerb::query: verb = "query"; break;
                    case ActionVerb::transfer: verb = "transfer"; break;
                }
            }
            line(strf("[t=%llu] %s asset=%s -> %s", static_cast<unsigned long long>(now_),
                      verb.c_str(), action.asset.c_str(), outcome.c_str()));
        }
        actions_json_.push_back({{"tick", action.tick},
                                 {"verb", verb},
                                 {"asset", action.asset},
                                 {"outcome", outcome}});
    }
}

void Engine::drain_gossip() {
    if (nodes_.size() < 2) return;
    for (std::size_t r = 0; r < nodes_.size() + 2; ++r) ledger::gossip_round(node_ptrs_);
}

void Engine::run_sweep(nlohmann::ordered_json& out) {
    const AttackSweep& sweep = *scenario_.attack;
    for (double fraction : sweep.fractions) {
        ledger::ConsensusConfig cfg = consensus();
        cfg.adversary_fraction = fraction;
        std::uint32_t successes = 0;
        std::uint64_t reversions = 0;
        for (std::uint32_t s = 0; s < sweep.seeds; ++s) {
            ledger::AttackReport report = ledger::run_attack(
                sweep.honest, fraction, sweep.rounds, sweep.base_seed + s, cfg);
            if (report.success) ++successes;
            reversions += report.reverted_confirmations;
        }
        line(strf("[attack] fraction=%.2f successes=%u/%u reversions=%llu", fraction,
                  successes, sweep.seeds, static_cast<unsigned long long>(reversions)));
        out.push_back({{"fraction", fraction},
                       {"successes", successes},
                       {"seeds", sweep.seeds},
                       {"reversions", reversions}});
    }
}

void Engine::finalize(nlohmann::ordered_json& out) {
    out["scenario"] = scenario_.name;
    out["seed"] = scenario_.seed;
    out["ticks"] = scenario_.ticks;

    auto confirmed0 = nodes_.front()->dag().confirmed_set(consensus());
    nlohmann::ordered_json assets = nlohmann::ordered_json::array();
    for (const Tracker& tracker : trackers_) {
        nlohmann::ordered_json a;
        a["name"] = tracker.asset_name;
        a["identity"] = tracker.identity_id;
        a["class"] = tracker.class_label;
        a["resolution"] = tracker.resolution;
        a["posterior"] = strf("%.6f", tracker.posterior);
        a["flagged"] = tracker.flagged;
        const meta::MetadataBundle* b = bundles_.find(tracker.identity_id);
        a["events"] = b ? b->size() : 0;
        a["chain_valid"] = b ? b->verify().valid() : true;
        if (tracker.primary) {
            const std::string owner =
                nodes_.front()->dag().confirmed_owner(tracker.identity_id, consensus());
            a["owner"] = owner;
            a["mint_weight"] = nodes_.front()->dag().cumulative_weight(tracker.mint_tx);
            a["mint_confirmed"] = confirmed0.count(tracker.mint_tx) > 0;
            auto proxy_it = proxies_.find(tracker.identity_id);
            if (proxy_it != proxies_.end()) {
                const auto& p = proxy_it->second;
                a["policy"] = {{"period", p.policy().period},
                               {"channels", channels_text(p.model(),
                                                          p.policy().active_channels)},
                               {"cost", strf("%.4f", p.policy().cost())}};
            }
            line(strf("[end] identity=%s class=%s owner=%s events=%zu chain=%s weight=%llu "
                      "confirmed=%s",
                      tracker.identity_id.c_str(), tracker.class_label.c_str(), owner.c_str(),
                      b ? b->size() : std::size_t{0},
                      (b == nullptr || b->verify().valid()) ? "ok" : "broken",
                      static_cast<unsigned long long>(
                          nodes_.front()->dag().cumulative_weight(tracker.mint_tx)),
                      confirmed0.count(tracker.mint_tx) > 0 ? "yes" : "no"));
        }
        assets.push_back(std::move(a));
    }
    out["assets"] = std::move(assets);
    out["actions"] = actions_json_;
    out["triggers_fired"] = triggers_fired_;

    bool agree = true;
    for (const auto& node : nodes_) {
        if (node->dag().confirmed_set(consensus()) != confirmed0) agree = false;
    }
    out["ledger"] = {{"nodes", nodes_.size()},
                     {"transactions", nodes_.front()->dag().size()},
                     {"confirmed", confirmed0.size()},
                     {"agree", agree}};
    line(strf("[end] ledger nodes=%zu txs=%zu confirmed=%zu agree=%s", nodes_.size(),
              nodes_.front()->dag().size(), confirmed0.size(), agree ? "yes" : "no"));

    if (scenario_.attack) {
        nlohmann::ordered_json sweep = nlohmann::ordered_json::array();
        run_sweep(sweep);
        out["attack"] = std::move(sweep);
    }
}

RunReport Engine::run() {
    setup_nodes();
    for (now_ = 1; now_ <= scenario_.ticks; ++now_) {
        do_scans();
        do_evolution();
        do_actions();
        if (nodes_.size() > 1) ledger::gossip_round(node_ptrs_);
        manager_.on_tick(now_);
    }
    drain_gossip();
    nlohmann::ordered_json summary;
    finalize(summary);
    RunReport report;
    report.log = log_.str();
    report.summary_json = summary.dump(2) + "\n";
    return report;
}

}  // namespace

RunReport run_scenario(const Scenario& scenario) {
    Engine engine(scenario);
    return engine.run();
}

}  // namespace cpseq::sim
