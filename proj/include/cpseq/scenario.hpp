#pragma once
// Scenario files: the declarative description of a simulation run — the
// asset fleet with true feature values and scan schedules, the ledger
// network shape, quality-of-data bounds, and scripted manager actions.

#include "cpseq/asset_manager.hpp"
#include "cpseq/identification.hpp"
#include "cpseq/ledger.hpp"
#include "cpseq/proxy.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cpseq::sim {

struct ScenarioAsset {
    std::string name;         // scenario-local handle, not the identity id
    std::string class_label;
    std::string owner;
    ident::Observation true_features;
    std::vector<Tick> scan_ticks;             // ascending
    std::map<std::string, double> drift;      // per-tick additive drift on true state
    // Attribute answers fed to classification at the first scan; empty
    // means derive stereotypical answers from the catalog likelihoods.
    std::vector<ident::AttributeAnswer> answers;
};

enum class ActionVerb { grant, revoke, query, transfer };

struct ManagerAction {
    Tick tick = 0;
    ActionVerb verb = ActionVerb::query;
    std::string owner;      // grant/revoke/transfer
    std::string user;       // grant/revoke/query
    std::string new_owner;  // transfer
    std::string asset;      // scenario asset name
    am::ScopeMask scope = 0;
    am::RequestKind request = am::RequestKind::identity;
};

struct AttackSweep {
    std::vector<double> fractions;
    std::uint32_t honest = 10;
    std::uint32_t rounds = 5000;
    std::uint32_t seeds = 20;
    std::uint64_t base_seed = 1;
};

struct Scenario {
    std::string name;
    std::uint64_t seed = 1;
    Tick ticks = 0;
    std::string catalog_path;  // empty = builtins
    ledger::ConsensusConfig consensus;
    double match_threshold = 3.0;
    double min_confidence = 0.5;
    double quantization_factor = 6.0;
    double scan_noise_scale = 0.5;  // scan noise stddev as a fraction of sigma
    std::uint32_t node_count = 1;
    std::string topology = "complete";  // complete | ring | line
    std::map<std::string, std::vector<double>> qod;            // class -> bounds
    std::map<std::string, std::vector<proxy::Trigger>> triggers;  // class -> triggers
    std::vector<ScenarioAsset> assets;
    std::vector<ManagerAction> actions;
    std::optional<AttackSweep> attack;
};

Scenario load_scenario(const std::string& path);

// Parses scenario JSON given as text; `origin` labels diagnostics.
Scenario parse_scenario(const std::string& text, const std::string& origin);

}  // namespace cpseq::sim
