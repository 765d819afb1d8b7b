#include "cpseq/scenario.hpp"

#include "cpseq/config.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace cpseq::sim {

namespace {

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
    return 1 + static_cast<std::size_t>(
                   std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(
                                                               std::min(offset, text.size())),
                              '\n'));
}

ScenarioAsset parse_asset(const nlohmann::json& spec) {
    ScenarioAsset asset;
    asset.name = spec.at("name").get<std::string>();
    asset.class_label = spec.at("class").get<std::string>();
    asset.owner = spec.at("owner").get<std::string>();
    for (const auto& [channel, value] : spec.at("true_features").items()) {
        asset.true_features[channel] = value.get<double>();
    }
    asset.scan_ticks = spec.at("scan_ticks").get<std::vector<Tick>>();
    if (!std::is_sorted(asset.scan_ticks.begin(), asset.scan_ticks.end())) {
        fail(Errc::validation, "asset '" + asset.name + "': scan_ticks must be ascending");
    }
    if (spec.contains("drift")) {
        for (const auto& [state, delta] : spec.at("drift").items()) {
            asset.drift[state] = delta.get<double>();
        }
    }
    if (spec.contains("answers")) {
        for (const auto& a : spec.at("answers")) {
            auto level = ident::parse_answer_level(a.at("answer").get<std::string>());
            if (!level) {
                fail(Errc::validation, "asset '" + asset.name + "': unknown answer level '" +
                                           a.at("answer").get<std::string>() + "'");
            }
            asset.answers.push_back({a.at("question").get<std::string>(), *level});
        }
    }
    return asset;
}

ManagerAction parse_action(const nlohmann::json& spec) {
    ManagerAction action;
    action.tick = spec.at("tick").get<Tick>();
    const std::string verb = spec.at("action").get<std::string>();
    action.asset = spec.at("asset").get<std::string>();
    if (verb == "grant") {
        action.verb = ActionVerb::grant;
        action.owner = spec.at("owner").get<std::string>();
        action.user = spec.at("user").get<std::string>();
        auto scope = am::parse_scope(spec.at("scope").get<std::string>());
        if (!scope) fail(Errc::validation, "action: unknown scope string");
        action.scope = *scope;
    } else if (verb == "revoke") {
        action.verb = ActionVerb::revoke;
        action.owner = spec.at("owner").get<std::string>();
        action.user = spec.at("user").get<std::string>();
    } else if (verb == "query") {
        action.verb = ActionVerb::query;
        action.user = spec.at("user").get<std::string>();
        auto request = am::parse_request_kind(spec.at("request").get<std::string>());
        if (!request) fail(Errc::validation, "action: unknown request kind");
        action.request = *request;
    } else if (verb == "transfer") {
        action.verb = ActionVerb::transfer;
        action.owner = spec.at("owner").get<std::string>();
        action.new_owner = spec.at("new_owner").get<std::string>();
    } else {
        fail(Errc::validation, "action: unknown verb '" + verb + "'");
    }
    return action;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(Errc::validation, origin + ":" + std::to_string(line_of_offset(text, e.byte)) +
                                   ": " + std::string(e.what()));
    }

    Scenario scenario;
    try {
        scenario.name = root.value("name", std::string("scenario"));
        scenario.seed = root.value("seed", std::uint64_t{1});
        scenario.ticks = root.value("ticks", Tick{0});
        scenario.catalog_path = root.value("catalog", std::string{});
        if (root.contains("consensus")) {
            const auto& c = root.at("consensus");
            scenario.consensus.confirmation_weight_threshold =
                c.value("confirmation_weight_threshold", std::uint64_t{10});
            scenario.consensus.tip_selection_bias = c.value("tip_selection_bias", 0.05);
        }
        scenario.match_threshold = root.value("match_threshold", 3.0);
        scenario.min_confidence = root.value("min_confidence", 0.5);
        scenario.quantization_factor = root.value("quantization_factor", 6.0);
        scenario.scan_noise_scale = root.value("scan_noise_scale", 0.5);
        if (root.contains("network")) {
            scenario.node_count = root.at("network").value("nodes", std::uint32_t{1});
            scenario.topology = root.at("network").value("topology", std::string("complete"));
        }
        if (root.contains("qod")) {
            for (const auto& [label, bounds] : root.at("qod").items()) {
                scenario.qod[label] = bounds.get<std::vector<double>>();
            }
        }
        if (root.contains("triggers")) {
            for (const auto& [label, list] : root.at("triggers").items()) {
                for (const auto& t : list) {
                    auto direction =
                        proxy::parse_trigger_direction(t.at("direction").get<std::string>());
                    if (!direction) fail(Errc::validation, "trigger: unknown direction");
                    scenario.triggers[label].push_back({t.at("state").get<std::string>(),
                                                        t.at("threshold").get<double>(),
                                                        *direction});
                }
            }
        }
        if (root.contains("assets")) {
            for (const auto& a : root.at("assets")) scenario.assets.push_back(parse_asset(a));
        }
        if (root.contains("actions")) {
            for (const auto& a : root.at("actions")) scenario.actions.push_back(parse_action(a));
        }
        if (root.contains("attack")) {
            const auto& atk = root.at("attack");
            AttackSweep sweep;
            sweep.fractions = atk.at("fractions").get<std::vector<double>>();
            sweep.honest = atk.value("honest", std::uint32_t{10});
            sweep.rounds = atk.value("rounds", std::uint32_t{5000});
            sweep.seeds = atk.value("seeds", std::uint32_t{20});
            sweep.base_seed = atk.value("base_seed", std::uint64_t{1});
            scenario.attack = std::move(sweep);
        }
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::validation, origin + ": " + std::string(e.what()));
    }

    // Structural checks that do not need the catalog.
    if (scenario.node_count < 1) fail(Errc::validation, origin + ": network needs >= 1 node");
    if (scenario.topology != "complete" && scenario.topology != "ring" &&
        scenario.topology != "line") {
        fail(Errc::validation, origin + ": unknown topology '" + scenario.topology + "'");
    }
    std::vector<std::string> names;
    for (const auto& asset : scenario.assets) names.push_back(asset.name);
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
        fail(Errc::validation, origin + ": duplicate asset names");
    }
    for (const auto& action : scenario.actions) {
        if (std::find_if(scenario.assets.begin(), scenario.assets.end(),
                         [&](const ScenarioAsset& a) { return a.name == action.asset; }) ==
            scenario.assets.end()) {
            fail(Errc::validation,
                 origin + ": action references unknown asset '" + action.asset + "'");
        }
    }
    if (!std::is_sorted(scenario.actions.begin(), scenario.actions.end(),
                        [](const ManagerAction& a, const ManagerAction& b) {
                            return a.tick < b.tick;
                        })) {
        fail(Errc::validation, origin + ": actions must be sorted by tick");
    }
    return scenario;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::storage, "cannot open scenario file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str(), path);
}

}  // namespace cpseq::sim
