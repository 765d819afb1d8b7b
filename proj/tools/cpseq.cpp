// cpseq: scenario runner and utility front end for the sequencing stack.

#include "cpseq/config.hpp"
#include "cpseq/engine.hpp"
#include "cpseq/errors.hpp"
#include "cpseq/identification.hpp"
#include "cpseq/ledger.hpp"
#include "cpseq/proxy.hpp"
#include "cpseq/scenario.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

int exit_code_for(cpseq::Errc code) {
    switch (code) {
        case cpseq::Errc::storage:
        case cpseq::Errc::integrity:
            return 2;
        default:
            return 1;
    }
}

cpseq::config::LoadedConfig load_config(const std::string& catalog_path) {
    return catalog_path.empty() ? cpseq::config::builtins()
                                : cpseq::config::load_catalog_file(catalog_path);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) cpseq::fail(cpseq::Errc::storage, "cannot write " + path.string());
    out << content;
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir) {
    cpseq::sim::Scenario scenario = cpseq::sim::load_scenario(scenario_path);
    cpseq::sim::RunReport report = cpseq::sim::run_scenario(scenario);
    std::cout << report.log;
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_file(std::filesystem::path(out_dir) / "run.log", report.log);
        write_file(std::filesystem::path(out_dir) / "summary.json", report.summary_json);
        std::cout << "wrote " << out_dir << "/run.log and " << out_dir << "/summary.json\n";
    }
    return 0;
}

int cmd_classify(const std::string& answers_path, const std::string& catalog_path) {
    auto config = load_config(catalog_path);
    auto answers = cpseq::config::load_answers(answers_path);
    auto posterior = cpseq::ident::classify(answers, config.catalog);
    for (const auto& entry : posterior.entries) {
        std::printf("%-12s %.6f\n", entry.class_label.c_str(), entry.probability);
    }
    std::printf("top: %s\n", posterior.top().class_label.c_str());
    return 0;
}

int cmd_mint(const std::string& observation_path, const std::string& registry_path,
             const std::string& catalog_path, double threshold, double quantization) {
    auto config = load_config(catalog_path);
    auto obs = cpseq::config::load_observation(observation_path);
    auto fv = cpseq::ident::characterize(obs.class_label, obs.observation, config.schemas);

    cpseq::ident::IdentityRegistry registry(quantization);
    const bool persistent = !registry_path.empty();
    if (persistent && std::filesystem::exists(registry_path)) {
        registry = cpseq::ident::IdentityRegistry::load(registry_path);
    }
    auto result = registry.mint_or_resolve(fv, threshold, 0);
    std::printf("%s %s\n",
                result.kind == cpseq::ident::ResolutionKind::minted ? "minted" : "resolved",
                result.identity.identity_id.c_str());
    std::printf("hash %s\n", result.identity.hash.digest.hex().c_str());
    if (persistent) registry.save(registry_path);
    return 0;
}

int cmd_attack(std::uint32_t honest, double fraction, std::uint32_t rounds, std::uint64_t seed,
               double alpha, std::uint64_t threshold) {
    cpseq::ledger::ConsensusConfig config;
    config.adversary_fraction = fraction;
    config.tip_selection_bias = alpha;
    config.confirmation_weight_threshold = threshold;
    auto report = cpseq::ledger::run_attack(honest, fraction, rounds, seed, config);
    std::cout << report.to_text() << "\n";
    return 0;
}

int cmd_adapt(const std::string& class_label, const std::vector<double>& qod,
              const std::string& catalog_path) {
    auto config = load_config(catalog_path);
    const auto* generalized = config.models.find(class_label);
    if (generalized == nullptr) {
        cpseq::fail(cpseq::Errc::configuration, "no model for class '" + class_label + "'");
    }
    const auto& model = generalized->model;
    cpseq::proxy::SamplingPolicy full;
    full.period = 1;
    for (Eigen::Index i = 0; i < model.m(); ++i) full.active_channels.push_back(i);
    cpseq::proxy::QualityOfData bounds{qod};
    auto adapted = cpseq::proxy::adapt_policy(model, full, bounds);
    auto cert = cpseq::proxy::certify_policy(model, adapted, bounds);
    std::printf("period %u\n", adapted.period);
    std::printf("channels");
    for (auto c : adapted.active_channels) {
        std::printf(" %s", model.channel_names[static_cast<std::size_t>(c)].c_str());
    }
    std::printf("\ncost %.6f\n", adapted.cost());
    std::printf("certified %s\n", cert.certified ? "yes" : "no");
    for (std::size_t i = 0; i < cert.steady_stddevs.size(); ++i) {
        std::printf("stddev %s %.6g\n", model.state_names[i].c_str(), cert.steady_stddevs[i]);
    }
    if (!cert.certified) std::printf("rejection %s\n", cert.rejection.c_str());
    return 0;
}

int cmd_report(const std::string& run_dir) {
    std::ifstream in(std::filesystem::path(run_dir) / "summary.json");
    if (!in) cpseq::fail(cpseq::Errc::storage, "no summary.json under " + run_dir);
    std::cout << in.rdbuf();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cyberphysical sequencing toolkit"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir;
    auto* run = app.add_subcommand("run", "run a scenario file");
    run->add_option("scenario", scenario_path, "scenario JSON file")->required();
    run->add_option("--out", out_dir, "directory for run.log and summary.json");

    std::string answers_path, catalog_path;
    auto* classify = app.add_subcommand("classify", "classify an answer transcript");
    classify->add_option("answers", answers_path, "answers file")->required();
    classify->add_option("--catalog", catalog_path, "catalog JSON (default: builtins)");

    std::string observation_path, registry_path, mint_catalog;
    double threshold = 3.0, quantization = 6.0;
    auto* mint = app.add_subcommand("mint", "fingerprint an observation and mint or resolve");
    mint->add_option("observation", observation_path, "observation JSON file")->required();
    mint->add_option("--registry", registry_path, "registry JSON, loaded and saved");
    mint->add_option("--catalog", mint_catalog, "catalog JSON (default: builtins)");
    mint->add_option("--threshold", threshold, "match threshold in sigma units");
    mint->add_option("--quantization", quantization, "bin width in sigma units");

    auto* ledger = app.add_subcommand("ledger", "ledger experiments");
    ledger->require_subcommand(1);
    double fraction = 0.3, alpha = 0.05;
    std::uint32_t honest = 10, rounds = 5000;
    std::uint64_t seed = 1, weight_threshold = 10;
    auto* attack = ledger->add_subcommand("attack", "run a double-mint attack simulation");
    attack->add_option("--fraction", fraction, "adversary issuance fraction")->required();
    attack->add_option("--rounds", rounds, "simulation rounds");
    attack->add_option("--seed", seed, "rng seed");
    attack->add_option("--honest", honest, "honest issuers");
    attack->add_option("--alpha", alpha, "tip selection bias");
    attack->add_option("--threshold", weight_threshold, "confirmation weight threshold");

    auto* proxy = app.add_subcommand("proxy", "proxy experiments");
    proxy->require_subcommand(1);
    std::string class_label, adapt_catalog;
    std::vector<double> qod;
    auto* adapt = proxy->add_subcommand("adapt", "adapt a sampling policy to bounds");
    adapt->add_option("--class", class_label, "model class label")->required();
    adapt->add_option("--qod", qod, "per-state stddev bounds")->required()->expected(-1);
    adapt->add_option("--catalog", adapt_catalog, "catalog JSON (default: builtins)");

    std::string run_dir;
    auto* report = app.add_subcommand("report", "print the summary of a finished run");
    report->add_option("dir", run_dir, "run output directory")->required();

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(scenario_path, out_dir);
        if (classify->parsed()) return cmd_classify(answers_path, catalog_path);
        if (mint->parsed()) {
            return cmd_mint(observation_path, registry_path, mint_catalog, threshold,
                            quantization);
        }
        if (attack->parsed()) {
            return cmd_attack(honest, fraction, rounds, seed, alpha, weight_threshold);
        }
        if (adapt->parsed()) return cmd_adapt(class_label, qod, adapt_catalog);
        if (report->parsed()) return cmd_report(run_dir);
        return 1;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const cpseq::Error& e) {
        std::cerr << "error (" << cpseq::to_string(e.code()) << "): " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
