#include "cpseq/config.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace cpseq::config {

namespace {

std::vector<ident::Question> builtin_questions() {
    return {
        {"q01_kingdom", "Is it Animal, Vegetable, Mineral, Concept, or Unknown?"},
        {"q02_very_large", "Is it very large?"},
        {"q03_work", "Do you use it at work?"},
        {"q04_black", "Is it black?"},
        {"q05_write", "Can it be used to write?"},
        {"q06_hard", "Is it hard?"},
        {"q07_run", "Does it like to run?"},
        {"q08_liquids", "Can liquids pass through it?"},
        {"q09_dark", "Would you use it in the dark?"},
        {"q10_expensive", "Is it very, very expensive?"},
        {"q11_round", "Is it round?"},
        {"q12_corners", "Does it usually have four corners?"},
        {"q13_head", "Can it be placed on your head?"},
        {"q14_hole", "Does it have a hole in it?"},
        {"q15_breaks", "Does it break if dropped?"},
        {"q16_flexible", "Is it flexible?"},
        {"q17_writing", "Does it have writing on it?"},
    };
}

std::vector<ident::ClassEntry> builtin_classes() {
    return {
        {"key",
         {0.50, 0.02, 0.90, 0.15, 0.05, 0.95, 0.02, 0.05, 0.50, 0.05, 0.10, 0.05, 0.80, 0.85,
          0.05, 0.05, 0.40}},
        {"pen",
         {0.50, 0.02, 0.95, 0.50, 0.98, 0.70, 0.02, 0.20, 0.30, 0.10, 0.50, 0.05, 0.70, 0.30,
          0.30, 0.10, 0.70}},
        {"cup",
         {0.50, 0.10, 0.60, 0.20, 0.05, 0.80, 0.02, 0.10, 0.20, 0.10, 0.90, 0.05, 0.60, 0.40,
          0.70, 0.05, 0.50}},
        {"hat",
         {0.50, 0.10, 0.30, 0.30, 0.05, 0.10, 0.02, 0.40, 0.30, 0.15, 0.60, 0.05, 0.98, 0.30,
          0.02, 0.80, 0.40}},
        {"ball",
         {0.50, 0.15, 0.10, 0.20, 0.05, 0.50, 0.40, 0.05, 0.10, 0.05, 0.98, 0.02, 0.70, 0.05,
          0.20, 0.30, 0.30}},
    };
}

Eigen::MatrixXd parse_matrix(const nlohmann::json& rows) {
    const auto r = static_cast<Eigen::Index>(rows.size());
    if (r == 0) fail(Errc::configuration, "empty matrix in model");
    const auto c = static_cast<Eigen::Index>(rows.at(0).size());
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        if (static_cast<Eigen::Index>(rows.at(i).size()) != c) {
            fail(Errc::configuration, "ragged matrix in model");
        }
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows.at(i).at(j).get<double>();
    }
    return m;
}

proxy::GeneralizedModel parse_model(const nlohmann::json& spec) {
    proxy::GeneralizedModel gm;
    gm.model.A = parse_matrix(spec.at("A"));
    gm.model.C = parse_matrix(spec.at("C"));
    gm.model.Q = parse_matrix(spec.at("Q"));
    gm.model.R = parse_matrix(spec.at("R"));
    for (const auto& state : spec.at("states")) {
        gm.model.state_names.push_back(state.at("name").get<std::string>());
        gm.model.state_units.push_back(state.at("unit").get<std::string>());
    }
    gm.model.channel_names = spec.at("channels").get<std::vector<std::string>>();
    const auto mean = spec.at("prior_mean").get<std::vector<double>>();
    gm.prior_mean = Eigen::Map<const Eigen::VectorXd>(mean.data(),
                                                      static_cast<Eigen::Index>(mean.size()));
    gm.prior_covariance = parse_matrix(spec.at("prior_covariance"));
    return gm;
}

}  // namespace

LoadedConfig builtins() {
    return {ident::ClassCatalog(builtin_questions(), builtin_classes()),
            ident::SchemaRegistry::with_builtins(), proxy::ModelRegistry::with_builtins()};
}

LoadedConfig load_catalog_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::storage, "cannot open catalog file: " + path);
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::validation, "catalog file is not valid JSON: " + std::string(e.what()));
    }
    try {
        std::vector<ident::Question> questions;
        for (const auto& q : root.at("questions")) {
            questions.push_back({q.at("id").get<std::string>(), q.at("text").get<std::string>()});
        }
        std::vector<ident::ClassEntry> classes;
        ident::SchemaRegistry schemas;
        proxy::ModelRegistry models;
        for (const auto& entry : root.at("classes")) {
            const std::string label = entry.at("label").get<std::string>();
            classes.push_back({label, entry.at("likelihood").get<std::vector<double>>()});
            if (entry.contains("features")) {
                ident::FeatureSchema schema;
                schema.class_label = label;
                for (const auto& f : entry.at("features")) {
                    schema.features.push_back({f.at("name").get<std::string>(),
                                               f.at("unit").get<std::string>(),
                                               f.at("sigma").get<double>(),
                                               f.at("min").get<double>(),
                                               f.at("max").get<double>()});
                }
                schemas.add(std::move(schema));
            }
            if (entry.contains("model")) {
                models.add(label, parse_model(entry.at("model")));
            }
        }
        return {ident::ClassCatalog(std::move(questions), std::move(classes)), std::move(schemas),
                std::move(models)};
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::validation, "catalog file has unexpected shape: " + std::string(e.what()));
    }
}

std::vector<ident::AttributeAnswer> load_answers(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::storage, "cannot open answers file: " + path);
    std::vector<ident::AttributeAnswer> answers;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream fields(line);
        std::string question_id, answer_text;
        if (!(fields >> question_id)) continue;  // blank or comment-only line
        if (!(fields >> answer_text)) {
            fail(Errc::validation,
                 path + ":" + std::to_string(line_no) + ": expected 'question_id answer'");
        }
        auto level = ident::parse_answer_level(answer_text);
        if (!level) {
            fail(Errc::validation, path + ":" + std::to_string(line_no) + ": unknown answer '" +
                                       answer_text + "'");
        }
        answers.push_back({question_id, *level});
    }
    return answers;
}

ObservationFile load_observation(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::storage, "cannot open observation file: " + path);
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::validation, "observation file is not valid JSON: " + std::string(e.what()));
    }
    try {
        ObservationFile out;
        out.class_label = root.at("class").get<std::string>();
        for (const auto& [name, value] : root.at("observation").items()) {
            out.observation[name] = value.get<double>();
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::validation, "observation file has unexpected shape: " + std::string(e.what()));
    }
}

}  // namespace cpseq::config
