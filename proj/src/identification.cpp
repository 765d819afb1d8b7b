#include "cpseq/identification.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace cpseq::ident {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

std::optional<AnswerLevel> parse_answer_level(std::string_view text) {
    const std::string t = lower(text);
    if (t == "yes") return AnswerLevel::yes;
    if (t == "usually") return AnswerLevel::usually;
    if (t == "sometimes") return AnswerLevel::sometimes;
    if (t == "rarely") return AnswerLevel::rarely;
    if (t == "doubtful") return AnswerLevel::doubtful;
    if (t == "no") return AnswerLevel::no;
    if (t == "unknown") return AnswerLevel::unknown;
    return std::nullopt;
}

std::string_view to_string(AnswerLevel level) {
    switch (level) {
        case AnswerLevel::yes: return "Yes";
        case AnswerLevel::usually: return "Usually";
        case AnswerLevel::sometimes: return "Sometimes";
        case AnswerLevel::rarely: return "Rarely";
        case AnswerLevel::doubtful: return "Doubtful";
        case AnswerLevel::no: return "No";
        case AnswerLevel::unknown: return "Unknown";
    }
    return "Unknown";
}

double answer_weight(AnswerLevel level) {
    switch (level) {
        case AnswerLevel::yes: return 0.95;
        case AnswerLevel::usually: return 0.80;
        case AnswerLevel::sometimes: return 0.50;
        case AnswerLevel::rarely: return 0.20;
        case AnswerLevel::doubtful: return 0.10;
        case AnswerLevel::no: return 0.05;
        case AnswerLevel::unknown: return 0.0;  // skipped, never used as a weight
    }
    return 0.0;
}

ClassCatalog::ClassCatalog(std::vector<Question> questions, std::vector<ClassEntry> classes)
    : questions_(std::move(questions)), classes_(std::move(classes)) {
    if (classes_.empty()) fail(Errc::configuration, "catalog has no classes");
    if (questions_.empty()) fail(Errc::configuration, "catalog has no questions");
    for (const auto& entry : classes_) {
        if (entry.likelihood.size() != questions_.size()) {
            fail(Errc::configuration,
                 "class '" + entry.label + "' has " + std::to_string(entry.likelihood.size()) +
                     " likelihoods for " + std::to_string(questions_.size()) + " questions");
        }
        for (double l : entry.likelihood) {
            if (!(l >= 0.0 && l <= 1.0)) {
                fail(Errc::configuration, "class '" + entry.label + "' likelihood outside [0,1]");
            }
        }
    }
}

std::optional<std::size_t> ClassCatalog::question_index(std::string_view question_id) const {
    for (std::size_t i = 0; i < questions_.size(); ++i) {
        if (questions_[i].id == question_id) return i;
    }
    return std::nullopt;
}

bool ClassCatalog::has_class(std::string_view label) const {
    return std::any_of(classes_.begin(), classes_.end(),
                       [&](const ClassEntry& c) { return c.label == label; });
}

ClassPosterior classify(std::span<const AttributeAnswer> answers, const ClassCatalog& catalog) {
    const std::size_t n_classes = catalog.classes().size();
    std::vector<double> log_post(n_classes, 0.0);  // uniform prior

    for (const auto& answer : answers) {
        if (answer.answer == AnswerLevel::unknown) continue;
        auto idx = catalog.question_index(answer.question_id);
        if (!idx) {
            fail(Errc::validation, "answer references unknown question '" + answer.question_id + "'");
        }
        const double w = answer_weight(answer.answer);
        for (std::size_t c = 0; c < n_classes; ++c) {
            const double l = catalog.classes()[c].likelihood[*idx];
            // Likelihood of observing this answer level given the class:
            // the class's yes-leaning likelihood weighted against its
            // complement by the answer weight. Never zero because w is
            // bounded away from 0 and 1.
            const double p = w * l + (1.0 - w) * (1.0 - l);
            log_post[c] += std::log(p);
        }
    }

    const double max_log = *std::max_element(log_post.begin(), log_post.end());
    double total = 0.0;
    std::vector<double> unnorm(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) {
        unnorm[c] = std::exp(log_post[c] - max_log);
        total += unnorm[c];
    }

    ClassPosterior posterior;
    posterior.entries.reserve(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) {
        posterior.entries.push_back({catalog.classes()[c].label, unnorm[c] / total});
    }
    std::sort(posterior.entries.begin(), posterior.entries.end(),
              [](const PosteriorEntry& a, const PosteriorEntry& b) {
                  if (a.probability != b.probability) return a.probability > b.probability;
                  return a.class_label < b.class_label;
              });
    return posterior;
}

void SchemaRegistry::add(FeatureSchema schema) {
    if (schema.features.empty()) {
        fail(Errc::configuration, "schema for '" + schema.class_label + "' has no features");
    }
    for (const auto& f : schema.features) {
        if (!(f.sigma > 0.0)) {
            fail(Errc::configuration, "feature '" + f.name + "' needs sigma > 0");
        }
        if (!(f.min_value <= f.max_value)) {
            fail(Errc::configuration, "feature '" + f.name + "' has inverted bounds");
        }
    }
    std::string label = schema.class_label;
    schemas_[std::move(label)] = std::move(schema);
}

const FeatureSchema* SchemaRegistry::find(std::string_view class_label) const {
    auto it = schemas_.find(class_label);
    return it == schemas_.end() ? nullptr : &it->second;
}

SchemaRegistry SchemaRegistry::with_builtins() {
    SchemaRegistry registry;
    FeatureSchema key;
    key.class_label = "key";
    for (int i = 1; i <= 5; ++i) {
        key.features.push_back({"cut_depth_" + std::to_string(i), "mm", 0.1, 0.0, 10.0});
    }
    key.features.push_back({"wear_index", "fraction", 0.05, 0.0, 1.0});
    key.features.push_back({"material_score", "fraction", 0.05, 0.0, 1.0});
    registry.add(std::move(key));
    return registry;
}

FeatureVector characterize(const std::string& class_label, const Observation& observation,
                           const SchemaRegistry& schemas) {
    const FeatureSchema* schema = schemas.find(class_label);
    if (schema == nullptr) {
        fail(Errc::configuration, "no feature schema registered for class '" + class_label + "'");
    }
    FeatureVector fv;
    fv.class_label = class_label;
    fv.features.reserve(schema->features.size());
    for (const auto& def : schema->features) {
        auto it = observation.find(def.name);
        if (it == observation.end()) {
            fail(Errc::validation, "observation missing channel '" + def.name + "'");
        }
        const double value = it->second;
        if (!std::isfinite(value)) {
            fail(Errc::validation, "channel '" + def.name + "' is not finite");
        }
        if (value < def.min_value || value > def.max_value) {
            fail(Errc::range, "channel '" + def.name + "' value " + std::to_string(value) +
                                  " outside [" + std::to_string(def.min_value) + ", " +
                                  std::to_string(def.max_value) + "]");
        }
        fv.features.push_back({def.name, value, def.unit, def.sigma});
    }
    return fv;
}

namespace {

// floor(value / width) with a snap tolerance: quotients within 1e-9 of
// the next integer are rounded up, so exact bin-edge inputs land in the
// analytically expected bin despite binary rounding of the quotient.
std::int64_t quantize(double value, double width) {
    const double q = value / width;
    double idx = std::floor(q);
    if (q - idx > 1.0 - 1e-9) idx += 1.0;
    return static_cast<std::int64_t>(idx);
}

}  // namespace

PhysicalHash physical_hash(const FeatureVector& fv, double quantization_factor) {
    if (!(quantization_factor > 0.0)) {
        fail(Errc::configuration, "quantization factor must be positive");
    }
    PhysicalHash hash;
    hash.class_label = fv.class_label;
    hash.raw_features = fv;
    hash.quantized_cells.reserve(fv.features.size());
    FieldWriter writer;
    writer.field(fv.class_label);
    for (const auto& f : fv.features) {
        if (!(f.noise_sigma > 0.0)) {
            fail(Errc::validation, "feature '" + f.name + "' has non-positive sigma");
        }
        const std::int64_t cell = quantize(f.value, quantization_factor * f.noise_sigma);
        hash.quantized_cells.push_back(cell);
        writer.field(std::to_string(cell));
    }
    hash.digest = writer.digest();
    return hash;
}

Digest identity_digest(const Identity& identity) {
    FieldWriter writer;
    writer.field(identity.identity_id)
        .field_digest(identity.hash.digest)
        .field_u64(identity.minted_at);
    return writer.digest();
}

double feature_distance(const FeatureVector& a, const FeatureVector& b) {
    if (a.class_label != b.class_label || a.features.size() != b.features.size()) {
        fail(Errc::validation, "feature distance requires vectors of the same class");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.features.size(); ++i) {
        const double sigma = a.features[i].noise_sigma;
        const double d = (a.features[i].value - b.features[i].value) / sigma;
        sum += d * d;
    }
    return std::sqrt(sum);
}

IdentityRegistry::IdentityRegistry(double quantization_factor)
    : quantization_factor_(quantization_factor) {
    if (!(quantization_factor > 0.0)) {
        fail(Errc::configuration, "quantization factor must be positive");
    }
}

IdentityRegistry::IdentityRegistry(IdentityRegistry&& other) noexcept
    : quantization_factor_(other.quantization_factor_),
      by_id_(std::move(other.by_id_)),
      serial_per_class_(std::move(other.serial_per_class_)) {}

IdentityRegistry& IdentityRegistry::operator=(IdentityRegistry&& other) noexcept {
    if (this != &other) {
        std::scoped_lock lock(mutex_, other.mutex_);
        quantization_factor_ = other.quantization_factor_;
        by_id_ = std::move(other.by_id_);
        serial_per_class_ = std::move(other.serial_per_class_);
    }
    return *this;
}

ResolutionResult IdentityRegistry::mint_or_resolve(const FeatureVector& fv, double match_threshold,
                                                   Tick now) {
    if (!(match_threshold > 0.0)) {
        fail(Errc::configuration, "match threshold must be positive");
    }
    std::lock_guard<std::mutex> lock(mutex_);

    const Identity* best = nullptr;
    double best_distance = 0.0;
    // by_id_ iterates in id order, so keeping strictly-smaller matches
    // breaks distance ties toward the smallest identity id.
    for (const auto& [id, identity] : by_id_) {
        if (identity.hash.class_label != fv.class_label) continue;
        const double d = feature_distance(fv, identity.hash.raw_features);
        if (best == nullptr || d < best_distance) {
            best = &identity;
            best_distance = d;
        }
    }
    if (best != nullptr && best_distance <= match_threshold) {
        return {*best, ResolutionKind::resolved};
    }

    char serial[16];
    std::snprintf(serial, sizeof(serial), "%06llu",
                  static_cast<unsigned long long>(++serial_per_class_[fv.class_label]));
    Identity minted;
    minted.identity_id = fv.class_label + "-" + serial;
    minted.hash = physical_hash(fv, quantization_factor_);
    minted.minted_at = now;
    auto [it, inserted] = by_id_.emplace(minted.identity_id, std::move(minted));
    if (!inserted) fail(Errc::storage, "identity id collision in registry");
    return {it->second, ResolutionKind::minted};
}

std::optional<Identity> IdentityRegistry::find(std::string_view identity_id) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = by_id_.find(std::string(identity_id));
    return it == by_id_.end() ? std::nullopt : std::make_optional(it->second);
}

std::vector<Identity> IdentityRegistry::all() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::vector<Identity> out;
    out.reserve(by_id_.size());
    for (const auto& [id, identity] : by_id_) out.push_back(identity);
    return out;
}

std::size_t IdentityRegistry::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return by_id_.size();
}

void IdentityRegistry::save(const std::string& path) const {
    nlohmann::ordered_json root;
    root["quantization_factor"] = quantization_factor_;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        nlohmann::ordered_json serials = nlohmann::ordered_json::object();
        for (const auto& [label, serial] : serial_per_class_) serials[label] = serial;
        root["serials"] = std::move(serials);
        nlohmann::ordered_json identities = nlohmann::ordered_json::array();
        for (const auto& [id, identity] : by_id_) {
            nlohmann::ordered_json features = nlohmann::ordered_json::array();
            for (const auto& f : identity.hash.raw_features.features) {
                features.push_back({{"name", f.name},
                                    {"value", f.value},
                                    {"unit", f.unit},
                                    {"sigma", f.noise_sigma}});
            }
            identities.push_back({{"identity_id", identity.identity_id},
                                  {"class", identity.hash.class_label},
                                  {"minted_at", identity.minted_at},
                                  {"features", std::move(features)}});
        }
        root["identities"] = std::move(identities);
    }
    std::ofstream out(path);
    if (!out) fail(Errc::storage, "cannot open registry file for writing: " + path);
    out << root.dump(2) << "\n";
    if (!out) fail(Errc::storage, "failed writing registry file: " + path);
}

IdentityRegistry IdentityRegistry::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::storage, "cannot open registry file: " + path);
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::storage, "registry file is not valid JSON: " + std::string(e.what()));
    }
    try {
        IdentityRegistry registry(root.at("quantization_factor").get<double>());
        for (const auto& [label, serial] : root.at("serials").items()) {
            registry.serial_per_class_[label] = serial.get<std::uint64_t>();
        }
        for (const auto& entry : root.at("identities")) {
            FeatureVector fv;
            fv.class_label = entry.at("class").get<std::string>();
            for (const auto& f : entry.at("features")) {
                fv.features.push_back({f.at("name").get<std::string>(), f.at("value").get<double>(),
                                       f.at("unit").get<std::string>(), f.at("sigma").get<double>()});
            }
            Identity identity;
            identity.identity_id = entry.at("identity_id").get<std::string>();
            identity.minted_at = entry.at("minted_at").get<Tick>();
            identity.hash = physical_hash(fv, registry.quantization_factor_);
            registry.by_id_.emplace(identity.identity_id, std::move(identity));
        }
        return registry;
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::storage, "registry file has unexpected shape: " + std::string(e.what()));
    }
}

}  // namespace cpseq::ident
