#pragma once
// System identification: classify an observed asset to a class from
// attribute answers, characterize it into a class-specific feature
// vector, and resolve it to an existing identity or mint a new one via a
// noise-tolerant physical hash.

#include "cpseq/digest.hpp"
#include "cpseq/errors.hpp"

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cpseq::ident {

// Seven-level likelihood scale used by attribute answers.
enum class AnswerLevel { yes, usually, sometimes, rarely, doubtful, no, unknown };

std::optional<AnswerLevel> parse_answer_level(std::string_view text);  // case-insensitive
std::string_view to_string(AnswerLevel level);

// Observation weight for a level; `unknown` carries no evidence and is
// skipped by classify.
double answer_weight(AnswerLevel level);

struct AttributeAnswer {
    std::string question_id;
    AnswerLevel answer = AnswerLevel::unknown;
};

struct Question {
    std::string id;
    std::string text;
};

struct ClassEntry {
    std::string label;
    std::vector<double> likelihood;  // one entry per catalog question, in [0,1]
};

class ClassCatalog {
public:
    ClassCatalog(std::vector<Question> questions, std::vector<ClassEntry> classes);

    const std::vector<Question>& questions() const { return questions_; }
    const std::vector<ClassEntry>& classes() const { return classes_; }
    std::optional<std::size_t> question_index(std::string_view question_id) const;
    bool has_class(std::string_view label) const;

private:
    std::vector<Question> questions_;
    std::vector<ClassEntry> classes_;
};

struct PosteriorEntry {
    std::string class_label;
    double probability = 0.0;
};

// Posterior over catalog classes, sorted descending by probability with
// ties broken by lexicographic class label.
struct ClassPosterior {
    std::vector<PosteriorEntry> entries;
    const PosteriorEntry& top() const { return entries.front(); }
};

ClassPosterior classify(std::span<const AttributeAnswer> answers, const ClassCatalog& catalog);

struct FeatureDef {
    std::string name;
    std::string unit;
    double sigma = 0.0;      // measurement noise, > 0
    double min_value = 0.0;  // schema bounds, inclusive
    double max_value = 0.0;
};

struct FeatureSchema {
    std::string class_label;
    std::vector<FeatureDef> features;  // fixed order per class
};

struct FeatureValue {
    std::string name;
    double value = 0.0;
    std::string unit;
    double noise_sigma = 0.0;
};

struct FeatureVector {
    std::string class_label;
    std::vector<FeatureValue> features;  // schema order
};

// Raw observation record: channel name -> measured value.
using Observation = std::map<std::string, double>;

class SchemaRegistry {
public:
    void add(FeatureSchema schema);
    const FeatureSchema* find(std::string_view class_label) const;

    // Registry preloaded with the built-in "key" schema: five cut depths
    // in mm plus wear_index and material_score in [0,1].
    static SchemaRegistry with_builtins();

private:
    std::map<std::string, FeatureSchema, std::less<>> schemas_;
};

FeatureVector characterize(const std::string& class_label, const Observation& observation,
                           const SchemaRegistry& schemas);

// Quantized, noise-tolerant fingerprint binding a digital identifier to
// an asset instance. Cell i is floor(value_i / bin_width_i) with
// bin_width_i = quantization_factor * noise_sigma_i.
struct PhysicalHash {
    std::string class_label;
    std::vector<std::int64_t> quantized_cells;
    FeatureVector raw_features;
    Digest digest;
};

PhysicalHash physical_hash(const FeatureVector& fv, double quantization_factor);

struct Identity {
    std::string identity_id;
    PhysicalHash hash;
    Tick minted_at = 0;
};

Digest identity_digest(const Identity& identity);

enum class ResolutionKind { resolved, minted };

struct ResolutionResult {
    Identity identity;
    ResolutionKind kind = ResolutionKind::minted;
};

// Sigma-normalized Euclidean distance between two feature vectors of the
// same class: sqrt(sum(((a_i - b_i) / sigma_i)^2)).
double feature_distance(const FeatureVector& a, const FeatureVector& b);

// Identity registry with serialized resolve-or-mint. Safe for concurrent
// callers; each mint_or_resolve is an atomic read-modify-write.
class IdentityRegistry {
public:
    explicit IdentityRegistry(double quantization_factor = 6.0);
    IdentityRegistry(IdentityRegistry&& other) noexcept;
    IdentityRegistry& operator=(IdentityRegistry&& other) noexcept;

    // Resolves fv to the nearest registered identity of the same class if
    // the minimum distance is within match_threshold (ties broken by the
    // smallest identity id); otherwise mints and registers a new one.
    ResolutionResult mint_or_resolve(const FeatureVector& fv, double match_threshold, Tick now);

    std::optional<Identity> find(std::string_view identity_id) const;
    std::vector<Identity> all() const;  // sorted by identity id
    std::size_t size() const;
    double quantization_factor() const { return quantization_factor_; }

    // JSON persistence for the CLI. Throws Errc::storage on I/O failure.
    void save(const std::string& path) const;
    static IdentityRegistry load(const std::string& path);

private:
    mutable std::mutex mutex_;
    double quantization_factor_;
    std::map<std::string, Identity> by_id_;
    std::map<std::string, std::uint64_t> serial_per_class_;
};

}  // namespace cpseq::ident
