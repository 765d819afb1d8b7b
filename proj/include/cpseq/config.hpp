#pragma once
// Configuration loading: class catalogs (questions, likelihoods, feature
// schemas, optional generalized models) from JSON, plus the built-in
// five-class catalog and the two-column answers file format.

#include "cpseq/identification.hpp"
#include "cpseq/proxy.hpp"

#include <string>
#include <vector>

namespace cpseq::config {

struct LoadedConfig {
    ident::ClassCatalog catalog;
    ident::SchemaRegistry schemas;
    proxy::ModelRegistry models;
};

// Built-in catalog: classes {key, pen, cup, hat, ball} over the 17
// screening questions, with the key feature schema and key model.
LoadedConfig builtins();

// Same shape as the builtins, read from a catalog file. Classes may
// carry "features" (schema) and "model" (generalized proxy model).
LoadedConfig load_catalog_file(const std::string& path);

// Answer transcript: one "question_id answer" pair per line, '#'
// comments and blank lines ignored.
std::vector<ident::AttributeAnswer> load_answers(const std::string& path);

// Raw observation file: {"class": "...", "observation": {channel: value}}.
struct ObservationFile {
    std::string class_label;
    ident::Observation observation;
};
ObservationFile load_observation(const std::string& path);

}  // namespace cpseq::config
