#pragma once

#include <map>
#include <string>
#include <vector>

#include "tdsc/trainer.hpp"

namespace tdsc {

// Flat dotted key=value text. Later assignments win, so file values can be
// overridden from the command line.
using ConfigMap = std::map<std::string, std::string>;

// '#' starts a comment; blank lines are skipped. Malformed lines raise
// InvalidConfig with the line number.
ConfigMap parse_config_file(const std::string& path);

// "key=value" fragment, as passed via --set.
void apply_override(ConfigMap& map, const std::string& fragment);

// Builds a TrainConfig from the map. Unknown keys and out-of-domain values
// raise InvalidConfig.
TrainConfig train_config_from(const ConfigMap& map);

// Every key with its default and one-line description, for --help and docs.
struct ConfigKeyDoc {
    std::string key;
    std::string default_value;
    std::string help;
};
std::vector<ConfigKeyDoc> config_key_docs();

// Stable key=value rendering of a config, one per line, for run provenance.
std::string config_snapshot(const TrainConfig& cfg);

}  // namespace tdsc
