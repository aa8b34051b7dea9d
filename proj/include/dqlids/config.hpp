#pragma once

#include <string>

#include "dqlids/agent.hpp"
#include "dqlids/dataset.hpp"

namespace dqlids {

// Resolved settings for one CLI run. Values come from defaults, then an
// optional key=value config file, then command-line flags, in that order.
struct RunConfig {
    std::string train_file;
    std::string test_file;
    std::string taxonomy_file; // empty -> compiled-in table
    std::string out_dir = "out";
    HyperParams hp;
    EncodingMode encoding = EncodingMode::Ordinal;
    UnknownCategoryPolicy unknown_policy = UnknownCategoryPolicy::Lenient;
    bool shuffle = false;
};

const char* encoding_name(EncodingMode mode);
EncodingMode encoding_from_name(const std::string& name); // throws

const char* optimizer_name(OptimizerKind kind);
OptimizerKind optimizer_from_name(const std::string& name); // throws

const char* policy_name(UnknownCategoryPolicy policy);
UnknownCategoryPolicy policy_from_name(const std::string& name); // throws

// key=value lines, '#' comments. Unknown keys and unparsable values are
// errors.
void apply_config_file(RunConfig& cfg, const std::string& path);

// Echo of every resolved setting, written into the output directory for
// provenance. Deterministic byte-for-byte given the same config.
std::string format_resolved_config(const RunConfig& cfg);

} // namespace dqlids
