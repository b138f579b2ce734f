#pragma once

#include <string>
#include <vector>

#include "valp/core.hpp"

namespace valp {

struct Violation {
    std::string check;      ///< "V0".."V10"
    std::string component;  ///< offending component, connection ("c<id>") or loss id
    std::string message;

    friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
    bool ok = true;
    std::vector<Violation> violations;  ///< sorted by check number, then component
};

/// Runs every structural, typing and loss-wiring check and collects all
/// violations. V0 covers well-formedness (unique ids, valid endpoints);
/// V1..V10 are the model rules. Never throws on a malformed graph.
ValidationReport validate(const ModelGraph& graph);

/// Minimum network count able to serve the declared outputs: one network
/// per output plus a GenericMLP for every Samples output's Decoder.
int minimum_network_count(const std::vector<ModelOutputSpec>& outputs);

/// One JSON object per line.
std::string report_to_json_lines(const ValidationReport& report);

}  // namespace valp
