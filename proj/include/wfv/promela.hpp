#pragma once

#include "wfv/model.hpp"

#include <stdexcept>
#include <string>

namespace wfv::promela {

struct EmitConfig {
    int max_array_size = kDefaultMaxArraySize; // emitted as MAXARRAYSIZE
    std::string include_name = "utils.pr";
};

/// The model uses something the PROMELA text cannot express (for instance a
/// declaring pattern twice in one proctype, whose inline locals would clash).
class EmitUnsupported : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The pattern library: send, recv, parallelSplit, synchronization,
/// exclusiveChoice, cancelCase and simpleMerge as `inline` definitions.
std::string emit_pattern_library(const EmitConfig& config = {});

/// A complete model file that includes the pattern library. Throws
/// std::invalid_argument if a pattern's sizeq exceeds config.max_array_size.
std::string emit_model_source(const Model& model, const EmitConfig& config = {});

/// Companion property file: includes `model_file`, then for each property its
/// `#define`d propositions and an `ltl name { ... }` block.
std::string emit_property_file(const Model& model, const std::string& model_file);

} // namespace wfv::promela
