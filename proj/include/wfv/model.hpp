#pragma once

#include "wfv/ast.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wfv {

inline constexpr int kDefaultMaxArraySize = 16;
inline constexpr int kMaxLiveProcesses = 255;

/// `chan name[count] = [capacity] of {int}`; count 0 means a scalar channel.
struct ChannelDecl {
    std::string name;
    int count = 0;
    int capacity = 1;
};

/// Global integer variable or array. Missing initial values are 0.
struct GlobalVar {
    std::string name;
    int size = 0; // 0 for scalars
    std::vector<std::int32_t> init;
};

struct ProcessTemplate {
    std::string name;
    std::vector<std::string> params;
    Sequence body;
    bool active = false; // instantiated in the initial state, like `active proctype`
};

enum class ObservationMode { None, Scalar, Flags };

const char* to_string(ObservationMode mode);
std::optional<ObservationMode> parse_observation_mode(const std::string& text);

/// A named LTL property with its own proposition bindings (name -> boolean
/// expression over globals).
struct LtlProperty {
    std::string name;
    std::string formula;
    std::map<std::string, Expr> propositions;
};

/// A closed system: declarations, process templates and the init body.
/// Propositions are named boolean expressions over global variables.
struct Model {
    std::string name;
    std::vector<ChannelDecl> channels;
    std::vector<GlobalVar> globals;
    std::vector<ProcessTemplate> templates;
    Sequence init;
    std::map<std::string, Expr> propositions;
    ObservationMode observation = ObservationMode::None;
    std::map<int, std::string> milestones; // milestone index -> process name
    std::vector<LtlProperty> properties;

    const ProcessTemplate* find_template(const std::string& name) const;
    ProcessTemplate* find_template(const std::string& name);
};

} // namespace wfv
