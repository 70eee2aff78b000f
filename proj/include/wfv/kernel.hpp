#pragma once

#include "wfv/model.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace wfv {

enum class ActionKind : std::uint8_t {
    Skip,    // skip, goto, break, else, label-free jumps
    Assign,
    Send,
    Recv,
    Guard,
    Run,
    Timeout,
    Fail,
};

/// One executable step of a lowered template.
struct Edge {
    ActionKind kind = ActionKind::Skip;
    Expr chan;
    Expr target;
    Expr value;
    bool has_target = false;
    bool is_else = false;
    bool keeps_atomic = false; // back-edge to the entry of the enclosing atomic region
    bool keeps_dstep = false;
    int run_template = -1;
    std::vector<Expr> args;
    std::string text; // PROMELA rendering for traces
    int to = -1;
};

struct Location {
    std::vector<Edge> edges;
    std::vector<int> escapes;   // escape entry locations, outermost first
    bool atomic_interior = false;
    bool dstep_interior = false;
    bool end_label = false;     // SPIN `end` label: a valid place to stop
    std::string label;
};

struct LocalVar {
    std::string name;
    int offset = 0;
    int size = 1;
    bool is_array = false;
    std::int32_t init = 0;
};

struct TemplateCode {
    std::string name;
    int param_count = 0;
    std::vector<LocalVar> locals;
    int local_words = 0;
    std::vector<Location> locations;
    int entry = 0;
    int end = 0;
};

struct GlobalLayout {
    std::string name;
    int offset = 0;
    int size = 1;
    bool is_array = false;
    bool is_channel = false;
};

struct ChannelInfo {
    std::string name; // e.g. "qs[1]"
    int capacity = 1;
};

/// A model lowered to per-template control-flow graphs with resolved
/// variable slots. Channel variables hold 1-based channel handles.
class Program {
public:
    explicit Program(const Model& model);

    const Model& model() const { return model_; }
    const std::vector<TemplateCode>& templates() const { return templates_; }
    const TemplateCode& code(int tmpl) const { return templates_.at(static_cast<std::size_t>(tmpl)); }
    int template_index(const std::string& name) const;
    int init_template() const { return init_template_; }

    const std::vector<GlobalLayout>& globals() const { return globals_; }
    const GlobalLayout* find_global(const std::string& name) const;
    const std::vector<std::int32_t>& global_init() const { return global_init_; }
    const std::vector<ChannelInfo>& channels() const { return channels_; }

    /// Proposition expressions resolved against the global store.
    const std::map<std::string, Expr>& propositions() const { return propositions_; }
    Expr resolve_global_expr(const Expr& e) const;

private:
    Model model_;
    std::vector<TemplateCode> templates_;
    int init_template_ = -1;
    std::vector<GlobalLayout> globals_;
    std::vector<std::int32_t> global_init_;
    std::vector<ChannelInfo> channels_;
    std::map<std::string, Expr> propositions_;
};

struct ProcessInstance {
    int tmpl = 0;
    int pc = 0;
    std::vector<std::int32_t> locals;
    bool done = false;

    bool operator==(const ProcessInstance&) const = default;
};

struct SystemState {
    std::vector<std::int32_t> globals;
    std::vector<std::vector<std::int32_t>> channels;
    std::vector<ProcessInstance> processes;
    int atomic_holder = -1;

    bool operator==(const SystemState&) const = default;

    /// Canonical byte encoding: equal states encode identically.
    std::string encode() const;
};

struct Digest {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;
    bool operator==(const Digest&) const = default;
    auto operator<=>(const Digest&) const = default;
    std::string hex() const;
};

struct DigestHash {
    std::size_t operator()(const Digest& d) const noexcept { return static_cast<std::size_t>(d.lo ^ (d.hi * 0x9e3779b97f4a7c15ULL)); }
};

/// A move of one process: the edge `edge` leaving location `loc`. For an
/// escape firing `loc` is the escape entry rather than the current pc.
/// Rendezvous handoffs carry the receiving partner.
struct Transition {
    int pid = -1;
    int loc = -1;
    int edge = -1;
    int partner_pid = -1;
    int partner_loc = -1;
    int partner_edge = -1;

    bool operator==(const Transition&) const = default;
};

SystemState initial_state(const Program& program);

std::int32_t eval_expr(const Program& program, const SystemState& state, int pid, const Expr& e);

std::vector<Transition> enabled_transitions(const Program& program, const SystemState& state);

/// Successor of `state` after `t`. With `validate` the move is first checked
/// against enabled_transitions and IllegalTransition is thrown if absent.
SystemState apply_transition(const Program& program, const SystemState& state, const Transition& t,
                             bool validate = true);

bool is_valid_end_state(const Program& program, const SystemState& state);

Digest canonical_state_digest(const SystemState& state);

const Edge& edge_of(const Program& program, const SystemState& state, const Transition& t);
bool is_timeout(const Program& program, const SystemState& state, const Transition& t);
int live_process_count(const SystemState& state);

/// Human-readable summary of a state (globals, channel buffers, process pcs).
std::string describe_state(const Program& program, const SystemState& state);

} // namespace wfv
