#pragma once

#include "wfv/error.hpp"
#include "wfv/model.hpp"
#include "wfv/patterns.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wfv::dsl {

// Source positions are kept for diagnostics but ignored by operator==, so
// that parse(print(def)) == def holds.

struct ChannelDef {
    std::string name;
    int size = 0; // 0: scalar channel
    int capacity = 1;
    SourcePos pos;

    bool operator==(const ChannelDef& o) const { return name == o.name && size == o.size && capacity == o.capacity; }
};

struct VarDef {
    std::string name;
    int size = 0;
    std::vector<std::int32_t> init;
    SourcePos pos;

    bool operator==(const VarDef& o) const { return name == o.name && size == o.size && init == o.init; }
};

enum class StepKind { Send, Recv, Assign, Pattern, Ndet, Milestone, Run, Skip, Var, Chan };

struct Step {
    StepKind kind = StepKind::Skip;
    std::string label;
    Expr chan;   // send, recv
    Expr target; // recv, assign
    Expr value;  // send, assign
    patterns::PatternInvocation pattern;
    std::vector<std::vector<Step>> branches; // ndet
    int milestone = 0;
    std::string name; // run target, var / chan name
    int size = 0;     // var / chan array size
    std::vector<Expr> init; // var initial value(s), chan aliases
    SourcePos pos;

    bool operator==(const Step& o) const
    {
        return kind == o.kind && label == o.label && chan == o.chan && target == o.target && value == o.value &&
               pattern == o.pattern && branches == o.branches && milestone == o.milestone && name == o.name &&
               size == o.size && init == o.init;
    }
};

struct ProcessDef {
    std::string name;
    std::optional<int> id;
    std::optional<int> parent;
    bool cancellable = false;
    std::vector<Step> body;
    std::vector<Step> on_cancel;
    SourcePos pos;

    bool operator==(const ProcessDef& o) const
    {
        return name == o.name && id == o.id && parent == o.parent && cancellable == o.cancellable && body == o.body &&
               on_cancel == o.on_cancel;
    }
};

/// Right-hand side of a proposition: `initial`, `reached(k)` or an
/// expression over globals.
struct PropDef {
    enum class Kind { Initial, Reached, Expression };
    std::string name;
    Kind kind = Kind::Expression;
    int milestone = 0;
    Expr expr;
    SourcePos pos;

    bool operator==(const PropDef& o) const
    {
        return name == o.name && kind == o.kind && milestone == o.milestone && expr == o.expr;
    }
};

struct LtlDef {
    std::string name;
    std::string formula;
    std::vector<PropDef> bindings; // local to this property; globals apply otherwise
    SourcePos pos;

    bool operator==(const LtlDef& o) const { return name == o.name && formula == o.formula && bindings == o.bindings; }
};

struct WorkflowDef {
    std::string name;
    std::vector<ChannelDef> channels;
    std::vector<VarDef> vars;
    std::string cancel_channel; // channel array indexed by process id
    std::vector<ProcessDef> processes;
    std::vector<PropDef> props;
    std::vector<LtlDef> properties;
    std::vector<Step> init;

    bool operator==(const WorkflowDef&) const = default;

    const ProcessDef* find_process(const std::string& name) const;
    const ChannelDef* find_channel(const std::string& name) const;
};

/// Throws SyntaxError with a 1-based line/column and the expected tokens.
WorkflowDef parse_workflow(std::string_view text);

/// Canonical source text; parse_workflow(print_workflow(d)) == d.
std::string print_workflow(const WorkflowDef& def);

enum class Severity { Error, Warning };

struct Diagnostic {
    Severity severity = Severity::Error;
    std::string code; // e.g. PARENT_CYCLE, CHOICE_OUT_OF_RANGE
    std::string message;
    SourcePos pos;
};

std::string to_string(const Diagnostic& d);

std::vector<Diagnostic> validate_workflow(const WorkflowDef& def, int max_array_size = kDefaultMaxArraySize);
bool has_errors(const std::vector<Diagnostic>& diagnostics);

struct CompileOptions {
    ObservationMode mode = ObservationMode::Flags;
    bool strict_spin = false; // myRun blocks on unknown ids instead of failing
    int max_array_size = kDefaultMaxArraySize;
};

/// Expands patterns, builds the myRun dispatcher, wraps cancellable bodies
/// and inserts milestone instrumentation. Throws CompileError when the
/// definition has validation errors or a pattern cannot be expanded.
Model compile_to_kernel(const WorkflowDef& def, const CompileOptions& options = {});

/// The process registry implied by ids and parents; id 0 is the case root
/// unless a process claims it.
patterns::ProcessRegistry build_registry(const WorkflowDef& def);

/// Highest milestone index used anywhere (0 if none).
int max_milestone(const WorkflowDef& def);

} // namespace wfv::dsl
