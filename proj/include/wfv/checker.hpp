#pragma once

#include "wfv/kernel.hpp"
#include "wfv/ltl.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wfv::checker {

struct Limits {
    std::size_t max_states = 2'000'000; // distinct model states
    std::size_t max_depth = 1'000'000;  // search stack / BFS distance
};

struct CheckOptions {
    Limits limits;
    bool fair = false;       // weak process fairness for LTL checks
    bool bfs_safety = false; // breadth-first deadlock search: shortest traces
};

enum class Outcome { Holds, Violated, Deadlock, ModelError, Incomplete };

const char* to_string(Outcome outcome);

/// Observable effect of one step. Globals print as `x` or `a[i]`, locals as
/// `pid:x`; channel entries carry the message value.
struct Delta {
    std::vector<std::pair<std::string, std::int32_t>> sends;
    std::vector<std::pair<std::string, std::int32_t>> recvs;
    std::vector<std::pair<std::string, std::int32_t>> assigns;

    bool operator==(const Delta&) const = default;
    bool empty() const { return sends.empty() && recvs.empty() && assigns.empty(); }
};

struct TraceStep {
    int pid = -1;
    std::string template_name;
    std::string label; // label of the location the move leaves, if any
    std::string statement;
    Transition move;
    Delta delta;
    Digest after;
};

/// A run from the initial state. For a lasso, the state reached after the
/// last step equals the state after `lasso_start` steps; lasso_start ==
/// steps.size() means the run ends in a terminal state that stutters forever.
struct Trace {
    Digest initial;
    std::vector<TraceStep> steps;
    std::optional<std::size_t> lasso_start;
};

Delta compute_delta(const Program& program, const SystemState& before, const SystemState& after, const Transition& t);

/// Replays every move with full enabledness checks and compares deltas and
/// digests; for lassos also checks that the loop closes.
bool validate_trace(const Program& program, const Trace& trace, std::string* why = nullptr);

/// State after replaying the whole trace (throws IllegalTransition on a bad move).
SystemState replay(const Program& program, const Trace& trace);

struct VacuityReport {
    bool supported = false; // false: formula is not of the form [](a -> c) with a state-formula a
    bool vacuous = false;
    bool complete = true; // false: state limit hit before a witness was found
    std::string antecedent;
    std::size_t states = 0;
    std::vector<std::string> valuations;  // distinct valuations of the antecedent's propositions
    std::optional<std::string> witness;   // a valuation satisfying the antecedent
    std::optional<Digest> witness_state;
};

struct Verdict {
    Outcome outcome = Outcome::Holds;
    std::string property;
    std::string formula;
    bool fair = false;
    std::size_t states = 0;
    std::size_t transitions = 0;
    std::optional<Trace> trace;
    std::optional<VacuityReport> vacuity;
    std::string detail;
};

struct ExplorationReport {
    std::size_t states = 0;
    std::size_t transitions = 0;
    std::size_t valid_end_states = 0;   // quiescent and valid
    std::size_t invalid_end_states = 0; // quiescent and invalid
    std::size_t max_depth = 0;
    bool complete = true;
    std::string error; // model error text, if exploration hit one
};

ExplorationReport explore_statespace(const Program& program, const Limits& limits = {});

/// DEADLOCK if a reachable quiescent state is not a valid end state, or if the
/// system can reach a bottom strongly connected component whose only way to
/// move is `timeout` (a stall: nothing but the timeout loop can ever run).
Verdict check_deadlock(const Program& program, const CheckOptions& options = {});

/// Propositions map names to boolean expressions over globals. Throws
/// ltl::UnknownProposition when the formula names an unbound proposition.
Verdict check_ltl_property(const Program& program, const ltl::FormulaPtr& formula,
                           const std::map<std::string, Expr>& propositions, const CheckOptions& options = {});

/// Parses `property.formula` against its own bindings.
Verdict check_property(const Program& program, const LtlProperty& property, const CheckOptions& options = {});

VacuityReport detect_vacuity(const Program& program, const ltl::FormulaPtr& formula,
                             const std::map<std::string, Expr>& propositions, const Limits& limits = {});

enum class TraceStyle { Text, Structured };

/// Text: one line per step, "pid template @label statement => delta", with a
/// marker line where the loop of a lasso begins. Structured: one JSON object
/// per line.
std::string format_counterexample(const Trace& trace, TraceStyle style);

/// The verdict as a JSON document (no timing data, so identical runs give
/// identical bytes).
std::string verdict_document(const Verdict& verdict, const std::string& mode);

} // namespace wfv::checker
