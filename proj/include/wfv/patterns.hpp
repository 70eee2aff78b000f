#pragma once

#include "wfv/model.hpp"

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace wfv::patterns {

enum class PatternErrorCode { UnresolvedChannel, ArityMismatch, UnknownProcessId, InvalidRegistry };

class PatternError : public std::runtime_error {
public:
    PatternError(PatternErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    PatternErrorCode code() const { return code_; }

private:
    PatternErrorCode code_;
};

/// Channel names visible to an expansion: global channels plus channel-handle
/// arrays declared by the enclosing process. Value is the array size (0 = scalar).
struct ChannelScope {
    std::map<std::string, int> channels;

    void require(const Expr& ref) const;
    void require_array(const std::string& name, int sizeq) const;
};

/// Hands out process-local names that do not clash with names already used
/// by the enclosing template.
class LocalNamer {
public:
    LocalNamer() = default;
    explicit LocalNamer(std::set<std::string> taken) : taken_(std::move(taken)) {}

    std::string fresh(const std::string& base);
    void reserve(const std::string& name) { taken_.insert(name); }

private:
    std::set<std::string> taken_;
};

/// Process identifiers and the parent relation used by cancellation. The
/// root (parent -1) may be the case itself and have no template.
class ProcessRegistry {
public:
    void add(int id, std::string template_name, int parent);

    bool contains(int id) const { return entries_.count(id) != 0; }
    const std::map<int, std::string>& entries() const { return entries_; }
    const std::map<int, int>& parents() const { return parents_; }
    int parent(int id) const;
    std::vector<int> children(int id) const;
    int size() const { return static_cast<int>(entries_.size()); }

    /// Dense `piIds` image: element x is the parent of process x.
    std::vector<std::int32_t> pi_ids() const;

    /// Throws PatternError(InvalidRegistry) unless ids are dense from 0,
    /// exactly one root exists and the parent relation is acyclic.
    void validate() const;

private:
    std::map<int, std::string> entries_;
    std::map<int, int> parents_;
};

enum class Side { Sender, Receiver };

enum class PatternKind {
    SequenceSend,
    SequenceRecv,
    ParallelSplit,
    Synchronization,
    ExclusiveChoice,
    SimpleMerge,
    CancelCase,
    MyRun,
};

const char* to_string(PatternKind kind);

/// A workflow-level construct. `channel` names the channel (sequence) or the
/// channel array (everything else); `size` is sizeq.
struct PatternInvocation {
    PatternKind kind = PatternKind::SequenceSend;
    Expr channel;
    std::string channel_array;
    int size = 0;
    std::vector<Expr> messages;
    std::optional<Expr> choice;
    std::optional<Expr> target;
    std::optional<int> id;
    std::string target_array; // synchronization: where received messages land

    bool operator==(const PatternInvocation&) const = default;
};

struct ExpansionContext {
    const ChannelScope* scope = nullptr;
    LocalNamer* namer = nullptr;
    const ProcessRegistry* registry = nullptr;
    int max_array_size = kDefaultMaxArraySize;
    std::string cancel_array = "qsCancel";
    std::string pi_ids = "piIds";
};

Sequence expand_sequence(const ExpansionContext& ctx, const Expr& q, const Expr& msg, Side side);
Sequence expand_parallel_split(const ExpansionContext& ctx, const std::string& qs, int sizeq,
                               const std::vector<Expr>& msgs);
Sequence expand_synchronization(const ExpansionContext& ctx, const std::string& qs, int sizeq,
                                const std::string& msgs_array = {});
Sequence expand_exclusive_choice(const ExpansionContext& ctx, const std::string& qs, int sizeq, const Expr& choice,
                                 const Expr& msg);
Sequence expand_simple_merge(const ExpansionContext& ctx, const std::string& qs, int sizeq,
                             const std::optional<Expr>& target = std::nullopt);
Sequence wrap_cancel_activity(const ExpansionContext& ctx, Sequence body, const Expr& q_cancel);
Sequence expand_cancel_case(const ExpansionContext& ctx, const std::string& qs_cancel, int sizeq, int id);

/// The `myRun(id, n)` dispatcher. An unregistered id is a model error unless
/// `strict_spin`, where the dispatcher simply blocks as an else-less `if` does.
ProcessTemplate build_my_run(const ProcessRegistry& registry, bool strict_spin = false);

/// Dispatches on invocation.kind.
Sequence expand(const ExpansionContext& ctx, const PatternInvocation& invocation);

} // namespace wfv::patterns
