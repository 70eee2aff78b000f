#include "wfv/patterns.hpp"

#include <algorithm>

namespace wfv::patterns {

namespace {

PatternError unresolved(const std::string& name)
{
    return PatternError(PatternErrorCode::UnresolvedChannel, "unresolved channel '" + name + "'");
}

std::string join_args(const std::vector<std::string>& parts)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ",";
        out += parts[i];
    }
    return out;
}

bool all_same_constant(const std::vector<Expr>& msgs)
{
    if (msgs.empty() || msgs.front().kind != ExprKind::Const) return false;
    return std::all_of(msgs.begin(), msgs.end(),
                       [&](const Expr& m) { return m.kind == ExprKind::Const && m.value == msgs.front().value; });
}

void check_size(const ExpansionContext& ctx, int sizeq, const char* what)
{
    if (sizeq < 1)
        throw PatternError(PatternErrorCode::ArityMismatch, std::string(what) + ": sizeq must be at least 1");
    if (sizeq > ctx.max_array_size)
        throw PatternError(PatternErrorCode::ArityMismatch, std::string(what) + ": sizeq " + std::to_string(sizeq) +
                                                                " exceeds MAXARRAYSIZE " +
                                                                std::to_string(ctx.max_array_size));
}

} // namespace

void ChannelScope::require(const Expr& ref) const
{
    if (ref.kind != ExprKind::Var && ref.kind != ExprKind::Index) throw unresolved(to_string(ref));
    auto it = channels.find(ref.name);
    if (it == channels.end()) throw unresolved(ref.name);
    if (ref.kind == ExprKind::Var && it->second != 0)
        throw PatternError(PatternErrorCode::ArityMismatch, "'" + ref.name + "' is a channel array");
    if (ref.kind == ExprKind::Index) {
        if (it->second == 0) throw PatternError(PatternErrorCode::ArityMismatch, "'" + ref.name + "' is not an array");
        const auto& idx = ref.args[0];
        if (idx.kind == ExprKind::Const && (idx.value < 0 || idx.value >= it->second))
            throw unresolved(to_string(ref));
    }
}

void ChannelScope::require_array(const std::string& name, int sizeq) const
{
    auto it = channels.find(name);
    if (it == channels.end()) throw unresolved(name);
    if (it->second == 0) throw PatternError(PatternErrorCode::ArityMismatch, "'" + name + "' is not a channel array");
    if (sizeq > it->second)
        throw PatternError(PatternErrorCode::ArityMismatch, "sizeq " + std::to_string(sizeq) + " exceeds size of '" +
                                                                name + "' (" + std::to_string(it->second) + ")");
}

std::string LocalNamer::fresh(const std::string& base)
{
    std::string name = base;
    for (int k = 1; taken_.count(name); ++k) name = base + "_" + std::to_string(k);
    taken_.insert(name);
    return name;
}

void ProcessRegistry::add(int id, std::string template_name, int parent)
{
    if (entries_.count(id))
        throw PatternError(PatternErrorCode::InvalidRegistry, "duplicate process id " + std::to_string(id));
    entries_[id] = std::move(template_name);
    parents_[id] = parent;
}

int ProcessRegistry::parent(int id) const
{
    auto it = parents_.find(id);
    if (it == parents_.end())
        throw PatternError(PatternErrorCode::UnknownProcessId, "unknown process id " + std::to_string(id));
    return it->second;
}

std::vector<int> ProcessRegistry::children(int id) const
{
    std::vector<int> out;
    for (const auto& [child, parent] : parents_)
        if (parent == id) out.push_back(child);
    return out;
}

std::vector<std::int32_t> ProcessRegistry::pi_ids() const
{
    std::vector<std::int32_t> out(entries_.size(), 0);
    for (const auto& [id, parent] : parents_)
        if (id >= 0 && id < static_cast<int>(out.size())) out[static_cast<std::size_t>(id)] = parent;
    return out;
}

void ProcessRegistry::validate() const
{
    int expected = 0;
    for (const auto& [id, name] : entries_) {
        if (id != expected)
            throw PatternError(PatternErrorCode::InvalidRegistry, "process ids must be dense from 0; missing " +
                                                                      std::to_string(expected));
        ++expected;
    }
    int roots = 0;
    for (const auto& [id, parent] : parents_) {
        if (parent == -1) {
            ++roots;
            continue;
        }
        if (!entries_.count(parent))
            throw PatternError(PatternErrorCode::InvalidRegistry,
                               "process " + std::to_string(id) + " has unknown parent " + std::to_string(parent));
    }
    if (roots != 1)
        throw PatternError(PatternErrorCode::InvalidRegistry,
                           "expected exactly one root process, found " + std::to_string(roots));
    for (const auto& [id, parent] : parents_) {
        int cur = id;
        for (int steps = 0; cur != -1; ++steps) {
            if (steps > static_cast<int>(parents_.size()))
                throw PatternError(PatternErrorCode::InvalidRegistry, "parent cycle through " + std::to_string(id));
            cur = parents_.at(cur);
        }
    }
}

const char* to_string(PatternKind kind)
{
    switch (kind) {
    case PatternKind::SequenceSend: return "send";
    case PatternKind::SequenceRecv: return "recv";
    case PatternKind::ParallelSplit: return "parallel_split";
    case PatternKind::Synchronization: return "sync";
    case PatternKind::ExclusiveChoice: return "choice";
    case PatternKind::SimpleMerge: return "merge";
    case PatternKind::CancelCase: return "cancel_case";
    case PatternKind::MyRun: return "my_run";
    }
    return "?";
}

Sequence expand_sequence(const ExpansionContext& ctx, const Expr& q, const Expr& msg, Side side)
{
    if (ctx.scope) ctx.scope->require(q);
    if (side == Side::Sender) {
        auto s = stmt::inline_call("send", to_string(q) + "," + to_string(msg), {stmt::send(q, msg)});
        s.args = {q, msg};
        return {s};
    }
    Sequence out;
    Expr target = msg;
    if (target.kind != ExprKind::Var && target.kind != ExprKind::Index) {
        std::string x = ctx.namer ? ctx.namer->fresh("x") : "x";
        out.push_back(stmt::decl(x));
        target = var(x);
    }
    auto s = stmt::inline_call("recv", to_string(q) + "," + to_string(target), {stmt::recv(q, target)});
    s.args = {q, target};
    out.push_back(s);
    return out;
}

Sequence expand_parallel_split(const ExpansionContext& ctx, const std::string& qs, int sizeq,
                               const std::vector<Expr>& msgs)
{
    check_size(ctx, sizeq, "parallelSplit");
    if (static_cast<int>(msgs.size()) != sizeq)
        throw PatternError(PatternErrorCode::ArityMismatch, "parallelSplit: " + std::to_string(msgs.size()) +
                                                                " messages for sizeq " + std::to_string(sizeq));
    if (ctx.scope) ctx.scope->require_array(qs, sizeq);

    std::string n = ctx.namer ? ctx.namer->fresh("n") : "n";
    std::string msg = ctx.namer ? ctx.namer->fresh("splitMsgs") : "splitMsgs";

    Sequence body;
    Sequence atomic_body;
    if (all_same_constant(msgs)) {
        body.push_back(stmt::decl(msg, sizeq, false, msgs.front().value));
    } else {
        body.push_back(stmt::decl(msg, sizeq));
        for (int i = 0; i < sizeq; ++i) atomic_body.push_back(stmt::assign(at(msg, lit(i)), msgs[static_cast<std::size_t>(i)]));
    }
    body.push_back(stmt::decl(n));
    body.push_back(stmt::assign(var(n), lit(0)));
    atomic_body.push_back(stmt::do_({
        {stmt::guard(lt(var(n), lit(sizeq))), stmt::send(at(qs, var(n)), at(msg, var(n))),
         stmt::assign(var(n), var(n) + lit(1))},
        {stmt::guard(ge(var(n), lit(sizeq))), stmt::break_()},
    }));
    body.push_back(stmt::atomic(std::move(atomic_body)));

    std::vector<std::string> shown;
    if (all_same_constant(msgs)) {
        shown = {qs, std::to_string(sizeq), std::to_string(msgs.front().value)};
    } else {
        shown = {qs, std::to_string(sizeq), msg};
    }
    auto s = stmt::inline_call("parallelSplit", join_args(shown), std::move(body));
    s.args = msgs;
    return {s};
}

Sequence expand_synchronization(const ExpansionContext& ctx, const std::string& qs, int sizeq,
                                const std::string& msgs_array)
{
    check_size(ctx, sizeq, "synchronization");
    if (ctx.scope) ctx.scope->require_array(qs, sizeq);

    auto fresh = [&](const char* base) { return ctx.namer ? ctx.namer->fresh(base) : std::string(base); };
    std::string n = fresh("n");
    std::string count = fresh("count");
    std::string aux = fresh("aux");

    Sequence body;
    std::string msgs = msgs_array;
    if (msgs.empty()) {
        msgs = fresh("msgs");
        body.push_back(stmt::decl(msgs, sizeq));
    }
    body.push_back(stmt::decl(n));
    body.push_back(stmt::decl(count));
    body.push_back(stmt::assign(var(n), lit(0)));
    body.push_back(stmt::assign(var(count), lit(0)));
    body.push_back(stmt::decl(aux, ctx.max_array_size));
    body.push_back(stmt::do_({
        {stmt::guard(lt(var(n), lit(sizeq))), stmt::assign(at(aux, var(n)), lit(0)),
         stmt::assign(var(n), var(n) + lit(1))},
        {stmt::guard(eq(var(n), lit(sizeq))), stmt::assign(var(n), lit(0)), stmt::break_()},
    }));
    body.push_back(stmt::skip());
    body.push_back(stmt::label("S"));
    body.push_back(stmt::if_({
        {stmt::guard(eq(at(aux, var(n)), lit(0)) && gt(len(at(qs, var(n))), lit(0)) && lt(var(count), lit(sizeq))),
         stmt::assign(at(aux, var(n)), lit(1)), stmt::recv(at(qs, var(n)), at(msgs, var(n))),
         stmt::assign(var(count), var(count) + lit(1))},
        {stmt::guard(ge(var(count), lit(sizeq))), stmt::goto_("E")},
        {stmt::else_(), stmt::skip()},
    }));
    body.push_back(stmt::assign(var(n), var(n) + lit(1)));
    body.push_back(stmt::if_({
        {stmt::guard(eq(var(n), lit(sizeq))), stmt::assign(var(n), lit(0)), stmt::timeout()},
        {stmt::guard(lt(var(n), lit(sizeq))), stmt::skip()},
    }));
    body.push_back(stmt::goto_("S"));
    body.push_back(stmt::label("E"));
    body.push_back(stmt::skip());

    return {stmt::inline_call("synchronization", join_args({qs, std::to_string(sizeq), msgs}), std::move(body))};
}

Sequence expand_exclusive_choice(const ExpansionContext& ctx, const std::string& qs, int sizeq, const Expr& choice,
                                 const Expr& msg)
{
    if (ctx.scope) ctx.scope->require_array(qs, sizeq);
    Sequence body{stmt::if_({
        {stmt::guard(ge(choice, lit(0)) && lt(choice, lit(sizeq))), stmt::send(at(qs, choice), msg)},
        {stmt::else_(), stmt::skip()},
    })};
    auto s = stmt::inline_call("exclusiveChoice",
                               join_args({qs, std::to_string(sizeq), to_string(choice), to_string(msg)}),
                               std::move(body));
    s.args = {choice, msg};
    return {s};
}

Sequence expand_simple_merge(const ExpansionContext& ctx, const std::string& qs, int sizeq,
                             const std::optional<Expr>& target)
{
    if (sizeq < 1) throw PatternError(PatternErrorCode::ArityMismatch, "simpleMerge: sizeq must be at least 1");
    if (ctx.scope) ctx.scope->require_array(qs, sizeq);
    Sequence body;
    Expr into;
    if (target) {
        into = *target;
    } else {
        std::string m = ctx.namer ? ctx.namer->fresh("mergeMsg") : "mergeMsg";
        body.push_back(stmt::decl(m));
        into = var(m);
    }
    std::vector<Sequence> options;
    for (int i = 0; i < sizeq; ++i) options.push_back({stmt::recv(at(qs, lit(i)), into), stmt::break_()});
    body.push_back(stmt::do_(std::move(options)));
    auto s = stmt::inline_call("simpleMerge", join_args({qs, std::to_string(sizeq), to_string(into)}), std::move(body));
    s.args = {into};
    return {s};
}

Sequence wrap_cancel_activity(const ExpansionContext& ctx, Sequence body, const Expr& q_cancel)
{
    if (ctx.scope) ctx.scope->require(q_cancel);
    return {stmt::unless(std::move(body), {stmt::guard(gt(len(q_cancel), lit(0))), stmt::skip()})};
}

Sequence expand_cancel_case(const ExpansionContext& ctx, const std::string& qs_cancel, int sizeq, int id)
{
    if (!ctx.registry || !ctx.registry->contains(id))
        throw PatternError(PatternErrorCode::UnknownProcessId, "cancelCase: unknown process id " + std::to_string(id));
    check_size(ctx, sizeq, "cancelCase");
    if (ctx.scope) ctx.scope->require_array(qs_cancel, sizeq);

    std::string i = ctx.namer ? ctx.namer->fresh("i") : "i";
    std::string msgs = ctx.namer ? ctx.namer->fresh("cancelMsgs") : "cancelMsgs";
    Sequence body;
    body.push_back(stmt::decl(msgs, sizeq, false, 1));
    body.push_back(stmt::decl(i));
    body.push_back(stmt::do_({
        {stmt::guard(lt(var(i), lit(sizeq)) && eq(at(ctx.pi_ids, var(i)), lit(id))),
         stmt::send(at(qs_cancel, var(i)), at(msgs, var(i))), stmt::assign(var(i), var(i) + lit(1))},
        {stmt::guard(eq(var(i), lit(sizeq))), stmt::break_()},
        {stmt::else_(), stmt::assign(var(i), var(i) + lit(1))},
    }));
    auto s = stmt::inline_call(
        "cancelCase", join_args({qs_cancel, std::to_string(sizeq), ctx.pi_ids, "msgs", std::to_string(id)}),
        std::move(body));
    s.args = {lit(id)};
    return {s};
}

ProcessTemplate build_my_run(const ProcessRegistry& registry, bool strict_spin)
{
    if (registry.size() == 0) throw PatternError(PatternErrorCode::InvalidRegistry, "myRun: empty registry");
    ProcessTemplate t;
    t.name = "myRun";
    t.params = {"id", "n"};
    std::vector<Sequence> options;
    for (const auto& [id, name] : registry.entries()) {
        if (name.empty()) continue;
        options.push_back({stmt::guard(eq(var("id"), lit(id))), stmt::run(name)});
    }
    if (!strict_spin) options.push_back({stmt::else_(), stmt::fail("myRun: unknown process id")});
    if (options.empty()) options.push_back({stmt::fail("myRun: no runnable process")});
    t.body.push_back(stmt::if_(std::move(options)));
    return t;
}

Sequence expand(const ExpansionContext& ctx, const PatternInvocation& inv)
{
    switch (inv.kind) {
    case PatternKind::SequenceSend:
        if (inv.messages.size() != 1) throw PatternError(PatternErrorCode::ArityMismatch, "send takes one message");
        return expand_sequence(ctx, inv.channel, inv.messages[0], Side::Sender);
    case PatternKind::SequenceRecv:
        return expand_sequence(ctx, inv.channel, inv.target.value_or(lit(0)), Side::Receiver);
    case PatternKind::ParallelSplit: {
        auto msgs = inv.messages;
        // a single message stands for sizeq copies of itself
        if (msgs.size() == 1 && inv.size > 1) msgs.assign(static_cast<std::size_t>(inv.size), inv.messages[0]);
        return expand_parallel_split(ctx, inv.channel_array, inv.size, msgs);
    }
    case PatternKind::Synchronization:
        return expand_synchronization(ctx, inv.channel_array, inv.size, inv.target_array);
    case PatternKind::ExclusiveChoice:
        if (!inv.choice || inv.messages.size() != 1)
            throw PatternError(PatternErrorCode::ArityMismatch, "choice needs a choice expression and one message");
        return expand_exclusive_choice(ctx, inv.channel_array, inv.size, *inv.choice, inv.messages[0]);
    case PatternKind::SimpleMerge:
        return expand_simple_merge(ctx, inv.channel_array, inv.size, inv.target);
    case PatternKind::CancelCase:
        if (!inv.id) throw PatternError(PatternErrorCode::ArityMismatch, "cancel_case needs a process id");
        return expand_cancel_case(ctx, inv.channel_array, inv.size, *inv.id);
    case PatternKind::MyRun: {
        if (!inv.id) throw PatternError(PatternErrorCode::ArityMismatch, "my_run needs a process id");
        if (ctx.registry && !ctx.registry->contains(*inv.id))
            throw PatternError(PatternErrorCode::UnknownProcessId, "my_run: unknown process id " + std::to_string(*inv.id));
        return {stmt::run("myRun", {lit(*inv.id), lit(-1)})};
    }
    }
    return {};
}

} // namespace wfv::patterns
