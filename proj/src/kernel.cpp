#include "wfv/error.hpp"
#include "wfv/kernel.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace wfv {

namespace {

struct Move {
    Transition t;
    bool timeout = false;
};

const TemplateCode& code_of(const Program& program, const SystemState& state, int pid)
{
    return program.code(state.processes[static_cast<std::size_t>(pid)].tmpl);
}

std::int32_t& slot_ref(SystemState& state, int pid, const VarSlot& slot, int index)
{
    if (slot.scope == VarSlot::Scope::Global) return state.globals[static_cast<std::size_t>(slot.offset + index)];
    if (slot.scope == VarSlot::Scope::Local)
        return state.processes[static_cast<std::size_t>(pid)].locals[static_cast<std::size_t>(slot.offset + index)];
    throw ModelError("unresolved variable");
}

std::int32_t slot_value(const SystemState& state, int pid, const VarSlot& slot, int index)
{
    if (slot.scope == VarSlot::Scope::Global) return state.globals[static_cast<std::size_t>(slot.offset + index)];
    if (slot.scope == VarSlot::Scope::Local) {
        const auto& locals = state.processes[static_cast<std::size_t>(pid)].locals;
        if (static_cast<std::size_t>(slot.offset + index) >= locals.size())
            throw ModelError("local variable of a terminated process");
        return locals[static_cast<std::size_t>(slot.offset + index)];
    }
    throw ModelError("unresolved variable");
}

int checked_index(const Program& program, const SystemState& state, int pid, const Expr& e)
{
    auto idx = eval_expr(program, state, pid, e.args[0]);
    if (idx < 0 || idx >= e.slot.size)
        throw ModelError("index " + std::to_string(idx) + " out of bounds for " + e.name + "[" +
                         std::to_string(e.slot.size) + "]");
    return idx;
}

int channel_index(const Program& program, const SystemState& state, int pid, const Expr& chan)
{
    auto h = eval_expr(program, state, pid, chan);
    if (h < 1 || h > static_cast<std::int32_t>(program.channels().size()))
        throw ModelError("'" + to_string(chan) + "' does not hold a channel");
    return h - 1;
}

void store(const Program& program, SystemState& state, int pid, const Expr& target, std::int32_t v)
{
    if (target.kind == ExprKind::Var) {
        slot_ref(state, pid, target.slot, 0) = v;
    } else if (target.kind == ExprKind::Index) {
        int idx = checked_index(program, state, pid, target);
        slot_ref(state, pid, target.slot, idx) = v;
    } else {
        throw ModelError("'" + to_string(target) + "' is not assignable");
    }
}

// Enabled moves of `pid` along the edges of `loc` (ignoring escapes).
void location_moves(const Program& program, const SystemState& state, int pid, int loc, std::vector<Move>& out)
{
    const auto& code = code_of(program, state, pid);
    const auto& l = code.locations[static_cast<std::size_t>(loc)];
    bool any = false;
    for (std::size_t i = 0; i < l.edges.size(); ++i) {
        const auto& e = l.edges[i];
        if (e.is_else) continue;
        Move m;
        m.t.pid = pid;
        m.t.loc = loc;
        m.t.edge = static_cast<int>(i);
        switch (e.kind) {
        case ActionKind::Timeout:
            m.timeout = true;
            out.push_back(m);
            continue;
        case ActionKind::Guard:
            if (eval_expr(program, state, pid, e.value) == 0) continue;
            break;
        case ActionKind::Send: {
            int c = channel_index(program, state, pid, e.chan);
            int cap = program.channels()[static_cast<std::size_t>(c)].capacity;
            if (cap > 0) {
                if (static_cast<int>(state.channels[static_cast<std::size_t>(c)].size()) >= cap) continue;
                break;
            }
            // Rendezvous: pair with every receiver currently waiting on the channel.
            for (std::size_t q = 0; q < state.processes.size(); ++q) {
                if (static_cast<int>(q) == pid || state.processes[q].done) continue;
                const auto& qcode = program.code(state.processes[q].tmpl);
                int qloc = state.processes[q].pc;
                const auto& qedges = qcode.locations[static_cast<std::size_t>(qloc)].edges;
                for (std::size_t j = 0; j < qedges.size(); ++j) {
                    if (qedges[j].kind != ActionKind::Recv) continue;
                    if (channel_index(program, state, static_cast<int>(q), qedges[j].chan) != c) continue;
                    Move r = m;
                    r.t.partner_pid = static_cast<int>(q);
                    r.t.partner_loc = qloc;
                    r.t.partner_edge = static_cast<int>(j);
                    out.push_back(r);
                    any = true;
                }
            }
            continue;
        }
        case ActionKind::Recv: {
            int c = channel_index(program, state, pid, e.chan);
            if (program.channels()[static_cast<std::size_t>(c)].capacity == 0) continue;
            if (state.channels[static_cast<std::size_t>(c)].empty()) continue;
            break;
        }
        default:
            break;
        }
        out.push_back(m);
        any = true;
    }
    if (any) return;
    for (std::size_t i = 0; i < l.edges.size(); ++i) {
        if (!l.edges[i].is_else) continue;
        Move m;
        m.t.pid = pid;
        m.t.loc = loc;
        m.t.edge = static_cast<int>(i);
        out.push_back(m);
    }
}

std::vector<Move> process_moves(const Program& program, const SystemState& state, int pid)
{
    std::vector<Move> out;
    const auto& p = state.processes[static_cast<std::size_t>(pid)];
    if (p.done) return out;
    const auto& code = program.code(p.tmpl);
    const auto& l = code.locations[static_cast<std::size_t>(p.pc)];
    bool suppressed = state.atomic_holder == pid;
    if (!suppressed) {
        for (int esc : l.escapes) {
            location_moves(program, state, pid, esc, out);
            bool fires = std::any_of(out.begin(), out.end(), [](const Move& m) { return !m.timeout; });
            if (fires) {
                out.erase(std::remove_if(out.begin(), out.end(), [](const Move& m) { return m.timeout; }), out.end());
                return out;
            }
            out.clear();
        }
    }
    location_moves(program, state, pid, p.pc, out);
    return out;
}

void finish_if_ended(const Program& program, SystemState& state, int pid)
{
    auto& p = state.processes[static_cast<std::size_t>(pid)];
    if (p.pc == program.code(p.tmpl).end) {
        p.done = true;
        p.locals.clear();
    }
}

// Executes one edge of `pid` and advances its pc. Rendezvous sends deliver
// directly into the partner, which is advanced as well.
const Edge& execute(const Program& program, SystemState& state, const Transition& t)
{
    const int pid = t.pid;
    const auto& code = code_of(program, state, pid);
    const auto& e = code.locations[static_cast<std::size_t>(t.loc)].edges[static_cast<std::size_t>(t.edge)];
    switch (e.kind) {
    case ActionKind::Assign:
        store(program, state, pid, e.target, eval_expr(program, state, pid, e.value));
        break;
    case ActionKind::Send: {
        int c = channel_index(program, state, pid, e.chan);
        auto v = eval_expr(program, state, pid, e.value);
        if (t.partner_pid >= 0) {
            const auto& pcode = code_of(program, state, t.partner_pid);
            const auto& pe =
                pcode.locations[static_cast<std::size_t>(t.partner_loc)].edges[static_cast<std::size_t>(t.partner_edge)];
            if (pe.has_target) store(program, state, t.partner_pid, pe.target, v);
            state.processes[static_cast<std::size_t>(t.partner_pid)].pc = pe.to;
            finish_if_ended(program, state, t.partner_pid);
        } else {
            auto& buf = state.channels[static_cast<std::size_t>(c)];
            if (static_cast<int>(buf.size()) >= program.channels()[static_cast<std::size_t>(c)].capacity)
                throw ModelError("send on full channel " + program.channels()[static_cast<std::size_t>(c)].name);
            buf.push_back(v);
        }
        break;
    }
    case ActionKind::Recv: {
        int c = channel_index(program, state, pid, e.chan);
        auto& buf = state.channels[static_cast<std::size_t>(c)];
        if (buf.empty()) throw ModelError("receive on empty channel " + program.channels()[static_cast<std::size_t>(c)].name);
        auto v = buf.front();
        buf.erase(buf.begin());
        if (e.has_target) store(program, state, pid, e.target, v);
        break;
    }
    case ActionKind::Run: {
        if (live_process_count(state) >= kMaxLiveProcesses)
            throw ModelError("too many processes (limit " + std::to_string(kMaxLiveProcesses) + ")");
        const auto& child = program.code(e.run_template);
        if (static_cast<int>(e.args.size()) != child.param_count)
            throw ModelError("run " + child.name + ": expected " + std::to_string(child.param_count) + " arguments");
        std::vector<std::int32_t> args;
        for (const auto& a : e.args) args.push_back(eval_expr(program, state, pid, a));
        ProcessInstance inst;
        inst.tmpl = e.run_template;
        inst.pc = child.entry;
        inst.locals.assign(static_cast<std::size_t>(child.local_words), 0);
        for (const auto& l : child.locals)
            for (int i = 0; i < l.size; ++i) inst.locals[static_cast<std::size_t>(l.offset + i)] = l.init;
        for (std::size_t i = 0; i < args.size(); ++i)
            inst.locals[static_cast<std::size_t>(child.locals[i].offset)] = args[i];
        state.processes.push_back(std::move(inst));
        finish_if_ended(program, state, static_cast<int>(state.processes.size()) - 1);
        break;
    }
    case ActionKind::Fail:
        throw ModelError(code.name + ": " + e.text);
    case ActionKind::Skip:
    case ActionKind::Guard:
    case ActionKind::Timeout:
        break;
    }
    state.processes[static_cast<std::size_t>(pid)].pc = e.to;
    finish_if_ended(program, state, pid);
    return e;
}

} // namespace

int live_process_count(const SystemState& state)
{
    return static_cast<int>(std::count_if(state.processes.begin(), state.processes.end(),
                                          [](const ProcessInstance& p) { return !p.done; }));
}

SystemState initial_state(const Program& program)
{
    SystemState s;
    s.globals = program.global_init();
    s.channels.assign(program.channels().size(), {});
    auto spawn = [&](int tmpl) {
        const auto& code = program.code(tmpl);
        ProcessInstance p;
        p.tmpl = tmpl;
        p.pc = code.entry;
        p.locals.assign(static_cast<std::size_t>(code.local_words), 0);
        for (const auto& l : code.locals)
            for (int i = 0; i < l.size; ++i) p.locals[static_cast<std::size_t>(l.offset + i)] = l.init;
        s.processes.push_back(std::move(p));
        finish_if_ended(program, s, static_cast<int>(s.processes.size()) - 1);
    };
    const auto& templates = program.model().templates;
    for (std::size_t i = 0; i < templates.size(); ++i)
        if (templates[i].active) spawn(static_cast<int>(i));
    if (program.init_template() >= 0) spawn(program.init_template());
    return s;
}

std::int32_t eval_expr(const Program& program, const SystemState& state, int pid, const Expr& e)
{
    switch (e.kind) {
    case ExprKind::Const:
        return e.value;
    case ExprKind::Var:
        return slot_value(state, pid, e.slot, 0);
    case ExprKind::Index:
        return slot_value(state, pid, e.slot, checked_index(program, state, pid, e));
    case ExprKind::Len: {
        int c = channel_index(program, state, pid, e.args[0]);
        return static_cast<std::int32_t>(state.channels[static_cast<std::size_t>(c)].size());
    }
    case ExprKind::Unary: {
        auto v = eval_expr(program, state, pid, e.args[0]);
        return e.op == Op::Not ? (v == 0 ? 1 : 0) : static_cast<std::int32_t>(-static_cast<std::int64_t>(v));
    }
    case ExprKind::Binary: {
        if (e.op == Op::And)
            return eval_expr(program, state, pid, e.args[0]) != 0 && eval_expr(program, state, pid, e.args[1]) != 0;
        if (e.op == Op::Or)
            return eval_expr(program, state, pid, e.args[0]) != 0 || eval_expr(program, state, pid, e.args[1]) != 0;
        std::int64_t a = eval_expr(program, state, pid, e.args[0]);
        std::int64_t b = eval_expr(program, state, pid, e.args[1]);
        switch (e.op) {
        case Op::Add: return static_cast<std::int32_t>(a + b);
        case Op::Sub: return static_cast<std::int32_t>(a - b);
        case Op::Mul: return static_cast<std::int32_t>(a * b);
        case Op::Div:
            if (b == 0) throw ModelError("division by zero in " + to_string(e));
            return static_cast<std::int32_t>(a / b);
        case Op::Mod:
            if (b == 0) throw ModelError("modulo by zero in " + to_string(e));
            return static_cast<std::int32_t>(a % b);
        case Op::Eq: return a == b;
        case Op::Ne: return a != b;
        case Op::Lt: return a < b;
        case Op::Le: return a <= b;
        case Op::Gt: return a > b;
        case Op::Ge: return a >= b;
        default: break;
        }
        break;
    }
    }
    throw ModelError("malformed expression");
}

std::vector<Transition> enabled_transitions(const Program& program, const SystemState& state)
{
    std::vector<Transition> result;
    const int n = static_cast<int>(state.processes.size());
    if (state.atomic_holder >= 0 && state.atomic_holder < n) {
        for (const auto& m : process_moves(program, state, state.atomic_holder))
            if (!m.timeout) result.push_back(m.t);
        if (!result.empty()) return result;
    }
    std::vector<Transition> timeouts;
    for (int pid = 0; pid < n; ++pid) {
        for (const auto& m : process_moves(program, state, pid)) {
            if (m.timeout)
                timeouts.push_back(m.t);
            else
                result.push_back(m.t);
        }
    }
    return result.empty() ? timeouts : result;
}

SystemState apply_transition(const Program& program, const SystemState& state, const Transition& t, bool validate)
{
    if (validate) {
        auto enabled = enabled_transitions(program, state);
        if (std::find(enabled.begin(), enabled.end(), t) == enabled.end())
            throw IllegalTransition("transition of pid " + std::to_string(t.pid) + " is not enabled");
    }
    SystemState next = state;
    const Edge* last = &execute(program, next, t);
    int pid = t.pid;
    // d_step: run the rest of the region as part of this transition
    while (true) {
        auto& p = next.processes[static_cast<std::size_t>(pid)];
        if (p.done) break;
        const auto& code = program.code(p.tmpl);
        if (!code.locations[static_cast<std::size_t>(p.pc)].dstep_interior && !last->keeps_dstep) break;
        std::vector<Move> moves;
        location_moves(program, next, pid, p.pc, moves);
        moves.erase(std::remove_if(moves.begin(), moves.end(), [](const Move& m) { return m.timeout; }), moves.end());
        if (moves.empty()) throw ModelError("d_step blocked in " + code.name);
        if (moves.size() > 1) throw ModelError("nondeterministic choice inside d_step in " + code.name);
        last = &execute(program, next, moves.front().t);
    }
    const auto& p = next.processes[static_cast<std::size_t>(pid)];
    bool interior =
        !p.done && (program.code(p.tmpl).locations[static_cast<std::size_t>(p.pc)].atomic_interior || last->keeps_atomic);
    next.atomic_holder = interior ? pid : -1;
    return next;
}

bool is_valid_end_state(const Program& program, const SystemState& state)
{
    for (const auto& p : state.processes) {
        if (p.done) continue;
        if (!program.code(p.tmpl).locations[static_cast<std::size_t>(p.pc)].end_label) return false;
    }
    return true;
}

namespace {

void put(std::string& out, std::int32_t v)
{
    auto u = static_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

} // namespace

std::string SystemState::encode() const
{
    std::string out;
    out.reserve(64 + 4 * globals.size());
    put(out, static_cast<std::int32_t>(globals.size()));
    for (auto v : globals) put(out, v);
    put(out, static_cast<std::int32_t>(channels.size()));
    for (const auto& c : channels) {
        put(out, static_cast<std::int32_t>(c.size()));
        for (auto v : c) put(out, v);
    }
    put(out, static_cast<std::int32_t>(processes.size()));
    for (const auto& p : processes) {
        put(out, p.tmpl);
        put(out, p.pc);
        put(out, p.done ? 1 : 0);
        put(out, static_cast<std::int32_t>(p.locals.size()));
        for (auto v : p.locals) put(out, v);
    }
    put(out, atomic_holder);
    return out;
}

Digest canonical_state_digest(const SystemState& state)
{
    const std::string bytes = state.encode();
    // FNV-1a for one half, a multiply-xorshift mix for the other.
    std::uint64_t a = 0xcbf29ce484222325ULL;
    std::uint64_t b = 0x9ae16a3b2f90404fULL;
    for (unsigned char c : bytes) {
        a ^= c;
        a *= 0x100000001b3ULL;
        b = (b ^ c) * 0xff51afd7ed558ccdULL;
        b ^= b >> 29;
    }
    b ^= bytes.size();
    b *= 0xc4ceb9fe1a85ec53ULL;
    b ^= b >> 32;
    return {a, b};
}

std::string Digest::hex() const
{
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(hi),
                  static_cast<unsigned long long>(lo));
    return buf;
}

const Edge& edge_of(const Program& program, const SystemState& state, const Transition& t)
{
    const auto& code = code_of(program, state, t.pid);
    return code.locations.at(static_cast<std::size_t>(t.loc)).edges.at(static_cast<std::size_t>(t.edge));
}

bool is_timeout(const Program& program, const SystemState& state, const Transition& t)
{
    return edge_of(program, state, t).kind == ActionKind::Timeout;
}

std::string describe_state(const Program& program, const SystemState& state)
{
    std::ostringstream os;
    bool first = true;
    for (const auto& g : program.globals()) {
        if (g.is_channel) continue;
        os << (first ? "" : " ") << g.name << "=";
        first = false;
        if (g.is_array) {
            os << "[";
            for (int i = 0; i < g.size; ++i) os << (i ? "," : "") << state.globals[static_cast<std::size_t>(g.offset + i)];
            os << "]";
        } else {
            os << state.globals[static_cast<std::size_t>(g.offset)];
        }
    }
    for (std::size_t c = 0; c < state.channels.size(); ++c) {
        if (state.channels[c].empty()) continue;
        os << (first ? "" : " ") << program.channels()[c].name << "=[";
        first = false;
        for (std::size_t i = 0; i < state.channels[c].size(); ++i) os << (i ? "," : "") << state.channels[c][i];
        os << "]";
    }
    for (std::size_t pid = 0; pid < state.processes.size(); ++pid) {
        const auto& p = state.processes[pid];
        os << (first ? "" : " ") << pid << ":" << program.code(p.tmpl).name;
        first = false;
        if (p.done)
            os << "(done)";
        else
            os << "@" << p.pc;
    }
    return os.str();
}

} // namespace wfv
