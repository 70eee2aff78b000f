#include "wfv/checker.hpp"

#include "json.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>

namespace wfv::checker {

const char* to_string(Outcome outcome)
{
    switch (outcome) {
    case Outcome::Holds: return "HOLDS";
    case Outcome::Violated: return "VIOLATED";
    case Outcome::Deadlock: return "DEADLOCK";
    case Outcome::ModelError: return "MODEL_ERROR";
    case Outcome::Incomplete: return "INCOMPLETE";
    }
    return "?";
}

// ---------------------------------------------------------------- deltas

namespace {

std::string element_name(const std::string& name, bool is_array, int k)
{
    return is_array ? name + "[" + std::to_string(k) + "]" : name;
}

} // namespace

Delta compute_delta(const Program& program, const SystemState& before, const SystemState& after, const Transition& t)
{
    Delta d;
    const auto& e = edge_of(program, before, t);
    if (e.kind == ActionKind::Send && t.partner_pid >= 0) {
        auto h = eval_expr(program, before, t.pid, e.chan);
        auto v = eval_expr(program, before, t.pid, e.value);
        const auto& name = program.channels().at(static_cast<std::size_t>(h - 1)).name;
        d.sends.emplace_back(name, v);
        d.recvs.emplace_back(name, v);
    }
    for (std::size_t c = 0; c < before.channels.size(); ++c) {
        const auto& b = before.channels[c];
        const auto& a = after.channels[c];
        const auto& name = program.channels()[c].name;
        if (a.size() > b.size()) d.sends.emplace_back(name, a.back());
        if (a.size() < b.size()) d.recvs.emplace_back(name, b.front());
    }
    for (const auto& g : program.globals())
        for (int k = 0; k < g.size; ++k) {
            auto i = static_cast<std::size_t>(g.offset + k);
            if (before.globals[i] != after.globals[i])
                d.assigns.emplace_back(element_name(g.name, g.is_array, k), after.globals[i]);
        }
    for (std::size_t pid = 0; pid < before.processes.size() && pid < after.processes.size(); ++pid) {
        const auto& pb = before.processes[pid];
        const auto& pa = after.processes[pid];
        if (pb.locals == pa.locals) continue;
        for (const auto& l : program.code(pb.tmpl).locals)
            for (int k = 0; k < l.size; ++k) {
                auto i = static_cast<std::size_t>(l.offset + k);
                if (i < pb.locals.size() && i < pa.locals.size() && pb.locals[i] != pa.locals[i])
                    d.assigns.emplace_back(std::to_string(pid) + ":" + element_name(l.name, l.is_array, k),
                                           pa.locals[i]);
            }
    }
    return d;
}

namespace {

TraceStep make_step(const Program& program, const SystemState& before, const SystemState& after, const Transition& t)
{
    TraceStep s;
    s.pid = t.pid;
    const auto& code = program.code(before.processes.at(static_cast<std::size_t>(t.pid)).tmpl);
    s.template_name = code.name;
    s.label = code.locations.at(static_cast<std::size_t>(t.loc)).label;
    s.statement = edge_of(program, before, t).text;
    s.move = t;
    s.delta = compute_delta(program, before, after, t);
    s.after = canonical_state_digest(after);
    return s;
}

// Builds a trace from the initial state along `moves`.
Trace build_trace(const Program& program, const std::vector<Transition>& moves)
{
    Trace tr;
    SystemState s = initial_state(program);
    tr.initial = canonical_state_digest(s);
    for (const auto& t : moves) {
        SystemState next = apply_transition(program, s, t, false);
        tr.steps.push_back(make_step(program, s, next, t));
        s = std::move(next);
    }
    return tr;
}

} // namespace

SystemState replay(const Program& program, const Trace& trace)
{
    SystemState s = initial_state(program);
    for (const auto& step : trace.steps) s = apply_transition(program, s, step.move, true);
    return s;
}

bool validate_trace(const Program& program, const Trace& trace, std::string* why)
{
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    try {
        SystemState s = initial_state(program);
        if (canonical_state_digest(s) != trace.initial) return fail("initial digest differs");
        std::vector<Digest> seen{trace.initial};
        for (std::size_t i = 0; i < trace.steps.size(); ++i) {
            const auto& step = trace.steps[i];
            auto enabled = enabled_transitions(program, s);
            if (std::find(enabled.begin(), enabled.end(), step.move) == enabled.end())
                return fail("step " + std::to_string(i) + " is not enabled");
            SystemState next = apply_transition(program, s, step.move, true);
            if (compute_delta(program, s, next, step.move) != step.delta)
                return fail("step " + std::to_string(i) + " delta differs");
            if (canonical_state_digest(next) != step.after) return fail("step " + std::to_string(i) + " digest differs");
            s = std::move(next);
            seen.push_back(step.after);
        }
        if (trace.lasso_start) {
            if (*trace.lasso_start > trace.steps.size()) return fail("lasso start beyond the trace");
            if (seen[*trace.lasso_start] != seen.back()) return fail("lasso does not close");
            if (*trace.lasso_start == trace.steps.size() && !enabled_transitions(program, s).empty())
                return fail("stutter loop on a state that can still move");
        }
    } catch (const std::exception& e) {
        return fail(e.what());
    }
    return true;
}

// ---------------------------------------------------------------- state store

namespace {

struct LimitReached {
    std::string what;
};

struct Succ {
    Transition t;
    std::uint32_t to;
};

// Distinct model states with lazily computed successor lists.
class StateSpace {
public:
    StateSpace(const Program& program, const Limits& limits) : program_(program), limits_(limits) {}

    std::pair<std::uint32_t, bool> intern(SystemState s)
    {
        auto key = s.encode();
        auto it = index_.find(key);
        if (it != index_.end()) return {it->second, false};
        if (states_.size() >= limits_.max_states)
            throw LimitReached{"state limit of " + std::to_string(limits_.max_states) + " reached"};
        auto id = static_cast<std::uint32_t>(states_.size());
        index_.emplace(std::move(key), id);
        states_.push_back(std::move(s));
        succ_.emplace_back();
        expanded_.push_back(0);
        parent_.push_back({UINT32_MAX, {}});
        return {id, true};
    }

    std::uint32_t initial()
    {
        if (states_.empty()) intern(initial_state(program_));
        return 0;
    }

    const SystemState& state(std::uint32_t id) const { return states_[id]; }
    std::size_t size() const { return states_.size(); }

    // May throw ModelError; `from` is then the offending state.
    const std::vector<Succ>& successors(std::uint32_t id)
    {
        if (!expanded_[id]) {
            std::vector<Succ> out;
            SystemState s = states_[id];
            for (const auto& t : enabled_transitions(program_, s)) {
                auto [to, fresh] = intern(apply_transition(program_, s, t, false));
                if (fresh) parent_[to] = {id, t};
                out.push_back({t, to});
            }
            succ_[id] = std::move(out);
            expanded_[id] = 1;
        }
        return succ_[id];
    }

    // Moves from the initial state along discovery edges.
    std::vector<Transition> path_to(std::uint32_t id) const
    {
        std::vector<Transition> moves;
        while (parent_[id].first != UINT32_MAX) {
            moves.push_back(parent_[id].second);
            id = parent_[id].first;
        }
        std::reverse(moves.begin(), moves.end());
        return moves;
    }

private:
    const Program& program_;
    Limits limits_;
    std::unordered_map<std::string, std::uint32_t> index_;
    std::vector<SystemState> states_;
    std::vector<std::vector<Succ>> succ_;
    std::vector<char> expanded_;
    std::vector<std::pair<std::uint32_t, Transition>> parent_;
};

bool timeout_only(const Program& program, const SystemState& s, const std::vector<Succ>& succ)
{
    if (succ.empty()) return false;
    return std::all_of(succ.begin(), succ.end(), [&](const Succ& x) { return is_timeout(program, s, x.t); });
}

// Iterative Tarjan over an explicit graph; calls `emit` with each SCC.
template <typename Next>
void tarjan(std::size_t n, const std::vector<std::uint32_t>& roots, Next&& next_of,
            const std::function<void(const std::vector<std::uint32_t>&)>& emit)
{
    std::vector<std::uint32_t> index(n, UINT32_MAX), low(n, 0);
    std::vector<char> on_stack(n, 0);
    std::vector<std::uint32_t> stack;
    std::vector<std::pair<std::uint32_t, std::size_t>> call;
    std::uint32_t counter = 0;
    for (auto root : roots) {
        if (index[root] != UINT32_MAX) continue;
        call.push_back({root, 0});
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!call.empty()) {
            auto& [v, k] = call.back();
            const auto& nexts = next_of(v);
            if (k < nexts.size()) {
                std::uint32_t w = nexts[k++];
                if (index[w] == UINT32_MAX) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            std::uint32_t vv = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[vv]);
            if (low[vv] == index[vv]) {
                std::vector<std::uint32_t> scc;
                std::uint32_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    scc.push_back(w);
                } while (w != vv);
                emit(scc);
            }
        }
    }
}

} // namespace

// ---------------------------------------------------------------- exploration

ExplorationReport explore_statespace(const Program& program, const Limits& limits)
{
    ExplorationReport r;
    StateSpace space(program, limits);
    std::vector<std::pair<std::uint32_t, std::size_t>> stack;
    std::vector<char> visited;
    try {
        stack.push_back({space.initial(), 0});
        visited.push_back(1);
        while (!stack.empty()) {
            auto [v, k] = stack.back();
            r.max_depth = std::max(r.max_depth, stack.size() - 1);
            const auto& succ = space.successors(v);
            if (visited.size() < space.size()) visited.resize(space.size(), 0);
            if (k == 0) {
                r.transitions += succ.size();
                if (succ.empty()) {
                    if (is_valid_end_state(program, space.state(v)))
                        ++r.valid_end_states;
                    else
                        ++r.invalid_end_states;
                }
            }
            if (k < succ.size()) {
                ++stack.back().second;
                auto w = succ[k].to;
                if (visited[w]) continue;
                if (stack.size() > limits.max_depth) {
                    r.complete = false;
                    continue;
                }
                visited[w] = 1;
                stack.push_back({w, 0});
                continue;
            }
            stack.pop_back();
        }
    } catch (const LimitReached& e) {
        r.complete = false;
        r.error = e.what;
    } catch (const ModelError& e) {
        r.complete = false;
        r.error = e.what();
    }
    r.states = std::count(visited.begin(), visited.end(), 1);
    return r;
}

// ---------------------------------------------------------------- deadlock

Verdict check_deadlock(const Program& program, const CheckOptions& options)
{
    Verdict v;
    v.property = "deadlock";
    StateSpace space(program, options.limits);
    std::uint32_t current = 0;
    bool truncated = false;
    std::vector<std::uint32_t> order; // discovery order
    auto finish_trace = [&](std::uint32_t id) {
        v.trace = build_trace(program, space.path_to(id));
    };
    try {
        order.push_back(space.initial());
        std::vector<char> seen{1};
        std::vector<std::size_t> depth{0};
        auto mark = [&](std::uint32_t w, std::size_t d) {
            if (seen.size() < space.size()) {
                seen.resize(space.size(), 0);
                depth.resize(space.size(), 0);
            }
            if (seen[w]) return false;
            seen[w] = 1;
            depth[w] = d;
            order.push_back(w);
            return true;
        };
        auto quiescent_invalid = [&](std::uint32_t id) {
            current = id;
            const auto& succ = space.successors(id);
            v.transitions += succ.size();
            return succ.empty() && !is_valid_end_state(program, space.state(id));
        };
        if (options.bfs_safety) {
            std::deque<std::uint32_t> queue{0};
            while (!queue.empty()) {
                auto id = queue.front();
                queue.pop_front();
                if (quiescent_invalid(id)) {
                    v.outcome = Outcome::Deadlock;
                    v.detail = "invalid end state";
                    break;
                }
                if (depth[id] >= options.limits.max_depth) {
                    truncated = truncated || !space.successors(id).empty();
                    continue;
                }
                for (const auto& s : space.successors(id))
                    if (mark(s.to, depth[id] + 1)) queue.push_back(s.to);
            }
        } else {
            std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
            if (quiescent_invalid(0)) {
                v.outcome = Outcome::Deadlock;
                v.detail = "invalid end state";
                stack.clear();
            }
            while (!stack.empty()) {
                auto [id, k] = stack.back();
                const auto& succ = space.successors(id);
                if (k >= succ.size()) {
                    stack.pop_back();
                    continue;
                }
                ++stack.back().second;
                auto w = succ[k].to;
                if (stack.size() > options.limits.max_depth) {
                    truncated = true;
                    continue;
                }
                if (!mark(w, stack.size())) continue;
                if (quiescent_invalid(w)) {
                    v.outcome = Outcome::Deadlock;
                    v.detail = "invalid end state";
                    break;
                }
                stack.push_back({w, 0});
            }
        }
        v.states = order.size();
        if (v.outcome == Outcome::Deadlock) {
            finish_trace(current);
            return v;
        }
        if (truncated) {
            v.outcome = Outcome::Incomplete;
            v.detail = "depth limit of " + std::to_string(options.limits.max_depth) + " reached";
            return v;
        }
        // timeout stalls: a bottom SCC whose states can only time out
        std::vector<std::vector<std::uint32_t>> next(space.size());
        for (std::uint32_t id = 0; id < space.size(); ++id)
            for (const auto& s : space.successors(id)) next[id].push_back(s.to);
        std::optional<std::uint32_t> stall;
        std::vector<std::uint32_t> comp(space.size(), 0);
        std::uint32_t comp_id = 0;
        tarjan(space.size(), order, [&](std::uint32_t id) -> const std::vector<std::uint32_t>& { return next[id]; },
               [&](const std::vector<std::uint32_t>& scc) {
                   ++comp_id;
                   for (auto id : scc) comp[id] = comp_id;
                   bool bottom = true;
                   for (auto id : scc)
                       for (auto w : next[id]) bottom = bottom && comp[w] == comp_id;
                   if (!bottom || next[scc[0]].empty()) return;
                   for (auto id : order) {
                       if (comp[id] != comp_id) continue;
                       if (timeout_only(program, space.state(id), space.successors(id))) {
                           // first in discovery order among all stalls
                           if (!stall || std::find(order.begin(), order.end(), id) <
                                             std::find(order.begin(), order.end(), *stall))
                               stall = id;
                           break;
                       }
                   }
               });
        if (stall) {
            v.outcome = Outcome::Deadlock;
            v.detail = "timeout stall: only timeout can move and the system never leaves this loop";
            finish_trace(*stall);
        }
    } catch (const LimitReached& e) {
        v.outcome = Outcome::Incomplete;
        v.detail = e.what;
        v.states = space.size();
    } catch (const ModelError& e) {
        v.outcome = Outcome::ModelError;
        v.detail = e.what();
        v.states = space.size();
        v.trace = build_trace(program, space.path_to(current));
    }
    return v;
}

// ---------------------------------------------------------------- LTL

namespace {

class Labeller {
public:
    Labeller(const Program& program, const ltl::BuchiAutomaton& automaton, const std::map<std::string, Expr>& props)
        : program_(program)
    {
        for (const auto& name : automaton.props) {
            auto it = props.find(name);
            if (it == props.end()) throw ltl::UnknownProposition(name);
            exprs_.push_back(program.resolve_global_expr(it->second));
        }
    }

    std::uint64_t operator()(const SystemState& s) const
    {
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < exprs_.size(); ++i)
            if (eval_expr(program_, s, -1, exprs_[i]) != 0) v |= std::uint64_t{1} << i;
        return v;
    }

private:
    const Program& program_;
    std::vector<Expr> exprs_;
};

// The model x automaton product, with terminal model states stuttering.
class Product {
public:
    struct Edge {
        std::uint64_t to;
        Transition t;
        bool stutter;
    };

    Product(const Program& program, StateSpace& space, const ltl::BuchiAutomaton& automaton, const Labeller& label)
        : program_(program), space_(space), automaton_(automaton), label_(label)
    {
    }

    std::uint64_t initial() { return key(space_.initial(), automaton_.initial); }
    std::uint64_t key(std::uint32_t m, int b) const
    {
        return static_cast<std::uint64_t>(m) * automaton_.states.size() + static_cast<std::uint64_t>(b);
    }
    std::uint32_t model_of(std::uint64_t k) const { return static_cast<std::uint32_t>(k / automaton_.states.size()); }
    int buchi_of(std::uint64_t k) const { return static_cast<int>(k % automaton_.states.size()); }
    bool accepting(std::uint64_t k) const { return automaton_.states[static_cast<std::size_t>(buchi_of(k))].accepting; }

    std::uint64_t valuation(std::uint32_t m)
    {
        if (labels_.size() <= m) labels_.resize(space_.size(), UINT64_MAX);
        if (labels_[m] == UINT64_MAX) labels_[m] = label_(space_.state(m));
        return labels_[m];
    }

    // Successors in a fixed order: model moves outermost, automaton edges inner.
    std::vector<Edge> successors(std::uint64_t k)
    {
        std::uint32_t m = model_of(k);
        const auto& bs = automaton_.states[static_cast<std::size_t>(buchi_of(k))];
        std::uint64_t val = valuation(m);
        std::vector<Edge> out;
        const auto& succ = space_.successors(m);
        if (succ.empty()) {
            for (const auto& e : bs.edges)
                if (e.matches(val)) out.push_back({key(m, e.to), {}, true});
            return out;
        }
        for (const auto& s : succ)
            for (const auto& e : bs.edges)
                if (e.matches(val)) out.push_back({key(s.to, e.to), s.t, false});
        return out;
    }

    const StateSpace& space() const { return space_; }
    const Program& program() const { return program_; }

private:
    const Program& program_;
    StateSpace& space_;
    const ltl::BuchiAutomaton& automaton_;
    const Labeller& label_;
    std::vector<std::uint64_t> labels_;
};

// Lasso from product edges: `prefix` leads from the initial node to the loop
// entry, `loop` returns to it.
Trace lasso_trace(const Program& program, const std::vector<Product::Edge>& prefix,
                  const std::vector<Product::Edge>& loop)
{
    std::vector<Transition> moves;
    for (const auto& e : prefix)
        if (!e.stutter) moves.push_back(e.t);
    std::size_t start = moves.size();
    bool stutters = false;
    for (const auto& e : loop) {
        if (e.stutter)
            stutters = true;
        else
            moves.push_back(e.t);
    }
    Trace tr = build_trace(program, moves);
    tr.lasso_start = stutters ? moves.size() : start;
    return tr;
}

struct NestedDfs {
    Product& product;
    const Limits& limits;
    std::unordered_map<std::uint64_t, std::uint8_t> flags; // 1 blue, 2 on blue stack, 4 red
    std::size_t transitions = 0;
    bool truncated = false;

    struct Frame {
        std::uint64_t node;
        std::vector<Product::Edge> succ;
        std::size_t next = 0;
    };

    // Red search from `seed` for any node on the blue stack.
    bool red(std::uint64_t seed, const std::vector<Frame>& blue, Trace& out)
    {
        std::vector<Frame> stack;
        stack.push_back({seed, product.successors(seed), 0});
        while (!stack.empty()) {
            auto& f = stack.back();
            if (f.next >= f.succ.size()) {
                stack.pop_back();
                continue;
            }
            const auto e = f.succ[f.next++];
            ++transitions;
            auto& fl = flags[e.to];
            if (fl & 2) {
                // blue stack: prefix up to e.to, loop through the seed and back
                std::size_t j = 0;
                while (blue[j].node != e.to) ++j;
                std::vector<Product::Edge> prefix, loop;
                for (std::size_t i = 0; i < j; ++i) prefix.push_back(blue[i].succ[blue[i].next - 1]);
                for (std::size_t i = j; i + 1 < blue.size(); ++i) loop.push_back(blue[i].succ[blue[i].next - 1]);
                for (const auto& rf : stack) loop.push_back(rf.succ[rf.next - 1]);
                out = lasso_trace(product.program(), prefix, loop);
                return true;
            }
            if (fl & 4) continue;
            fl |= 4;
            stack.push_back({e.to, product.successors(e.to), 0});
        }
        return false;
    }

    std::optional<Trace> run()
    {
        std::vector<Frame> blue;
        auto init = product.initial();
        flags[init] = 1 | 2;
        blue.push_back({init, product.successors(init), 0});
        while (!blue.empty()) {
            auto& f = blue.back();
            if (f.next < f.succ.size()) {
                const auto e = f.succ[f.next++];
                ++transitions;
                auto& fl = flags[e.to];
                if (fl & 1) continue;
                if (blue.size() > limits.max_depth) {
                    truncated = true;
                    continue;
                }
                fl = static_cast<std::uint8_t>(fl | 1 | 2);
                blue.push_back({e.to, product.successors(e.to), 0});
                continue;
            }
            // post-order: look for a cycle through an accepting node
            if (product.accepting(f.node)) {
                Trace tr;
                if (red(f.node, blue, tr)) return tr;
            }
            flags[f.node] &= static_cast<std::uint8_t>(~2);
            blue.pop_back();
        }
        return std::nullopt;
    }

    std::size_t states() const
    {
        return static_cast<std::size_t>(
            std::count_if(flags.begin(), flags.end(), [](const auto& kv) { return kv.second & 1; }));
    }
};

// Weak fairness: search the explicit product for an accepting SCC in which
// every process is disabled somewhere or moves somewhere.
struct FairSearch {
    Product& product;
    const Limits& limits;
    std::vector<std::uint64_t> nodes;
    std::unordered_map<std::uint64_t, std::uint32_t> index;
    std::vector<std::vector<Product::Edge>> edges;
    std::vector<std::vector<std::uint32_t>> next;
    std::vector<std::uint32_t> parent;
    std::vector<Product::Edge> parent_edge;
    std::size_t transitions = 0;
    bool truncated = false;

    std::uint32_t add(std::uint64_t node, std::uint32_t from, const Product::Edge* via)
    {
        auto [it, fresh] = index.emplace(node, static_cast<std::uint32_t>(nodes.size()));
        if (fresh) {
            nodes.push_back(node);
            parent.push_back(from);
            parent_edge.push_back(via ? *via : Product::Edge{});
        }
        return it->second;
    }

    void build()
    {
        std::deque<std::uint32_t> queue{add(product.initial(), UINT32_MAX, nullptr)};
        std::vector<std::size_t> depth{0};
        while (!queue.empty()) {
            auto i = queue.front();
            queue.pop_front();
            if (edges.size() <= i) {
                edges.resize(i + 1);
                next.resize(i + 1);
            }
            if (depth[i] >= limits.max_depth) {
                truncated = true;
                continue;
            }
            edges[i] = product.successors(nodes[i]);
            transitions += edges[i].size();
            for (const auto& e : edges[i]) {
                auto before = nodes.size();
                auto j = add(e.to, i, &e);
                next[i].push_back(j);
                if (nodes.size() > before) {
                    depth.push_back(depth[i] + 1);
                    queue.push_back(j);
                }
            }
        }
        edges.resize(nodes.size());
        next.resize(nodes.size());
    }

    static bool moves(const Product::Edge& e, int pid) { return !e.stutter && (e.t.pid == pid || e.t.partner_pid == pid); }

    bool disabled(std::uint32_t i, int pid) const
    {
        for (const auto& e : edges[i])
            if (moves(e, pid)) return false;
        return true;
    }

    int process_count(std::uint32_t i) const
    {
        return static_cast<int>(product.space().state(product.model_of(nodes[i])).processes.size());
    }

    // Shortest path inside `in_scc` from `from` to a node/edge meeting `goal`.
    std::vector<Product::Edge> path_within(std::uint32_t from, const std::vector<char>& in_scc,
                                           const std::function<bool(std::uint32_t, const Product::Edge*)>& goal,
                                           bool nonempty)
    {
        if (!nonempty && goal(from, nullptr)) return {};
        std::unordered_map<std::uint32_t, std::pair<std::uint32_t, std::size_t>> prev;
        std::deque<std::uint32_t> queue{from};
        std::set<std::uint32_t> seen;
        auto unwind = [&](std::uint32_t v, std::uint32_t last_from, std::size_t last_k) {
            std::vector<Product::Edge> path{edges[last_from][last_k]};
            std::uint32_t cur = last_from;
            while (cur != from || (v == from && path.size() == 0)) {
                auto [p, k] = prev.at(cur);
                path.push_back(edges[p][k]);
                cur = p;
                if (cur == from) break;
            }
            std::reverse(path.begin(), path.end());
            return path;
        };
        while (!queue.empty()) {
            auto u = queue.front();
            queue.pop_front();
            for (std::size_t k = 0; k < edges[u].size(); ++k) {
                auto w = next[u][k];
                if (!in_scc[w]) continue;
                if (goal(w, &edges[u][k])) {
                    if (u == from) return {edges[u][k]};
                    return unwind(w, u, k);
                }
                if (w == from || seen.count(w)) continue;
                seen.insert(w);
                prev[w] = {u, k};
                queue.push_back(w);
            }
        }
        return {};
    }

    std::optional<Trace> run()
    {
        build();
        std::vector<std::uint32_t> roots{0};
        std::optional<Trace> found;
        std::vector<char> in_scc(nodes.size(), 0);
        tarjan(nodes.size(), roots, [&](std::uint32_t i) -> const std::vector<std::uint32_t>& { return next[i]; },
               [&](const std::vector<std::uint32_t>& scc) {
                   if (found) return;
                   for (auto i : scc) in_scc[i] = 1;
                   auto clear = [&] {
                       for (auto i : scc) in_scc[i] = 0;
                   };
                   bool cyclic = scc.size() > 1;
                   if (!cyclic)
                       for (auto w : next[scc[0]]) cyclic = cyclic || w == scc[0];
                   std::optional<std::uint32_t> acc;
                   for (auto i : scc)
                       if (product.accepting(nodes[i]) && (!acc || i < *acc)) acc = i;
                   if (!cyclic || !acc) return clear();
                   int procs = process_count(scc[0]);
                   for (int pid = 0; pid < procs; ++pid) {
                       bool ok = false;
                       for (auto i : scc) {
                           if (disabled(i, pid)) ok = true;
                           for (std::size_t k = 0; k < edges[i].size() && !ok; ++k)
                               if (in_scc[next[i][k]] && moves(edges[i][k], pid)) ok = true;
                           if (ok) break;
                       }
                       if (!ok) return clear();
                   }
                   found = lasso(*acc, scc, in_scc, procs);
                   clear();
               });
        return found;
    }

    Trace lasso(std::uint32_t acc, const std::vector<std::uint32_t>&, const std::vector<char>& in_scc, int procs)
    {
        std::vector<Product::Edge> prefix;
        for (auto cur = acc; parent[cur] != UINT32_MAX; cur = parent[cur]) prefix.push_back(parent_edge[cur]);
        std::reverse(prefix.begin(), prefix.end());

        std::vector<Product::Edge> loop;
        std::uint32_t cur = acc;
        std::vector<char> satisfied(static_cast<std::size_t>(procs), 0);
        auto note = [&](std::uint32_t node, const Product::Edge* e) {
            for (int pid = 0; pid < procs; ++pid) {
                if (disabled(node, pid)) satisfied[static_cast<std::size_t>(pid)] = 1;
                if (e && moves(*e, pid)) satisfied[static_cast<std::size_t>(pid)] = 1;
            }
        };
        auto walk = [&](const std::vector<Product::Edge>& path) {
            for (const auto& e : path) {
                note(cur, &e);
                cur = index.at(e.to);
                loop.push_back(e);
            }
            note(cur, nullptr);
        };
        note(cur, nullptr);
        for (int pid = 0; pid < procs; ++pid) {
            if (satisfied[static_cast<std::size_t>(pid)]) continue;
            walk(path_within(
                cur, in_scc,
                [&](std::uint32_t n, const Product::Edge* e) { return disabled(n, pid) || (e && moves(*e, pid)); },
                false));
        }
        walk(path_within(cur, in_scc, [&](std::uint32_t n, const Product::Edge*) { return n == acc; },
                         loop.empty()));
        return lasso_trace(product.program(), prefix, loop);
    }
};

} // namespace

Verdict check_ltl_property(const Program& program, const ltl::FormulaPtr& formula,
                           const std::map<std::string, Expr>& propositions, const CheckOptions& options)
{
    Verdict v;
    v.formula = ltl::to_string(formula);
    v.fair = options.fair;
    auto automaton = ltl::ltl_to_buchi(ltl::normalize_negation(ltl::make_not(formula)));
    Labeller label(program, automaton, propositions);
    StateSpace space(program, options.limits);
    Product product(program, space, automaton, label);
    try {
        std::optional<Trace> trace;
        bool truncated = false;
        if (options.fair) {
            FairSearch search{product, options.limits, {}, {}, {}, {}, {}, {}, 0, false};
            trace = search.run();
            v.states = search.nodes.size();
            v.transitions = search.transitions;
            truncated = search.truncated;
        } else {
            NestedDfs search{product, options.limits, {}, 0, false};
            trace = search.run();
            v.states = search.states();
            v.transitions = search.transitions;
            truncated = search.truncated;
        }
        if (trace) {
            v.outcome = Outcome::Violated;
            v.trace = std::move(trace);
            std::string why;
            if (!validate_trace(program, *v.trace, &why))
                throw std::logic_error("internal error: counterexample does not replay: " + why);
        } else if (truncated) {
            v.outcome = Outcome::Incomplete;
            v.detail = "depth limit of " + std::to_string(options.limits.max_depth) + " reached";
        }
    } catch (const LimitReached& e) {
        v.outcome = Outcome::Incomplete;
        v.detail = e.what;
    } catch (const ModelError& e) {
        v.outcome = Outcome::ModelError;
        v.detail = e.what();
    }
    return v;
}

Verdict check_property(const Program& program, const LtlProperty& property, const CheckOptions& options)
{
    std::set<std::string> names;
    for (const auto& [n, e] : property.propositions) names.insert(n);
    auto f = ltl::parse_formula(property.formula, names);
    Verdict v = check_ltl_property(program, f, property.propositions, options);
    v.property = property.name;
    v.formula = property.formula;
    return v;
}

// ---------------------------------------------------------------- vacuity

namespace {

bool temporal_free(const ltl::FormulaPtr& f)
{
    using K = ltl::FormulaKind;
    switch (f->kind) {
    case K::True:
    case K::False:
    case K::Prop: return true;
    case K::Not: return temporal_free(f->lhs);
    case K::And:
    case K::Or:
    case K::Implies: return temporal_free(f->lhs) && temporal_free(f->rhs);
    default: return false;
    }
}

bool holds_now(const ltl::FormulaPtr& f, const std::map<std::string, bool>& val)
{
    using K = ltl::FormulaKind;
    switch (f->kind) {
    case K::True: return true;
    case K::False: return false;
    case K::Prop: return val.at(f->prop);
    case K::Not: return !holds_now(f->lhs, val);
    case K::And: return holds_now(f->lhs, val) && holds_now(f->rhs, val);
    case K::Or: return holds_now(f->lhs, val) || holds_now(f->rhs, val);
    case K::Implies: return !holds_now(f->lhs, val) || holds_now(f->rhs, val);
    default: return false;
    }
}

} // namespace

VacuityReport detect_vacuity(const Program& program, const ltl::FormulaPtr& formula,
                             const std::map<std::string, Expr>& propositions, const Limits& limits)
{
    VacuityReport r;
    if (formula->kind != ltl::FormulaKind::Always || formula->lhs->kind != ltl::FormulaKind::Implies ||
        !temporal_free(formula->lhs->lhs))
        return r;
    r.supported = true;
    const auto& antecedent = formula->lhs->lhs;
    r.antecedent = ltl::to_string(antecedent);
    std::vector<std::pair<std::string, Expr>> exprs;
    for (const auto& name : ltl::propositions_of(antecedent)) {
        auto it = propositions.find(name);
        if (it == propositions.end()) throw ltl::UnknownProposition(name);
        exprs.emplace_back(name, program.resolve_global_expr(it->second));
    }
    StateSpace space(program, limits);
    std::set<std::string> seen;
    auto text = [](const std::map<std::string, bool>& val) {
        std::string s;
        for (const auto& [n, b] : val) s += (s.empty() ? "" : " ") + n + "=" + (b ? "1" : "0");
        return s;
    };
    try {
        space.initial();
        for (std::uint32_t id = 0; id < space.size(); ++id) {
            std::map<std::string, bool> val;
            for (const auto& [n, e] : exprs) val[n] = eval_expr(program, space.state(id), -1, e) != 0;
            auto t = text(val);
            seen.insert(t);
            if (!r.witness && holds_now(antecedent, val)) {
                r.witness = t;
                r.witness_state = canonical_state_digest(space.state(id));
            }
            space.successors(id);
        }
    } catch (const LimitReached&) {
        r.complete = false;
    }
    r.states = space.size();
    r.valuations.assign(seen.begin(), seen.end());
    // unexplored states could still satisfy the antecedent
    r.vacuous = !r.witness && r.complete;
    return r;
}

// ---------------------------------------------------------------- output

namespace {

std::string delta_text(const Delta& d)
{
    std::string out;
    auto add = [&](const std::string& s) { out += (out.empty() ? "" : ", ") + s; };
    for (const auto& [c, v] : d.sends) add(c + "!" + std::to_string(v));
    for (const auto& [c, v] : d.recvs) add(c + "?" + std::to_string(v));
    for (const auto& [n, v] : d.assigns) add(n + "=" + std::to_string(v));
    return out.empty() ? "-" : out;
}

nlohmann::ordered_json pairs_json(const std::vector<std::pair<std::string, std::int32_t>>& xs, const char* key)
{
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [n, v] : xs) arr.push_back({{key, n}, {"value", v}});
    return arr;
}

nlohmann::ordered_json step_json(const TraceStep& s, std::size_t i, const std::optional<std::size_t>& lasso)
{
    nlohmann::ordered_json j;
    j["step"] = i;
    j["pid"] = s.pid;
    j["template"] = s.template_name;
    j["label"] = s.label;
    j["stmt"] = s.statement;
    j["sends"] = pairs_json(s.delta.sends, "channel");
    j["recvs"] = pairs_json(s.delta.recvs, "channel");
    j["assigns"] = pairs_json(s.delta.assigns, "name");
    j["lassoStart"] = lasso ? nlohmann::ordered_json(*lasso) : nlohmann::ordered_json(nullptr);
    j["digest"] = s.after.hex();
    return j;
}

} // namespace

std::string format_counterexample(const Trace& trace, TraceStyle style)
{
    std::ostringstream out;
    for (std::size_t i = 0; i <= trace.steps.size(); ++i) {
        if (style == TraceStyle::Text && trace.lasso_start && *trace.lasso_start == i)
            out << (i == trace.steps.size() ? "<<< loop: stutters here forever >>>\n" : "<<< loop starts here >>>\n");
        if (i == trace.steps.size()) break;
        const auto& s = trace.steps[i];
        if (style == TraceStyle::Structured) {
            out << step_json(s, i, trace.lasso_start).dump() << "\n";
            continue;
        }
        out << s.pid << " " << s.template_name << " @" << (s.label.empty() ? "-" : s.label) << " " << s.statement
            << " => " << delta_text(s.delta) << "\n";
    }
    return out.str();
}

std::string verdict_document(const Verdict& v, const std::string& mode)
{
    nlohmann::ordered_json j;
    j["outcome"] = to_string(v.outcome);
    j["property"] = v.property;
    j["formula"] = v.formula;
    j["mode"] = mode;
    j["fair"] = v.fair;
    j["statesExplored"] = v.states;
    j["transitionsExplored"] = v.transitions;
    if (v.vacuity && v.vacuity->supported) {
        j["vacuous"] = v.vacuity->vacuous;
        nlohmann::ordered_json vac;
        vac["antecedent"] = v.vacuity->antecedent;
        vac["statesChecked"] = v.vacuity->states;
        vac["complete"] = v.vacuity->complete;
        vac["valuations"] = v.vacuity->valuations;
        vac["witness"] = v.vacuity->witness ? nlohmann::ordered_json(*v.vacuity->witness) : nlohmann::ordered_json(nullptr);
        vac["witnessState"] =
            v.vacuity->witness_state ? nlohmann::ordered_json(v.vacuity->witness_state->hex()) : nlohmann::ordered_json(nullptr);
        j["vacuity"] = vac;
    } else {
        j["vacuous"] = nullptr;
    }
    if (!v.detail.empty()) j["detail"] = v.detail;
    if (v.trace) {
        nlohmann::ordered_json t;
        t["initialDigest"] = v.trace->initial.hex();
        t["lassoStart"] = v.trace->lasso_start ? nlohmann::ordered_json(*v.trace->lasso_start) : nlohmann::ordered_json(nullptr);
        auto steps = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < v.trace->steps.size(); ++i) steps.push_back(step_json(v.trace->steps[i], i, v.trace->lasso_start));
        t["steps"] = steps;
        j["trace"] = t;
    } else {
        j["trace"] = nullptr;
    }
    return j.dump(2) + "\n";
}

} // namespace wfv::checker
