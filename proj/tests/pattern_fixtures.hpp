#pragma once

// Small models built around one pattern each, explored exhaustively.
// Each suite returns whether its property held over every reachable state.

#include "support.hpp"

#include "wfv/patterns.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>

namespace wfv::testing {

struct SuiteResult {
    bool ok = true;
    std::size_t states = 0;
    std::string detail;

    void fail(const std::string& why)
    {
        if (ok) detail = why;
        ok = false;
    }
};

inline ProcessTemplate make_proc(std::string name, Sequence body, bool active = true)
{
    ProcessTemplate t;
    t.name = std::move(name);
    t.body = std::move(body);
    t.active = active;
    return t;
}

inline bool all_done(const SystemState& s)
{
    return std::all_of(s.processes.begin(), s.processes.end(), [](const ProcessInstance& p) { return p.done; });
}

// choice: a constant, or nullopt for a nondeterministic pick from {0, 1}.
inline Model exclusive_choice_model(std::optional<int> choice)
{
    Model m;
    m.channels.push_back({"qs", 2, 1});
    m.globals.push_back({"choice", 0, {}});
    m.globals.push_back({"got", 2, {}});
    patterns::ExpansionContext ctx;
    Sequence chooser;
    if (choice) {
        chooser.push_back(stmt::assign(var("choice"), lit(*choice)));
    } else {
        chooser.push_back(stmt::if_({{stmt::assign(var("choice"), lit(0))}, {stmt::assign(var("choice"), lit(1))}}));
    }
    for (auto& s : patterns::expand_exclusive_choice(ctx, "qs", 2, var("choice"), lit(1))) chooser.push_back(s);
    m.templates.push_back(make_proc("Chooser", chooser));
    for (int k = 0; k < 2; ++k)
        m.templates.push_back(make_proc("Branch" + std::to_string(k),
                                        {stmt::label("end"), stmt::recv(at("qs", lit(k)), at("got", lit(k)))}));
    return m;
}

inline SuiteResult exclusive_choice_suite()
{
    SuiteResult res;
    for (std::optional<int> choice : {std::optional<int>(1), std::optional<int>(-1), std::optional<int>()}) {
        Program p(exclusive_choice_model(choice));
        auto r = bfs(p);
        res.states = std::max(res.states, r.states.size());
        std::set<std::vector<std::int32_t>> classes;
        for (std::size_t i = 0; i < r.states.size(); ++i) {
            const auto& s = r.states[i];
            int touched = 0;
            for (int k = 0; k < 2; ++k)
                touched += global_value(p, s, "got", k) != 0 || channel_length(p, s, "qs[" + std::to_string(k) + "]") > 0;
            if (touched > 1) res.fail("two branches received a message");
            if (!r.successors[i].empty()) continue;
            if (!is_valid_end_state(p, s)) res.fail("invalid end state");
            bool in_range = !choice || (*choice >= 0 && *choice < 2);
            if (in_range && touched != 1) res.fail("in-range choice reached no branch");
            if (!in_range && touched != 0) res.fail("out-of-range choice reached a branch");
            if (choice && *choice == 1 && global_value(p, s, "got", 1) != 1) res.fail("qs[1] did not receive");
            classes.insert({global_value(p, s, "got", 0), global_value(p, s, "got", 1)});
        }
        if (!choice && classes.size() != 2) res.fail("nondeterministic choice: expected two terminal classes");
    }
    return res;
}

inline Model parallel_split_model(int n)
{
    Model m;
    m.channels.push_back({"qs", n, 1});
    m.globals.push_back({"done", n, {}});
    patterns::ExpansionContext ctx;
    patterns::LocalNamer namer;
    ctx.namer = &namer;
    m.templates.push_back(make_proc("Split", patterns::expand_parallel_split(ctx, "qs", n, std::vector<Expr>(static_cast<std::size_t>(n), lit(1)))));
    for (int k = 0; k < n; ++k) {
        Sequence body{stmt::decl("x"), stmt::recv(at("qs", lit(k)), var("x")), stmt::assign(at("done", lit(k)), lit(1))};
        m.templates.push_back(make_proc("Activity" + std::to_string(k), body));
    }
    return m;
}

inline SuiteResult parallel_split_suite(int n)
{
    SuiteResult res;
    Program p(parallel_split_model(n));
    auto r = bfs(p);
    res.states = r.states.size();
    if (!acyclic(r)) res.fail("state graph has a cycle");
    for (auto t : terminal_states(r)) {
        const auto& s = r.states[t];
        for (int k = 0; k < n; ++k)
            if (global_value(p, s, "done", k) != 1) res.fail("activity " + std::to_string(k) + " never ran");
        if (!all_done(s)) res.fail("process left unfinished");
    }
    return res;
}

// `order` lists sender indices in declaration order.
inline Model synchronization_model(int n, const std::vector<int>& order)
{
    Model m;
    m.channels.push_back({"qs", n, 1});
    m.globals.push_back({"joined", 0, {}});
    patterns::ExpansionContext ctx;
    patterns::LocalNamer namer;
    ctx.namer = &namer;
    Sequence join = patterns::expand_synchronization(ctx, "qs", n);
    join.push_back(stmt::assign(var("joined"), lit(1)));
    m.templates.push_back(make_proc("Join", join));
    for (int k : order)
        m.templates.push_back(make_proc("Sender" + std::to_string(k), {stmt::send(at("qs", lit(k)), lit(k + 1))}));
    return m;
}

inline SuiteResult synchronization_suite(int n)
{
    SuiteResult res;
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) order[static_cast<std::size_t>(k)] = k;
    std::set<std::string> reference;
    bool first = true;
    do {
        Program p(synchronization_model(n, order));
        auto r = bfs(p);
        res.states = std::max(res.states, r.states.size());
        if (!acyclic(r)) res.fail("synchronization can loop forever");
        std::set<std::string> terminal_stores;
        for (auto t : terminal_states(r)) {
            const auto& s = r.states[t];
            if (global_value(p, s, "joined") != 1) res.fail("terminal state before the join completed");
            for (int k = 0; k < n; ++k)
                if (channel_length(p, s, "qs[" + std::to_string(k) + "]") != 0) res.fail("message left unconsumed");
            if (!all_done(s)) res.fail("process left unfinished");
            // globals and buffers, independent of pid numbering
            std::string key;
            for (auto v : s.globals) key += std::to_string(v) + ",";
            for (const auto& c : s.channels) key += "|" + std::to_string(c.size());
            terminal_stores.insert(key);
        }
        if (first) {
            reference = terminal_stores;
            first = false;
        } else if (terminal_stores != reference) {
            res.fail("terminal states depend on sender order");
        }
    } while (std::next_permutation(order.begin(), order.end()));
    return res;
}

// root (id 0) -> mid (id 1) -> leaf (id 2); an external process cancels the root.
inline Model cancel_case_model()
{
    Model m;
    m.channels.push_back({"qsCancel", 3, 1});
    m.channels.push_back({"work", 3, 1});
    m.globals.push_back({"piIds", 3, {-1, 0, 1}});
    m.globals.push_back({"started", 3, {}});
    patterns::ProcessRegistry registry;
    registry.add(0, "Root", -1);
    registry.add(1, "Mid", 0);
    registry.add(2, "Leaf", 1);
    patterns::ExpansionContext ctx;
    ctx.registry = &registry;
    for (const auto& [id, name] : registry.entries()) {
        patterns::LocalNamer namer;
        ctx.namer = &namer;
        Sequence main{stmt::assign(at("started", lit(id)), lit(1)), stmt::recv_discard(at("work", lit(id)))};
        Sequence escape{stmt::guard(gt(len(at("qsCancel", lit(id))), lit(0)))};
        for (auto& s : patterns::expand_cancel_case(ctx, "qsCancel", 3, id)) escape.push_back(s);
        m.templates.push_back(make_proc(name, {stmt::unless(main, escape)}));
    }
    m.templates.push_back(make_proc("Canceller", {stmt::send(at("qsCancel", lit(0)), lit(1))}));
    return m;
}

inline SuiteResult cancel_case_suite()
{
    SuiteResult res;
    Program p(cancel_case_model());
    auto r = bfs(p);
    res.states = r.states.size();
    auto terms = terminal_states(r);
    if (terms.empty()) res.fail("no terminal state");
    for (auto t : terms) {
        const auto& s = r.states[t];
        if (!all_done(s)) res.fail("a descendant survived the cancellation");
        if (!is_valid_end_state(p, s)) res.fail("invalid end state");
    }
    return res;
}

// Messages pending on both channels before the merge starts.
inline Model simple_merge_model(bool both)
{
    Model m;
    m.channels.push_back({"qs", 2, 1});
    m.globals.push_back({"got", 0, {}});
    m.globals.push_back({"left", 0, {}});
    patterns::ExpansionContext ctx;
    patterns::LocalNamer namer;
    ctx.namer = &namer;
    Sequence merge = patterns::expand_simple_merge(ctx, "qs", 2, var("got"));
    merge.push_back(stmt::assign(var("left"), len(at("qs", lit(0))) + len(at("qs", lit(1)))));
    m.templates.push_back(make_proc("Merge", merge, false));
    Sequence prep{stmt::send(at("qs", lit(0)), lit(1))};
    if (both) prep.push_back(stmt::send(at("qs", lit(1)), lit(2)));
    m.init = {stmt::atomic(prep), stmt::run("Merge")};
    return m;
}

inline SuiteResult simple_merge_suite()
{
    SuiteResult res;
    for (bool both : {false, true}) {
        Program p(simple_merge_model(both));
        auto r = bfs(p);
        res.states = std::max(res.states, r.states.size());
        std::set<std::int32_t> winners;
        for (auto t : terminal_states(r)) {
            const auto& s = r.states[t];
            if (!all_done(s)) res.fail("merge did not complete");
            auto got = global_value(p, s, "got");
            winners.insert(got);
            int expected_left = both ? 1 : 0;
            if (global_value(p, s, "left") != expected_left) res.fail("merge consumed the wrong number of messages");
        }
        std::set<std::int32_t> expected = both ? std::set<std::int32_t>{1, 2} : std::set<std::int32_t>{1};
        if (winners != expected) res.fail("unexpected set of winning messages");
    }
    return res;
}

} // namespace wfv::testing
