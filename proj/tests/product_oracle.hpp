#pragma once

#include "support.hpp"

#include "wfv/ltl.hpp"

#include <algorithm>
#include <map>

namespace wfv::testing {

// Naive oracle: explicit product over the BFS state graph, then Kosaraju;
// violated iff some reachable SCC with a cycle holds an accepting node.
struct ProductOracle {
    bool violated = false;
    std::size_t nodes = 0;
};

inline ProductOracle naive_product_check(const Program& program, const ltl::FormulaPtr& f,
                                  const std::map<std::string, Expr>& props)
{
    auto automaton = ltl::ltl_to_buchi(ltl::normalize_negation(ltl::make_not(f)));
    auto graph = bfs(program);
    std::vector<Expr> exprs;
    for (const auto& name : automaton.props) exprs.push_back(program.resolve_global_expr(props.at(name)));
    auto label = [&](std::size_t m) {
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < exprs.size(); ++i)
            if (eval_expr(program, graph.states[m], -1, exprs[i])) v |= std::uint64_t{1} << i;
        return v;
    };
    const std::size_t nb = automaton.states.size();
    auto id = [&](std::size_t m, int b) { return m * nb + static_cast<std::size_t>(b); };
    const std::size_t n = graph.states.size() * nb;
    std::vector<std::vector<std::size_t>> next(n), prev(n);
    for (std::size_t m = 0; m < graph.states.size(); ++m) {
        auto val = label(m);
        std::vector<std::size_t> targets = graph.successors[m];
        if (targets.empty()) targets.push_back(m); // stutter
        for (std::size_t b = 0; b < nb; ++b)
            for (const auto& e : automaton.states[b].edges)
                if (e.matches(val))
                    for (auto t : targets) {
                        next[id(m, static_cast<int>(b))].push_back(id(t, e.to));
                        prev[id(t, e.to)].push_back(id(m, static_cast<int>(b)));
                    }
    }
    // reachable part
    std::vector<char> reach(n, 0);
    std::vector<std::size_t> work{id(0, automaton.initial)};
    reach[work[0]] = 1;
    while (!work.empty()) {
        auto v = work.back();
        work.pop_back();
        for (auto w : next[v])
            if (!reach[w]) reach[w] = 1, work.push_back(w);
    }
    // Kosaraju: finishing order on the forward graph
    std::vector<std::size_t> order;
    std::vector<char> seen(n, 0);
    for (std::size_t r = 0; r < n; ++r) {
        if (!reach[r] || seen[r]) continue;
        std::vector<std::pair<std::size_t, std::size_t>> st{{r, 0}};
        seen[r] = 1;
        while (!st.empty()) {
            auto& [v, k] = st.back();
            if (k < next[v].size()) {
                auto w = next[v][k++];
                if (!seen[w]) seen[w] = 1, st.push_back({w, 0});
            } else {
                order.push_back(v);
                st.pop_back();
            }
        }
    }
    std::vector<long> comp(n, -1);
    long c = 0;
    ProductOracle out;
    out.nodes = static_cast<std::size_t>(std::count(reach.begin(), reach.end(), 1));
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (comp[*it] >= 0) continue;
        std::vector<std::size_t> members{*it}, st{*it};
        comp[*it] = c;
        while (!st.empty()) {
            auto v = st.back();
            st.pop_back();
            for (auto w : prev[v])
                if (reach[w] && comp[w] < 0) comp[w] = c, members.push_back(w), st.push_back(w);
        }
        bool cyclic = members.size() > 1 ||
                      std::find(next[members[0]].begin(), next[members[0]].end(), members[0]) != next[members[0]].end();
        bool accepting = std::any_of(members.begin(), members.end(),
                                     [&](std::size_t v) { return automaton.states[v % nb].accepting; });
        if (cyclic && accepting) out.violated = true;
        ++c;
    }
    return out;
}

} // namespace wfv::testing
