#pragma once

// Test-only helpers: a plain breadth-first reachability oracle over the
// kernel's public operations, plus small model builders.

#include "wfv/kernel.hpp"

#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace wfv::testing {

struct Reachability {
    std::vector<SystemState> states;
    std::vector<std::vector<std::size_t>> successors;
    std::size_t transitions = 0;
};

/// Exhaustive BFS keyed on the full canonical encoding (not the digest).
inline Reachability bfs(const Program& program, std::size_t limit = 500000)
{
    Reachability r;
    std::unordered_map<std::string, std::size_t> index;
    std::deque<std::size_t> queue;
    auto add = [&](SystemState s) -> std::size_t {
        auto key = s.encode();
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        std::size_t id = r.states.size();
        index.emplace(std::move(key), id);
        r.states.push_back(std::move(s));
        r.successors.emplace_back();
        queue.push_back(id);
        return id;
    };
    add(initial_state(program));
    while (!queue.empty()) {
        if (r.states.size() > limit) throw std::runtime_error("bfs oracle: state limit exceeded");
        auto id = queue.front();
        queue.pop_front();
        auto state = r.states[id];
        for (const auto& t : enabled_transitions(program, state)) {
            auto succ = add(apply_transition(program, state, t, false));
            r.successors[id].push_back(succ);
            ++r.transitions;
        }
    }
    return r;
}

/// Indices of states with no successors.
inline std::vector<std::size_t> terminal_states(const Reachability& r)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < r.states.size(); ++i)
        if (r.successors[i].empty()) out.push_back(i);
    return out;
}

/// True iff the reachable state graph has no cycle (every run is finite).
inline bool acyclic(const Reachability& r)
{
    std::vector<char> color(r.states.size(), 0); // 0 new, 1 on stack, 2 done
    std::vector<std::pair<std::size_t, std::size_t>> stack;
    for (std::size_t root = 0; root < r.states.size(); ++root) {
        if (color[root]) continue;
        stack.push_back({root, 0});
        color[root] = 1;
        while (!stack.empty()) {
            auto& [v, k] = stack.back();
            if (k < r.successors[v].size()) {
                auto w = r.successors[v][k++];
                if (color[w] == 1) return false;
                if (color[w] == 0) {
                    color[w] = 1;
                    stack.push_back({w, 0});
                }
                continue;
            }
            color[v] = 2;
            stack.pop_back();
        }
    }
    return true;
}

inline std::int32_t global_value(const Program& program, const SystemState& s, const std::string& name, int index = 0)
{
    const auto* g = program.find_global(name);
    if (!g) throw std::runtime_error("no global " + name);
    return s.globals[static_cast<std::size_t>(g->offset + index)];
}

inline std::size_t channel_length(const Program& program, const SystemState& s, const std::string& channel_name)
{
    for (std::size_t c = 0; c < program.channels().size(); ++c)
        if (program.channels()[c].name == channel_name) return s.channels[c].size();
    throw std::runtime_error("no channel " + channel_name);
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline std::string fixture_path(const std::string& name) { return std::string(WFV_FIXTURE_DIR) + "/" + name; }

} // namespace wfv::testing
