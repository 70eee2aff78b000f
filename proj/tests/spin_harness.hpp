#pragma once

// Cross-check against an external SPIN binary named by SPIN_BIN. Every
// helper is inert (returns nullopt) when the variable is unset.

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <regex>
#include <string>

namespace wfv::testing {

inline std::optional<std::string> spin_bin()
{
    const char* p = std::getenv("SPIN_BIN");
    if (!p || !*p) return std::nullopt;
    return std::string(p);
}

struct ShellResult {
    int status = -1;
    std::string output;
};

inline ShellResult shell(const std::string& cmd)
{
    ShellResult r;
    FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe)) r.output += buf.data();
    r.status = pclose(pipe);
    return r;
}

/// A scratch directory holding utils.pr, <name>.pml and <name>.ltl.
inline std::filesystem::path write_spin_files(const std::string& tag, const std::string& utils, const std::string& pml,
                                              const std::string& ltl)
{
    auto dir = std::filesystem::temp_directory_path() / ("wfv-spin-" + tag);
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "utils.pr") << utils;
    std::ofstream(dir / "model.pml") << pml;
    std::ofstream(dir / "model.ltl") << ltl;
    return dir;
}

inline int pan_errors(const std::string& output)
{
    std::smatch m;
    static const std::regex re("errors: ([0-9]+)");
    if (std::regex_search(output, m, re)) return std::stoi(m[1]);
    return -1;
}

/// `spin -a` on one file of the directory; true when SPIN accepts it.
inline std::optional<bool> spin_accepts(const std::filesystem::path& dir, const std::string& file)
{
    auto spin = spin_bin();
    if (!spin) return std::nullopt;
    return shell("cd '" + dir.string() + "' && '" + *spin + "' -a " + file).status == 0;
}

/// Error count of an LTL run for one named property (-1 if pan failed).
inline std::optional<int> spin_ltl_errors(const std::filesystem::path& dir, const std::string& property, bool fair)
{
    auto spin = spin_bin();
    if (!spin) return std::nullopt;
    auto r = shell("cd '" + dir.string() + "' && '" + *spin + "' -a model.ltl && cc -O2 -o pan pan.c && ./pan -a " +
                   (fair ? "-f " : "") + "-N " + property);
    return pan_errors(r.output);
}

/// Invalid end states plus non-progress cycles (the timeout stalls).
inline std::optional<int> spin_deadlock_errors(const std::filesystem::path& dir)
{
    auto spin = spin_bin();
    if (!spin) return std::nullopt;
    auto safety = shell("cd '" + dir.string() + "' && '" + *spin +
                        "' -a model.pml && cc -O2 -DSAFETY -o pan pan.c && ./pan");
    auto np = shell("cd '" + dir.string() + "' && '" + *spin + "' -a model.pml && cc -O2 -DNP -o pan pan.c && ./pan -l");
    int a = pan_errors(safety.output), b = pan_errors(np.output);
    if (a < 0 || b < 0) return -1;
    return a + b;
}

} // namespace wfv::testing
