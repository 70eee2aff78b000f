#include "wfv/cli.hpp"

#include "wfv/checker.hpp"
#include "wfv/dsl.hpp"
#include "wfv/promela.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

namespace wfv::cli {

namespace {

struct RunConfig {
    std::string command;
    std::string model_path;
    std::vector<std::string> props;
    std::string prop_formula;
    std::string mode;
    bool fair = false;
    std::size_t max_states = checker::Limits{}.max_states;
    std::size_t max_depth = checker::Limits{}.max_depth;
    std::uint64_t seed = 1;
    std::string out;
    bool bfs_safety = false;
    bool strict_spin = false;
    int max_array_size = kDefaultMaxArraySize;
};

// Usage and model errors; the message is already formatted.
struct Fail {
    std::string message;
};

std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Fail{path + ": cannot read file"};
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

ObservationMode mode_of(const RunConfig& c, ObservationMode fallback)
{
    if (c.mode.empty()) return c.strict_spin ? ObservationMode::Scalar : fallback;
    auto m = parse_observation_mode(c.mode);
    if (!m) throw Fail{"unknown mode '" + c.mode + "' (expected flags, scalar or none)"};
    return *m;
}

Model load(const RunConfig& c, ObservationMode mode, bool strict_spin, std::ostream& err)
{
    auto text = read_text(c.model_path);
    dsl::WorkflowDef def;
    try {
        def = dsl::parse_workflow(text);
    } catch (const SyntaxError& e) {
        throw Fail{c.model_path + ":" + e.what()};
    }
    auto diagnostics = dsl::validate_workflow(def, c.max_array_size);
    for (const auto& d : diagnostics) err << c.model_path << ":" << dsl::to_string(d) << "\n";
    if (dsl::has_errors(diagnostics)) throw Fail{c.model_path + ": " + "workflow has errors"};
    dsl::CompileOptions o;
    o.mode = mode;
    o.strict_spin = strict_spin;
    o.max_array_size = c.max_array_size;
    try {
        return dsl::compile_to_kernel(def, o);
    } catch (const CompileError& e) {
        throw Fail{c.model_path + ": " + e.what()};
    }
}

void write_document(const RunConfig& c, const std::string& text, std::ostream& out)
{
    if (c.out.empty()) {
        out << text;
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f || !(f << text)) throw Fail{c.out + ": cannot write"};
}

int cmd_check(const RunConfig& c, std::ostream& out, std::ostream& err)
{
    auto mode = mode_of(c, ObservationMode::Flags);
    Model model = load(c, mode, c.strict_spin, err);
    Program program(model);
    checker::CheckOptions opts;
    opts.limits = {c.max_states, c.max_depth};
    opts.fair = c.fair;
    opts.bfs_safety = c.bfs_safety;

    std::vector<LtlProperty> selected;
    if (!c.prop_formula.empty()) {
        LtlProperty p;
        p.name = "formula";
        p.formula = c.prop_formula;
        p.propositions = model.propositions;
        for (const auto& prop : model.properties)
            for (const auto& [n, e] : prop.propositions) p.propositions.emplace(n, e);
        selected.push_back(p);
    }
    for (const auto& name : c.props) {
        auto it = std::find_if(model.properties.begin(), model.properties.end(),
                               [&](const LtlProperty& p) { return p.name == name; });
        if (it == model.properties.end()) throw Fail{c.model_path + ": no property named '" + name + "'"};
        selected.push_back(*it);
    }
    if (c.props.empty() && c.prop_formula.empty()) selected = model.properties;

    const std::string mode_name = to_string(mode);
    nlohmann::ordered_json doc;
    doc["model"] = model.name;
    doc["mode"] = mode_name;
    auto verdicts = nlohmann::ordered_json::array();
    bool deadlock = false, violated = false, failed = false;

    auto deadlock_verdict = checker::check_deadlock(program, opts);
    verdicts.push_back(nlohmann::ordered_json::parse(checker::verdict_document(deadlock_verdict, mode_name)));
    if (deadlock_verdict.outcome == checker::Outcome::Deadlock) deadlock = true;
    if (deadlock_verdict.outcome == checker::Outcome::ModelError ||
        deadlock_verdict.outcome == checker::Outcome::Incomplete) {
        failed = true;
        err << c.model_path << ": deadlock check: " << deadlock_verdict.detail << "\n";
    }

    for (const auto& prop : selected) {
        checker::Verdict v;
        try {
            v = checker::check_property(program, prop, opts);
            std::set<std::string> names;
            for (const auto& [n, e] : prop.propositions) names.insert(n);
            v.vacuity = checker::detect_vacuity(program, ltl::parse_formula(prop.formula, names), prop.propositions,
                                                opts.limits);
        } catch (const SyntaxError& e) {
            throw Fail{"property " + prop.name + ": " + e.what()};
        } catch (const ltl::UnknownProposition& e) {
            throw Fail{"property " + prop.name + ": " + e.what()};
        } catch (const ModelError& e) {
            v.outcome = checker::Outcome::ModelError;
            v.detail = e.what();
        }
        if (v.outcome == checker::Outcome::Violated) violated = true;
        if (v.outcome == checker::Outcome::ModelError || v.outcome == checker::Outcome::Incomplete) {
            failed = true;
            err << c.model_path << ": property " << prop.name << ": " << v.detail << "\n";
        }
        verdicts.push_back(nlohmann::ordered_json::parse(checker::verdict_document(v, mode_name)));
    }
    doc["verdicts"] = verdicts;
    write_document(c, doc.dump(2) + "\n", out);
    if (failed) return Failure;
    if (deadlock) return Deadlock;
    if (violated) return Violated;
    return Success;
}

int cmd_emit(const RunConfig& c, std::ostream& out, std::ostream& err)
{
    Model model = load(c, mode_of(c, ObservationMode::Flags), true, err);
    promela::EmitConfig config;
    config.max_array_size = c.max_array_size;
    std::string pml, ltl;
    try {
        pml = promela::emit_model_source(model, config);
    } catch (const std::exception& e) {
        throw Fail{c.model_path + ": " + e.what()};
    }
    namespace fs = std::filesystem;
    fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    auto stem = fs::path(c.model_path).stem().string();
    ltl = promela::emit_property_file(model, stem + ".pml");
    std::vector<std::pair<fs::path, std::string>> files{
        {dir / (stem + ".pml"), pml},
        {dir / config.include_name, promela::emit_pattern_library(config)},
        {dir / (stem + ".ltl"), ltl},
    };
    for (const auto& [path, text] : files) {
        std::ofstream f(path, std::ios::binary);
        if (!f || !(f << text)) throw Fail{path.string() + ": cannot write"};
    }
    for (const auto& [path, text] : files) out << path.string() << "\n";
    return Success;
}

int cmd_simulate(const RunConfig& c, std::ostream& out, std::ostream& err)
{
    Model model = load(c, mode_of(c, ObservationMode::Flags), c.strict_spin, err);
    Program program(model);
    std::mt19937_64 rng(c.seed);
    SystemState s = initial_state(program);
    checker::Trace trace;
    trace.initial = canonical_state_digest(s);
    std::unordered_set<std::string> stalled; // states where only timeout could move
    int code = Success;
    std::string ending;
    try {
        while (true) {
            auto moves = enabled_transitions(program, s);
            if (moves.empty()) {
                bool valid = is_valid_end_state(program, s);
                ending = valid ? "valid end state" : "invalid end state";
                code = valid ? Success : Deadlock;
                break;
            }
            bool only_timeout = std::all_of(moves.begin(), moves.end(),
                                            [&](const Transition& t) { return is_timeout(program, s, t); });
            if (only_timeout && !stalled.insert(s.encode()).second) {
                ending = "timeout stall";
                code = Deadlock;
                break;
            }
            if (trace.steps.size() >= c.max_depth) {
                ending = "depth limit reached";
                code = Failure;
                err << c.model_path << ": simulation stopped after " << c.max_depth << " steps\n";
                break;
            }
            const auto& t = moves[static_cast<std::size_t>(rng() % moves.size())];
            SystemState next = apply_transition(program, s, t);
            checker::TraceStep step;
            step.pid = t.pid;
            step.move = t;
            step.after = canonical_state_digest(next);
            step.delta = checker::compute_delta(program, s, next, t);
            const auto& code_of = program.code(s.processes[static_cast<std::size_t>(t.pid)].tmpl);
            step.template_name = code_of.name;
            step.label = code_of.locations.at(static_cast<std::size_t>(t.loc)).label;
            step.statement = edge_of(program, s, t).text;
            trace.steps.push_back(std::move(step));
            s = std::move(next);
        }
    } catch (const ModelError& e) {
        ending = std::string("model error: ") + e.what();
        code = Failure;
        err << c.model_path << ": " << e.what() << "\n";
    }
    std::string text = checker::format_counterexample(trace, checker::TraceStyle::Text);
    text += "-- " + ending + ": " + describe_state(program, s) + "\n";
    write_document(c, text, out);
    return code;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Workflow verification: check, emit PROMELA, simulate", "wfv"};
    app.require_subcommand(1);
    RunConfig c;

    auto common = [&](CLI::App* sub) {
        sub->add_option("model", c.model_path, "workflow file")->required();
        sub->add_option("--mode", c.mode, "observation mode: flags, scalar or none");
        sub->add_flag("--strict-spin", c.strict_spin, "blocking myRun dispatch and scalar observation by default");
        sub->add_option("--max-array-size", c.max_array_size, "MAXARRAYSIZE bound on pattern sizes")
            ->check(CLI::PositiveNumber);
        sub->add_option("--out,-o", c.out, "output file (check, simulate) or directory (emit)");
    };
    auto limits = [&](CLI::App* sub) {
        sub->add_option("--max-states", c.max_states, "distinct state limit")->check(CLI::PositiveNumber);
        sub->add_option("--max-depth", c.max_depth, "search depth / run length limit")->check(CLI::PositiveNumber);
    };

    auto* check = app.add_subcommand("check", "deadlock check plus LTL properties");
    common(check);
    limits(check);
    check->add_option("--prop", c.props, "property name (repeatable; default: all)");
    check->add_option("--prop-formula", c.prop_formula, "inline LTL formula over the model's propositions");
    check->add_flag("--fair", c.fair, "weak process fairness");
    check->add_flag("--bfs-safety", c.bfs_safety, "breadth-first deadlock search");

    auto* emit = app.add_subcommand("emit", "write <model>.pml, utils.pr and <model>.ltl");
    common(emit);

    auto* simulate = app.add_subcommand("simulate", "one random run");
    common(simulate);
    limits(simulate);
    simulate->add_option("--seed", c.seed, "random seed");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return Success;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return Success;
    } catch (const CLI::ParseError& e) {
        err << "wfv: " << e.what() << "\n";
        return Failure;
    }

    try {
        if (check->parsed()) return cmd_check(c, out, err);
        if (emit->parsed()) return cmd_emit(c, out, err);
        return cmd_simulate(c, out, err);
    } catch (const Fail& f) {
        err << f.message << "\n";
    } catch (const std::exception& e) {
        err << c.model_path << ": " << e.what() << "\n";
    }
    return Failure;
}

} // namespace wfv::cli
