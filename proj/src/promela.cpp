#include "wfv/promela.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace wfv::promela {

std::string emit_pattern_library(const EmitConfig& config)
{
    std::ostringstream out;
    out << "/* Translations of the workflow patterns. */\n"
           "\n"
           "#define MAXARRAYSIZE "
        << config.max_array_size
        << "\n"
           "\n"
           "inline send(q, msg){ q!msg;}\n"
           "\n"
           "inline recv(q, msg){ q?msg;}\n"
           "\n"
           "inline parallelSplit(qs, sizeq, msg){\n"
           "  int n;\n"
           "  n=0;\n"
           "  atomic {\n"
           "    do\n"
           "      :: n<sizeq -> qs[n]!msg[n]; n++;\n"
           "      :: n>=sizeq -> break;\n"
           "    od; }}\n"
           "\n"
           "inline synchronization(qs, sizeq, msgs){\n"
           "  int j, count;\n"
           "  j=0; count=0;\n"
           "  /* MAXARRAYSIZE: The capacity of the arrays defined in the file\n"
           "   * which contains the translations of the workflow patterns */\n"
           "  int aux[MAXARRAYSIZE];\n"
           "  do\n"
           "    ::j<sizeq -> aux[j]=0; j++;\n"
           "    ::j==sizeq -> j=0; break;\n"
           "  od;\n"
           "  skip;\n"
           "  S:\n"
           "    if\n"
           "      ::((aux[j]==0) && (len(qs[j]) > 0) && count<sizeq)->\n"
           "        aux[j]=1; qs[j]?msgs[j]; count++\n"
           "      ::count>=sizeq -> goto E\n"
           "      ::else -> skip;\n"
           "    fi;\n"
           "  j++;\n"
           "  if\n"
           "    ::j==sizeq -> j=0; timeout;\n"
           "    ::j<sizeq -> skip;\n"
           "  fi;\n"
           "  goto S;\n"
           "  E: skip;}\n"
           "\n"
           "inline exclusiveChoice(qs, sizeq, choice, msg){\n"
           "  if :: (choice>=0 && choice<sizeq) -> qs[choice]!msg;\n"
           "     :: else -> skip;\n"
           "  fi;}\n"
           "\n"
           "inline cancelCase(qsCancel, sizeq, piIds, msgs, id){\n"
           "  int i=0;\n"
           "  do :: i<sizeq && piIds[i]==id -> qsCancel[i]!msgs[i];i++;\n"
           "     :: i==sizeq -> break;\n"
           "     :: else -> i++;\n"
           "  od;}\n"
           "\n"
           "/* Extra, not used by emitted models: receive from whichever\n"
           " * channel of qs delivers first, polling like synchronization. */\n"
           "inline simpleMerge(qs, sizeq, msg){\n"
           "  int mi;\n"
           "  mi=0;\n"
           "  do\n"
           "    :: mi<sizeq && len(qs[mi])>0 -> qs[mi]?msg; break\n"
           "    :: mi<sizeq -> mi++\n"
           "    :: mi==sizeq -> mi=0; timeout\n"
           "  od;}\n";
    return out.str();
}

namespace {

// Locals and labels each declaring inline introduces into the proctype.
const std::map<std::string, std::vector<std::string>>& inline_locals()
{
    static const std::map<std::string, std::vector<std::string>> m{
        {"parallelSplit", {"n"}},
        {"synchronization", {"j", "count", "aux", "S", "E"}},
        {"cancelCase", {"i"}},
    };
    return m;
}

std::vector<std::string> split_args(const std::string& text)
{
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char c : text) {
        if (c == '(' || c == '[') ++depth;
        if (c == ')' || c == ']') --depth;
        if (c == ',' && depth == 0) {
            out.push_back(cur);
            cur.clear();
            continue;
        }
        cur += c;
    }
    out.push_back(cur);
    return out;
}

std::string join(const std::vector<std::string>& xs, const std::string& sep)
{
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? sep : "") + xs[i];
    return out;
}

std::string decl_text(const Statement& s)
{
    std::string out = (s.is_chan ? "chan " : "int ") + s.name;
    if (s.size > 0) out += "[" + std::to_string(s.size) + "]";
    if (!s.is_chan && s.value.kind == ExprKind::Const && s.value.value != 0) out += " = " + std::to_string(s.value.value);
    return out;
}

class Printer {
public:
    Printer(const EmitConfig& config, std::string proc) : config_(config), proc_(std::move(proc)) {}

    // One statement as lines; compound statements span several.
    std::vector<std::string> statement(const Statement& s)
    {
        switch (s.kind) {
        case StmtKind::If:
        case StmtKind::Do: return options(s);
        case StmtKind::Atomic:
        case StmtKind::DStep: return block(s.kind == StmtKind::Atomic ? "atomic " : "d_step ", s.body);
        case StmtKind::Unless: {
            std::vector<std::string> out{"{"};
            for (auto& l : sequence(s.body)) out.push_back("  " + l);
            out.push_back("} unless {");
            for (auto& l : sequence(s.escape)) out.push_back("  " + l);
            out.push_back("}");
            return out;
        }
        case StmtKind::Decl: note_decl(s.name); return {decl_text(s)};
        case StmtKind::Label: note_decl(s.name); return {s.name + ":"};
        case StmtKind::Inline: return call(s);
        case StmtKind::Fail: return {"assert(false) /* " + s.name + " */"};
        default: return {head_text(s)};
        }
    }

    std::vector<std::string> sequence(const Sequence& seq)
    {
        std::vector<std::string> out;
        std::string pending_label;
        std::vector<std::vector<std::string>> parts;
        for (const auto& s : seq) {
            auto lines = statement(s);
            if (s.kind == StmtKind::Label) {
                pending_label += lines[0] + " ";
                continue;
            }
            if (lines.empty()) continue;
            if (!pending_label.empty()) {
                lines[0] = pending_label + lines[0];
                pending_label.clear();
            }
            parts.push_back(std::move(lines));
        }
        if (!pending_label.empty()) parts.push_back({pending_label + "skip"});
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i + 1 < parts.size()) parts[i].back() += ";";
            for (auto& l : parts[i]) out.push_back(std::move(l));
        }
        return out;
    }

    void finish() const
    {
        for (const auto& [name, uses] : inline_uses_)
            if (uses > 1)
                throw EmitUnsupported("proctype " + proc_ + " uses " + name +
                                      " more than once; the inline's locals would be redeclared");
        for (const auto& [name, uses] : inline_uses_)
            for (const auto& local : inline_locals().at(name))
                if (declared_.count(local))
                    throw EmitUnsupported("proctype " + proc_ + " declares '" + local + "', which " + name +
                                          " also declares");
    }

private:
    std::vector<std::string> block(const std::string& keyword, const Sequence& body)
    {
        auto inner = sequence(body);
        if (inner.empty()) inner.push_back("skip");
        std::string one = keyword + "{ " + join(inner, " ") + " }";
        if (inner.size() <= 3 && one.size() <= 72) return {one};
        std::vector<std::string> out{keyword + "{"};
        for (auto& l : inner) out.push_back("  " + l);
        out.push_back("}");
        return out;
    }

    std::vector<std::string> options(const Statement& s)
    {
        std::vector<std::string> out{s.kind == StmtKind::If ? "if" : "do"};
        for (const auto& opt : s.options) {
            std::vector<std::vector<std::string>> parts;
            for (const auto& st : opt) parts.push_back(statement(st));
            if (!opt.empty() && opt[0].kind == StmtKind::Guard) parts[0][0] = "(" + parts[0][0] + ")";
            bool flat = std::all_of(parts.begin(), parts.end(), [](const auto& p) { return p.size() == 1; });
            if (flat) {
                std::string line = ":: " + (parts.empty() ? std::string("skip") : parts[0][0]);
                for (std::size_t i = 1; i < parts.size(); ++i) line += (i == 1 ? " -> " : "; ") + parts[i][0];
                out.push_back("  " + line);
                continue;
            }
            auto rest = sequence(Sequence(opt.begin() + 1, opt.end()));
            auto head = parts[0];
            head[0] = ":: " + head[0];
            for (std::size_t i = 1; i < head.size(); ++i) head[i] = "   " + head[i];
            head.back() += " ->";
            for (auto& l : head) out.push_back("  " + l);
            for (auto& l : rest) out.push_back("     " + l);
        }
        out.push_back(s.kind == StmtKind::If ? "fi" : "od");
        return out;
    }

    std::vector<std::string> call(const Statement& s)
    {
        auto args = split_args(s.call_text);
        if (inline_locals().count(s.name)) ++inline_uses_[s.name];
        auto sizeq = [&](std::size_t at) {
            if (args.size() <= at) return;
            int n = std::stoi(args[at]);
            if (n > config_.max_array_size)
                throw std::invalid_argument(s.name + " in " + proc_ + ": sizeq " + std::to_string(n) +
                                            " exceeds MAXARRAYSIZE " + std::to_string(config_.max_array_size));
        };
        std::vector<std::string> out;
        auto hoist = [&](const Statement& d) {
            note_decl(d.name);
            out.push_back(decl_text(d) + ";");
        };
        if (s.name == "parallelSplit") {
            sizeq(1);
            // the message array is passed by name, so it is declared here
            const Statement& msgs = s.body.at(0);
            hoist(msgs);
            for (const auto& st : s.body)
                if (st.kind == StmtKind::Atomic)
                    for (const auto& a : st.body)
                        if (a.kind == StmtKind::Assign) out.push_back(head_text(a) + ";");
            args[2] = msgs.name;
        } else if (s.name == "synchronization") {
            sizeq(1);
            if (!s.body.empty() && s.body[0].kind == StmtKind::Decl && s.body[0].name == args[2]) hoist(s.body[0]);
        } else if (s.name == "cancelCase") {
            sizeq(1);
            const Statement& msgs = s.body.at(0);
            hoist(msgs);
            args[3] = msgs.name;
        } else if (s.name == "exclusiveChoice") {
            sizeq(1);
        } else if (s.name == "simpleMerge") {
            // written out: the kernel's merge blocks until some channel delivers
            sizeq(1);
            out.push_back("/* simpleMerge(" + s.call_text + ") */");
            auto body = sequence(s.body);
            out.insert(out.end(), body.begin(), body.end());
            return out;
        }
        out.push_back(s.name + "(" + join(args, ",") + ")");
        return out;
    }

    void note_decl(const std::string& name) { declared_.insert(name); }

    const EmitConfig& config_;
    std::string proc_;
    std::map<std::string, int> inline_uses_;
    std::set<std::string> declared_;
};

std::vector<std::string> indent(std::vector<std::string> lines, const std::string& by = "  ")
{
    for (auto& l : lines) l = by + l;
    return lines;
}

std::string channel_decl(const ChannelDecl& c)
{
    std::string out = "chan " + c.name;
    if (c.count > 0) out += "[" + std::to_string(c.count) + "]";
    return out + " = [" + std::to_string(c.capacity) + "] of {int};";
}

} // namespace

std::string emit_model_source(const Model& model, const EmitConfig& config)
{
    std::ostringstream out;
    out << "/* File with the translations of the workflow patterns. */\n";
    out << "#include \"" << config.include_name << "\"\n\n";
    for (const auto& c : model.channels) out << channel_decl(c) << "\n";

    // PROMELA initialises an array with one value only; other arrays get
    // their values at the start of init.
    Sequence init_values;
    for (const auto& g : model.globals) {
        out << "int " << g.name;
        if (g.size > 0) out << "[" << g.size << "]";
        std::set<std::int32_t> distinct(g.init.begin(), g.init.end());
        if (g.size > 0 && static_cast<int>(g.init.size()) < g.size && !g.init.empty()) distinct.insert(0);
        if (distinct.size() == 1 && *distinct.begin() != 0) {
            out << " = " << *distinct.begin();
        } else if (distinct.size() > 1) {
            for (std::size_t i = 0; i < g.init.size(); ++i)
                if (g.init[i] != 0)
                    init_values.push_back(stmt::assign(at(g.name, lit(static_cast<std::int32_t>(i))), lit(g.init[i])));
        }
        out << ";\n";
    }
    if (!model.channels.empty() || !model.globals.empty()) out << "\n";

    for (const auto& t : model.templates) {
        Printer p(config, t.name);
        std::vector<std::string> params;
        for (const auto& name : t.params) params.push_back("int " + name);
        out << (t.active ? "active proctype " : "proctype ") << t.name << "(" << join(params, "; ") << "){\n";
        auto lines = p.sequence(t.body);
        if (lines.empty()) lines.push_back("skip");
        for (const auto& l : indent(lines)) out << l << "\n";
        out << "}\n\n";
        p.finish();
    }

    Sequence init = model.init;
    if (!init_values.empty()) {
        if (init.size() == 1 && init[0].kind == StmtKind::Atomic)
            init[0].body.insert(init[0].body.begin(), init_values.begin(), init_values.end());
        else
            init.insert(init.begin(), init_values.begin(), init_values.end());
    }
    Printer p(config, "init");
    auto lines = p.sequence(init);
    if (lines.empty()) lines.push_back("skip");
    out << "init{\n";
    for (const auto& l : indent(lines)) out << l << "\n";
    out << "}\n";
    p.finish();
    return out.str();
}

std::string emit_property_file(const Model& model, const std::string& model_file)
{
    std::ostringstream out;
    out << "#include \"" << model_file << "\"\n";
    auto defines = [&](const std::map<std::string, Expr>& props) {
        for (const auto& [name, e] : props) out << "#define " << name << " (" << to_string(e) << ")\n";
    };
    auto undefines = [&](const std::map<std::string, Expr>& props) {
        for (const auto& [name, e] : props) out << "#undef " << name << "\n";
    };
    if (model.properties.empty()) {
        out << "\n";
        defines(model.propositions);
    }
    for (const auto& p : model.properties) {
        out << "\n";
        defines(p.propositions);
        out << "ltl " << p.name << " { " << p.formula << " }\n";
        undefines(p.propositions);
    }
    return out.str();
}

} // namespace wfv::promela
