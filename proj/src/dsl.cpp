#include "wfv/dsl.hpp"

#include "wfv/ltl.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace wfv::dsl {

using patterns::PatternInvocation;
using patterns::PatternKind;

// ---------------------------------------------------------------- lexer

namespace {

enum class Tok { Ident, Int, String, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::int64_t value = 0;
    SourcePos pos;
};

std::string describe(const Token& t)
{
    switch (t.kind) {
    case Tok::End: return "end of input";
    case Tok::String: return "string \"" + t.text + "\"";
    default: return "'" + t.text + "'";
    }
}

std::vector<Token> lex(std::string_view src)
{
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else if (src[i] != '\r') {
                ++col;
            }
        }
    };
    static const char* two[] = {"==", "!=", "<=", ">=", "&&", "||"};
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
            SourcePos start{line, col};
            advance(2);
            while (i < src.size() && !(src[i] == '*' && i + 1 < src.size() && src[i + 1] == '/')) advance(1);
            if (i >= src.size()) throw SyntaxError(start, "unterminated comment");
            advance(2);
            continue;
        }
        Token t;
        t.pos = {line, col};
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            t.kind = Tok::Ident;
            t.text = std::string(src.substr(i, j - i));
            advance(j - i);
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            t.kind = Tok::Int;
            t.text = std::string(src.substr(i, j - i));
            if (t.text.size() > 10) throw SyntaxError(t.pos, "integer literal too large");
            t.value = std::stoll(t.text);
            if (t.value > 2147483648LL) throw SyntaxError(t.pos, "integer literal too large");
            advance(j - i);
        } else if (c == '"') {
            t.kind = Tok::String;
            advance(1);
            while (true) {
                if (i >= src.size() || src[i] == '\n') throw SyntaxError(t.pos, "unterminated string");
                if (src[i] == '"') break;
                if (src[i] == '\\' && i + 1 < src.size() && (src[i + 1] == '"' || src[i + 1] == '\\')) advance(1);
                t.text += src[i];
                advance(1);
            }
            advance(1);
        } else {
            t.kind = Tok::Punct;
            for (const char* op : two)
                if (src.substr(i, 2) == op) t.text = op;
            if (t.text.empty()) {
                if (std::string_view("{}()[];,=<>+-*/%!|:").find(c) == std::string_view::npos)
                    throw SyntaxError(t.pos, std::string("unexpected character '") + c + "'");
                t.text = std::string(1, c);
            }
            advance(t.text.size());
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.pos = {line, col};
    out.push_back(end);
    return out;
}

const std::set<std::string> kTopKeywords{"workflow", "channels", "cancel", "process", "on_cancel",
                                         "prop",     "ltl",      "init"};
const std::set<std::string> kStepKeywords{"send", "recv",   "skip", "run",  "milestone", "parallel_split",
                                          "sync", "choice", "merge", "ndet", "var",       "chan"};
const std::set<std::string> kReservedWords{"len", "initial", "reached", "id", "parent", "cancellable", "capacity"};

bool is_keyword(const std::string& s)
{
    return kTopKeywords.count(s) || kStepKeywords.count(s) || kReservedWords.count(s);
}

// ---------------------------------------------------------------- parser

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    WorkflowDef workflow()
    {
        WorkflowDef def;
        expect_ident("workflow");
        def.name = name("workflow name");
        expect("{");
        while (!at_punct("}")) {
            const Token& t = peek();
            if (t.kind != Tok::Ident)
                fail_expected({"channels", "var", "cancel", "process", "prop", "ltl", "init", "'}'"});
            if (t.text == "channels") {
                channels(def);
            } else if (t.text == "var") {
                def.vars.push_back(global_var());
            } else if (t.text == "cancel") {
                next();
                def.cancel_channel = name("cancel channel");
                expect(";");
            } else if (t.text == "process") {
                def.processes.push_back(process());
            } else if (t.text == "prop") {
                next();
                def.props.push_back(prop_def());
            } else if (t.text == "ltl") {
                def.properties.push_back(ltl_def());
            } else if (t.text == "init") {
                next();
                const Token& open = peek();
                expect("{");
                auto steps = block_steps("init block", open.pos, {"}"});
                expect("}");
                def.init.insert(def.init.end(), steps.begin(), steps.end());
            } else {
                fail_expected({"channels", "var", "cancel", "process", "prop", "ltl", "init", "'}'"});
            }
        }
        expect("}");
        if (peek().kind != Tok::End) fail_expected({"end of input"});
        return def;
    }

private:
    std::vector<Token> toks_;
    std::size_t at_ = 0;

    const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(at_ + ahead, toks_.size() - 1)]; }
    const Token& next() { return toks_[std::min(at_++, toks_.size() - 1)]; }
    bool at_punct(const char* p) const { return peek().kind == Tok::Punct && peek().text == p; }
    bool at_ident(const char* w) const { return peek().kind == Tok::Ident && peek().text == w; }

    [[noreturn]] void fail_expected(const std::vector<std::string>& expected) const
    {
        std::string msg = expected.size() == 1 ? "expected " + expected[0] : "expected one of ";
        if (expected.size() > 1)
            for (std::size_t i = 0; i < expected.size(); ++i) msg += (i ? ", " : "") + expected[i];
        throw SyntaxError(peek().pos, msg + " but found " + describe(peek()));
    }

    void expect(const char* p)
    {
        if (!at_punct(p)) fail_expected({std::string("'") + p + "'"});
        next();
    }

    void expect_ident(const char* w)
    {
        if (!at_ident(w)) fail_expected({std::string("'") + w + "'"});
        next();
    }

    std::string name(const char* what)
    {
        if (peek().kind != Tok::Ident || is_keyword(peek().text)) fail_expected({what});
        return next().text;
    }

    int integer(const char* what, bool allow_negative = false)
    {
        bool neg = false;
        if (allow_negative && at_punct("-")) {
            next();
            neg = true;
        }
        if (peek().kind != Tok::Int) fail_expected({what});
        std::int64_t v = next().value;
        if (neg) v = -v;
        if (v > std::numeric_limits<std::int32_t>::max() || v < std::numeric_limits<std::int32_t>::min())
            throw SyntaxError(toks_[at_ - 1].pos, "integer literal out of range");
        return static_cast<int>(v);
    }

    void channels(WorkflowDef& def)
    {
        next();
        expect("{");
        while (!at_punct("}")) {
            ChannelDef c;
            c.pos = peek().pos;
            c.name = name("channel name");
            if (at_punct("[")) {
                next();
                c.size = integer("channel array size");
                expect("]");
            }
            if (at_ident("capacity")) {
                next();
                c.capacity = integer("channel capacity");
            }
            expect(";");
            def.channels.push_back(c);
        }
        expect("}");
    }

    VarDef global_var()
    {
        VarDef v;
        v.pos = peek().pos;
        next();
        v.name = name("variable name");
        if (at_punct("[")) {
            next();
            v.size = integer("array size");
            expect("]");
        }
        if (at_punct("=")) {
            next();
            if (at_punct("{")) {
                next();
                v.init.push_back(integer("initial value", true));
                while (at_punct(",")) {
                    next();
                    v.init.push_back(integer("initial value", true));
                }
                expect("}");
            } else {
                v.init.push_back(integer("initial value", true));
            }
        }
        expect(";");
        return v;
    }

    ProcessDef process()
    {
        ProcessDef p;
        p.pos = peek().pos;
        next();
        p.name = name("process name");
        while (!at_punct("{")) {
            if (at_ident("id") && !p.id) {
                next();
                p.id = integer("process id");
            } else if (at_ident("parent") && !p.parent) {
                next();
                p.parent = integer("parent id", true);
            } else if (at_ident("cancellable") && !p.cancellable) {
                next();
                p.cancellable = true;
            } else {
                std::vector<std::string> exp;
                if (!p.id) exp.push_back("'id'");
                if (!p.parent) exp.push_back("'parent'");
                if (!p.cancellable) exp.push_back("'cancellable'");
                exp.push_back("'{'");
                fail_expected(exp);
            }
        }
        SourcePos open = peek().pos;
        next();
        p.body = block_steps("process '" + p.name + "' body", open, {"}"});
        expect("}");
        if (at_ident("on_cancel")) {
            next();
            SourcePos o = peek().pos;
            expect("{");
            p.on_cancel = block_steps("on_cancel block of '" + p.name + "'", o, {"}"});
            expect("}");
        }
        return p;
    }

    PropDef prop_def()
    {
        PropDef d;
        d.pos = peek().pos;
        d.name = name("proposition name");
        expect("=");
        if (at_ident("initial")) {
            next();
            d.kind = PropDef::Kind::Initial;
        } else if (at_ident("reached")) {
            next();
            expect("(");
            d.kind = PropDef::Kind::Reached;
            d.milestone = integer("milestone number");
            expect(")");
        } else {
            d.kind = PropDef::Kind::Expression;
            d.expr = expr();
        }
        expect(";");
        return d;
    }

    LtlDef ltl_def()
    {
        LtlDef l;
        l.pos = peek().pos;
        next();
        l.name = name("property name");
        if (peek().kind != Tok::String) fail_expected({"formula string"});
        l.formula = next().text;
        if (at_punct("{")) {
            next();
            while (!at_punct("}")) l.bindings.push_back(prop_def());
            next();
        } else {
            expect(";");
        }
        return l;
    }

    // Steps until one of `stops`. A top-level keyword inside a block almost
    // always means a brace went missing; report it inside the block.
    std::vector<Step> block_steps(const std::string& what, SourcePos open, const std::set<std::string>& stops)
    {
        std::vector<Step> out;
        while (true) {
            const Token& t = peek();
            if (t.kind == Tok::Punct && stops.count(t.text)) return out;
            bool top = t.kind == Tok::Ident && kTopKeywords.count(t.text) && t.text != "cancel";
            if (t.kind == Tok::End || top) {
                SourcePos where = at_ > 0 ? toks_[at_ - 1].pos : t.pos;
                throw SyntaxError(where, "missing '}' to close " + what + " opened at line " +
                                             std::to_string(open.line) + " (found " + describe(t) + ")");
            }
            out.push_back(step());
        }
    }

    Expr chan_ref()
    {
        std::string n = name("channel");
        if (at_punct("[")) {
            next();
            Expr idx = expr();
            expect("]");
            return at(n, idx);
        }
        return var(n);
    }

    Expr lvalue()
    {
        std::string n = name("variable");
        if (at_punct("[")) {
            next();
            Expr idx = expr();
            expect("]");
            return at(n, idx);
        }
        return var(n);
    }

    Step step()
    {
        Step s;
        s.pos = peek().pos;
        if (peek().kind == Tok::Ident && !is_keyword(peek().text) && peek(1).kind == Tok::Punct &&
            peek(1).text == ":") {
            s.label = next().text;
            next();
            Step inner = step();
            if (!inner.label.empty()) throw SyntaxError(inner.pos, "a step takes at most one label");
            inner.label = s.label;
            inner.pos = s.pos;
            return inner;
        }
        const Token& t = peek();
        if (t.kind != Tok::Ident)
            fail_expected({"a step (send, recv, assignment, skip, run, milestone, parallel_split, sync, choice, "
                           "merge, ndet, var, chan, label)"});
        const std::string w = t.text;
        if (w == "send") {
            next();
            s.kind = StepKind::Send;
            expect("(");
            s.chan = chan_ref();
            expect(",");
            s.value = expr();
            expect(")");
        } else if (w == "recv") {
            next();
            s.kind = StepKind::Recv;
            expect("(");
            s.chan = chan_ref();
            if (at_punct(",")) {
                next();
                s.target = lvalue();
            }
            expect(")");
        } else if (w == "skip") {
            next();
            s.kind = StepKind::Skip;
        } else if (w == "run") {
            next();
            s.kind = StepKind::Run;
            s.name = name("process name");
        } else if (w == "milestone") {
            next();
            s.kind = StepKind::Milestone;
            s.milestone = integer("milestone number");
        } else if (w == "parallel_split" || w == "sync" || w == "choice" || w == "merge") {
            next();
            s.kind = StepKind::Pattern;
            auto& p = s.pattern;
            expect("(");
            p.channel_array = name("channel array");
            expect(",");
            p.size = integer("sizeq");
            if (w == "parallel_split") {
                p.kind = PatternKind::ParallelSplit;
                expect(",");
                p.messages.push_back(expr());
                while (at_punct(",")) {
                    next();
                    p.messages.push_back(expr());
                }
            } else if (w == "sync") {
                p.kind = PatternKind::Synchronization;
                if (at_punct(",")) {
                    next();
                    p.target_array = name("message array");
                }
            } else if (w == "choice") {
                p.kind = PatternKind::ExclusiveChoice;
                expect(",");
                p.choice = expr();
                expect(",");
                p.messages.push_back(expr());
            } else {
                p.kind = PatternKind::SimpleMerge;
                if (at_punct(",")) {
                    next();
                    p.target = lvalue();
                }
            }
            expect(")");
        } else if (w == "ndet") {
            next();
            s.kind = StepKind::Ndet;
            SourcePos open = peek().pos;
            expect("{");
            s.branches.push_back(block_steps("ndet block", open, {"|", "}"}));
            while (at_punct("|")) {
                next();
                s.branches.push_back(block_steps("ndet block", open, {"|", "}"}));
            }
            expect("}");
            return s; // no trailing ';'
        } else if (w == "var") {
            next();
            s.kind = StepKind::Var;
            s.name = name("variable name");
            if (at_punct("[")) {
                next();
                s.size = integer("array size");
                expect("]");
            }
            if (at_punct("=")) {
                next();
                s.init.push_back(lit(integer("initial value", true)));
            }
        } else if (w == "chan") {
            next();
            s.kind = StepKind::Chan;
            s.name = name("channel name");
            if (at_punct("[")) {
                next();
                s.size = integer("array size");
                expect("]");
            }
            if (at_punct("=")) {
                next();
                if (at_punct("{")) {
                    next();
                    s.init.push_back(chan_ref());
                    while (at_punct(",")) {
                        next();
                        s.init.push_back(chan_ref());
                    }
                    expect("}");
                } else {
                    s.init.push_back(chan_ref());
                }
            }
        } else if (!is_keyword(w)) {
            s.kind = StepKind::Assign;
            s.target = lvalue();
            expect("=");
            s.value = expr();
        } else {
            fail_expected({"a step"});
        }
        expect(";");
        return s;
    }

    // precedence climbing: || < && < equality < relational < additive < multiplicative < unary
    Expr expr() { return binary_level(0); }

    static int level_of(const std::string& op)
    {
        if (op == "||") return 0;
        if (op == "&&") return 1;
        if (op == "==" || op == "!=") return 2;
        if (op == "<" || op == "<=" || op == ">" || op == ">=") return 3;
        if (op == "+" || op == "-") return 4;
        if (op == "*" || op == "/" || op == "%") return 5;
        return -1;
    }

    static Op op_of(const std::string& s)
    {
        static const std::map<std::string, Op> ops{
            {"||", Op::Or}, {"&&", Op::And}, {"==", Op::Eq}, {"!=", Op::Ne}, {"<", Op::Lt},
            {"<=", Op::Le}, {">", Op::Gt},   {">=", Op::Ge}, {"+", Op::Add}, {"-", Op::Sub},
            {"*", Op::Mul}, {"/", Op::Div},  {"%", Op::Mod}};
        return ops.at(s);
    }

    Expr binary_level(int level)
    {
        if (level > 5) return unary_expr();
        Expr lhs = binary_level(level + 1);
        while (peek().kind == Tok::Punct && level_of(peek().text) == level) {
            Op op = op_of(next().text);
            Expr rhs = binary_level(level + 1);
            lhs = binary(op, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    Expr unary_expr()
    {
        if (at_punct("!")) {
            next();
            return unary(Op::Not, unary_expr());
        }
        if (at_punct("-")) {
            next();
            if (peek().kind == Tok::Int) {
                std::int64_t v = -next().value;
                return lit(static_cast<std::int32_t>(v));
            }
            return unary(Op::Neg, unary_expr());
        }
        return primary();
    }

    Expr primary()
    {
        const Token& t = peek();
        if (t.kind == Tok::Int) {
            if (t.value > std::numeric_limits<std::int32_t>::max())
                throw SyntaxError(t.pos, "integer literal out of range");
            return lit(static_cast<std::int32_t>(next().value));
        }
        if (at_punct("(")) {
            next();
            Expr e = expr();
            expect(")");
            return e;
        }
        if (at_ident("len")) {
            next();
            expect("(");
            Expr c = chan_ref();
            expect(")");
            return len(c);
        }
        if (t.kind == Tok::Ident && !is_keyword(t.text)) return lvalue();
        fail_expected({"an expression"});
    }
};

// ---------------------------------------------------------------- printer

int expr_level(const Expr& e)
{
    if (e.kind == ExprKind::Unary) return 6;
    if (e.kind == ExprKind::Const && e.value < 0) return 6;
    if (e.kind != ExprKind::Binary) return 7;
    switch (e.op) {
    case Op::Or: return 0;
    case Op::And: return 1;
    case Op::Eq:
    case Op::Ne: return 2;
    case Op::Lt:
    case Op::Le:
    case Op::Gt:
    case Op::Ge: return 3;
    case Op::Add:
    case Op::Sub: return 4;
    default: return 5;
    }
}

std::string print_expr(const Expr& e);

std::string wrap_if(const Expr& e, bool paren)
{
    std::string s = print_expr(e);
    return paren ? "(" + s + ")" : s;
}

std::string print_expr(const Expr& e)
{
    switch (e.kind) {
    case ExprKind::Const: return std::to_string(e.value);
    case ExprKind::Var: return e.name;
    case ExprKind::Index: return e.name + "[" + print_expr(e.args[0]) + "]";
    case ExprKind::Len: return "len(" + print_expr(e.args[0]) + ")";
    case ExprKind::Unary: {
        const Expr& a = e.args[0];
        // `-3` would read back as a literal
        bool paren = expr_level(a) < 6 || (e.op == Op::Neg && a.kind == ExprKind::Const);
        return std::string(e.op == Op::Not ? "!" : "-") + wrap_if(a, paren);
    }
    case ExprKind::Binary: {
        int lvl = expr_level(e);
        return wrap_if(e.args[0], expr_level(e.args[0]) < lvl) + " " + op_symbol(e.op) + " " +
               wrap_if(e.args[1], expr_level(e.args[1]) <= lvl);
    }
    }
    return "?";
}

void print_steps(std::ostringstream& out, const std::vector<Step>& steps, int indent);

void print_step(std::ostringstream& out, const Step& s, int indent)
{
    std::string pad(static_cast<std::size_t>(indent), ' ');
    out << pad;
    if (!s.label.empty()) out << s.label << ": ";
    const auto& p = s.pattern;
    switch (s.kind) {
    case StepKind::Send: out << "send(" << print_expr(s.chan) << ", " << print_expr(s.value) << ");\n"; break;
    case StepKind::Recv:
        out << "recv(" << print_expr(s.chan);
        if (s.target.kind != ExprKind::Const) out << ", " << print_expr(s.target);
        out << ");\n";
        break;
    case StepKind::Assign: out << print_expr(s.target) << " = " << print_expr(s.value) << ";\n"; break;
    case StepKind::Skip: out << "skip;\n"; break;
    case StepKind::Run: out << "run " << s.name << ";\n"; break;
    case StepKind::Milestone: out << "milestone " << s.milestone << ";\n"; break;
    case StepKind::Pattern:
        switch (p.kind) {
        case PatternKind::ParallelSplit:
            out << "parallel_split(" << p.channel_array << ", " << p.size;
            for (const auto& m : p.messages) out << ", " << print_expr(m);
            break;
        case PatternKind::Synchronization:
            out << "sync(" << p.channel_array << ", " << p.size;
            if (!p.target_array.empty()) out << ", " << p.target_array;
            break;
        case PatternKind::ExclusiveChoice:
            out << "choice(" << p.channel_array << ", " << p.size << ", " << print_expr(*p.choice) << ", "
                << print_expr(p.messages.at(0));
            break;
        case PatternKind::SimpleMerge:
            out << "merge(" << p.channel_array << ", " << p.size;
            if (p.target) out << ", " << print_expr(*p.target);
            break;
        default: out << "skip;\n"; return;
        }
        out << ");\n";
        break;
    case StepKind::Ndet:
        out << "ndet {\n";
        for (std::size_t b = 0; b < s.branches.size(); ++b) {
            if (b) out << pad << "|\n";
            print_steps(out, s.branches[b], indent + 2);
        }
        out << pad << "}\n";
        break;
    case StepKind::Var:
        out << "var " << s.name;
        if (s.size) out << "[" << s.size << "]";
        if (!s.init.empty()) out << " = " << print_expr(s.init[0]);
        out << ";\n";
        break;
    case StepKind::Chan:
        out << "chan " << s.name;
        if (s.size) out << "[" << s.size << "]";
        if (!s.init.empty()) {
            out << " = ";
            if (s.size) {
                out << "{ ";
                for (std::size_t i = 0; i < s.init.size(); ++i) out << (i ? ", " : "") << print_expr(s.init[i]);
                out << " }";
            } else {
                out << print_expr(s.init[0]);
            }
        }
        out << ";\n";
        break;
    }
}

void print_steps(std::ostringstream& out, const std::vector<Step>& steps, int indent)
{
    for (const auto& s : steps) print_step(out, s, indent);
}

std::string print_prop(const PropDef& d)
{
    switch (d.kind) {
    case PropDef::Kind::Initial: return d.name + " = initial;";
    case PropDef::Kind::Reached: return d.name + " = reached(" + std::to_string(d.milestone) + ");";
    case PropDef::Kind::Expression: return d.name + " = " + print_expr(d.expr) + ";";
    }
    return "";
}

std::string quote(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

} // namespace

WorkflowDef parse_workflow(std::string_view text)
{
    return Parser(lex(text)).workflow();
}

std::string print_workflow(const WorkflowDef& def)
{
    std::ostringstream out;
    out << "workflow " << def.name << " {\n";
    if (!def.channels.empty()) {
        out << "  channels {\n";
        for (const auto& c : def.channels) {
            out << "    " << c.name;
            if (c.size) out << "[" << c.size << "]";
            if (c.capacity != 1) out << " capacity " << c.capacity;
            out << ";\n";
        }
        out << "  }\n";
    }
    for (const auto& v : def.vars) {
        out << "  var " << v.name;
        if (v.size) out << "[" << v.size << "]";
        if (v.init.size() == 1 && !v.size) {
            out << " = " << v.init[0];
        } else if (!v.init.empty()) {
            out << " = {";
            for (std::size_t i = 0; i < v.init.size(); ++i) out << (i ? ", " : " ") << v.init[i];
            out << " }";
        }
        out << ";\n";
    }
    if (!def.cancel_channel.empty()) out << "  cancel " << def.cancel_channel << ";\n";
    for (const auto& p : def.processes) {
        out << "\n  process " << p.name;
        if (p.id) out << " id " << *p.id;
        if (p.parent) out << " parent " << *p.parent;
        if (p.cancellable) out << " cancellable";
        out << " {\n";
        print_steps(out, p.body, 4);
        out << "  }";
        if (!p.on_cancel.empty()) {
            out << " on_cancel {\n";
            print_steps(out, p.on_cancel, 4);
            out << "  }";
        }
        out << "\n";
    }
    if (!def.props.empty()) out << "\n";
    for (const auto& d : def.props) out << "  prop " << print_prop(d) << "\n";
    if (!def.properties.empty()) out << "\n";
    for (const auto& l : def.properties) {
        out << "  ltl " << l.name << " " << quote(l.formula);
        if (l.bindings.empty()) {
            out << ";\n";
            continue;
        }
        out << " {\n";
        for (const auto& b : l.bindings) out << "    " << print_prop(b) << "\n";
        out << "  }\n";
    }
    if (!def.init.empty()) {
        out << "\n  init {\n";
        print_steps(out, def.init, 4);
        out << "  }\n";
    }
    out << "}\n";
    return out.str();
}

const ProcessDef* WorkflowDef::find_process(const std::string& n) const
{
    for (const auto& p : processes)
        if (p.name == n) return &p;
    return nullptr;
}

const ChannelDef* WorkflowDef::find_channel(const std::string& n) const
{
    for (const auto& c : channels)
        if (c.name == n) return &c;
    return nullptr;
}

// ---------------------------------------------------------------- validation

std::string to_string(const Diagnostic& d)
{
    return std::to_string(d.pos.line) + ":" + std::to_string(d.pos.column) + ": " +
           (d.severity == Severity::Error ? "error " : "warning ") + d.code + ": " + d.message;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics)
{
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

namespace {

const std::set<std::string> kReservedGlobals{"piIds", "done", "s"};

void for_each_step(const std::vector<Step>& steps, const std::function<void(const Step&)>& fn)
{
    for (const auto& s : steps) {
        fn(s);
        for (const auto& b : s.branches) for_each_step(b, fn);
    }
}

// ids with their parents, including the implicit case root
std::map<int, int> id_tree(const WorkflowDef& def)
{
    std::map<int, int> parents;
    bool any = false;
    for (const auto& p : def.processes) {
        if (!p.id) continue;
        any = true;
        if (!parents.count(*p.id)) parents[*p.id] = p.parent.value_or(*p.id == 0 ? -1 : 0);
    }
    if (any && !parents.count(0)) parents[0] = -1;
    return parents;
}

struct Validator {
    const WorkflowDef& def;
    int max_array_size;
    std::vector<Diagnostic> out;
    std::map<std::string, int> global_channels;
    std::set<std::string> global_vars;
    std::map<std::string, std::string> milestone_owner; // index text -> process
    std::set<int> milestones;
    bool uses_registry = false;

    void error(const std::string& code, const std::string& msg, SourcePos pos)
    {
        out.push_back({Severity::Error, code, msg, pos});
    }
    void warning(const std::string& code, const std::string& msg, SourcePos pos)
    {
        out.push_back({Severity::Warning, code, msg, pos});
    }

    void declarations()
    {
        std::set<std::string> seen;
        for (const auto& c : def.channels) {
            if (!seen.insert(c.name).second) error("DUPLICATE_DECLARATION", "'" + c.name + "' declared twice", c.pos);
            if (kReservedGlobals.count(c.name)) error("RESERVED_NAME", "'" + c.name + "' is reserved", c.pos);
            if (c.capacity < 0) error("INVALID_CAPACITY", "channel '" + c.name + "' has negative capacity", c.pos);
            global_channels[c.name] = c.size;
        }
        for (const auto& v : def.vars) {
            if (!seen.insert(v.name).second) error("DUPLICATE_DECLARATION", "'" + v.name + "' declared twice", v.pos);
            if (kReservedGlobals.count(v.name)) error("RESERVED_NAME", "'" + v.name + "' is reserved", v.pos);
            std::size_t cap = v.size ? static_cast<std::size_t>(v.size) : 1;
            if (v.init.size() > cap)
                error("TOO_MANY_INITIALIZERS", "'" + v.name + "' has more initial values than elements", v.pos);
            global_vars.insert(v.name);
        }
    }

    void tree()
    {
        std::map<std::string, const ProcessDef*> names;
        std::map<int, const ProcessDef*> ids;
        for (const auto& p : def.processes) {
            if (!names.emplace(p.name, &p).second)
                error("DUPLICATE_PROCESS", "process '" + p.name + "' declared twice", p.pos);
            if (p.name == "myRun") error("RESERVED_NAME", "'myRun' is reserved", p.pos);
            if (p.id) {
                uses_registry = true;
                if (!ids.emplace(*p.id, &p).second)
                    error("DUPLICATE_ID", "id " + std::to_string(*p.id) + " used by '" + ids[*p.id]->name +
                                              "' and '" + p.name + "'",
                          p.pos);
            } else if (p.parent) {
                error("PARENT_WITHOUT_ID", "process '" + p.name + "' has a parent but no id", p.pos);
            }
        }
        if (!uses_registry) return;
        auto parents = id_tree(def);
        auto pos_of = [&](int id) { return ids.count(id) ? ids[id]->pos : SourcePos{}; };
        int roots = 0;
        for (const auto& [id, parent] : parents) {
            if (parent == -1) {
                ++roots;
                continue;
            }
            if (!parents.count(parent))
                error("UNKNOWN_PARENT", "process id " + std::to_string(id) + " names unknown parent " +
                                            std::to_string(parent),
                      pos_of(id));
        }
        if (roots > 1) error("MULTIPLE_ROOTS", std::to_string(roots) + " processes have parent -1", SourcePos{});
        std::set<int> reported;
        for (const auto& [id, parent] : parents) {
            std::vector<int> chain{id};
            int cur = parent;
            while (cur != -1 && parents.count(cur)) {
                auto hit = std::find(chain.begin(), chain.end(), cur);
                if (hit != chain.end()) {
                    if (!reported.count(cur)) {
                        std::string path;
                        for (auto it = hit; it != chain.end(); ++it) {
                            reported.insert(*it);
                            path += std::to_string(*it) + " -> ";
                        }
                        error("PARENT_CYCLE", "parent cycle " + path + std::to_string(cur), pos_of(cur));
                    }
                    break;
                }
                chain.push_back(cur);
                cur = parents[cur];
            }
        }
        int expected = 0;
        for (const auto& [id, parent] : parents) {
            if (id != expected) {
                error("NON_DENSE_IDS", "process ids must be 0.." + std::to_string(parents.size() - 1) +
                                           "; found " + std::to_string(id),
                      pos_of(id));
                break;
            }
            ++expected;
        }
    }

    void cancellation()
    {
        const ChannelDef* cancel = def.cancel_channel.empty() ? nullptr : def.find_channel(def.cancel_channel);
        if (!def.cancel_channel.empty()) {
            if (!cancel || cancel->size == 0)
                error("CANCEL_CHANNEL_MISSING", "cancel channel '" + def.cancel_channel +
                                                    "' is not a declared channel array",
                      SourcePos{});
            else if (cancel->size > max_array_size)
                error("SIZEQ_EXCEEDS_MAX", "cancelCase sizeq " + std::to_string(cancel->size) + " on '" +
                                               cancel->name + "' exceeds MAXARRAYSIZE " +
                                               std::to_string(max_array_size),
                      cancel->pos);
        }
        for (const auto& p : def.processes) {
            if (!p.on_cancel.empty() && !p.cancellable)
                error("ON_CANCEL_WITHOUT_CANCELLABLE", "process '" + p.name + "' has on_cancel but is not cancellable",
                      p.pos);
            if (!p.cancellable) continue;
            if (!p.id) {
                error("CANCELLABLE_WITHOUT_ID", "cancellable process '" + p.name + "' needs an id", p.pos);
                continue;
            }
            if (def.cancel_channel.empty()) {
                error("CANCEL_CHANNEL_MISSING", "cancellable process '" + p.name + "' but no `cancel` declaration",
                      p.pos);
            } else if (cancel && cancel->size > 0 && *p.id >= cancel->size) {
                error("CANCEL_SLOT_MISSING", "'" + cancel->name + "' has no slot for id " + std::to_string(*p.id),
                      p.pos);
            }
        }
    }

    struct Scope {
        std::map<std::string, int> channels; // local channel arrays
        std::map<std::string, int> vars;     // local variables -> size
    };

    bool known_name(const Scope& sc, const std::string& n) const
    {
        return sc.vars.count(n) || sc.channels.count(n) || global_vars.count(n) || global_channels.count(n) ||
               (n == "piIds" && uses_registry);
    }

    void check_expr(const Scope& sc, const Expr& e, SourcePos pos)
    {
        if ((e.kind == ExprKind::Var || e.kind == ExprKind::Index) && !known_name(sc, e.name))
            error("UNDECLARED_VARIABLE", "'" + e.name + "' is not declared", pos);
        for (const auto& a : e.args) check_expr(sc, a, pos);
    }

    std::optional<int> channel_size(const Scope& sc, const std::string& n) const
    {
        if (auto it = sc.channels.find(n); it != sc.channels.end()) return it->second;
        if (auto it = global_channels.find(n); it != global_channels.end()) return it->second;
        return std::nullopt;
    }

    void check_chan(const Scope& sc, const Expr& ref, SourcePos pos)
    {
        auto size = channel_size(sc, ref.name);
        if (!size) {
            error("UNDECLARED_CHANNEL", "channel '" + ref.name + "' is not declared", pos);
            return;
        }
        if (ref.kind == ExprKind::Var && *size != 0)
            error("UNDECLARED_CHANNEL", "'" + ref.name + "' is a channel array; index it", pos);
        if (ref.kind == ExprKind::Index) {
            if (*size == 0) {
                error("UNDECLARED_CHANNEL", "'" + ref.name + "' is not a channel array", pos);
            } else {
                const Expr& idx = ref.args[0];
                if (idx.kind == ExprKind::Const && (idx.value < 0 || idx.value >= *size))
                    error("UNDECLARED_CHANNEL", "'" + print_expr(ref) + "' is out of range", pos);
                check_expr(sc, idx, pos);
            }
        }
    }

    void check_pattern(const Scope& sc, const Step& s)
    {
        const auto& p = s.pattern;
        const char* what = p.kind == PatternKind::ParallelSplit     ? "parallel_split"
                           : p.kind == PatternKind::Synchronization ? "sync"
                           : p.kind == PatternKind::ExclusiveChoice ? "choice"
                                                                    : "merge";
        auto size = channel_size(sc, p.channel_array);
        if (!size || *size == 0) {
            error("UNDECLARED_CHANNEL", std::string(what) + ": '" + p.channel_array + "' is not a channel array",
                  s.pos);
        } else if (p.size > *size) {
            error("PATTERN_SIZE_MISMATCH", std::string(what) + ": sizeq " + std::to_string(p.size) +
                                               " exceeds size of '" + p.channel_array + "' (" +
                                               std::to_string(*size) + ")",
                  s.pos);
        }
        if (p.size < 1)
            error("PATTERN_SIZE_MISMATCH", std::string(what) + ": sizeq must be at least 1", s.pos);
        if (p.size > max_array_size && p.kind != PatternKind::SimpleMerge)
            error("SIZEQ_EXCEEDS_MAX", std::string(what) + ": sizeq " + std::to_string(p.size) +
                                           " exceeds MAXARRAYSIZE " + std::to_string(max_array_size),
                  s.pos);
        if (p.kind == PatternKind::ParallelSplit && p.messages.size() != 1 &&
            static_cast<int>(p.messages.size()) != p.size)
            error("PATTERN_SIZE_MISMATCH", "parallel_split: " + std::to_string(p.messages.size()) +
                                               " messages for sizeq " + std::to_string(p.size),
                  s.pos);
        for (const auto& m : p.messages) check_expr(sc, m, s.pos);
        if (p.target) check_expr(sc, *p.target, s.pos);
        if (p.choice) {
            check_expr(sc, *p.choice, s.pos);
            if (p.choice->kind == ExprKind::Const && (p.choice->value < 0 || p.choice->value >= p.size))
                warning("CHOICE_OUT_OF_RANGE", "choice " + std::to_string(p.choice->value) + " is outside 0.." +
                                                   std::to_string(p.size - 1) + "; no branch will be taken",
                        s.pos);
        }
        if (!p.target_array.empty()) {
            auto it = sc.vars.find(p.target_array);
            bool global_array = false;
            for (const auto& v : def.vars) global_array = global_array || (v.name == p.target_array && v.size > 0);
            if (it == sc.vars.end() && !global_array)
                error("UNDECLARED_VARIABLE", "sync: message array '" + p.target_array + "' is not declared", s.pos);
            else if (it != sc.vars.end() && it->second < p.size)
                error("PATTERN_SIZE_MISMATCH", "sync: '" + p.target_array + "' is smaller than sizeq", s.pos);
        }
    }

    void steps(const Scope& sc, const std::vector<Step>& body, const std::string& owner)
    {
        for (const auto& s : body) {
            switch (s.kind) {
            case StepKind::Send:
                check_chan(sc, s.chan, s.pos);
                check_expr(sc, s.value, s.pos);
                break;
            case StepKind::Recv:
                check_chan(sc, s.chan, s.pos);
                if (s.target.kind != ExprKind::Const) check_expr(sc, s.target, s.pos);
                break;
            case StepKind::Assign:
                check_expr(sc, s.target, s.pos);
                check_expr(sc, s.value, s.pos);
                break;
            case StepKind::Pattern: check_pattern(sc, s); break;
            case StepKind::Ndet:
                for (const auto& b : s.branches) steps(sc, b, owner);
                break;
            case StepKind::Milestone: {
                if (s.milestone < 1) {
                    error("INVALID_MILESTONE", "milestones are numbered from 1", s.pos);
                    break;
                }
                auto key = std::to_string(s.milestone);
                auto [it, fresh] = milestone_owner.emplace(key, owner);
                if (!fresh && it->second != owner)
                    error("DUPLICATE_MILESTONE", "milestone " + key + " already used by '" + it->second + "'", s.pos);
                milestones.insert(s.milestone);
                break;
            }
            case StepKind::Run:
                if (!def.find_process(s.name))
                    error("UNKNOWN_PROCESS", "run: no process named '" + s.name + "'", s.pos);
                break;
            case StepKind::Chan:
                if (s.size && static_cast<int>(s.init.size()) > s.size)
                    error("TOO_MANY_INITIALIZERS", "'" + s.name + "' has more aliases than elements", s.pos);
                for (const auto& c : s.init) check_chan(sc, c, s.pos);
                break;
            case StepKind::Var:
            case StepKind::Skip: break;
            }
        }
    }

    static Scope collect_locals(const std::vector<Step>& a, const std::vector<Step>& b)
    {
        Scope sc;
        auto add = [&](const Step& s) {
            if (s.kind == StepKind::Var) sc.vars[s.name] = s.size;
            if (s.kind == StepKind::Chan) sc.channels[s.name] = s.size;
        };
        for_each_step(a, add);
        for_each_step(b, add);
        return sc;
    }

    void bodies()
    {
        for (const auto& p : def.processes) {
            Scope sc = collect_locals(p.body, p.on_cancel);
            steps(sc, p.body, p.name);
            steps(sc, p.on_cancel, p.name);
        }
        Scope sc = collect_locals(def.init, {});
        steps(sc, def.init, "init");
    }

    void prop(const PropDef& d)
    {
        if (d.kind == PropDef::Kind::Reached && !milestones.count(d.milestone))
            error("PROP_UNKNOWN_MILESTONE", "'" + d.name + "' refers to milestone " + std::to_string(d.milestone) +
                                                ", which no process reaches",
                  d.pos);
        if (d.kind == PropDef::Kind::Expression) check_expr(Scope{}, d.expr, d.pos);
    }

    void properties()
    {
        std::set<std::string> globals;
        for (const auto& d : def.props) {
            if (!globals.insert(d.name).second)
                error("DUPLICATE_PROPOSITION", "proposition '" + d.name + "' defined twice", d.pos);
            prop(d);
        }
        std::set<std::string> names;
        for (const auto& l : def.properties) {
            if (!names.insert(l.name).second)
                error("DUPLICATE_PROPERTY", "property '" + l.name + "' defined twice", l.pos);
            std::set<std::string> available = globals;
            std::set<std::string> local;
            for (const auto& b : l.bindings) {
                if (!local.insert(b.name).second)
                    error("DUPLICATE_PROPOSITION", "proposition '" + b.name + "' bound twice in '" + l.name + "'",
                          b.pos);
                prop(b);
                available.insert(b.name);
            }
            try {
                ltl::parse_formula(l.formula, available);
            } catch (const ltl::UnknownProposition& e) {
                error("UNKNOWN_PROPOSITION", "property '" + l.name + "': unknown proposition '" + e.name() + "'",
                      l.pos);
            } catch (const SyntaxError& e) {
                error("LTL_SYNTAX", "property '" + l.name + "', column " + std::to_string(e.pos().column) + ": " +
                                        e.message(),
                      l.pos);
            }
        }
    }
};

} // namespace

std::vector<Diagnostic> validate_workflow(const WorkflowDef& def, int max_array_size)
{
    Validator v{def, max_array_size, {}, {}, {}, {}, {}, false};
    v.declarations();
    v.tree();
    v.cancellation();
    v.bodies();
    v.properties();
    return v.out;
}

// ---------------------------------------------------------------- compilation

patterns::ProcessRegistry build_registry(const WorkflowDef& def)
{
    patterns::ProcessRegistry reg;
    std::map<int, std::string> names;
    for (const auto& p : def.processes)
        if (p.id && !names.count(*p.id)) names[*p.id] = p.name;
    for (const auto& [id, parent] : id_tree(def)) reg.add(id, names.count(id) ? names[id] : "", parent);
    return reg;
}

int max_milestone(const WorkflowDef& def)
{
    int k = 0;
    auto scan = [&](const Step& s) {
        if (s.kind == StepKind::Milestone) k = std::max(k, s.milestone);
    };
    for (const auto& p : def.processes) {
        for_each_step(p.body, scan);
        for_each_step(p.on_cancel, scan);
    }
    for_each_step(def.init, scan);
    return k;
}

namespace {

bool is_simple(const Statement& s)
{
    switch (s.kind) {
    case StmtKind::Assign:
    case StmtKind::Send:
    case StmtKind::Recv:
    case StmtKind::Skip:
    case StmtKind::Run: return true;
    case StmtKind::Inline: return s.name == "send" || s.name == "recv";
    default: return false;
    }
}

struct Compiler {
    const WorkflowDef& def;
    const CompileOptions& opt;
    patterns::ProcessRegistry registry;
    bool uses_registry = false;
    int milestone_count = 0;
    Model model;

    Statement milestone_store(int k) const
    {
        if (opt.mode == ObservationMode::Flags) return stmt::assign(at("done", lit(k)), lit(1));
        return stmt::assign(var("s"), lit(k));
    }

    Sequence steps(const patterns::ExpansionContext& ctx, const std::vector<Step>& body, const std::string& owner)
    {
        Sequence out;
        for (const auto& s : body) {
            if (!s.label.empty()) out.push_back(stmt::label(s.label));
            try {
                step(ctx, s, owner, out);
            } catch (const patterns::PatternError& e) {
                throw CompileError(std::to_string(s.pos.line) + ":" + std::to_string(s.pos.column) + ": " + e.what());
            }
        }
        return out;
    }

    void step(const patterns::ExpansionContext& ctx, const Step& s, const std::string& owner, Sequence& out)
    {
        auto append = [&](Sequence seq) {
            for (auto& x : seq) out.push_back(std::move(x));
        };
        switch (s.kind) {
        case StepKind::Send: append(patterns::expand_sequence(ctx, s.chan, s.value, patterns::Side::Sender)); break;
        case StepKind::Recv:
            append(patterns::expand_sequence(ctx, s.chan, s.target.kind == ExprKind::Const ? lit(0) : s.target,
                                             patterns::Side::Receiver));
            break;
        case StepKind::Assign: out.push_back(stmt::assign(s.target, s.value)); break;
        case StepKind::Skip: out.push_back(stmt::skip()); break;
        case StepKind::Pattern: append(patterns::expand(ctx, s.pattern)); break;
        case StepKind::Ndet: {
            std::vector<Sequence> options;
            for (const auto& b : s.branches) {
                Sequence seq = steps(ctx, b, owner);
                if (seq.empty()) seq.push_back(stmt::skip());
                options.push_back(std::move(seq));
            }
            out.push_back(stmt::if_(std::move(options)));
            break;
        }
        case StepKind::Milestone: {
            model.milestones[s.milestone] = owner;
            if (opt.mode == ObservationMode::None) break;
            Statement store = milestone_store(s.milestone);
            // executes together with the statement it follows
            if (!out.empty() && is_simple(out.back())) {
                Statement prev = std::move(out.back());
                out.back() = stmt::atomic({std::move(prev), std::move(store)});
            } else {
                out.push_back(std::move(store));
            }
            break;
        }
        case StepKind::Run: {
            // sub-processes start through myRun; init starts its processes directly
            const ProcessDef* target = def.find_process(s.name);
            if (target && target->id && owner != "init") {
                PatternInvocation inv;
                inv.kind = PatternKind::MyRun;
                inv.id = target->id;
                append(patterns::expand(ctx, inv));
            } else {
                out.push_back(stmt::run(s.name));
            }
            break;
        }
        case StepKind::Var:
            out.push_back(stmt::decl(s.name, s.size, false, s.init.empty() ? 0 : s.init[0].value));
            break;
        case StepKind::Chan:
            out.push_back(stmt::decl(s.name, s.size, true));
            for (std::size_t i = 0; i < s.init.size(); ++i)
                out.push_back(stmt::assign(s.size ? at(s.name, lit(static_cast<std::int32_t>(i))) : var(s.name),
                                           s.init[i]));
            break;
        }
    }

    std::set<std::string> taken_names(const ProcessDef* p) const
    {
        std::set<std::string> taken;
        for (const auto& c : def.channels) taken.insert(c.name);
        for (const auto& v : def.vars) taken.insert(v.name);
        taken.insert({"piIds", "done", "s"});
        auto add = [&](const Step& s) {
            if (s.kind == StepKind::Var || s.kind == StepKind::Chan) taken.insert(s.name);
            if (s.kind == StepKind::Assign) taken.insert(s.target.name);
        };
        if (p) {
            for_each_step(p->body, add);
            for_each_step(p->on_cancel, add);
        } else {
            for_each_step(def.init, add);
        }
        return taken;
    }

    patterns::ChannelScope scope_for(const std::vector<Step>& a, const std::vector<Step>& b) const
    {
        patterns::ChannelScope scope;
        for (const auto& c : def.channels) scope.channels[c.name] = c.size;
        auto add = [&](const Step& s) {
            if (s.kind == StepKind::Chan) scope.channels[s.name] = s.size;
        };
        for_each_step(a, add);
        for_each_step(b, add);
        return scope;
    }

    ProcessTemplate process(const ProcessDef& p)
    {
        patterns::LocalNamer namer(taken_names(&p));
        auto scope = scope_for(p.body, p.on_cancel);
        patterns::ExpansionContext ctx;
        ctx.scope = &scope;
        ctx.namer = &namer;
        ctx.registry = uses_registry ? &registry : nullptr;
        ctx.max_array_size = opt.max_array_size;
        if (!def.cancel_channel.empty()) ctx.cancel_array = def.cancel_channel;

        ProcessTemplate t;
        t.name = p.name;
        Sequence main = steps(ctx, p.body, p.name);
        if (p.cancellable) {
            const ChannelDef* cancel = def.find_channel(def.cancel_channel);
            Sequence escape{stmt::guard(gt(len(at(def.cancel_channel, lit(*p.id))), lit(0)))};
            try {
                for (auto& s : patterns::expand_cancel_case(ctx, def.cancel_channel, cancel->size, *p.id))
                    escape.push_back(std::move(s));
            } catch (const patterns::PatternError& e) {
                throw CompileError(std::to_string(p.pos.line) + ":" + std::to_string(p.pos.column) + ": " + e.what());
            }
            for (auto& s : steps(ctx, p.on_cancel, p.name)) escape.push_back(std::move(s));
            t.body.push_back(stmt::unless(std::move(main), std::move(escape)));
        } else {
            t.body = std::move(main);
        }
        return t;
    }

    Expr binding(const PropDef& d) const
    {
        switch (d.kind) {
        case PropDef::Kind::Initial: {
            if (opt.mode == ObservationMode::Scalar) return eq(var("s"), lit(0));
            if (milestone_count == 0) return lit(1);
            Expr e = eq(at("done", lit(1)), lit(0));
            for (int k = 2; k <= milestone_count; ++k) e = e && eq(at("done", lit(k)), lit(0));
            return e;
        }
        case PropDef::Kind::Reached:
            if (opt.mode == ObservationMode::Scalar) return eq(var("s"), lit(d.milestone));
            return eq(at("done", lit(d.milestone)), lit(1));
        case PropDef::Kind::Expression: return d.expr;
        }
        return lit(0);
    }

    bool observable(const PropDef& d) const
    {
        return d.kind == PropDef::Kind::Expression || opt.mode != ObservationMode::None;
    }

    Model run()
    {
        auto diags = validate_workflow(def, opt.max_array_size);
        if (has_errors(diags)) {
            std::string msg = "workflow '" + def.name + "' has errors:";
            for (const auto& d : diags)
                if (d.severity == Severity::Error) msg += "\n  " + to_string(d);
            throw CompileError(msg);
        }
        for (const auto& p : def.processes) uses_registry = uses_registry || p.id.has_value();
        if (uses_registry) registry = build_registry(def);
        milestone_count = max_milestone(def);

        model.name = def.name;
        model.observation = opt.mode;
        for (const auto& c : def.channels) model.channels.push_back({c.name, c.size, c.capacity});
        for (const auto& v : def.vars) model.globals.push_back({v.name, v.size, v.init});
        if (uses_registry) model.globals.push_back({"piIds", registry.size(), registry.pi_ids()});
        if (opt.mode == ObservationMode::Flags && milestone_count > 0)
            model.globals.push_back({"done", milestone_count + 1, {}});
        if (opt.mode == ObservationMode::Scalar) model.globals.push_back({"s", 0, {}});

        if (uses_registry) {
            try {
                model.templates.push_back(patterns::build_my_run(registry, opt.strict_spin));
            } catch (const patterns::PatternError& e) {
                throw CompileError(e.what());
            }
        }
        for (const auto& p : def.processes) model.templates.push_back(process(p));

        patterns::LocalNamer namer(taken_names(nullptr));
        auto scope = scope_for(def.init, {});
        patterns::ExpansionContext ctx;
        ctx.scope = &scope;
        ctx.namer = &namer;
        ctx.registry = uses_registry ? &registry : nullptr;
        ctx.max_array_size = opt.max_array_size;
        Sequence init = steps(ctx, def.init, "init");
        if (!init.empty()) model.init.push_back(stmt::atomic(std::move(init)));

        std::map<std::string, Expr> globals;
        for (const auto& d : def.props)
            if (observable(d)) globals[d.name] = binding(d);
        model.propositions = globals;
        for (const auto& l : def.properties) {
            LtlProperty prop{l.name, l.formula, globals};
            for (const auto& b : l.bindings) {
                if (observable(b))
                    prop.propositions[b.name] = binding(b);
                else
                    prop.propositions.erase(b.name);
            }
            std::set<std::string> bound;
            for (const auto& [n, e] : prop.propositions) bound.insert(n);
            // without observation, properties over milestones cannot be evaluated
            try {
                ltl::parse_formula(l.formula, bound);
            } catch (const ltl::UnknownProposition&) {
                continue;
            }
            model.properties.push_back(std::move(prop));
        }
        return model;
    }
};

} // namespace

Model compile_to_kernel(const WorkflowDef& def, const CompileOptions& options)
{
    Compiler c{def, options, {}, false, 0, {}};
    return c.run();
}

} // namespace wfv::dsl
