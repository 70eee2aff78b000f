#include "wfv/ast.hpp"

#include <utility>

namespace wfv {

Expr lit(std::int32_t v)
{
    Expr e;
    e.kind = ExprKind::Const;
    e.value = v;
    return e;
}

Expr var(std::string name)
{
    Expr e;
    e.kind = ExprKind::Var;
    e.name = std::move(name);
    return e;
}

Expr at(std::string name, Expr index)
{
    Expr e;
    e.kind = ExprKind::Index;
    e.name = std::move(name);
    e.args.push_back(std::move(index));
    return e;
}

Expr len(Expr channel)
{
    Expr e;
    e.kind = ExprKind::Len;
    e.args.push_back(std::move(channel));
    return e;
}

Expr unary(Op op, Expr a)
{
    Expr e;
    e.kind = ExprKind::Unary;
    e.op = op;
    e.args.push_back(std::move(a));
    return e;
}

Expr binary(Op op, Expr a, Expr b)
{
    Expr e;
    e.kind = ExprKind::Binary;
    e.op = op;
    e.args.push_back(std::move(a));
    e.args.push_back(std::move(b));
    return e;
}

Expr eq(Expr a, Expr b) { return binary(Op::Eq, std::move(a), std::move(b)); }
Expr ne(Expr a, Expr b) { return binary(Op::Ne, std::move(a), std::move(b)); }
Expr lt(Expr a, Expr b) { return binary(Op::Lt, std::move(a), std::move(b)); }
Expr le(Expr a, Expr b) { return binary(Op::Le, std::move(a), std::move(b)); }
Expr gt(Expr a, Expr b) { return binary(Op::Gt, std::move(a), std::move(b)); }
Expr ge(Expr a, Expr b) { return binary(Op::Ge, std::move(a), std::move(b)); }

const char* op_symbol(Op op)
{
    switch (op) {
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Mod: return "%";
    case Op::Eq: return "==";
    case Op::Ne: return "!=";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::And: return "&&";
    case Op::Or: return "||";
    case Op::Not: return "!";
    case Op::Neg: return "-";
    }
    return "?";
}

namespace {

int precedence(const Expr& e)
{
    if (e.kind == ExprKind::Unary) return 7;
    if (e.kind != ExprKind::Binary) return 8;
    switch (e.op) {
    case Op::Mul: case Op::Div: case Op::Mod: return 6;
    case Op::Add: case Op::Sub: return 5;
    case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge: return 4;
    case Op::Eq: case Op::Ne: return 3;
    case Op::And: return 2;
    case Op::Or: return 1;
    default: return 8;
    }
}

std::string wrap(const Expr& child, int parent_prec, bool right)
{
    std::string s = to_string(child);
    int p = precedence(child);
    if (p < parent_prec || (right && p == parent_prec && p < 7)) return "(" + s + ")";
    return s;
}

} // namespace

std::string to_string(const Expr& e)
{
    switch (e.kind) {
    case ExprKind::Const: return std::to_string(e.value);
    case ExprKind::Var: return e.name;
    case ExprKind::Index: return e.name + "[" + to_string(e.args[0]) + "]";
    case ExprKind::Len: return "len(" + to_string(e.args[0]) + ")";
    case ExprKind::Unary: return std::string(op_symbol(e.op)) + wrap(e.args[0], 7, false);
    case ExprKind::Binary: {
        int p = precedence(e);
        return wrap(e.args[0], p, false) + op_symbol(e.op) + wrap(e.args[1], p, true);
    }
    }
    return "?";
}

bool is_constant(const Expr& e)
{
    switch (e.kind) {
    case ExprKind::Const: return true;
    case ExprKind::Var: case ExprKind::Index: case ExprKind::Len: return false;
    default:
        for (const auto& a : e.args)
            if (!is_constant(a)) return false;
        return true;
    }
}

bool Statement::operator==(const Statement& o) const
{
    return kind == o.kind && chan == o.chan && target == o.target && value == o.value &&
           has_target == o.has_target && options == o.options && body == o.body && escape == o.escape &&
           name == o.name && args == o.args && call_text == o.call_text && size == o.size && is_chan == o.is_chan;
}

namespace stmt {

Statement skip() { return Statement{}; }

Statement assign(Expr target, Expr value)
{
    Statement s;
    s.kind = StmtKind::Assign;
    s.target = std::move(target);
    s.value = std::move(value);
    s.has_target = true;
    return s;
}

Statement send(Expr chan, Expr value)
{
    Statement s;
    s.kind = StmtKind::Send;
    s.chan = std::move(chan);
    s.value = std::move(value);
    return s;
}

Statement recv(Expr chan, Expr target)
{
    Statement s;
    s.kind = StmtKind::Recv;
    s.chan = std::move(chan);
    s.target = std::move(target);
    s.has_target = true;
    return s;
}

Statement recv_discard(Expr chan)
{
    Statement s;
    s.kind = StmtKind::Recv;
    s.chan = std::move(chan);
    return s;
}

Statement guard(Expr cond)
{
    Statement s;
    s.kind = StmtKind::Guard;
    s.value = std::move(cond);
    return s;
}

Statement if_(std::vector<Sequence> options)
{
    Statement s;
    s.kind = StmtKind::If;
    s.options = std::move(options);
    return s;
}

Statement do_(std::vector<Sequence> options)
{
    Statement s;
    s.kind = StmtKind::Do;
    s.options = std::move(options);
    return s;
}

Statement else_()
{
    Statement s;
    s.kind = StmtKind::Else;
    return s;
}

Statement break_()
{
    Statement s;
    s.kind = StmtKind::Break;
    return s;
}

Statement goto_(std::string label)
{
    Statement s;
    s.kind = StmtKind::Goto;
    s.name = std::move(label);
    return s;
}

Statement label(std::string name)
{
    Statement s;
    s.kind = StmtKind::Label;
    s.name = std::move(name);
    return s;
}

Statement atomic(Sequence body)
{
    Statement s;
    s.kind = StmtKind::Atomic;
    s.body = std::move(body);
    return s;
}

Statement d_step(Sequence body)
{
    Statement s;
    s.kind = StmtKind::DStep;
    s.body = std::move(body);
    return s;
}

Statement unless(Sequence main, Sequence escape)
{
    Statement s;
    s.kind = StmtKind::Unless;
    s.body = std::move(main);
    s.escape = std::move(escape);
    return s;
}

Statement run(std::string templ, std::vector<Expr> args)
{
    Statement s;
    s.kind = StmtKind::Run;
    s.name = std::move(templ);
    s.args = std::move(args);
    return s;
}

Statement timeout()
{
    Statement s;
    s.kind = StmtKind::Timeout;
    return s;
}

Statement decl(std::string name, int size, bool is_chan, std::int32_t init)
{
    Statement s;
    s.kind = StmtKind::Decl;
    s.name = std::move(name);
    s.size = size;
    s.is_chan = is_chan;
    s.value = lit(init);
    return s;
}

Statement inline_call(std::string name, std::string call_text, Sequence expansion)
{
    Statement s;
    s.kind = StmtKind::Inline;
    s.name = std::move(name);
    s.call_text = std::move(call_text);
    s.body = std::move(expansion);
    return s;
}

Statement fail(std::string message)
{
    Statement s;
    s.kind = StmtKind::Fail;
    s.name = std::move(message);
    return s;
}

} // namespace stmt

std::string head_text(const Statement& s)
{
    switch (s.kind) {
    case StmtKind::Skip: return "skip";
    case StmtKind::Assign: return to_string(s.target) + "=" + to_string(s.value);
    case StmtKind::Send: return to_string(s.chan) + "!" + to_string(s.value);
    case StmtKind::Recv: return to_string(s.chan) + "?" + (s.has_target ? to_string(s.target) : std::string("_"));
    case StmtKind::Guard: return to_string(s.value);
    case StmtKind::If: return "if";
    case StmtKind::Do: return "do";
    case StmtKind::Else: return "else";
    case StmtKind::Break: return "break";
    case StmtKind::Goto: return "goto " + s.name;
    case StmtKind::Label: return s.name + ":";
    case StmtKind::Atomic: return "atomic";
    case StmtKind::DStep: return "d_step";
    case StmtKind::Unless: return "unless";
    case StmtKind::Run: {
        std::string out = "run " + s.name + "(";
        for (std::size_t i = 0; i < s.args.size(); ++i) {
            if (i) out += ",";
            out += to_string(s.args[i]);
        }
        return out + ")";
    }
    case StmtKind::Timeout: return "timeout";
    case StmtKind::Decl: return std::string(s.is_chan ? "chan " : "int ") + s.name;
    case StmtKind::Inline: return s.name + "(" + s.call_text + ")";
    case StmtKind::Fail: return "assert(false) /* " + s.name + " */";
    }
    return "?";
}

} // namespace wfv
