#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wfv {

enum class ExprKind { Const, Var, Index, Len, Unary, Binary };

enum class Op {
    Add, Sub, Mul, Div, Mod,
    Eq, Ne, Lt, Le, Gt, Ge,
    And, Or,
    Not, Neg,
};

/// Where a variable lives once a template has been lowered. Until then the
/// name is the only binding.
struct VarSlot {
    enum class Scope : std::uint8_t { Unresolved, Global, Local };
    Scope scope = Scope::Unresolved;
    int offset = 0;
    int size = 1; // 1 for scalars
    bool is_array = false;
};

/// Side-effect free integer expression. Booleans are 0/1.
struct Expr {
    ExprKind kind = ExprKind::Const;
    std::int32_t value = 0;
    std::string name;
    Op op = Op::Add;
    std::vector<Expr> args;
    VarSlot slot;

    bool operator==(const Expr& o) const
    {
        return kind == o.kind && value == o.value && name == o.name && op == o.op && args == o.args;
    }
};

Expr lit(std::int32_t v);
Expr var(std::string name);
Expr at(std::string name, Expr index);
Expr len(Expr channel);
Expr unary(Op op, Expr a);
Expr binary(Op op, Expr a, Expr b);

inline Expr operator+(Expr a, Expr b) { return binary(Op::Add, std::move(a), std::move(b)); }
inline Expr operator-(Expr a, Expr b) { return binary(Op::Sub, std::move(a), std::move(b)); }
inline Expr operator&&(Expr a, Expr b) { return binary(Op::And, std::move(a), std::move(b)); }
inline Expr operator||(Expr a, Expr b) { return binary(Op::Or, std::move(a), std::move(b)); }
inline Expr operator!(Expr a) { return unary(Op::Not, std::move(a)); }

Expr eq(Expr a, Expr b);
Expr ne(Expr a, Expr b);
Expr lt(Expr a, Expr b);
Expr le(Expr a, Expr b);
Expr gt(Expr a, Expr b);
Expr ge(Expr a, Expr b);

/// PROMELA rendering with minimal parentheses.
std::string to_string(const Expr& e);
const char* op_symbol(Op op);

bool is_constant(const Expr& e);

enum class StmtKind {
    Skip,
    Assign,  // target = value
    Send,    // chan ! value
    Recv,    // chan ? target (target may be empty)
    Guard,   // value
    If,
    Do,
    Else,    // only as the first statement of an option
    Break,
    Goto,
    Label,
    Atomic,
    DStep,
    Unless,
    Run,
    Timeout,
    Decl,
    Inline,  // a pattern expansion, printed as a call
    Fail,    // raises a model error when executed
};

struct Statement;
using Sequence = std::vector<Statement>;

struct Statement {
    StmtKind kind = StmtKind::Skip;
    Expr chan;
    Expr target;
    Expr value;
    bool has_target = false;
    std::vector<Sequence> options;   // If / Do
    Sequence body;                   // Atomic / DStep / Unless main / Inline expansion
    Sequence escape;                 // Unless escape
    std::string name;                // label, goto target, run template, decl name, inline name, fail message
    std::vector<Expr> args;          // run arguments, inline call arguments
    std::string call_text;           // Inline: argument text as printed
    int size = 0;                    // Decl: array size (0 = scalar)
    bool is_chan = false;            // Decl: channel handle variable

    bool operator==(const Statement& o) const;
};

namespace stmt {
Statement skip();
Statement assign(Expr target, Expr value);
Statement send(Expr chan, Expr value);
Statement recv(Expr chan, Expr target);
Statement recv_discard(Expr chan);
Statement guard(Expr cond);
Statement if_(std::vector<Sequence> options);
Statement do_(std::vector<Sequence> options);
Statement else_();
Statement break_();
Statement goto_(std::string label);
Statement label(std::string name);
Statement atomic(Sequence body);
Statement d_step(Sequence body);
Statement unless(Sequence main, Sequence escape);
Statement run(std::string templ, std::vector<Expr> args = {});
Statement timeout();
Statement decl(std::string name, int size = 0, bool is_chan = false, std::int32_t init = 0);
Statement inline_call(std::string name, std::string call_text, Sequence expansion);
Statement fail(std::string message);
} // namespace stmt

/// One-line PROMELA rendering of the statement head (the part a transition executes).
std::string head_text(const Statement& s);

} // namespace wfv
