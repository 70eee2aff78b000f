#pragma once

#include "wfv/error.hpp"

#include <cstdint>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wfv::ltl {

enum class FormulaKind { True, False, Prop, Not, And, Or, Implies, Always, Eventually, Until, Release, Next };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Immutable LTL syntax tree. Release only appears after normalization.
struct Formula {
    FormulaKind kind = FormulaKind::True;
    std::string prop;
    FormulaPtr lhs;
    FormulaPtr rhs;
};

FormulaPtr make_true();
FormulaPtr make_false();
FormulaPtr make_prop(std::string name);
FormulaPtr make_not(FormulaPtr a);
FormulaPtr make_and(FormulaPtr a, FormulaPtr b);
FormulaPtr make_or(FormulaPtr a, FormulaPtr b);
FormulaPtr make_implies(FormulaPtr a, FormulaPtr b);
FormulaPtr make_always(FormulaPtr a);
FormulaPtr make_eventually(FormulaPtr a);
FormulaPtr make_until(FormulaPtr a, FormulaPtr b);
FormulaPtr make_release(FormulaPtr a, FormulaPtr b);
FormulaPtr make_next(FormulaPtr a);

/// Canonical text; two formulas are structurally equal iff their texts are.
std::string to_string(const FormulaPtr& f);
bool equal(const FormulaPtr& a, const FormulaPtr& b);
std::set<std::string> propositions_of(const FormulaPtr& f);

class UnknownProposition : public std::runtime_error {
public:
    explicit UnknownProposition(const std::string& name)
        : std::runtime_error("unknown proposition '" + name + "'"), name_(name) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

/// Parses `text` using SPIN-style operators: [] <> X U ! && || -> and
/// parentheses. Precedence from tight to loose: unary, U, &&, ||, ->.
/// Throws SyntaxError (column in pos.column, line 1) or UnknownProposition.
FormulaPtr parse_formula(std::string_view text, const std::set<std::string>& propositions);

/// Negation normal form: negations only on propositions; implication removed;
/// !(a U b) becomes (!a) R (!b).
FormulaPtr normalize_negation(const FormulaPtr& f);
bool is_nnf(const FormulaPtr& f);

/// Transition guard: a conjunction of literals over the automaton's
/// proposition list, as bitmasks.
struct BuchiEdge {
    std::uint64_t pos = 0;
    std::uint64_t neg = 0;
    int to = 0;

    bool matches(std::uint64_t valuation) const { return (valuation & pos) == pos && (valuation & neg) == 0; }
    bool operator==(const BuchiEdge&) const = default;
};

struct BuchiState {
    std::string name;
    bool accepting = false;
    std::vector<BuchiEdge> edges; // empty: rejecting sink
};

struct BuchiAutomaton {
    std::vector<std::string> props; // bit i of a valuation <-> props[i]
    std::vector<BuchiState> states;
    int initial = 0;

    int prop_index(const std::string& name) const;
    std::string guard_text(const BuchiEdge& e) const;
};

/// Tableau construction with transition-based generalized acceptance,
/// degeneralized to a state-based Büchi automaton. `f` must be in NNF.
BuchiAutomaton ltl_to_buchi(const FormulaPtr& f);

} // namespace wfv::ltl
