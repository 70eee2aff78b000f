#include "wfv/ltl.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <functional>
#include <map>

namespace wfv::ltl {

namespace {

FormulaPtr node(FormulaKind kind, FormulaPtr lhs = nullptr, FormulaPtr rhs = nullptr)
{
    auto f = std::make_shared<Formula>();
    f->kind = kind;
    f->lhs = std::move(lhs);
    f->rhs = std::move(rhs);
    return f;
}

} // namespace

FormulaPtr make_true() { return node(FormulaKind::True); }
FormulaPtr make_false() { return node(FormulaKind::False); }

FormulaPtr make_prop(std::string name)
{
    auto f = std::make_shared<Formula>();
    f->kind = FormulaKind::Prop;
    f->prop = std::move(name);
    return f;
}

FormulaPtr make_not(FormulaPtr a) { return node(FormulaKind::Not, std::move(a)); }
FormulaPtr make_and(FormulaPtr a, FormulaPtr b) { return node(FormulaKind::And, std::move(a), std::move(b)); }
FormulaPtr make_or(FormulaPtr a, FormulaPtr b) { return node(FormulaKind::Or, std::move(a), std::move(b)); }
FormulaPtr make_implies(FormulaPtr a, FormulaPtr b) { return node(FormulaKind::Implies, std::move(a), std::move(b)); }
FormulaPtr make_always(FormulaPtr a) { return node(FormulaKind::Always, std::move(a)); }
FormulaPtr make_eventually(FormulaPtr a) { return node(FormulaKind::Eventually, std::move(a)); }
FormulaPtr make_until(FormulaPtr a, FormulaPtr b) { return node(FormulaKind::Until, std::move(a), std::move(b)); }
FormulaPtr make_release(FormulaPtr a, FormulaPtr b) { return node(FormulaKind::Release, std::move(a), std::move(b)); }
FormulaPtr make_next(FormulaPtr a) { return node(FormulaKind::Next, std::move(a)); }

std::string to_string(const FormulaPtr& f)
{
    auto sub = [](const FormulaPtr& g) {
        bool atomic = g->kind == FormulaKind::True || g->kind == FormulaKind::False || g->kind == FormulaKind::Prop;
        return atomic ? to_string(g) : "(" + to_string(g) + ")";
    };
    switch (f->kind) {
    case FormulaKind::True: return "true";
    case FormulaKind::False: return "false";
    case FormulaKind::Prop: return f->prop;
    case FormulaKind::Not: return "!" + sub(f->lhs);
    case FormulaKind::And: return sub(f->lhs) + " && " + sub(f->rhs);
    case FormulaKind::Or: return sub(f->lhs) + " || " + sub(f->rhs);
    case FormulaKind::Implies: return sub(f->lhs) + " -> " + sub(f->rhs);
    case FormulaKind::Always: return "[] " + sub(f->lhs);
    case FormulaKind::Eventually: return "<> " + sub(f->lhs);
    case FormulaKind::Until: return sub(f->lhs) + " U " + sub(f->rhs);
    case FormulaKind::Release: return sub(f->lhs) + " R " + sub(f->rhs);
    case FormulaKind::Next: return "X " + sub(f->lhs);
    }
    return "?";
}

bool equal(const FormulaPtr& a, const FormulaPtr& b) { return to_string(a) == to_string(b); }

std::set<std::string> propositions_of(const FormulaPtr& f)
{
    std::set<std::string> out;
    std::function<void(const FormulaPtr&)> walk = [&](const FormulaPtr& g) {
        if (!g) return;
        if (g->kind == FormulaKind::Prop) out.insert(g->prop);
        walk(g->lhs);
        walk(g->rhs);
    };
    walk(f);
    return out;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
public:
    Parser(std::string_view text, const std::set<std::string>& props) : text_(text), props_(props) {}

    FormulaPtr parse()
    {
        skip_ws();
        if (pos_ >= text_.size()) fail("empty formula");
        auto f = implies();
        skip_ws();
        if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        return f;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const
    {
        throw SyntaxError({1, static_cast<int>(pos_) + 1}, msg);
    }

    void skip_ws()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(std::string_view tok)
    {
        skip_ws();
        if (text_.substr(pos_, tok.size()) != tok) return false;
        // keep identifiers such as "Xa" or "Until" whole
        if (std::isalpha(static_cast<unsigned char>(tok[0])) && pos_ + tok.size() < text_.size()) {
            char c = text_[pos_ + tok.size()];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') return false;
        }
        pos_ += tok.size();
        return true;
    }

    FormulaPtr implies()
    {
        auto lhs = disjunction();
        if (accept("->")) return make_implies(lhs, implies());
        return lhs;
    }

    FormulaPtr disjunction()
    {
        auto lhs = conjunction();
        while (accept("||")) lhs = make_or(lhs, conjunction());
        return lhs;
    }

    FormulaPtr conjunction()
    {
        auto lhs = until();
        while (accept("&&")) lhs = make_and(lhs, until());
        return lhs;
    }

    FormulaPtr until()
    {
        auto lhs = unary();
        if (accept("U")) return make_until(lhs, until());
        return lhs;
    }

    FormulaPtr unary()
    {
        if (accept("!")) return make_not(unary());
        if (accept("[]")) return make_always(unary());
        if (accept("<>")) return make_eventually(unary());
        if (accept("X")) return make_next(unary());
        return primary();
    }

    FormulaPtr primary()
    {
        skip_ws();
        if (pos_ >= text_.size()) fail("expected proposition, '(' or unary operator");
        if (accept("(")) {
            auto f = implies();
            if (!accept(")")) fail("expected ')'");
            return f;
        }
        std::size_t start = pos_;
        if (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_') {
            while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
        }
        std::string name(text_.substr(start, pos_ - start));
        if (name.empty()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        if (name == "true") return make_true();
        if (name == "false") return make_false();
        if (name == "U" || name == "X") {
            pos_ = start;
            fail("operator '" + name + "' where a proposition was expected");
        }
        if (!props_.count(name)) throw UnknownProposition(name);
        return make_prop(name);
    }

    std::string_view text_;
    const std::set<std::string>& props_;
    std::size_t pos_ = 0;
};

FormulaPtr nnf(const FormulaPtr& f, bool negate)
{
    switch (f->kind) {
    case FormulaKind::True: return negate ? make_false() : f;
    case FormulaKind::False: return negate ? make_true() : f;
    case FormulaKind::Prop: return negate ? make_not(f) : f;
    case FormulaKind::Not: return nnf(f->lhs, !negate);
    case FormulaKind::And:
        return negate ? make_or(nnf(f->lhs, true), nnf(f->rhs, true)) : make_and(nnf(f->lhs, false), nnf(f->rhs, false));
    case FormulaKind::Or:
        return negate ? make_and(nnf(f->lhs, true), nnf(f->rhs, true)) : make_or(nnf(f->lhs, false), nnf(f->rhs, false));
    case FormulaKind::Implies:
        return nnf(make_or(make_not(f->lhs), f->rhs), negate);
    case FormulaKind::Always:
        return negate ? make_eventually(nnf(f->lhs, true)) : make_always(nnf(f->lhs, false));
    case FormulaKind::Eventually:
        return negate ? make_always(nnf(f->lhs, true)) : make_eventually(nnf(f->lhs, false));
    case FormulaKind::Until:
        return negate ? make_release(nnf(f->lhs, true), nnf(f->rhs, true))
                      : make_until(nnf(f->lhs, false), nnf(f->rhs, false));
    case FormulaKind::Release:
        return negate ? make_until(nnf(f->lhs, true), nnf(f->rhs, true))
                      : make_release(nnf(f->lhs, false), nnf(f->rhs, false));
    case FormulaKind::Next:
        return make_next(nnf(f->lhs, negate));
    }
    return f;
}

} // namespace

FormulaPtr parse_formula(std::string_view text, const std::set<std::string>& propositions)
{
    return Parser(text, propositions).parse();
}

FormulaPtr normalize_negation(const FormulaPtr& f) { return nnf(f, false); }

bool is_nnf(const FormulaPtr& f)
{
    if (!f) return true;
    if (f->kind == FormulaKind::Implies) return false;
    if (f->kind == FormulaKind::Not) return f->lhs->kind == FormulaKind::Prop;
    return is_nnf(f->lhs) && is_nnf(f->rhs);
}

// ---------------------------------------------------------------------------
// Tableau

int BuchiAutomaton::prop_index(const std::string& name) const
{
    for (std::size_t i = 0; i < props.size(); ++i)
        if (props[i] == name) return static_cast<int>(i);
    return -1;
}

std::string BuchiAutomaton::guard_text(const BuchiEdge& e) const
{
    std::string out;
    for (std::size_t i = 0; i < props.size(); ++i) {
        std::uint64_t bit = std::uint64_t{1} << i;
        if (e.pos & bit) out += (out.empty() ? "" : " && ") + props[i];
        if (e.neg & bit) out += (out.empty() ? "!" : " && !") + props[i];
    }
    return out.empty() ? "true" : out;
}

namespace {

using Obligations = std::map<std::string, FormulaPtr>; // keyed by canonical text

struct Cover {
    std::uint64_t pos = 0;
    std::uint64_t neg = 0;
    Obligations next;
    std::vector<bool> fulfilled; // per eventuality

    std::string key() const
    {
        std::string k = std::to_string(pos) + "/" + std::to_string(neg) + "/";
        for (const auto& [name, f] : next) k += name + ";";
        for (bool b : fulfilled) k += b ? '1' : '0';
        return k;
    }
};

class Tableau {
public:
    Tableau(std::vector<std::string> props, std::vector<std::string> eventualities)
        : props_(std::move(props)), eventualities_(std::move(eventualities))
    {
    }

    std::vector<Cover> covers(const Obligations& now) const
    {
        std::vector<Cover> out;
        std::vector<FormulaPtr> todo;
        for (const auto& [k, f] : now) todo.push_back(f);
        Cover c;
        c.fulfilled.assign(eventualities_.size(), true);
        std::set<std::string> seen;
        expand(todo, c, seen, out);
        // deterministic order, no duplicates
        std::map<std::string, Cover> unique;
        for (auto& cv : out) unique.emplace(cv.key(), std::move(cv));
        out.clear();
        for (auto& [k, cv] : unique) out.push_back(std::move(cv));
        return out;
    }

private:
    int prop_bit(const std::string& name) const
    {
        auto it = std::find(props_.begin(), props_.end(), name);
        return static_cast<int>(it - props_.begin());
    }

    int eventuality(const FormulaPtr& f) const
    {
        auto k = to_string(f);
        auto it = std::find(eventualities_.begin(), eventualities_.end(), k);
        return static_cast<int>(it - eventualities_.begin());
    }

    void expand(std::vector<FormulaPtr> todo, Cover c, std::set<std::string> seen, std::vector<Cover>& out) const
    {
        while (!todo.empty()) {
            auto f = todo.back();
            todo.pop_back();
            auto k = to_string(f);
            if (!seen.insert(k).second) continue;
            switch (f->kind) {
            case FormulaKind::True:
                break;
            case FormulaKind::False:
                return;
            case FormulaKind::Prop: {
                auto bit = std::uint64_t{1} << prop_bit(f->prop);
                if (c.neg & bit) return;
                c.pos |= bit;
                break;
            }
            case FormulaKind::Not: {
                auto bit = std::uint64_t{1} << prop_bit(f->lhs->prop);
                if (c.pos & bit) return;
                c.neg |= bit;
                break;
            }
            case FormulaKind::And:
                todo.push_back(f->lhs);
                todo.push_back(f->rhs);
                break;
            case FormulaKind::Or: {
                auto left = todo;
                left.push_back(f->lhs);
                expand(std::move(left), c, seen, out);
                todo.push_back(f->rhs);
                break;
            }
            case FormulaKind::Next:
                c.next.emplace(to_string(f->lhs), f->lhs);
                break;
            case FormulaKind::Always:
                todo.push_back(f->lhs);
                c.next.emplace(k, f);
                break;
            case FormulaKind::Eventually:
            case FormulaKind::Until: {
                const auto& goal = f->kind == FormulaKind::Until ? f->rhs : f->lhs;
                auto now = todo;
                now.push_back(goal);
                expand(std::move(now), c, seen, out);
                // postpone: lhs holds now, obligation carried over, not fulfilled
                if (f->kind == FormulaKind::Until) todo.push_back(f->lhs);
                c.next.emplace(k, f);
                c.fulfilled[static_cast<std::size_t>(eventuality(f))] = false;
                break;
            }
            case FormulaKind::Release: {
                auto both = todo;
                both.push_back(f->lhs);
                both.push_back(f->rhs);
                expand(std::move(both), c, seen, out);
                todo.push_back(f->rhs);
                c.next.emplace(k, f);
                break;
            }
            case FormulaKind::Implies:
                throw std::logic_error("ltl_to_buchi requires a formula in negation normal form");
            }
        }
        out.push_back(std::move(c));
    }

    std::vector<std::string> props_;
    std::vector<std::string> eventualities_;
};

void collect_eventualities(const FormulaPtr& f, std::vector<std::string>& out)
{
    if (!f) return;
    if (f->kind == FormulaKind::Until || f->kind == FormulaKind::Eventually) {
        auto k = to_string(f);
        if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
    }
    collect_eventualities(f->lhs, out);
    collect_eventualities(f->rhs, out);
}

std::string obligations_name(const Obligations& o)
{
    if (o.empty()) return "true";
    std::string s;
    for (const auto& [k, f] : o) s += (s.empty() ? "" : ", ") + k;
    return "{" + s + "}";
}

} // namespace

BuchiAutomaton ltl_to_buchi(const FormulaPtr& f)
{
    if (!is_nnf(f)) throw std::logic_error("ltl_to_buchi requires a formula in negation normal form");
    BuchiAutomaton a;
    for (const auto& p : propositions_of(f)) a.props.push_back(p);
    if (a.props.size() > 64) throw std::length_error("at most 64 propositions are supported");

    std::vector<std::string> eventualities;
    collect_eventualities(f, eventualities);
    const int k = static_cast<int>(eventualities.size());
    Tableau tableau(a.props, eventualities);

    // Degeneralized states: (obligation set, counter in [0, k]).
    std::map<std::pair<std::string, int>, int> index;
    std::vector<std::pair<Obligations, int>> pending;
    auto intern = [&](const Obligations& o, int counter) {
        auto key = std::make_pair(obligations_name(o), counter);
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        int id = static_cast<int>(a.states.size());
        index.emplace(key, id);
        BuchiState s;
        s.name = key.first + (k > 0 ? "#" + std::to_string(counter) : "");
        s.accepting = counter == k;
        a.states.push_back(std::move(s));
        pending.emplace_back(o, counter);
        return id;
    };

    Obligations start;
    start.emplace(to_string(f), f);
    a.initial = intern(start, 0);

    for (std::size_t i = 0; i < pending.size(); ++i) {
        auto [obligations, counter] = pending[i];
        for (const auto& c : tableau.covers(obligations)) {
            int j = counter == k ? 0 : counter;
            while (j < k && c.fulfilled[static_cast<std::size_t>(j)]) ++j;
            int to = intern(c.next, j);
            BuchiEdge e{c.pos, c.neg, to};
            auto& edges = a.states[i].edges;
            if (std::find(edges.begin(), edges.end(), e) == edges.end()) edges.push_back(e);
        }
    }
    return a;
}

} // namespace wfv::ltl
