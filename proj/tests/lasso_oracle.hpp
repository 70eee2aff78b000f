#pragma once

// Brute-force lasso semantics for LTL, independent of the tableau.
// A lasso is u v^w over letters 0..7 (bit 0 = p, bit 1 = q, bit 2 = r).
// All lassos with |u| + |v| <= max_len are enumerated; the loop is fixed
// first and prefixes are grown backwards so work is shared between them.

#include "wfv/ltl.hpp"

#include <cstdint>
#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace wfv::testing {

inline const std::vector<std::string>& lasso_props()
{
    static const std::vector<std::string> props{"p", "q", "r"};
    return props;
}

struct LassoReport {
    std::uint64_t lassos = 0;
    std::uint64_t mismatches = 0;
    std::string first_mismatch; // "u=.. v=.."
};

namespace detail {

using ltl::FormulaKind;
using ltl::FormulaPtr;

struct Flat {
    FormulaKind kind;
    int prop = -1;
    int a = -1;
    int b = -1;
};

inline int flatten(const FormulaPtr& f, std::vector<Flat>& out)
{
    Flat n{f->kind};
    if (f->kind == FormulaKind::Prop) {
        const auto& props = lasso_props();
        for (std::size_t i = 0; i < props.size(); ++i)
            if (props[i] == f->prop) n.prop = static_cast<int>(i);
    }
    if (f->lhs) n.a = flatten(f->lhs, out);
    if (f->rhs) n.b = flatten(f->rhs, out);
    out.push_back(n);
    return static_cast<int>(out.size()) - 1;
}

// Truth of each subformula at one position for all 8 possible letters at
// once (bit c = value when the letter is c), given the truth of every
// subformula at the next position.
inline void step_back(const std::vector<Flat>& fs, const std::uint8_t* next, int next_letter, std::uint8_t* cur)
{
    static constexpr std::uint8_t kPropMask[3] = {0xAA, 0xCC, 0xF0};
    auto nx = [&](std::size_t k) -> std::uint8_t { return ((next[k] >> next_letter) & 1) ? 0xFF : 0x00; };
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const auto& n = fs[i];
        auto A = static_cast<std::size_t>(n.a), B = static_cast<std::size_t>(n.b);
        std::uint8_t v = 0;
        switch (n.kind) {
        case FormulaKind::True: v = 0xFF; break;
        case FormulaKind::False: v = 0; break;
        case FormulaKind::Prop: v = kPropMask[n.prop]; break;
        case FormulaKind::Not: v = static_cast<std::uint8_t>(~cur[A]); break;
        case FormulaKind::And: v = cur[A] & cur[B]; break;
        case FormulaKind::Or: v = cur[A] | cur[B]; break;
        case FormulaKind::Implies: v = static_cast<std::uint8_t>(~cur[A]) | cur[B]; break;
        case FormulaKind::Next: v = nx(A); break;
        case FormulaKind::Always: v = cur[A] & nx(i); break;
        case FormulaKind::Eventually: v = cur[A] | nx(i); break;
        case FormulaKind::Until: v = cur[B] | (cur[A] & nx(i)); break;
        case FormulaKind::Release: v = cur[B] & (cur[A] | nx(i)); break;
        }
        cur[i] = v;
    }
}

// Truth vectors at every loop position.
inline void loop_truth(const std::vector<Flat>& fs, const std::vector<int>& loop, std::vector<std::vector<char>>& val)
{
    const std::size_t b = loop.size();
    val.resize(b);
    for (auto& v : val) v.assign(fs.size(), 0);
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const auto& n = fs[i];
        auto at = [&](std::size_t j) -> char& { return val[j][i]; };
        auto sub = [&](int k, std::size_t j) { return val[j][static_cast<std::size_t>(k)]; };
        switch (n.kind) {
        case FormulaKind::Always:
        case FormulaKind::Eventually: {
            bool all = true, any = false;
            for (std::size_t j = 0; j < b; ++j) {
                all = all && sub(n.a, j);
                any = any || sub(n.a, j);
            }
            for (std::size_t j = 0; j < b; ++j) at(j) = n.kind == FormulaKind::Always ? all : any;
            break;
        }
        case FormulaKind::Until:
        case FormulaKind::Release: {
            bool until = n.kind == FormulaKind::Until;
            for (std::size_t j = 0; j < b; ++j) at(j) = until ? 0 : 1;
            for (bool changed = true; changed;) {
                changed = false;
                for (std::size_t jj = b; jj-- > 0;) {
                    char nxt = at((jj + 1) % b);
                    char v = until ? (sub(n.b, jj) || (sub(n.a, jj) && nxt)) : (sub(n.b, jj) && (sub(n.a, jj) || nxt));
                    if (v != at(jj)) {
                        at(jj) = v;
                        changed = true;
                    }
                }
            }
            break;
        }
        case FormulaKind::Next:
            for (std::size_t j = 0; j < b; ++j) at(j) = sub(n.a, (j + 1) % b);
            break;
        default:
            for (std::size_t j = 0; j < b; ++j) {
                char v = 0;
                switch (n.kind) {
                case FormulaKind::True: v = 1; break;
                case FormulaKind::Prop: v = (loop[j] >> n.prop) & 1; break;
                case FormulaKind::Not: v = !sub(n.a, j); break;
                case FormulaKind::And: v = sub(n.a, j) && sub(n.b, j); break;
                case FormulaKind::Or: v = sub(n.a, j) || sub(n.b, j); break;
                case FormulaKind::Implies: v = !sub(n.a, j) || sub(n.b, j); break;
                default: break;
                }
                at(j) = v;
            }
        }
    }
}

using StateSet = std::vector<std::uint64_t>;

inline bool has(const StateSet& s, int q) { return (s[static_cast<std::size_t>(q) / 64] >> (q % 64)) & 1; }
inline void put(StateSet& s, int q) { s[static_cast<std::size_t>(q) / 64] |= std::uint64_t{1} << (q % 64); }

struct AutomatonView {
    const ltl::BuchiAutomaton& a;
    std::size_t n;
    std::size_t words;
    std::vector<std::vector<std::vector<int>>> succ;  // [letter][q] -> successors
    std::vector<std::vector<StateSet>> pred_mask;     // [letter][q'] -> {q | q -letter-> q'}

    explicit AutomatonView(const ltl::BuchiAutomaton& aut) : a(aut), n(aut.states.size()), words((n + 63) / 64)
    {
        const auto& props = lasso_props();
        succ.assign(8, std::vector<std::vector<int>>(n));
        pred_mask.assign(8, std::vector<StateSet>(n, StateSet(words, 0)));
        for (int letter = 0; letter < 8; ++letter) {
            std::uint64_t v = 0;
            for (std::size_t i = 0; i < props.size(); ++i) {
                int idx = a.prop_index(props[i]);
                if (idx >= 0 && ((letter >> i) & 1)) v |= std::uint64_t{1} << idx;
            }
            auto L = static_cast<std::size_t>(letter);
            for (std::size_t q = 0; q < n; ++q)
                for (const auto& e : a.states[q].edges)
                    if (e.matches(v)) {
                        succ[L][q].push_back(e.to);
                        put(pred_mask[L][static_cast<std::size_t>(e.to)], static_cast<int>(q));
                    }
        }
    }

    // States from which v^w has an accepting run. Sets are indexed by loop
    // position; the fixpoint is nu Z. mu Y. (F & EX Z) | EX Y.
    // Result indexed by loop position.
    void good_for_loop(const std::vector<int>& loop, std::vector<StateSet>& out) const
    {
        out.resize(loop.size());
        if (words == 1) {
            std::uint64_t z[16];
            good_for_loop_small(loop, z);
            for (std::size_t j = 0; j < loop.size(); ++j) out[j].assign(1, z[j]);
            return;
        }
        const std::size_t b = loop.size();
        StateSet accepting(words, 0), all(words, 0);
        for (std::size_t q = 0; q < n; ++q) {
            put(all, static_cast<int>(q));
            if (a.states[q].accepting) put(accepting, static_cast<int>(q));
        }
        std::vector<StateSet> z(b, all), y(b, StateSet(words, 0)), tmp(b, StateSet(words, 0));
        StateSet scratch(words, 0);
        for (bool z_changed = true; z_changed;) {
            for (auto& s : y) std::fill(s.begin(), s.end(), 0);
            for (std::size_t j = 0; j < b; ++j) {
                pre(z[(j + 1) % b], loop[j], scratch);
                for (std::size_t w = 0; w < words; ++w) tmp[j][w] = scratch[w] & accepting[w];
            }
            for (bool y_changed = true; y_changed;) {
                y_changed = false;
                for (std::size_t j = b; j-- > 0;) {
                    pre(y[(j + 1) % b], loop[j], scratch);
                    for (std::size_t w = 0; w < words; ++w) {
                        auto v = tmp[j][w] | scratch[w];
                        if (v != y[j][w]) {
                            y[j][w] = v;
                            y_changed = true;
                        }
                    }
                }
            }
            z_changed = false;
            for (std::size_t j = 0; j < b; ++j)
                for (std::size_t w = 0; w < words; ++w) {
                    auto v = z[j][w] & y[j][w];
                    if (v != z[j][w]) {
                        z[j][w] = v;
                        z_changed = true;
                    }
                }
        }
        out = std::move(z);
    }

    std::uint64_t pre_small(std::uint64_t target, int letter) const
    {
        std::uint64_t out = 0;
        const auto& masks = pred_mask[static_cast<std::size_t>(letter)];
        while (target) {
            out |= masks[static_cast<std::size_t>(__builtin_ctzll(target))][0];
            target &= target - 1;
        }
        return out;
    }

    void good_for_loop_small(const std::vector<int>& loop, std::uint64_t* z) const
    {
        constexpr std::size_t kMaxLoop = 16;
        const std::size_t b = loop.size();
        std::uint64_t accepting = 0;
        for (std::size_t q = 0; q < n; ++q)
            if (a.states[q].accepting) accepting |= std::uint64_t{1} << q;
        std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
        std::uint64_t y[kMaxLoop], base[kMaxLoop];
        for (std::size_t j = 0; j < b; ++j) z[j] = all;
        for (bool z_changed = true; z_changed;) {
            for (std::size_t j = 0; j < b; ++j) {
                base[j] = pre_small(z[(j + 1) % b], loop[j]) & accepting;
                y[j] = 0;
            }
            for (bool y_changed = true; y_changed;) {
                y_changed = false;
                for (std::size_t j = b; j-- > 0;) {
                    auto v = base[j] | pre_small(y[(j + 1) % b], loop[j]);
                    if (v != y[j]) {
                        y[j] = v;
                        y_changed = true;
                    }
                }
            }
            z_changed = false;
            for (std::size_t j = 0; j < b; ++j)
                if ((z[j] & y[j]) != z[j]) {
                    z[j] &= y[j];
                    z_changed = true;
                }
        }

    }

    void pre(const StateSet& target, int letter, StateSet& out) const
    {
        if (words == 1) {
            out[0] = pre_small(target[0], letter);
            return;
        }
        std::fill(out.begin(), out.end(), 0);
        const auto& masks = pred_mask[static_cast<std::size_t>(letter)];
        for (std::size_t w = 0; w < words; ++w) {
            auto bits = target[w];
            while (bits) {
                int i = __builtin_ctzll(bits);
                bits &= bits - 1;
                const auto& m = masks[w * 64 + static_cast<std::size_t>(i)];
                for (std::size_t k = 0; k < words; ++k) out[k] |= m[k];
            }
        }
    }
};

inline std::string word_text(const std::vector<int>& w)
{
    std::string s;
    for (int c : w) s += std::to_string(c);
    return s;
}

class LassoWalker {
public:
    LassoWalker(const ltl::FormulaPtr& formula, const ltl::BuchiAutomaton& automaton, int max_len)
        : view_(automaton), initial_(automaton.initial), max_len_(max_len)
    {
        if (max_len < 1 || max_len > 16) throw std::invalid_argument("lasso length must be in 1..16");
        root_ = static_cast<std::size_t>(flatten(formula, fs_));
        for (int d = 0; d <= max_len; ++d) {
            rows_.emplace_back(fs_.size(), 0);
            sets_.emplace_back(view_.words, 0);
        }
    }

    LassoReport run()
    {
        for (int b = 1; b <= max_len_; ++b) {
            loop_.assign(static_cast<std::size_t>(b), 0);
            std::uint64_t combos = std::uint64_t{1} << (3 * b);
            for (std::uint64_t code = 0; code < combos; ++code) {
                // one representative per rotation class: the smallest code
                std::uint64_t rotations[16];
                bool representative = true;
                for (int k = 0; k < b && representative; ++k) {
                    std::uint64_t low = code & ((std::uint64_t{1} << (3 * k)) - 1);
                    rotations[k] = (code >> (3 * k)) | (low << (3 * (b - k)));
                    representative = rotations[k] >= code;
                }
                if (!representative) continue;
                std::vector<int> base(static_cast<std::size_t>(b));
                for (int j = 0; j < b; ++j) base[static_cast<std::size_t>(j)] = static_cast<int>((code >> (3 * j)) & 7);
                loop_truth(fs_, base, loop_val_);
                view_.good_for_loop(base, good_);
                for (int k = 0; k < b; ++k) {
                    auto K = static_cast<std::size_t>(k);
                    if (std::find(rotations, rotations + k, rotations[K]) != rotations + k) continue;
                    for (int j = 0; j < b; ++j) loop_[static_cast<std::size_t>(j)] = base[static_cast<std::size_t>((j + k) % b)];
                    for (std::size_t i = 0; i < fs_.size(); ++i) rows_[0][i] = loop_val_[K][i] ? 0xFF : 0;
                    sets_[0] = good_[K];
                    grow(0);
                }
            }
        }
        return report_;
    }

private:
    // Node at depth d: prefix of length d. Its truth vector is bit
    // letters_[d] of rows_[d]; row 0 is the loop start, replicated.
    void grow(std::size_t d)
    {
        ++report_.lassos;
        const int letter_here = prefix_.empty() ? 0 : prefix_.back();
        bool holds = (rows_[d][root_] >> letter_here) & 1;
        bool accepted = has(sets_[d], initial_);
        if (holds != accepted && report_.mismatches++ == 0) {
            std::vector<int> u(prefix_.rbegin(), prefix_.rend());
            report_.first_mismatch =
                "u=" + word_text(u) + " v=" + word_text(loop_) + (holds ? " holds, rejected" : " fails, accepted");
        }
        if (static_cast<int>(d + loop_.size()) >= max_len_) return;
        step_back(fs_, rows_[d].data(), letter_here, rows_[d + 1].data());
        for (int letter = 0; letter < 8; ++letter) {
            view_.pre(sets_[d], letter, sets_[d + 1]);
            prefix_.push_back(letter);
            grow(d + 1);
            prefix_.pop_back();
        }
    }

    std::vector<Flat> fs_;
    std::size_t root_ = 0;
    AutomatonView view_;
    int initial_;
    int max_len_;
    std::vector<int> loop_;
    std::vector<int> prefix_; // reversed
    std::vector<std::vector<std::uint8_t>> rows_;
    std::vector<StateSet> good_;
    std::vector<std::vector<char>> loop_val_;
    std::vector<StateSet> sets_;
    LassoReport report_;
};

} // namespace detail

/// Compares `formula` (evaluated directly) with acceptance by `automaton`
/// on every lasso with |prefix| + |loop| <= max_len.
inline LassoReport compare_on_lassos(const ltl::FormulaPtr& formula, const ltl::BuchiAutomaton& automaton, int max_len = 6)
{
    return detail::LassoWalker(formula, automaton, max_len).run();
}

/// Random formula over p, q, r with nesting depth at most `depth`.
inline ltl::FormulaPtr random_formula(std::mt19937& rng, int depth)
{
    using namespace ltl;
    auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
    if (depth == 0 || pick(5) == 0) {
        int k = pick(13);
        if (k == 12) return make_true();
        if (k == 11) return make_false();
        return make_prop(lasso_props()[static_cast<std::size_t>(k % 3)]);
    }
    switch (pick(9)) {
    case 0: return make_not(random_formula(rng, depth - 1));
    case 1: return make_and(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    case 2: return make_or(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    case 3: return make_implies(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    case 4: return make_always(random_formula(rng, depth - 1));
    case 5: return make_eventually(random_formula(rng, depth - 1));
    case 6: return make_until(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    case 7: return make_next(random_formula(rng, depth - 1));
    default: return make_not(make_until(random_formula(rng, depth - 1), random_formula(rng, depth - 1)));
    }
}

} // namespace wfv::testing
