#include "wfv/error.hpp"
#include "wfv/kernel.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

namespace wfv {

const char* to_string(ObservationMode mode)
{
    switch (mode) {
    case ObservationMode::None: return "none";
    case ObservationMode::Scalar: return "scalar";
    case ObservationMode::Flags: return "flags";
    }
    return "none";
}

std::optional<ObservationMode> parse_observation_mode(const std::string& text)
{
    if (text == "scalar") return ObservationMode::Scalar;
    if (text == "flags") return ObservationMode::Flags;
    if (text == "none") return ObservationMode::None;
    return std::nullopt;
}

const ProcessTemplate* Model::find_template(const std::string& name) const
{
    for (const auto& t : templates)
        if (t.name == name) return &t;
    return nullptr;
}

ProcessTemplate* Model::find_template(const std::string& name)
{
    for (auto& t : templates)
        if (t.name == name) return &t;
    return nullptr;
}

namespace {

// Lowers one template body into a location graph. Locations are merged via
// union-find where a label binds to a point that already has an identity.
class Lowerer {
public:
    Lowerer(const Program& program, const std::vector<std::string>& template_names, TemplateCode& code)
        : program_(program), template_names_(template_names), code_(code)
    {
    }

    void lower(const ProcessTemplate& t)
    {
        for (const auto& p : t.params) declare(p, 0, 0);
        code_.param_count = static_cast<int>(t.params.size());
        int entry = new_loc();
        int end = new_loc();
        lower_seq(t.body, entry, end);
        finalize(entry, end);
    }

private:
    struct Placeholder {
        int loc;
        bool bound;
    };

    int new_loc()
    {
        Location l;
        l.escapes = escapes_;
        locs_.push_back(std::move(l));
        parent_.push_back(static_cast<int>(parent_.size()));
        return static_cast<int>(locs_.size()) - 1;
    }

    int find(int x)
    {
        while (parent_[static_cast<std::size_t>(x)] != x) {
            auto& p = parent_[static_cast<std::size_t>(x)];
            p = parent_[static_cast<std::size_t>(p)];
            x = p;
        }
        return x;
    }

    void alias(int a, int b)
    {
        a = find(a);
        b = find(b);
        if (a != b) parent_[static_cast<std::size_t>(a)] = b;
    }

    void declare(const std::string& name, int size, std::int32_t init)
    {
        for (const auto& l : code_.locals)
            if (l.name == name) throw ModelError("redeclaration of '" + name + "' in " + code_.name);
        LocalVar v;
        v.name = name;
        v.offset = code_.local_words;
        v.is_array = size > 0;
        v.size = size > 0 ? size : 1;
        v.init = init;
        code_.local_words += v.size;
        code_.locals.push_back(v);
    }

    Expr resolve(const Expr& e) const
    {
        Expr r = e;
        for (auto& a : r.args) a = resolve(a);
        if (e.kind != ExprKind::Var && e.kind != ExprKind::Index) return r;
        bool indexed = e.kind == ExprKind::Index;
        for (const auto& l : code_.locals) {
            if (l.name != e.name) continue;
            if (l.is_array != indexed)
                throw ModelError("'" + e.name + "' used " + (indexed ? "as array" : "without index") + " in " + code_.name);
            r.slot = {VarSlot::Scope::Local, l.offset, l.size, l.is_array};
            return r;
        }
        if (const auto* g = program_.find_global(e.name)) {
            if (g->is_array != indexed)
                throw ModelError("'" + e.name + "' used " + (indexed ? "as array" : "without index") + " in " + code_.name);
            r.slot = {VarSlot::Scope::Global, g->offset, g->size, g->is_array};
            return r;
        }
        throw ModelError("unbound name '" + e.name + "' in " + code_.name);
    }

    std::string scoped(const std::string& label) const { return scope_ + label; }

    int label_loc(const std::string& label)
    {
        auto key = scoped(label);
        auto it = labels_.find(key);
        if (it != labels_.end()) return it->second.loc;
        int l = new_loc();
        labels_[key] = {l, false};
        return l;
    }

    void bind_label(const std::string& label, int loc)
    {
        auto key = scoped(label);
        auto it = labels_.find(key);
        if (it == labels_.end()) {
            labels_[key] = {loc, true};
        } else {
            if (it->second.bound) throw ModelError("duplicate label '" + label + "' in " + code_.name);
            alias(it->second.loc, loc);
            it->second.bound = true;
        }
        locs_[static_cast<std::size_t>(loc)].label = label;
        if (label.rfind("end", 0) == 0) locs_[static_cast<std::size_t>(loc)].end_label = true;
    }

    static bool is_marker(const Statement& s) { return s.kind == StmtKind::Label || s.kind == StmtKind::Decl; }

    void lower_seq(const Sequence& seq, int entry, int exit)
    {
        // Index of the last statement that takes a step.
        int last_step = -1;
        for (std::size_t i = 0; i < seq.size(); ++i)
            if (!is_marker(seq[i])) last_step = static_cast<int>(i);

        int cur = entry;
        for (std::size_t i = 0; i < seq.size(); ++i) {
            const auto& s = seq[i];
            if (s.kind == StmtKind::Decl) {
                std::int32_t init = 0;
                if (s.value.kind == ExprKind::Const) init = s.value.value;
                declare(s.name, s.size, init);
                continue;
            }
            if (s.kind == StmtKind::Label) {
                if (static_cast<int>(i) > last_step) {
                    // trailing label: names the exit point
                    if (cur != exit) plain_edge(cur, exit, "skip");
                    bind_label(s.name, exit);
                } else {
                    bind_label(s.name, cur);
                }
                continue;
            }
            int next = static_cast<int>(i) == last_step ? exit : new_loc();
            lower_stmt(s, cur, next);
            cur = next;
        }
        if (last_step < 0 && cur != exit && !has_trailing_label(seq)) alias(cur, exit);
    }

    static bool has_trailing_label(const Sequence& seq)
    {
        return std::any_of(seq.begin(), seq.end(), [](const Statement& s) { return s.kind == StmtKind::Label; });
    }

    void plain_edge(int from, int to, std::string text)
    {
        Edge e;
        e.kind = ActionKind::Skip;
        e.text = std::move(text);
        e.to = to;
        add_edge(from, std::move(e));
    }

    void add_edge(int from, Edge e)
    {
        for (const auto& r : regions_) {
            if (e.to != r.entry || r.entry == r.exit) continue;
            if (r.dstep)
                e.keeps_dstep = true;
            else
                e.keeps_atomic = true;
        }
        locs_[static_cast<std::size_t>(from)].edges.push_back(std::move(e));
    }

    void lower_stmt(const Statement& s, int from, int to)
    {
        Edge e;
        e.text = head_text(s);
        e.to = to;
        switch (s.kind) {
        case StmtKind::Skip:
            add_edge(from, std::move(e));
            return;
        case StmtKind::Assign:
            e.kind = ActionKind::Assign;
            e.target = resolve(s.target);
            e.has_target = true;
            e.value = resolve(s.value);
            add_edge(from, std::move(e));
            return;
        case StmtKind::Send:
            e.kind = ActionKind::Send;
            e.chan = resolve(s.chan);
            e.value = resolve(s.value);
            add_edge(from, std::move(e));
            return;
        case StmtKind::Recv:
            e.kind = ActionKind::Recv;
            e.chan = resolve(s.chan);
            e.has_target = s.has_target;
            if (s.has_target) e.target = resolve(s.target);
            add_edge(from, std::move(e));
            return;
        case StmtKind::Guard:
            e.kind = ActionKind::Guard;
            e.value = resolve(s.value);
            add_edge(from, std::move(e));
            return;
        case StmtKind::Timeout:
            e.kind = ActionKind::Timeout;
            add_edge(from, std::move(e));
            return;
        case StmtKind::Fail:
            e.kind = ActionKind::Fail;
            e.text = s.name;
            add_edge(from, std::move(e));
            return;
        case StmtKind::Else:
            e.is_else = true;
            add_edge(from, std::move(e));
            return;
        case StmtKind::Break:
            if (loop_exit_ < 0) throw ModelError("break outside of a do-loop in " + code_.name);
            e.to = loop_exit_;
            add_edge(from, std::move(e));
            return;
        case StmtKind::Goto:
            e.to = label_loc(s.name);
            add_edge(from, std::move(e));
            return;
        case StmtKind::Run: {
            auto it = std::find(template_names_.begin(), template_names_.end(), s.name);
            if (it == template_names_.end()) throw ModelError("run of unknown proctype '" + s.name + "'");
            e.kind = ActionKind::Run;
            e.run_template = static_cast<int>(it - template_names_.begin());
            for (const auto& a : s.args) e.args.push_back(resolve(a));
            add_edge(from, std::move(e));
            return;
        }
        case StmtKind::If:
            for (const auto& opt : s.options) lower_option(opt, from, to);
            return;
        case StmtKind::Do: {
            int saved = loop_exit_;
            loop_exit_ = to;
            for (const auto& opt : s.options) lower_option(opt, from, from);
            loop_exit_ = saved;
            return;
        }
        case StmtKind::Atomic:
        case StmtKind::DStep: {
            std::size_t first = locs_.size();
            regions_.push_back({from, to, s.kind == StmtKind::DStep});
            lower_seq(s.body, from, to);
            regions_.pop_back();
            for (std::size_t i = first; i < locs_.size(); ++i) {
                if (s.kind == StmtKind::Atomic)
                    locs_[i].atomic_interior = true;
                else
                    locs_[i].dstep_interior = true;
            }
            return;
        }
        case StmtKind::Unless: {
            int escape_entry = new_loc();
            lower_seq(s.escape, escape_entry, to);
            escapes_.push_back(escape_entry);
            locs_[static_cast<std::size_t>(from)].escapes = escapes_;
            lower_seq(s.body, from, to);
            escapes_.pop_back();
            return;
        }
        case StmtKind::Inline: {
            auto saved = scope_;
            scope_ = scope_ + s.name + "#" + std::to_string(inline_counter_++) + "::";
            lower_seq(s.body, from, to);
            scope_ = saved;
            return;
        }
        case StmtKind::Label:
        case StmtKind::Decl:
            return;
        }
    }

    void lower_option(const Sequence& opt, int from, int to)
    {
        if (opt.empty()) throw ModelError("empty option in " + code_.name);
        lower_seq(opt, from, to);
    }

    void finalize(int entry, int end)
    {
        for (const auto& [key, ph] : labels_)
            if (!ph.bound) throw ModelError("goto to undefined label '" + key + "' in " + code_.name);

        std::vector<int> index(locs_.size(), -1);
        int n = 0;
        for (std::size_t i = 0; i < locs_.size(); ++i)
            if (find(static_cast<int>(i)) == static_cast<int>(i)) index[i] = n++;

        code_.locations.assign(static_cast<std::size_t>(n), Location{});
        auto remap = [&](int x) { return index[static_cast<std::size_t>(find(x))]; };
        for (std::size_t i = 0; i < locs_.size(); ++i) {
            auto& dst = code_.locations[static_cast<std::size_t>(remap(static_cast<int>(i)))];
            auto& src = locs_[i];
            bool root = find(static_cast<int>(i)) == static_cast<int>(i);
            if (root) {
                dst.escapes = src.escapes;
                dst.atomic_interior = dst.atomic_interior || src.atomic_interior;
                dst.dstep_interior = dst.dstep_interior || src.dstep_interior;
            }
            dst.end_label = dst.end_label || src.end_label;
            if (dst.label.empty()) dst.label = src.label;
            for (auto& e : src.edges) {
                e.to = remap(e.to);
                dst.edges.push_back(std::move(e));
            }
        }
        for (auto& l : code_.locations)
            for (auto& esc : l.escapes) esc = remap(esc);
        code_.entry = remap(entry);
        code_.end = remap(end);
    }

    const Program& program_;
    const std::vector<std::string>& template_names_;
    TemplateCode& code_;
    std::vector<Location> locs_;
    std::vector<int> parent_;
    std::map<std::string, Placeholder> labels_;
    struct Region {
        int entry;
        int exit;
        bool dstep;
    };
    std::vector<Region> regions_;
    std::vector<int> escapes_;
    std::string scope_;
    int loop_exit_ = -1;
    int inline_counter_ = 0;
};

} // namespace

Program::Program(const Model& model) : model_(model)
{
    auto add_global = [this](const std::string& name, int size, bool is_chan) -> GlobalLayout& {
        if (find_global(name)) throw ModelError("duplicate global '" + name + "'");
        GlobalLayout g;
        g.name = name;
        g.offset = static_cast<int>(global_init_.size());
        g.is_array = size > 0;
        g.size = size > 0 ? size : 1;
        g.is_channel = is_chan;
        global_init_.resize(global_init_.size() + static_cast<std::size_t>(g.size), 0);
        globals_.push_back(g);
        return globals_.back();
    };

    for (const auto& c : model_.channels) {
        if (c.capacity < 0) throw ModelError("negative capacity for channel '" + c.name + "'");
        const auto& g = add_global(c.name, c.count, true);
        for (int i = 0; i < g.size; ++i) {
            ChannelInfo info;
            info.name = c.count > 0 ? c.name + "[" + std::to_string(i) + "]" : c.name;
            info.capacity = c.capacity;
            channels_.push_back(info);
            global_init_[static_cast<std::size_t>(g.offset + i)] = static_cast<std::int32_t>(channels_.size());
        }
    }
    for (const auto& v : model_.globals) {
        const auto& g = add_global(v.name, v.size, false);
        if (static_cast<int>(v.init.size()) > g.size) throw ModelError("too many initializers for '" + v.name + "'");
        for (std::size_t i = 0; i < v.init.size(); ++i) global_init_[static_cast<std::size_t>(g.offset) + i] = v.init[i];
    }

    std::vector<std::string> names;
    for (const auto& t : model_.templates) {
        if (std::find(names.begin(), names.end(), t.name) != names.end())
            throw ModelError("duplicate proctype '" + t.name + "'");
        names.push_back(t.name);
    }
    if (!model_.init.empty()) {
        init_template_ = static_cast<int>(names.size());
        names.push_back(":init:");
    }

    templates_.resize(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
        templates_[i].name = names[i];
        ProcessTemplate t;
        if (static_cast<int>(i) == init_template_) {
            t.name = ":init:";
            t.body = model_.init;
        } else {
            t = model_.templates[i];
        }
        Lowerer lowerer(*this, names, templates_[i]);
        lowerer.lower(t);
    }

    for (const auto& [name, e] : model_.propositions) propositions_[name] = resolve_global_expr(e);
}

int Program::template_index(const std::string& name) const
{
    for (std::size_t i = 0; i < templates_.size(); ++i)
        if (templates_[i].name == name) return static_cast<int>(i);
    return -1;
}

const GlobalLayout* Program::find_global(const std::string& name) const
{
    for (const auto& g : globals_)
        if (g.name == name) return &g;
    return nullptr;
}

Expr Program::resolve_global_expr(const Expr& e) const
{
    Expr r = e;
    for (auto& a : r.args) a = resolve_global_expr(a);
    if (e.kind == ExprKind::Var || e.kind == ExprKind::Index) {
        const auto* g = find_global(e.name);
        if (!g) throw ModelError("unbound name '" + e.name + "' in proposition");
        if (g->is_array != (e.kind == ExprKind::Index))
            throw ModelError("'" + e.name + "' used with wrong arity in proposition");
        r.slot = {VarSlot::Scope::Global, g->offset, g->size, g->is_array};
    }
    return r;
}

} // namespace wfv
