#include <set>
#include <sstream>

#include "effcore/prims.hpp"
#include "effcore/surface.hpp"
#include "effcore/typecheck.hpp"

namespace effcore {

namespace {

bool isArrow(const TypePtr& t) { return std::holds_alternative<ValueType::Arrow>(t->node); }
bool isSum(const TypePtr& t) { return std::holds_alternative<ValueType::Sum>(t->node); }
bool isProdN(const TypePtr& t) {
    auto* p = std::get_if<ValueType::Prod>(&t->node);
    return p && p->items.size() >= 2;
}

void typeTo(std::ostream& os, const TypePtr& t);
void compTypeTo(std::ostream& os, const CompType& c);

void typeAtomTo(std::ostream& os, const TypePtr& t) {
    if (isArrow(t) || isSum(t) || isProdN(t)) {
        os << '(';
        typeTo(os, t);
        os << ')';
    } else {
        typeTo(os, t);
    }
}

void sigTo(std::ostream& os, const Signature& s) {
    os << '{';
    bool first = true;
    for (const auto& [op, entry] : s.ops) {
        if (!first) os << ", ";
        first = false;
        os << op << " : ";
        typeAtomTo(os, entry.arg);
        os << " -> ";
        typeAtomTo(os, entry.result);
    }
    os << '}';
}

void effectCtxTo(std::ostream& os, const EffectCtx& e) {
    sigTo(os, e.sig);
    if (e.theory) {
        os << " / " << (e.theory_name.empty() ? e.theory->name : e.theory_name);
    }
}

void typeTo(std::ostream& os, const TypePtr& t) {
    if (auto* b = std::get_if<ValueType::Base>(&t->node)) {
        os << b->name;
        return;
    }
    if (auto* a = std::get_if<ValueType::Arrow>(&t->node)) {
        if (isArrow(a->arg)) {
            os << '(';
            typeTo(os, a->arg);
            os << ')';
        } else {
            typeTo(os, a->arg);
        }
        os << " -> ";
        compTypeTo(os, *a->result);
        return;
    }
    if (auto* p = std::get_if<ValueType::Prod>(&t->node)) {
        if (p->items.empty()) {
            os << "unit";
            return;
        }
        if (p->items.size() == 1) {
            os << "prod(";
            typeTo(os, p->items[0]);
            os << ')';
            return;
        }
        bool first = true;
        for (const auto& i : p->items) {
            if (!first) os << " * ";
            first = false;
            if (isArrow(i) || isSum(i) || isProdN(i)) {
                os << '(';
                typeTo(os, i);
                os << ')';
            } else {
                typeTo(os, i);
            }
        }
        return;
    }
    const auto& s = std::get<ValueType::Sum>(t->node);
    if (s.items.size() == 1) {
        os << "sum(";
        typeTo(os, s.items[0]);
        os << ')';
        return;
    }
    bool first = true;
    for (const auto& i : s.items) {
        if (!first) os << " + ";
        first = false;
        if (isArrow(i) || isSum(i)) {
            os << '(';
            typeTo(os, i);
            os << ')';
        } else {
            typeTo(os, i);
        }
    }
}

void compTypeTo(std::ostream& os, const CompType& c) {
    if (isArrow(c.ret)) {
        os << '(';
        typeTo(os, c.ret);
        os << ") ! ";
    } else {
        typeTo(os, c.ret);
        os << " ! ";
    }
    effectCtxTo(os, c.effects);
}

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

void collectReserved(const CompPtr& m, std::set<std::string>& out);

void collectReserved(const ValuePtr& v, std::set<std::string>& out) {
    if (auto* l = std::get_if<Value::Lam>(&v->node)) {
        for (const auto& [op, _] : l->body_effects.sig.ops) out.insert(op);
        collectReserved(l->body, out);
    } else if (auto* t = std::get_if<Value::Tuple>(&v->node)) {
        for (const auto& i : t->items) collectReserved(i, out);
    } else if (auto* p = std::get_if<Value::Proj>(&v->node)) {
        collectReserved(p->tuple, out);
    } else if (auto* j = std::get_if<Value::Inj>(&v->node)) {
        collectReserved(j->payload, out);
    } else if (auto* f = std::get_if<Value::Prim>(&v->node)) {
        for (const auto& a : f->args) collectReserved(a, out);
    }
}

void collectReserved(const CompPtr& m, std::set<std::string>& out) {
    if (auto* x = std::get_if<Comp::App>(&m->node)) {
        collectReserved(x->fn, out);
        collectReserved(x->arg, out);
    } else if (auto* r = std::get_if<Comp::Return>(&m->node)) {
        collectReserved(r->value, out);
    } else if (auto* l = std::get_if<Comp::Let>(&m->node)) {
        collectReserved(l->bound, out);
        collectReserved(l->body, out);
    } else if (auto* o = std::get_if<Comp::OpCall>(&m->node)) {
        out.insert(o->op);
        collectReserved(o->arg, out);
    } else if (auto* h = std::get_if<Comp::Handle>(&m->node)) {
        for (const auto& [op, _] : h->handled.sig.ops) out.insert(op);
        collectReserved(h->subject, out);
        for (const auto& [_, cl] : h->handler.clauses) collectReserved(cl.body, out);
        collectReserved(h->ret_clause, out);
    } else if (auto* c = std::get_if<Comp::Case>(&m->node)) {
        collectReserved(c->scrutinee, out);
        for (const auto& b : c->branches) collectReserved(b.body, out);
    }
}

bool referencesBinder(const CompPtr& body, int binder_index) {
    for (const auto& id : freeVars(body))
        if (id.index == binder_index) return true;
    return false;
}

struct TermPrinter {
    std::ostream& os;
    std::vector<std::string> names;  // outermost first
    std::set<std::string> reserved;

    bool taken(const std::string& n) const {
        if (reserved.count(n)) return true;
        for (const auto& x : names)
            if (x == n) return true;
        return false;
    }

    // Picks a printable name for a binder; `used` tells whether the body
    // references it.
    std::string freshen(const std::string& hint, bool used) {
        if (!used) return "_";
        std::string base = hint;
        if (base.empty() || base == "_") base = "x";
        std::string cand = base;
        while (taken(cand)) cand += '\'';
        return cand;
    }

    void var(int index, const std::string& hint) {
        if (index >= 0 && index < static_cast<int>(names.size())) {
            os << names[names.size() - 1 - index];
        } else {
            os << (hint.empty() ? "x" : hint) << "?" << index;
        }
    }

    bool valueIsAtom(const ValuePtr& v) const {
        return !std::holds_alternative<Value::Lam>(v->node);
    }

    void valueAtom(const ValuePtr& v) {
        if (valueIsAtom(v)) {
            value(v);
        } else {
            os << '(';
            value(v);
            os << ')';
        }
    }

    void value(const ValuePtr& v) {
        if (auto* x = std::get_if<Value::Var>(&v->node)) {
            var(x->index, x->hint);
        } else if (auto* l = std::get_if<Value::Lam>(&v->node)) {
            std::string n = freshen(l->hint, referencesBinder(l->body, 0));
            os << "fun " << n << " : ";
            typeTo(os, l->arg_type);
            os << " @ ";
            effectCtxTo(os, l->body_effects);
            os << ". ";
            names.push_back(n);
            comp(l->body);
            names.pop_back();
        } else if (auto* t = std::get_if<Value::Tuple>(&v->node)) {
            os << '<';
            bool first = true;
            for (const auto& i : t->items) {
                if (!first) os << ", ";
                first = false;
                value(i);
            }
            os << '>';
        } else if (auto* p = std::get_if<Value::Proj>(&v->node)) {
            os << "pi " << (p->index + 1) << ' ';
            valueAtom(p->tuple);
        } else if (auto* j = std::get_if<Value::Inj>(&v->node)) {
            int arity = std::holds_alternative<ValueType::Sum>(j->sum_type->node) ? sumArity(j->sum_type) : 0;
            if (j->tag == 0 && arity == 2) {
                os << "inl";
            } else if (j->tag == 1 && arity == 2) {
                os << "inr";
            } else {
                os << "in#" << (j->tag + 1);
            }
            os << '[';
            typeTo(os, j->sum_type);
            os << "] ";
            valueAtom(j->payload);
        } else {
            const auto& f = std::get<Value::Prim>(v->node);
            if (f.args.empty()) {
                if (f.fn.size() == 2 && f.fn[0] == 'i' && std::isdigit(static_cast<unsigned char>(f.fn[1]))) {
                    os << f.fn[1];  // int4 literals print as digits
                } else {
                    os << f.fn;
                }
                return;
            }
            os << f.fn << '(';
            bool first = true;
            for (const auto& a : f.args) {
                if (!first) os << ", ";
                first = false;
                value(a);
            }
            os << ')';
        }
    }

    // True when the printed form of `m` could swallow a following ';'.
    static bool endsOpen(const CompPtr& m) {
        if (std::holds_alternative<Comp::Case>(m->node)) return true;
        if (auto* l = std::get_if<Comp::Let>(&m->node)) return endsOpen(l->body);
        if (auto* h = std::get_if<Comp::Handle>(&m->node)) return endsOpen(h->ret_clause);
        if (auto* r = std::get_if<Comp::Return>(&m->node)) return endsInLam(r->value);
        if (auto* a = std::get_if<Comp::App>(&m->node)) return endsInLam(a->arg);
        return false;
    }
    static bool endsInLam(const ValuePtr& v) {
        if (auto* l = std::get_if<Value::Lam>(&v->node)) return endsOpen(l->body);
        return false;
    }

    void branchBody(const CompPtr& body, bool final_branch) {
        if (!final_branch && endsOpen(body)) {
            os << '(';
            comp(body);
            os << ')';
        } else {
            comp(body);
        }
    }

    void comp(const CompPtr& m) {
        if (auto* x = std::get_if<Comp::App>(&m->node)) {
            valueAtom(x->fn);
            os << ' ';
            valueAtom(x->arg);
        } else if (auto* r = std::get_if<Comp::Return>(&m->node)) {
            os << "return ";
            value(r->value);
        } else if (auto* l = std::get_if<Comp::Let>(&m->node)) {
            std::string n = freshen(l->hint, referencesBinder(l->body, 0));
            os << "let " << n << " = ";
            comp(l->bound);
            os << " in ";
            names.push_back(n);
            comp(l->body);
            names.pop_back();
        } else if (auto* o = std::get_if<Comp::OpCall>(&m->node)) {
            os << o->op << '(';
            value(o->arg);
            os << ')';
        } else if (auto* h = std::get_if<Comp::Handle>(&m->node)) {
            os << "handle ";
            comp(h->subject);
            os << " at ";
            effectCtxTo(os, h->handled);
            os << " with {";
            bool first = true;
            size_t idx = 0;
            for (const auto& [op, cl] : h->handler.clauses) {
                if (!first) os << " ; ";
                first = false;
                std::string xn = freshen(cl.arg_hint, referencesBinder(cl.body, 1));
                names.push_back(xn);
                std::string kn = freshen(cl.cont_hint, referencesBinder(cl.body, 0));
                names.push_back(kn);
                os << op << '(' << xn << ", " << kn << ") -> ";
                branchBody(cl.body, ++idx == h->handler.clauses.size());
                names.pop_back();
                names.pop_back();
            }
            os << "} to ";
            std::string rn = freshen(h->ret_hint, referencesBinder(h->ret_clause, 0));
            os << rn << ". ";
            names.push_back(rn);
            comp(h->ret_clause);
            names.pop_back();
        } else {
            const auto& c = std::get<Comp::Case>(m->node);
            os << "case ";
            value(c.scrutinee);
            os << " of ";
            for (size_t i = 0; i < c.branches.size(); ++i) {
                if (i) os << " ; ";
                if (c.branches.size() == 2) {
                    os << (i == 0 ? "inl" : "inr");
                } else {
                    os << "in#" << (i + 1);
                }
                std::string n = freshen(c.branches[i].hint, referencesBinder(c.branches[i].body, 0));
                os << ' ' << n << " -> ";
                names.push_back(n);
                branchBody(c.branches[i].body, i + 1 == c.branches.size());
                names.pop_back();
            }
        }
    }
};

TermPrinter makePrinter(std::ostream& os, const std::vector<std::string>& scope) {
    TermPrinter p{os, {}, {}};
    for (const auto& prim : allPrims()) p.reserved.insert(prim.name);
    for (const auto& n : scope) p.names.push_back(n);
    return p;
}

}  // namespace

std::string printType(const TypePtr& t) {
    std::ostringstream os;
    typeTo(os, t);
    return os.str();
}
std::string printCompType(const CompType& c) {
    std::ostringstream os;
    compTypeTo(os, c);
    return os.str();
}
std::string printSignature(const Signature& s) {
    std::ostringstream os;
    sigTo(os, s);
    return os.str();
}
std::string printEffectCtx(const EffectCtx& e) {
    std::ostringstream os;
    effectCtxTo(os, e);
    return os.str();
}

std::string printValue(const ValuePtr& v, const std::vector<std::string>& scope) {
    std::ostringstream os;
    TermPrinter p = makePrinter(os, scope);
    collectReserved(v, p.reserved);
    p.value(v);
    return os.str();
}

std::string printComp(const CompPtr& m, const std::vector<std::string>& scope) {
    std::ostringstream os;
    TermPrinter p = makePrinter(os, scope);
    collectReserved(m, p.reserved);
    p.comp(m);
    return os.str();
}

namespace {

CompPtr embedEffectTermLocal(const EffectTermPtr& t) {
    if (auto* r = std::get_if<EffectTerm::Return>(&t->node)) return cReturn(r->value);
    if (auto* l = std::get_if<EffectTerm::LetOp>(&t->node)) {
        return cLet(cOp(l->op, l->arg), l->hint, embedEffectTermLocal(l->body));
    }
    const auto& c = std::get<EffectTerm::Case>(t->node);
    std::vector<CaseBranch> branches;
    for (const auto& b : c.branches) branches.push_back(CaseBranch{b.hint, embedEffectTermLocal(b.body)});
    return cCase(c.scrutinee, std::move(branches));
}

}  // namespace

std::string printEffectTerm(const EffectTermPtr& t, const std::vector<std::string>& scope) {
    return printComp(embedEffectTermLocal(t), scope);
}

std::string printFile(const SourceFile& file) {
    std::ostringstream os;
    bool first = true;
    for (const auto& d : file.decls) {
        if (!first) os << '\n';
        first = false;
        if (auto* s = std::get_if<SigDecl>(&d)) {
            os << "sig " << s->name << " = ";
            sigTo(os, s->sig);
            os << '\n';
        } else if (auto* t = std::get_if<TheoryDecl>(&d)) {
            os << "theory " << t->name << " over ";
            sigTo(os, t->theory->sig);
            os << " {\n";
            for (const auto& ax : t->theory->axioms) {
                os << "  axiom " << ax.name;
                if (!ax.ground_ctx.empty()) {
                    os << " [";
                    bool f2 = true;
                    for (const auto& [n, ty] : ax.ground_ctx) {
                        if (!f2) os << ", ";
                        f2 = false;
                        os << n << " : ";
                        typeTo(os, ty);
                    }
                    os << ']';
                }
                os << " : ";
                typeTo(os, ax.result);
                std::vector<std::string> scope;
                for (const auto& [n, _] : ax.ground_ctx) scope.push_back(n);
                os << " = " << printEffectTerm(ax.lhs, scope) << " ~ " << printEffectTerm(ax.rhs, scope)
                   << '\n';
            }
            os << "}\n";
        } else if (auto* td = std::get_if<TermDecl>(&d)) {
            os << "def " << td->name;
            if (!td->ctx.empty()) {
                os << " [";
                bool f2 = true;
                for (const auto& [n, ty] : td->ctx) {
                    if (!f2) os << ", ";
                    f2 = false;
                    os << n << " : ";
                    typeTo(os, ty);
                }
                os << ']';
            }
            os << " : ";
            std::vector<std::string> scope;
            for (const auto& [n, _] : td->ctx) scope.push_back(n);
            if (td->is_comp) {
                compTypeTo(os, *td->ctype);
                os << " = " << printComp(td->comp, scope) << '\n';
            } else {
                typeTo(os, td->vtype);
                os << " = " << printValue(td->value, scope) << '\n';
            }
        } else {
            const auto& g = std::get<EqGoal>(d);
            os << "goal " << g.name;
            if (!g.ctx.empty()) {
                os << " [";
                bool f2 = true;
                for (const auto& [n, ty] : g.ctx) {
                    if (!f2) os << ", ";
                    f2 = false;
                    os << n << " : ";
                    typeTo(os, ty);
                }
                os << ']';
            }
            os << " : ";
            std::vector<std::string> scope;
            for (const auto& [n, _] : g.ctx) scope.push_back(n);
            if (g.is_comp) {
                compTypeTo(os, *g.ctype);
                os << " = " << printComp(g.lhs_comp, scope) << " ~ " << printComp(g.rhs_comp, scope)
                   << '\n';
            } else {
                typeTo(os, g.vtype);
                os << " = " << printValue(g.lhs_value, scope) << " ~ " << printValue(g.rhs_value, scope)
                   << '\n';
            }
        }
    }
    return os.str();
}

// Error-message helpers declared in typecheck.hpp.
std::string showType(const TypePtr& t) { return printType(t); }
std::string showCompType(const CompType& c) { return printCompType(c); }
std::string showSignature(const Signature& s) { return printSignature(s); }

}  // namespace effcore
