#include "effcore/equations.hpp"

#include <deque>
#include <optional>

namespace effcore {

const char* rewriteRuleName(RewriteRule r) {
    switch (r) {
        case RewriteRule::BetaLam: return "beta-lam";
        case RewriteRule::BetaProj: return "beta-proj";
        case RewriteRule::BetaCase: return "beta-case";
        case RewriteRule::RetLet: return "ret-let";
        case RewriteRule::LetLet: return "let-let";
        case RewriteRule::LetRet: return "let-ret";
        case RewriteRule::HandleRet: return "handle-ret";
        case RewriteRule::HandleLet: return "handle-let";
        case RewriteRule::HandleOp: return "handle-op";
        case RewriteRule::CaseHandle: return "case-handle";
    }
    return "?";
}

CompPtr embedEffectTerm(const EffectTermPtr& t) {
    if (auto* r = std::get_if<EffectTerm::Return>(&t->node)) return cReturn(r->value);
    if (auto* l = std::get_if<EffectTerm::LetOp>(&t->node)) {
        return cLet(cOp(l->op, l->arg), l->hint, embedEffectTerm(l->body));
    }
    const auto& c = std::get<EffectTerm::Case>(t->node);
    std::vector<CaseBranch> branches;
    branches.reserve(c.branches.size());
    for (const auto& b : c.branches) branches.push_back(CaseBranch{b.hint, embedEffectTerm(b.body)});
    return cCase(c.scrutinee, std::move(branches));
}

std::pair<CompPtr, CompPtr> instantiateAxiom(const Axiom& ax, const std::vector<ValuePtr>& sigma) {
    return {openComp(embedEffectTerm(ax.lhs), sigma), openComp(embedEffectTerm(ax.rhs), sigma)};
}

// ---------------------------------------------------------------------------
// One-step rewriting, outermost-first, leftmost child order.
// ---------------------------------------------------------------------------

namespace {

struct Rewriter {
    std::vector<int> path;
    RwStep step;

    std::optional<CompPtr> ruleAt(const EffectCtx& ambient, const CompPtr& m) {
        if (auto* a = std::get_if<Comp::App>(&m->node)) {
            if (auto* l = std::get_if<Value::Lam>(&a->fn->node)) {
                record(RewriteRule::BetaLam, m);
                return openComp(l->body, {a->arg});
            }
            return std::nullopt;
        }
        if (auto* l = std::get_if<Comp::Let>(&m->node)) {
            if (auto* r = std::get_if<Comp::Return>(&l->bound->node)) {
                record(RewriteRule::RetLet, m);
                return openComp(l->body, {r->value});
            }
            if (auto* inner = std::get_if<Comp::Let>(&l->bound->node)) {
                record(RewriteRule::LetLet, m);
                return cLet(inner->bound, inner->hint,
                            cLet(inner->body, l->hint, shiftComp(l->body, 1, 1)));
            }
            if (auto* r = std::get_if<Comp::Return>(&l->body->node)) {
                if (auto* v = std::get_if<Value::Var>(&r->value->node); v && v->index == 0) {
                    record(RewriteRule::LetRet, m);
                    return l->bound;
                }
            }
            return std::nullopt;
        }
        if (auto* h = std::get_if<Comp::Handle>(&m->node)) {
            if (auto* r = std::get_if<Comp::Return>(&h->subject->node)) {
                record(RewriteRule::HandleRet, m);
                return openComp(h->ret_clause, {r->value});
            }
            if (auto* l = std::get_if<Comp::Let>(&h->subject->node)) {
                record(RewriteRule::HandleLet, m);
                CompPtr inner = cHandle(l->body, h->handled, shiftHandler(h->handler, 1), h->ret_hint,
                                        shiftComp(h->ret_clause, 1, 1));
                return cHandle(l->bound, h->handled, h->handler, l->hint, inner);
            }
            if (auto* o = std::get_if<Comp::OpCall>(&h->subject->node)) {
                auto it = h->handler.clauses.find(o->op);
                const OpSig* sig = h->handled.sig.find(o->op);
                if (it != h->handler.clauses.end() && sig) {
                    record(RewriteRule::HandleOp, m);
                    ValuePtr k = vLam(h->ret_hint, sig->result, ambient, h->ret_clause);
                    return openComp(it->second.body, {o->arg, k});
                }
                return std::nullopt;
            }
            if (auto* c = std::get_if<Comp::Case>(&h->subject->node)) {
                record(RewriteRule::CaseHandle, m);
                std::vector<CaseBranch> branches;
                branches.reserve(c->branches.size());
                for (const auto& b : c->branches) {
                    branches.push_back(
                        CaseBranch{b.hint, cHandle(b.body, h->handled, shiftHandler(h->handler, 1),
                                                   h->ret_hint, shiftComp(h->ret_clause, 1, 1))});
                }
                return cCase(c->scrutinee, std::move(branches));
            }
            return std::nullopt;
        }
        if (auto* c = std::get_if<Comp::Case>(&m->node)) {
            if (auto* j = std::get_if<Value::Inj>(&c->scrutinee->node)) {
                if (j->tag >= 0 && j->tag < static_cast<int>(c->branches.size())) {
                    record(RewriteRule::BetaCase, m);
                    return openComp(c->branches[j->tag].body, {j->payload});
                }
            }
            return std::nullopt;
        }
        return std::nullopt;
    }

    std::optional<ValuePtr> ruleAtValue(const ValuePtr& v) {
        if (auto* p = std::get_if<Value::Proj>(&v->node)) {
            if (auto* t = std::get_if<Value::Tuple>(&p->tuple->node)) {
                if (p->index >= 0 && p->index < static_cast<int>(t->items.size())) {
                    record(RewriteRule::BetaProj, v);
                    return t->items[p->index];
                }
            }
        }
        return std::nullopt;
    }

    void record(RewriteRule r, const CompPtr& before) {
        step.path = path;
        step.rule = r;
        step.before = before;
    }
    void record(RewriteRule r, const ValuePtr& before) {
        step.path = path;
        step.rule = r;
        step.before = before;
    }

    std::optional<ValuePtr> onceValue(const ValuePtr& v) {
        if (auto res = ruleAtValue(v)) {
            step.after = *res;
            return res;
        }
        if (auto* l = std::get_if<Value::Lam>(&v->node)) {
            path.push_back(0);
            if (auto b = onceComp(l->body_effects, l->body)) {
                return vLam(l->hint, l->arg_type, l->body_effects, *b);
            }
            path.pop_back();
            return std::nullopt;
        }
        if (auto* t = std::get_if<Value::Tuple>(&v->node)) {
            for (size_t i = 0; i < t->items.size(); ++i) {
                path.push_back(static_cast<int>(i));
                if (auto r = onceValue(t->items[i])) {
                    auto items = t->items;
                    items[i] = *r;
                    return vTuple(std::move(items));
                }
                path.pop_back();
            }
            return std::nullopt;
        }
        if (auto* p = std::get_if<Value::Proj>(&v->node)) {
            path.push_back(0);
            if (auto r = onceValue(p->tuple)) return vProj(p->index, *r);
            path.pop_back();
            return std::nullopt;
        }
        if (auto* j = std::get_if<Value::Inj>(&v->node)) {
            path.push_back(0);
            if (auto r = onceValue(j->payload)) return vInj(j->tag, j->sum_type, *r);
            path.pop_back();
            return std::nullopt;
        }
        if (auto* f = std::get_if<Value::Prim>(&v->node)) {
            for (size_t i = 0; i < f->args.size(); ++i) {
                path.push_back(static_cast<int>(i));
                if (auto r = onceValue(f->args[i])) {
                    auto args = f->args;
                    args[i] = *r;
                    return vPrim(f->fn, std::move(args));
                }
                path.pop_back();
            }
            return std::nullopt;
        }
        return std::nullopt;
    }

    std::optional<CompPtr> onceComp(const EffectCtx& ambient, const CompPtr& m) {
        if (auto res = ruleAt(ambient, m)) {
            step.after = *res;
            return res;
        }
        if (auto* a = std::get_if<Comp::App>(&m->node)) {
            path.push_back(0);
            if (auto r = onceValue(a->fn)) return cApp(*r, a->arg);
            path.back() = 1;
            if (auto r = onceValue(a->arg)) return cApp(a->fn, *r);
            path.pop_back();
            return std::nullopt;
        }
        if (auto* r0 = std::get_if<Comp::Return>(&m->node)) {
            path.push_back(0);
            if (auto r = onceValue(r0->value)) return cReturn(*r);
            path.pop_back();
            return std::nullopt;
        }
        if (auto* l = std::get_if<Comp::Let>(&m->node)) {
            path.push_back(0);
            if (auto r = onceComp(ambient, l->bound)) return cLet(*r, l->hint, l->body);
            path.back() = 1;
            if (auto r = onceComp(ambient, l->body)) return cLet(l->bound, l->hint, *r);
            path.pop_back();
            return std::nullopt;
        }
        if (auto* o = std::get_if<Comp::OpCall>(&m->node)) {
            path.push_back(0);
            if (auto r = onceValue(o->arg)) return cOp(o->op, *r);
            path.pop_back();
            return std::nullopt;
        }
        if (auto* h = std::get_if<Comp::Handle>(&m->node)) {
            path.push_back(0);
            if (auto r = onceComp(h->handled, h->subject)) {
                return cHandle(*r, h->handled, h->handler, h->ret_hint, h->ret_clause);
            }
            int child = 1;
            for (const auto& [op, cl] : h->handler.clauses) {
                path.back() = child++;
                if (auto r = onceComp(ambient, cl.body)) {
                    Handler out = h->handler;
                    out.clauses[op].body = *r;
                    return cHandle(h->subject, h->handled, std::move(out), h->ret_hint, h->ret_clause);
                }
            }
            path.back() = child;
            if (auto r = onceComp(ambient, h->ret_clause)) {
                return cHandle(h->subject, h->handled, h->handler, h->ret_hint, *r);
            }
            path.pop_back();
            return std::nullopt;
        }
        const auto& c = std::get<Comp::Case>(m->node);
        path.push_back(0);
        if (auto r = onceValue(c.scrutinee)) return cCase(*r, c.branches);
        for (size_t i = 0; i < c.branches.size(); ++i) {
            path.back() = static_cast<int>(i + 1);
            if (auto r = onceComp(ambient, c.branches[i].body)) {
                auto branches = c.branches;
                branches[i].body = *r;
                return cCase(c.scrutinee, std::move(branches));
            }
        }
        path.pop_back();
        return std::nullopt;
    }
};

}  // namespace

NormalizedComp normalizeComp(const EffectCtx& ambient, const CompPtr& m, int budget) {
    NormalizedComp out{m, {}};
    while (budget-- > 0) {
        Rewriter rw;
        auto next = rw.onceComp(ambient, out.term);
        if (!next) return out;
        out.term = *next;
        out.trace.steps.push_back(std::move(rw.step));
    }
    out.trace.complete = false;
    return out;
}

NormalizedValue normalizeValue(const ValuePtr& v, int budget) {
    NormalizedValue out{v, {}};
    while (budget-- > 0) {
        Rewriter rw;
        auto next = rw.onceValue(out.term);
        if (!next) return out;
        out.term = *next;
        out.trace.steps.push_back(std::move(rw.step));
    }
    out.trace.complete = false;
    return out;
}

// ---------------------------------------------------------------------------
// Typed comparison modulo alpha and eta.
// ---------------------------------------------------------------------------

namespace {

bool compEqEta(const Checker& chk, const Context& ctx, const EffectCtx& ambient, const CompPtr& a,
               const CompPtr& b, const TypePtr& ret);

bool valueEqEta(const Checker& chk, const Context& ctx, const ValuePtr& a, const ValuePtr& b,
                const TypePtr& type) {
    if (alphaEq(a, b)) return true;
    if (auto* arrow = std::get_if<ValueType::Arrow>(&type->node)) {
        auto bodyOf = [&](const ValuePtr& v) -> CompPtr {
            if (auto* l = std::get_if<Value::Lam>(&v->node)) return l->body;
            return cApp(shiftValue(v, 1), vVar(0, "x"));
        };
        return compEqEta(chk, ctx.extend("x", arrow->arg), arrow->result->effects, bodyOf(a), bodyOf(b),
                         arrow->result->ret);
    }
    if (auto* prod = std::get_if<ValueType::Prod>(&type->node)) {
        auto projOf = [](const ValuePtr& v, int i) -> ValuePtr {
            if (auto* t = std::get_if<Value::Tuple>(&v->node)) return t->items[i];
            return vProj(i, v);
        };
        for (size_t i = 0; i < prod->items.size(); ++i) {
            if (!valueEqEta(chk, ctx, projOf(a, static_cast<int>(i)), projOf(b, static_cast<int>(i)),
                            prod->items[i])) {
                return false;
            }
        }
        return true;
    }
    if (auto* sum = std::get_if<ValueType::Sum>(&type->node)) {
        auto* ja = std::get_if<Value::Inj>(&a->node);
        auto* jb = std::get_if<Value::Inj>(&b->node);
        if (ja && jb && ja->tag == jb->tag) {
            return valueEqEta(chk, ctx, ja->payload, jb->payload, sum->items[ja->tag]);
        }
        return false;
    }
    return false;
}

bool compEqEta(const Checker& chk, const Context& ctx, const EffectCtx& ambient, const CompPtr& a,
               const CompPtr& b, const TypePtr& ret) {
    if (alphaEq(a, b)) return true;
    if (a->node.index() != b->node.index()) return false;
    try {
        if (auto* xa = std::get_if<Comp::App>(&a->node)) {
            const auto& xb = std::get<Comp::App>(b->node);
            TypePtr fa = chk.inferValue(ctx, xa->fn);
            TypePtr fb = chk.inferValue(ctx, xb.fn);
            if (!typeEq(fa, fb)) return false;
            auto* arrow = std::get_if<ValueType::Arrow>(&fa->node);
            if (!arrow) return false;
            return valueEqEta(chk, ctx, xa->fn, xb.fn, fa) &&
                   valueEqEta(chk, ctx, xa->arg, xb.arg, arrow->arg);
        }
        if (auto* ra = std::get_if<Comp::Return>(&a->node)) {
            return valueEqEta(chk, ctx, ra->value, std::get<Comp::Return>(b->node).value, ret);
        }
        if (auto* la = std::get_if<Comp::Let>(&a->node)) {
            const auto& lb = std::get<Comp::Let>(b->node);
            TypePtr ta = chk.inferComp(ctx, ambient, la->bound);
            TypePtr tb = chk.inferComp(ctx, ambient, lb.bound);
            if (!typeEq(ta, tb)) return false;
            return compEqEta(chk, ctx, ambient, la->bound, lb.bound, ta) &&
                   compEqEta(chk, ctx.extend(la->hint, ta), ambient, la->body, lb.body, ret);
        }
        if (auto* oa = std::get_if<Comp::OpCall>(&a->node)) {
            const auto& ob = std::get<Comp::OpCall>(b->node);
            if (oa->op != ob.op) return false;
            const OpSig* sig = ambient.sig.find(oa->op);
            if (!sig) return false;
            return valueEqEta(chk, ctx, oa->arg, ob.arg, sig->arg);
        }
        if (auto* ha = std::get_if<Comp::Handle>(&a->node)) {
            const auto& hb = std::get<Comp::Handle>(b->node);
            if (!effectCtxEq(ha->handled, hb.handled)) return false;
            TypePtr sa = chk.inferComp(ctx, ha->handled, ha->subject);
            TypePtr sb = chk.inferComp(ctx, hb.handled, hb.subject);
            if (!typeEq(sa, sb)) return false;
            if (!compEqEta(chk, ctx, ha->handled, ha->subject, hb.subject, sa)) return false;
            if (!compEqEta(chk, ctx.extend(ha->ret_hint, sa), ambient, ha->ret_clause, hb.ret_clause,
                           ret)) {
                return false;
            }
            if (ha->handler.clauses.size() != hb.handler.clauses.size()) return false;
            auto itb = hb.handler.clauses.begin();
            for (const auto& [op, cla] : ha->handler.clauses) {
                if (itb->first != op) return false;
                const OpSig* sig = ha->handled.sig.find(op);
                if (!sig) return false;
                Context body_ctx =
                    ctx.extend(cla.arg_hint, sig->arg)
                        .extend(cla.cont_hint, tArrow(sig->result, tComp(ret, ambient)));
                if (!compEqEta(chk, body_ctx, ambient, cla.body, itb->second.body, ret)) return false;
                ++itb;
            }
            return true;
        }
        const auto& ca = std::get<Comp::Case>(a->node);
        const auto& cb = std::get<Comp::Case>(b->node);
        TypePtr sa = chk.inferValue(ctx, ca.scrutinee);
        TypePtr sb = chk.inferValue(ctx, cb.scrutinee);
        if (!typeEq(sa, sb)) return false;
        auto* sum = std::get_if<ValueType::Sum>(&sa->node);
        if (!sum) return false;
        if (!valueEqEta(chk, ctx, ca.scrutinee, cb.scrutinee, sa)) return false;
        if (ca.branches.size() != cb.branches.size()) return false;
        for (size_t i = 0; i < ca.branches.size(); ++i) {
            if (!compEqEta(chk, ctx.extend(ca.branches[i].hint, sum->items[i]), ambient,
                           ca.branches[i].body, cb.branches[i].body, ret)) {
                return false;
            }
        }
        return true;
    } catch (const TypeError&) {
        return false;
    }
}

}  // namespace

bool equalModuloEta(const Checker& chk, const Context& ctx, const CompPtr& a, const CompPtr& b,
                    const CompType& type) {
    return compEqEta(chk, ctx, type.effects, a, b, type.ret);
}
bool equalModuloEtaValue(const Checker& chk, const Context& ctx, const ValuePtr& a, const ValuePtr& b,
                         const TypePtr& type) {
    return valueEqEta(chk, ctx, a, b, type);
}

// ---------------------------------------------------------------------------
// Bounded axiom-instance search (theory mode).
// ---------------------------------------------------------------------------

namespace {

constexpr int kMaxInstances = 100;
constexpr int kMaxMatchDepth = 6;

bool matchValue(const ValuePtr& pat, const ValuePtr& t, int d, std::map<int, ValuePtr>& b);
bool matchComp(const CompPtr& pat, const CompPtr& t, int d, std::map<int, ValuePtr>& b);

bool bindMeta(int meta, const ValuePtr& t, int d, std::map<int, ValuePtr>& b) {
    for (const auto& fv : freeVars(t)) {
        if (fv.index < d) return false;  // would capture a pattern-local binder
    }
    ValuePtr lowered = shiftValue(t, -d, 0);
    auto it = b.find(meta);
    if (it != b.end()) return alphaEq(it->second, lowered);
    b.emplace(meta, lowered);
    return true;
}

bool matchValue(const ValuePtr& pat, const ValuePtr& t, int d, std::map<int, ValuePtr>& b) {
    if (auto* x = std::get_if<Value::Var>(&pat->node)) {
        if (x->index >= d) return bindMeta(x->index - d, t, d, b);
        auto* tx = std::get_if<Value::Var>(&t->node);
        return tx && tx->index == x->index;
    }
    if (pat->node.index() != t->node.index()) return false;
    if (auto* l = std::get_if<Value::Lam>(&pat->node)) {
        const auto& tl = std::get<Value::Lam>(t->node);
        return typeEq(l->arg_type, tl.arg_type) && effectCtxEq(l->body_effects, tl.body_effects) &&
               matchComp(l->body, tl.body, d + 1, b);
    }
    if (auto* tp = std::get_if<Value::Tuple>(&pat->node)) {
        const auto& tt = std::get<Value::Tuple>(t->node);
        if (tp->items.size() != tt.items.size()) return false;
        for (size_t i = 0; i < tp->items.size(); ++i)
            if (!matchValue(tp->items[i], tt.items[i], d, b)) return false;
        return true;
    }
    if (auto* pp = std::get_if<Value::Proj>(&pat->node)) {
        const auto& tp2 = std::get<Value::Proj>(t->node);
        return pp->index == tp2.index && matchValue(pp->tuple, tp2.tuple, d, b);
    }
    if (auto* jp = std::get_if<Value::Inj>(&pat->node)) {
        const auto& jt = std::get<Value::Inj>(t->node);
        return jp->tag == jt.tag && typeEq(jp->sum_type, jt.sum_type) &&
               matchValue(jp->payload, jt.payload, d, b);
    }
    const auto& fp = std::get<Value::Prim>(pat->node);
    const auto& ft = std::get<Value::Prim>(t->node);
    if (fp.fn != ft.fn || fp.args.size() != ft.args.size()) return false;
    for (size_t i = 0; i < fp.args.size(); ++i)
        if (!matchValue(fp.args[i], ft.args[i], d, b)) return false;
    return true;
}

bool matchComp(const CompPtr& pat, const CompPtr& t, int d, std::map<int, ValuePtr>& b) {
    if (pat->node.index() != t->node.index()) return false;
    if (auto* a = std::get_if<Comp::App>(&pat->node)) {
        const auto& ta = std::get<Comp::App>(t->node);
        return matchValue(a->fn, ta.fn, d, b) && matchValue(a->arg, ta.arg, d, b);
    }
    if (auto* r = std::get_if<Comp::Return>(&pat->node)) {
        return matchValue(r->value, std::get<Comp::Return>(t->node).value, d, b);
    }
    if (auto* l = std::get_if<Comp::Let>(&pat->node)) {
        const auto& tl = std::get<Comp::Let>(t->node);
        return matchComp(l->bound, tl.bound, d, b) && matchComp(l->body, tl.body, d + 1, b);
    }
    if (auto* o = std::get_if<Comp::OpCall>(&pat->node)) {
        const auto& to = std::get<Comp::OpCall>(t->node);
        return o->op == to.op && matchValue(o->arg, to.arg, d, b);
    }
    if (auto* h = std::get_if<Comp::Handle>(&pat->node)) {
        const auto& th = std::get<Comp::Handle>(t->node);
        if (!effectCtxEq(h->handled, th.handled)) return false;
        if (h->handler.clauses.size() != th.handler.clauses.size()) return false;
        if (!matchComp(h->subject, th.subject, d, b)) return false;
        auto it = th.handler.clauses.begin();
        for (const auto& [op, cl] : h->handler.clauses) {
            if (it->first != op) return false;
            if (!matchComp(cl.body, it->second.body, d + 2, b)) return false;
            ++it;
        }
        return matchComp(h->ret_clause, th.ret_clause, d + 1, b);
    }
    const auto& c = std::get<Comp::Case>(pat->node);
    const auto& tc = std::get<Comp::Case>(t->node);
    if (!matchValue(c.scrutinee, tc.scrutinee, d, b)) return false;
    if (c.branches.size() != tc.branches.size()) return false;
    for (size_t i = 0; i < c.branches.size(); ++i)
        if (!matchComp(c.branches[i].body, tc.branches[i].body, d + 1, b)) return false;
    return true;
}

void collectPositions(const CompPtr& m, int depth, std::vector<int>& path,
                      std::vector<std::pair<std::vector<int>, CompPtr>>& out) {
    if (depth > kMaxMatchDepth) return;
    out.emplace_back(path, m);
    auto walk = [&](int idx, const CompPtr& sub) {
        path.push_back(idx);
        collectPositions(sub, depth + 1, path, out);
        path.pop_back();
    };
    if (auto* l = std::get_if<Comp::Let>(&m->node)) {
        walk(0, l->bound);
        walk(1, l->body);
    } else if (auto* h = std::get_if<Comp::Handle>(&m->node)) {
        walk(0, h->subject);
        int child = 1;
        for (const auto& [op, cl] : h->handler.clauses) walk(child++, cl.body);
        walk(child, h->ret_clause);
    } else if (auto* c = std::get_if<Comp::Case>(&m->node)) {
        for (size_t i = 0; i < c->branches.size(); ++i) walk(static_cast<int>(i + 1), c->branches[i].body);
    }
}

CompPtr replaceAt(const CompPtr& m, const std::vector<int>& path, size_t i, const CompPtr& repl) {
    if (i == path.size()) return repl;
    int idx = path[i];
    if (auto* l = std::get_if<Comp::Let>(&m->node)) {
        if (idx == 0) return cLet(replaceAt(l->bound, path, i + 1, repl), l->hint, l->body);
        return cLet(l->bound, l->hint, replaceAt(l->body, path, i + 1, repl));
    }
    if (auto* h = std::get_if<Comp::Handle>(&m->node)) {
        if (idx == 0) {
            return cHandle(replaceAt(h->subject, path, i + 1, repl), h->handled, h->handler, h->ret_hint,
                           h->ret_clause);
        }
        int child = 1;
        for (const auto& [op, cl] : h->handler.clauses) {
            if (idx == child) {
                Handler out = h->handler;
                out.clauses[op].body = replaceAt(cl.body, path, i + 1, repl);
                return cHandle(h->subject, h->handled, std::move(out), h->ret_hint, h->ret_clause);
            }
            ++child;
        }
        return cHandle(h->subject, h->handled, h->handler, h->ret_hint,
                       replaceAt(h->ret_clause, path, i + 1, repl));
    }
    if (auto* c = std::get_if<Comp::Case>(&m->node)) {
        auto branches = c->branches;
        branches[idx - 1].body = replaceAt(branches[idx - 1].body, path, i + 1, repl);
        return cCase(c->scrutinee, std::move(branches));
    }
    return m;
}

// Tries to rewrite `m` once with an instantiated axiom (either orientation).
std::vector<std::pair<CompPtr, std::string>> axiomRewrites(const CompPtr& m, const EffectTheory& theory) {
    std::vector<std::pair<CompPtr, std::string>> out;
    std::vector<std::pair<std::vector<int>, CompPtr>> positions;
    std::vector<int> path;
    collectPositions(m, 0, path, positions);
    for (const auto& ax : theory.axioms) {
        int n = static_cast<int>(ax.ground_ctx.size());
        for (int dir = 0; dir < 2; ++dir) {
            CompPtr pat = embedEffectTerm(dir == 0 ? ax.lhs : ax.rhs);
            CompPtr rep = embedEffectTerm(dir == 0 ? ax.rhs : ax.lhs);
            for (const auto& [pos, sub] : positions) {
                std::map<int, ValuePtr> b;
                if (!matchComp(pat, sub, 0, b)) continue;
                if (static_cast<int>(b.size()) != n) continue;  // underdetermined instance
                std::vector<ValuePtr> sigma(n);
                bool ok = true;
                for (const auto& [meta, val] : b) {
                    if (meta < 0 || meta >= n) {
                        ok = false;
                        break;
                    }
                    sigma[n - 1 - meta] = val;
                }
                if (!ok) continue;
                CompPtr inst = openComp(rep, sigma);
                out.emplace_back(replaceAt(m, pos, 0, inst),
                                 ax.name + (dir == 0 ? "" : " (reversed)"));
            }
        }
    }
    return out;
}

}  // namespace

EqResult checkDerivableEq(const Checker& chk, const Context& ctx, const CompPtr& lhs, const CompPtr& rhs,
                          const CompType& type, const EffectTheory* theory, int budget) {
    EqResult out;
    NormalizedComp nl = normalizeComp(type.effects, lhs, budget);
    NormalizedComp nr = normalizeComp(type.effects, rhs, budget);
    out.lhs_trace = nl.trace;
    out.rhs_trace = nr.trace;
    if (!nl.trace.complete || !nr.trace.complete) {
        out.note = "rewrite budget exhausted";
        return out;
    }
    if (equalModuloEta(chk, ctx, nl.term, nr.term, type)) {
        out.verdict = EqVerdict::Proved;
        return out;
    }
    if (!theory || theory->axioms.empty()) return out;

    // Bounded closure of the lhs normal form under axiom instances.
    std::deque<std::pair<CompPtr, std::vector<std::string>>> frontier;
    std::vector<CompPtr> seen;
    frontier.emplace_back(nl.term, std::vector<std::string>{});
    seen.push_back(nl.term);
    int expanded = 0;
    while (!frontier.empty() && expanded < kMaxInstances) {
        auto [cur, used] = frontier.front();
        frontier.pop_front();
        for (auto& [next_raw, ax_name] : axiomRewrites(cur, *theory)) {
            if (++expanded > kMaxInstances) break;
            NormalizedComp nn = normalizeComp(type.effects, next_raw, budget);
            if (!nn.trace.complete) continue;
            bool dup = false;
            for (const auto& s : seen) {
                if (alphaEq(s, nn.term)) {
                    dup = true;
                    break;
                }
            }
            if (dup) continue;
            auto used2 = used;
            used2.push_back(ax_name);
            if (equalModuloEta(chk, ctx, nn.term, nr.term, type)) {
                out.verdict = EqVerdict::Proved;
                out.note = "via axiom(s):";
                for (const auto& u : used2) out.note += " " + u;
                return out;
            }
            seen.push_back(nn.term);
            frontier.emplace_back(nn.term, std::move(used2));
        }
    }
    return out;
}

EqResult checkDerivableEqValue(const Checker& chk, const Context& ctx, const ValuePtr& lhs,
                               const ValuePtr& rhs, const TypePtr& type, const EffectTheory*,
                               int budget) {
    EqResult out;
    NormalizedValue nl = normalizeValue(lhs, budget);
    NormalizedValue nr = normalizeValue(rhs, budget);
    if (!nl.trace.complete || !nr.trace.complete) {
        out.note = "rewrite budget exhausted";
        return out;
    }
    if (equalModuloEtaValue(chk, ctx, nl.term, nr.term, type)) out.verdict = EqVerdict::Proved;
    return out;
}

}  // namespace effcore
