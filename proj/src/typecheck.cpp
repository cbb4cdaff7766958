#include "effcore/typecheck.hpp"

#include "effcore/prims.hpp"

namespace effcore {

const char* typeErrorKindName(TypeErrorKind k) {
    switch (k) {
        case TypeErrorKind::UnboundVar: return "UnboundVar";
        case TypeErrorKind::OpNotInSignature: return "OpNotInSignature";
        case TypeErrorKind::SignatureMismatch: return "SignatureMismatch";
        case TypeErrorKind::HandlerClauseMissing: return "HandlerClauseMissing";
        case TypeErrorKind::HandlerClauseExtra: return "HandlerClauseExtra";
        case TypeErrorKind::NotGround: return "NotGround";
        case TypeErrorKind::RespectFailure: return "RespectFailure";
        case TypeErrorKind::Mismatch: return "Mismatch";
    }
    return "TypeError";
}

const TypePtr& Context::lookup(int index, const Span& span) const {
    if (index < 0 || index >= size()) {
        throw TypeError(TypeErrorKind::UnboundVar, span,
                        "unbound variable (index " + std::to_string(index) + ")");
    }
    return bindings_[bindings_.size() - 1 - index].second;
}

namespace {

[[noreturn]] void mismatch(const Span& span, const std::string& expected, const std::string& actual) {
    throw TypeError(TypeErrorKind::Mismatch, span, "expected " + expected + ", got " + actual);
}

struct RespectsDepthGuard {
    const Checker& chk;
    explicit RespectsDepthGuard(const Checker& c) : chk(c) {
        if (++c.respects_depth_ > 16) {
            throw TypeError(TypeErrorKind::RespectFailure, {},
                            "respects-check recursion depth exceeded");
        }
    }
    ~RespectsDepthGuard() { --chk.respects_depth_; }
};

}  // namespace

void Checker::rejectExtension(const Span& span, const char* what) const {
    throw TypeError(TypeErrorKind::Mismatch, span,
                    std::string(what) + " is not available in eff mode");
}

void Checker::requireTypeAvailable(const TypePtr& t, const Span& span) const {
    if (mode_ != Mode::Eff) return;
    if (std::holds_alternative<ValueType::Base>(t->node)) rejectExtension(span, "base type");
    if (std::holds_alternative<ValueType::Sum>(t->node)) rejectExtension(span, "sum type");
    if (auto* a = std::get_if<ValueType::Arrow>(&t->node)) {
        requireTypeAvailable(a->arg, span);
        requireTypeAvailable(a->result->ret, span);
    } else if (auto* p = std::get_if<ValueType::Prod>(&t->node)) {
        for (const auto& i : p->items) requireTypeAvailable(i, span);
    }
}

void Checker::requireGroundSignature(const Signature& sig, const Span& span) const {
    for (const auto& [op, s] : sig.ops) {
        if (!isGround(s.arg) || !isGround(s.result)) {
            throw TypeError(TypeErrorKind::NotGround, span,
                            "operation " + op + " must have ground argument and result types");
        }
    }
}

namespace {

void validateEffectCtx(const Checker& chk, const EffectCtx& e, const Span& span) {
    if (chk.mode() == Mode::EffTheory) {
        if (!e.theory) {
            throw TypeError(TypeErrorKind::Mismatch, span,
                            "computation types must carry an effect theory in effE mode");
        }
        if (!sigEq(e.theory->sig, e.sig)) {
            throw TypeError(TypeErrorKind::SignatureMismatch, span,
                            "effect theory signature differs from the computation signature");
        }
        chk.requireGroundSignature(e.sig, span);
    } else if (e.theory) {
        throw TypeError(TypeErrorKind::Mismatch, span,
                        "effect theories are only available in effE mode");
    }
}

}  // namespace

TypePtr Checker::inferValue(const Context& ctx, const ValuePtr& v) const {
    if (auto* x = std::get_if<Value::Var>(&v->node)) {
        return ctx.lookup(x->index, v->span);
    }
    if (auto* l = std::get_if<Value::Lam>(&v->node)) {
        requireTypeAvailable(l->arg_type, v->span);
        validateEffectCtx(*this, l->body_effects, v->span);
        TypePtr ret = inferComp(ctx.extend(l->hint, l->arg_type), l->body_effects, l->body);
        return tArrow(l->arg_type, tComp(ret, l->body_effects));
    }
    if (auto* t = std::get_if<Value::Tuple>(&v->node)) {
        std::vector<TypePtr> items;
        items.reserve(t->items.size());
        for (const auto& i : t->items) items.push_back(inferValue(ctx, i));
        return tProd(std::move(items));
    }
    if (auto* p = std::get_if<Value::Proj>(&v->node)) {
        TypePtr tup = inferValue(ctx, p->tuple);
        auto* prod = std::get_if<ValueType::Prod>(&tup->node);
        if (!prod) mismatch(v->span, "product type", showType(tup));
        if (p->index < 0 || p->index >= static_cast<int>(prod->items.size())) {
            mismatch(v->span, "projection index within 1.." + std::to_string(prod->items.size()),
                     "pi " + std::to_string(p->index + 1));
        }
        return prod->items[p->index];
    }
    if (auto* j = std::get_if<Value::Inj>(&v->node)) {
        if (mode_ == Mode::Eff) rejectExtension(v->span, "injection");
        auto* sum = std::get_if<ValueType::Sum>(&j->sum_type->node);
        if (!sum) mismatch(v->span, "sum type annotation", showType(j->sum_type));
        if (j->tag < 0 || j->tag >= static_cast<int>(sum->items.size())) {
            mismatch(v->span, "injection tag within 1.." + std::to_string(sum->items.size()),
                     "in#" + std::to_string(j->tag + 1));
        }
        TypePtr payload = inferValue(ctx, j->payload);
        if (!typeEq(payload, sum->items[j->tag])) {
            mismatch(v->span, showType(sum->items[j->tag]), showType(payload));
        }
        return j->sum_type;
    }
    const auto& f = std::get<Value::Prim>(v->node);
    if (mode_ == Mode::Eff) rejectExtension(v->span, "primitive operation");
    const PrimInfo* info = findPrim(f.fn);
    if (!info) {
        throw TypeError(TypeErrorKind::Mismatch, v->span, "unknown primitive " + f.fn);
    }
    if (f.args.size() != info->arg_types.size()) {
        mismatch(v->span, f.fn + "/" + std::to_string(info->arg_types.size()),
                 f.fn + "/" + std::to_string(f.args.size()));
    }
    for (size_t i = 0; i < f.args.size(); ++i) {
        TypePtr a = inferValue(ctx, f.args[i]);
        if (!typeEq(a, info->arg_types[i])) mismatch(v->span, showType(info->arg_types[i]), showType(a));
    }
    return info->result;
}

TypePtr Checker::inferComp(const Context& ctx, const EffectCtx& ambient, const CompPtr& m) const {
    if (auto* x = std::get_if<Comp::App>(&m->node)) {
        TypePtr fn = inferValue(ctx, x->fn);
        auto* arrow = std::get_if<ValueType::Arrow>(&fn->node);
        if (!arrow) mismatch(m->span, "function type", showType(fn));
        TypePtr arg = inferValue(ctx, x->arg);
        if (!typeEq(arg, arrow->arg)) mismatch(m->span, showType(arrow->arg), showType(arg));
        if (!effectCtxEq(arrow->result->effects, ambient)) {
            throw TypeError(TypeErrorKind::SignatureMismatch, m->span,
                            "application result signature " + showSignature(arrow->result->effects.sig) +
                                " differs from ambient " + showSignature(ambient.sig));
        }
        return arrow->result->ret;
    }
    if (auto* r = std::get_if<Comp::Return>(&m->node)) {
        return inferValue(ctx, r->value);
    }
    if (auto* l = std::get_if<Comp::Let>(&m->node)) {
        TypePtr bound = inferComp(ctx, ambient, l->bound);
        return inferComp(ctx.extend(l->hint, bound), ambient, l->body);
    }
    if (auto* o = std::get_if<Comp::OpCall>(&m->node)) {
        const OpSig* sig = ambient.sig.find(o->op);
        if (!sig) {
            throw TypeError(TypeErrorKind::OpNotInSignature, m->span,
                            "operation " + o->op + " is not in signature " + showSignature(ambient.sig));
        }
        TypePtr arg = inferValue(ctx, o->arg);
        if (!typeEq(arg, sig->arg)) mismatch(m->span, showType(sig->arg), showType(arg));
        return sig->result;
    }
    if (auto* h = std::get_if<Comp::Handle>(&m->node)) {
        validateEffectCtx(*this, h->handled, m->span);
        TypePtr subject = inferComp(ctx, h->handled, h->subject);
        TypePtr ret = inferComp(ctx.extend(h->ret_hint, subject), ambient, h->ret_clause);
        CompType c{ret, ambient};
        checkHandler(ctx, h->handler, h->handled.sig, c);
        if (mode_ == Mode::EffTheory && h->handled.theory && !h->handled.theory->axioms.empty()) {
            RespectsDepthGuard guard(*this);
            RespectsVerdict verdict =
                checkRespects(*this, ctx, h->handler, *h->handled.theory, c, respects_mode_);
            if (!verdict.accepted()) {
                std::string msg = "handler does not respect theory";
                for (const auto& a : verdict.per_axiom) {
                    if (a.kind == AxiomVerdict::Fails) {
                        msg += "; axiom " + a.axiom + " fails" + (a.detail.empty() ? "" : ": " + a.detail);
                    } else if (a.kind == AxiomVerdict::Unknown) {
                        msg += "; axiom " + a.axiom + " could not be derived";
                    }
                }
                throw TypeError(TypeErrorKind::RespectFailure, m->span, msg);
            }
        }
        return ret;
    }
    const auto& c = std::get<Comp::Case>(m->node);
    if (mode_ == Mode::Eff) rejectExtension(m->span, "case analysis");
    TypePtr scrut = inferValue(ctx, c.scrutinee);
    auto* sum = std::get_if<ValueType::Sum>(&scrut->node);
    if (!sum) mismatch(m->span, "sum type", showType(scrut));
    if (sum->items.size() != c.branches.size()) {
        mismatch(m->span, std::to_string(sum->items.size()) + " case branches",
                 std::to_string(c.branches.size()));
    }
    TypePtr result;
    for (size_t i = 0; i < c.branches.size(); ++i) {
        TypePtr b = inferComp(ctx.extend(c.branches[i].hint, sum->items[i]), ambient, c.branches[i].body);
        if (!result) {
            result = b;
        } else if (!typeEq(result, b)) {
            mismatch(c.branches[i].body->span, showType(result), showType(b));
        }
    }
    return result;
}

void Checker::checkComp(const Context& ctx, const CompPtr& m, const CompType& expected) const {
    validateEffectCtx(*this, expected.effects, m->span);
    TypePtr ret = inferComp(ctx, expected.effects, m);
    if (!typeEq(ret, expected.ret)) mismatch(m->span, showType(expected.ret), showType(ret));
}

void Checker::checkHandler(const Context& ctx, const Handler& h, const Signature& sig,
                           const CompType& c) const {
    for (const auto& [op, s] : sig.ops) {
        if (h.clauses.count(op) == 0) {
            throw TypeError(TypeErrorKind::HandlerClauseMissing, {},
                            "handler is missing a clause for operation " + op);
        }
    }
    for (const auto& [op, cl] : h.clauses) {
        const OpSig* s = sig.find(op);
        if (!s) {
            throw TypeError(TypeErrorKind::HandlerClauseExtra, cl.body ? cl.body->span : Span{},
                            "handler has a clause for operation " + op + " outside the signature");
        }
        Context body_ctx = ctx.extend(cl.arg_hint, s->arg)
                               .extend(cl.cont_hint, tArrow(s->result, tComp(c.ret, c.effects)));
        TypePtr ret = inferComp(body_ctx, c.effects, cl.body);
        if (!typeEq(ret, c.ret)) mismatch(cl.body->span, showType(c.ret), showType(ret));
    }
}

void Checker::checkEffectTerm(const Context& ground_ctx, const Signature& sig, const EffectTermPtr& t,
                              const TypePtr& expected) const {
    if (auto* r = std::get_if<EffectTerm::Return>(&t->node)) {
        if (!isGroundValue(r->value)) {
            throw TypeError(TypeErrorKind::NotGround, t->span,
                            "effect theory terms may only embed ground values");
        }
        TypePtr a = inferValue(ground_ctx, r->value);
        if (!typeEq(a, expected)) mismatch(t->span, showType(expected), showType(a));
        return;
    }
    if (auto* l = std::get_if<EffectTerm::LetOp>(&t->node)) {
        const OpSig* s = sig.find(l->op);
        if (!s) {
            throw TypeError(TypeErrorKind::OpNotInSignature, t->span,
                            "operation " + l->op + " is not in the theory signature");
        }
        if (!isGroundValue(l->arg)) {
            throw TypeError(TypeErrorKind::NotGround, t->span,
                            "effect theory terms may only embed ground values");
        }
        TypePtr a = inferValue(ground_ctx, l->arg);
        if (!typeEq(a, s->arg)) mismatch(t->span, showType(s->arg), showType(a));
        checkEffectTerm(ground_ctx.extend(l->hint, s->result), sig, l->body, expected);
        return;
    }
    const auto& c = std::get<EffectTerm::Case>(t->node);
    if (!isGroundValue(c.scrutinee)) {
        throw TypeError(TypeErrorKind::NotGround, t->span,
                        "effect theory terms may only embed ground values");
    }
    TypePtr scrut = inferValue(ground_ctx, c.scrutinee);
    auto* sum = std::get_if<ValueType::Sum>(&scrut->node);
    if (!sum) mismatch(t->span, "sum type", showType(scrut));
    if (sum->items.size() != c.branches.size()) {
        mismatch(t->span, std::to_string(sum->items.size()) + " case branches",
                 std::to_string(c.branches.size()));
    }
    for (size_t i = 0; i < c.branches.size(); ++i) {
        checkEffectTerm(ground_ctx.extend(c.branches[i].hint, sum->items[i]), sig, c.branches[i].body,
                        expected);
    }
}

void Checker::checkTheory(const EffectTheory& theory) const {
    requireGroundSignature(theory.sig, {});
    for (const auto& ax : theory.axioms) {
        Context ctx;
        for (const auto& [name, type] : ax.ground_ctx) {
            if (!isGround(type)) {
                throw TypeError(TypeErrorKind::NotGround, {},
                                "axiom " + ax.name + ": context variable " + name + " is not ground");
            }
            ctx = ctx.extend(name, type);
        }
        if (!isGround(ax.result)) {
            throw TypeError(TypeErrorKind::NotGround, {}, "axiom " + ax.name + ": result type is not ground");
        }
        checkEffectTerm(ctx, theory.sig, ax.lhs, ax.result);
        checkEffectTerm(ctx, theory.sig, ax.rhs, ax.result);
    }
}

// ---------------------------------------------------------------------------
// The M-hat[H, k] translation of effect theory terms.
// ---------------------------------------------------------------------------

namespace {

CompPtr translateAt(const EffectTermPtr& term, const Handler& h, const Signature& handled,
                    const CompType& c, int n, int depth) {
    if (auto* r = std::get_if<EffectTerm::Return>(&term->node)) {
        // (return V)[H, k] = k V
        return cApp(vVar(depth, "k"), shiftValue(r->value, 1, depth));
    }
    if (auto* l = std::get_if<EffectTerm::LetOp>(&term->node)) {
        // (let x = op(V) in N)[H, k] = M_op[V/x', (fun x. N[H, k])/k']
        auto it = h.clauses.find(l->op);
        if (it == h.clauses.end()) {
            throw TypeError(TypeErrorKind::HandlerClauseMissing, term->span,
                            "no handler clause for operation " + l->op);
        }
        const OpSig* sig = handled.find(l->op);
        if (!sig) {
            throw TypeError(TypeErrorKind::OpNotInSignature, term->span,
                            "operation " + l->op + " is not in the handled signature");
        }
        CompPtr cont_body = translateAt(l->body, h, handled, c, n, depth + 1);
        ValuePtr cont = vLam(l->hint, sig->result, c.effects, cont_body);
        ValuePtr arg = shiftValue(l->arg, 1, depth);
        // Clause bodies live in (Gamma, x', k'); weaken Gamma under the
        // inserted Delta-hat, k and local binders before instantiating.
        CompPtr clause = shiftComp(it->second.body, n + 1 + depth, 2);
        return openComp(clause, {arg, cont});
    }
    const auto& cs = std::get<EffectTerm::Case>(term->node);
    std::vector<CaseBranch> branches;
    branches.reserve(cs.branches.size());
    for (const auto& b : cs.branches) {
        branches.push_back(CaseBranch{b.hint, translateAt(b.body, h, handled, c, n, depth + 1)});
    }
    return cCase(shiftValue(cs.scrutinee, 1, depth), std::move(branches));
}

}  // namespace

CompPtr translateEffectTerm(const EffectTermPtr& term, const Handler& h, const Signature& handled,
                            const CompType& c, int ground_ctx_size) {
    return translateAt(term, h, handled, c, ground_ctx_size, 0);
}

}  // namespace effcore
