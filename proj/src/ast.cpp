#include "effcore/ast.hpp"

#include <algorithm>
#include <functional>

namespace effcore {

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

TypePtr tBase(std::string name) {
    return std::make_shared<ValueType>(ValueType{ValueType::Base{std::move(name)}});
}
TypePtr tArrow(TypePtr arg, CompTypePtr result) {
    return std::make_shared<ValueType>(ValueType{ValueType::Arrow{std::move(arg), std::move(result)}});
}
TypePtr tProd(std::vector<TypePtr> items) {
    return std::make_shared<ValueType>(ValueType{ValueType::Prod{std::move(items)}});
}
TypePtr tSum(std::vector<TypePtr> items) {
    return std::make_shared<ValueType>(ValueType{ValueType::Sum{std::move(items)}});
}
TypePtr tUnit() {
    static TypePtr unit = tProd({});
    return unit;
}
CompTypePtr tComp(TypePtr ret, EffectCtx effects) {
    return std::make_shared<CompType>(CompType{std::move(ret), std::move(effects)});
}
CompTypePtr tComp(TypePtr ret, Signature sig) {
    return tComp(std::move(ret), EffectCtx{std::move(sig), nullptr, {}});
}

ValuePtr vVar(int index, std::string hint) {
    return std::make_shared<Value>(Value{Value::Var{index, std::move(hint)}});
}
ValuePtr vLam(std::string hint, TypePtr arg_type, EffectCtx body_effects, CompPtr body) {
    return std::make_shared<Value>(
        Value{Value::Lam{std::move(hint), std::move(arg_type), std::move(body_effects), std::move(body)}});
}
ValuePtr vTuple(std::vector<ValuePtr> items) {
    return std::make_shared<Value>(Value{Value::Tuple{std::move(items)}});
}
ValuePtr vUnit() {
    static ValuePtr unit = vTuple({});
    return unit;
}
ValuePtr vProj(int index, ValuePtr tuple) {
    return std::make_shared<Value>(Value{Value::Proj{index, std::move(tuple)}});
}
ValuePtr vInj(int tag, TypePtr sum_type, ValuePtr payload) {
    return std::make_shared<Value>(Value{Value::Inj{tag, std::move(sum_type), std::move(payload)}});
}
ValuePtr vPrim(std::string fn, std::vector<ValuePtr> args) {
    return std::make_shared<Value>(Value{Value::Prim{std::move(fn), std::move(args)}});
}

CompPtr cApp(ValuePtr fn, ValuePtr arg) {
    return std::make_shared<Comp>(Comp{Comp::App{std::move(fn), std::move(arg)}});
}
CompPtr cReturn(ValuePtr value) {
    return std::make_shared<Comp>(Comp{Comp::Return{std::move(value)}});
}
CompPtr cLet(CompPtr bound, std::string hint, CompPtr body) {
    return std::make_shared<Comp>(Comp{Comp::Let{std::move(bound), std::move(hint), std::move(body)}});
}
CompPtr cOp(std::string op, ValuePtr arg) {
    return std::make_shared<Comp>(Comp{Comp::OpCall{std::move(op), std::move(arg)}});
}
CompPtr cHandle(CompPtr subject, EffectCtx handled, Handler handler, std::string ret_hint,
                CompPtr ret_clause) {
    return std::make_shared<Comp>(Comp{Comp::Handle{std::move(subject), std::move(handled),
                                                    std::move(handler), std::move(ret_hint),
                                                    std::move(ret_clause)}});
}
CompPtr cCase(ValuePtr scrutinee, std::vector<CaseBranch> branches) {
    return std::make_shared<Comp>(Comp{Comp::Case{std::move(scrutinee), std::move(branches)}});
}

EffectTermPtr eReturn(ValuePtr value) {
    return std::make_shared<EffectTerm>(EffectTerm{EffectTerm::Return{std::move(value)}});
}
EffectTermPtr eLetOp(std::string op, ValuePtr arg, std::string hint, EffectTermPtr body) {
    return std::make_shared<EffectTerm>(
        EffectTerm{EffectTerm::LetOp{std::move(op), std::move(arg), std::move(hint), std::move(body)}});
}
EffectTermPtr eCase(ValuePtr scrutinee, std::vector<EffectBranch> branches) {
    return std::make_shared<EffectTerm>(EffectTerm{EffectTerm::Case{std::move(scrutinee), std::move(branches)}});
}

// ---------------------------------------------------------------------------
// Type equality
// ---------------------------------------------------------------------------

bool typeEq(const TypePtr& a, const TypePtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->node.index() != b->node.index()) return false;
    if (auto* ba = std::get_if<ValueType::Base>(&a->node)) {
        return ba->name == std::get<ValueType::Base>(b->node).name;
    }
    if (auto* ar = std::get_if<ValueType::Arrow>(&a->node)) {
        const auto& br = std::get<ValueType::Arrow>(b->node);
        return typeEq(ar->arg, br.arg) && compTypeEq(ar->result, br.result);
    }
    if (auto* pa = std::get_if<ValueType::Prod>(&a->node)) {
        const auto& pb = std::get<ValueType::Prod>(b->node);
        if (pa->items.size() != pb.items.size()) return false;
        for (size_t i = 0; i < pa->items.size(); ++i)
            if (!typeEq(pa->items[i], pb.items[i])) return false;
        return true;
    }
    const auto& sa = std::get<ValueType::Sum>(a->node);
    const auto& sb = std::get<ValueType::Sum>(b->node);
    if (sa.items.size() != sb.items.size()) return false;
    for (size_t i = 0; i < sa.items.size(); ++i)
        if (!typeEq(sa.items[i], sb.items[i])) return false;
    return true;
}

bool sigEq(const Signature& a, const Signature& b) {
    if (a.ops.size() != b.ops.size()) return false;
    auto it = b.ops.begin();
    for (const auto& [name, sig] : a.ops) {
        if (it->first != name) return false;
        if (!typeEq(sig.arg, it->second.arg) || !typeEq(sig.result, it->second.result)) return false;
        ++it;
    }
    return true;
}

bool theoryEq(const EffectTheory& a, const EffectTheory& b) {
    if (!sigEq(a.sig, b.sig)) return false;
    if (a.axioms.size() != b.axioms.size()) return false;
    for (size_t i = 0; i < a.axioms.size(); ++i) {
        const Axiom& x = a.axioms[i];
        const Axiom& y = b.axioms[i];
        if (x.ground_ctx.size() != y.ground_ctx.size()) return false;
        for (size_t j = 0; j < x.ground_ctx.size(); ++j)
            if (!typeEq(x.ground_ctx[j].second, y.ground_ctx[j].second)) return false;
        if (!typeEq(x.result, y.result)) return false;
        if (!alphaEq(x.lhs, y.lhs) || !alphaEq(x.rhs, y.rhs)) return false;
    }
    return true;
}

bool effectCtxEq(const EffectCtx& a, const EffectCtx& b) {
    if (!sigEq(a.sig, b.sig)) return false;
    if (!a.theory != !b.theory) return false;
    if (a.theory && !theoryEq(*a.theory, *b.theory)) return false;
    return true;
}

bool compTypeEq(const CompType& a, const CompType& b) {
    return typeEq(a.ret, b.ret) && effectCtxEq(a.effects, b.effects);
}
bool compTypeEq(const CompTypePtr& a, const CompTypePtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return compTypeEq(*a, *b);
}

bool isGround(const TypePtr& t) {
    if (std::holds_alternative<ValueType::Base>(t->node)) return true;
    if (std::holds_alternative<ValueType::Arrow>(t->node)) return false;
    if (auto* p = std::get_if<ValueType::Prod>(&t->node)) {
        for (const auto& i : p->items)
            if (!isGround(i)) return false;
        return true;
    }
    for (const auto& i : std::get<ValueType::Sum>(t->node).items)
        if (!isGround(i)) return false;
    return true;
}

int sumArity(const TypePtr& sum_type) {
    return static_cast<int>(std::get<ValueType::Sum>(sum_type->node).items.size());
}

bool isGroundValue(const ValuePtr& v) {
    if (std::holds_alternative<Value::Var>(v->node)) return true;
    if (auto* t = std::get_if<Value::Tuple>(&v->node)) {
        for (const auto& i : t->items)
            if (!isGroundValue(i)) return false;
        return true;
    }
    if (auto* p = std::get_if<Value::Proj>(&v->node)) return isGroundValue(p->tuple);
    if (auto* j = std::get_if<Value::Inj>(&v->node)) return isGroundValue(j->payload);
    return false;
}

// ---------------------------------------------------------------------------
// Alpha equality
// ---------------------------------------------------------------------------

bool alphaEq(const ValuePtr& a, const ValuePtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->node.index() != b->node.index()) return false;
    if (auto* va = std::get_if<Value::Var>(&a->node)) {
        return va->index == std::get<Value::Var>(b->node).index;
    }
    if (auto* la = std::get_if<Value::Lam>(&a->node)) {
        const auto& lb = std::get<Value::Lam>(b->node);
        return typeEq(la->arg_type, lb.arg_type) && effectCtxEq(la->body_effects, lb.body_effects) &&
               alphaEq(la->body, lb.body);
    }
    if (auto* ta = std::get_if<Value::Tuple>(&a->node)) {
        const auto& tb = std::get<Value::Tuple>(b->node);
        if (ta->items.size() != tb.items.size()) return false;
        for (size_t i = 0; i < ta->items.size(); ++i)
            if (!alphaEq(ta->items[i], tb.items[i])) return false;
        return true;
    }
    if (auto* pa = std::get_if<Value::Proj>(&a->node)) {
        const auto& pb = std::get<Value::Proj>(b->node);
        return pa->index == pb.index && alphaEq(pa->tuple, pb.tuple);
    }
    if (auto* ia = std::get_if<Value::Inj>(&a->node)) {
        const auto& ib = std::get<Value::Inj>(b->node);
        return ia->tag == ib.tag && typeEq(ia->sum_type, ib.sum_type) && alphaEq(ia->payload, ib.payload);
    }
    const auto& fa = std::get<Value::Prim>(a->node);
    const auto& fb = std::get<Value::Prim>(b->node);
    if (fa.fn != fb.fn || fa.args.size() != fb.args.size()) return false;
    for (size_t i = 0; i < fa.args.size(); ++i)
        if (!alphaEq(fa.args[i], fb.args[i])) return false;
    return true;
}

bool alphaEq(const Handler& a, const Handler& b) {
    if (a.clauses.size() != b.clauses.size()) return false;
    auto it = b.clauses.begin();
    for (const auto& [op, cl] : a.clauses) {
        if (it->first != op) return false;
        if (!alphaEq(cl.body, it->second.body)) return false;
        ++it;
    }
    return true;
}

bool alphaEq(const CompPtr& a, const CompPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->node.index() != b->node.index()) return false;
    if (auto* xa = std::get_if<Comp::App>(&a->node)) {
        const auto& xb = std::get<Comp::App>(b->node);
        return alphaEq(xa->fn, xb.fn) && alphaEq(xa->arg, xb.arg);
    }
    if (auto* ra = std::get_if<Comp::Return>(&a->node)) {
        return alphaEq(ra->value, std::get<Comp::Return>(b->node).value);
    }
    if (auto* la = std::get_if<Comp::Let>(&a->node)) {
        const auto& lb = std::get<Comp::Let>(b->node);
        return alphaEq(la->bound, lb.bound) && alphaEq(la->body, lb.body);
    }
    if (auto* oa = std::get_if<Comp::OpCall>(&a->node)) {
        const auto& ob = std::get<Comp::OpCall>(b->node);
        return oa->op == ob.op && alphaEq(oa->arg, ob.arg);
    }
    if (auto* ha = std::get_if<Comp::Handle>(&a->node)) {
        const auto& hb = std::get<Comp::Handle>(b->node);
        return effectCtxEq(ha->handled, hb.handled) && alphaEq(ha->subject, hb.subject) &&
               alphaEq(ha->handler, hb.handler) && alphaEq(ha->ret_clause, hb.ret_clause);
    }
    const auto& ca = std::get<Comp::Case>(a->node);
    const auto& cb = std::get<Comp::Case>(b->node);
    if (!alphaEq(ca.scrutinee, cb.scrutinee)) return false;
    if (ca.branches.size() != cb.branches.size()) return false;
    for (size_t i = 0; i < ca.branches.size(); ++i)
        if (!alphaEq(ca.branches[i].body, cb.branches[i].body)) return false;
    return true;
}

bool alphaEq(const EffectTermPtr& a, const EffectTermPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->node.index() != b->node.index()) return false;
    if (auto* ra = std::get_if<EffectTerm::Return>(&a->node)) {
        return alphaEq(ra->value, std::get<EffectTerm::Return>(b->node).value);
    }
    if (auto* la = std::get_if<EffectTerm::LetOp>(&a->node)) {
        const auto& lb = std::get<EffectTerm::LetOp>(b->node);
        return la->op == lb.op && alphaEq(la->arg, lb.arg) && alphaEq(la->body, lb.body);
    }
    const auto& ca = std::get<EffectTerm::Case>(a->node);
    const auto& cb = std::get<EffectTerm::Case>(b->node);
    if (!alphaEq(ca.scrutinee, cb.scrutinee)) return false;
    if (ca.branches.size() != cb.branches.size()) return false;
    for (size_t i = 0; i < ca.branches.size(); ++i)
        if (!alphaEq(ca.branches[i].body, cb.branches[i].body)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Hashing (FNV-1a over the same structure alphaEq compares)
// ---------------------------------------------------------------------------

namespace {

constexpr uint64_t kFnvOffset = 1469598103934665603ull;
constexpr uint64_t kFnvPrime = 1099511628211ull;

void mix(uint64_t& h, uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (i * 8)) & 0xff;
        h *= kFnvPrime;
    }
}
void mixStr(uint64_t& h, const std::string& s) {
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= kFnvPrime;
    }
    mix(h, s.size());
}

void hashType(uint64_t& h, const TypePtr& t);
void hashCompType(uint64_t& h, const CompType& c);

void hashSig(uint64_t& h, const Signature& s) {
    mix(h, s.ops.size());
    for (const auto& [name, op] : s.ops) {
        mixStr(h, name);
        hashType(h, op.arg);
        hashType(h, op.result);
    }
}

void hashEffectCtx(uint64_t& h, const EffectCtx& e) {
    hashSig(h, e.sig);
    mix(h, e.theory ? e.theory->axioms.size() + 1 : 0);
}

void hashType(uint64_t& h, const TypePtr& t) {
    mix(h, t->node.index());
    if (auto* b = std::get_if<ValueType::Base>(&t->node)) {
        mixStr(h, b->name);
    } else if (auto* a = std::get_if<ValueType::Arrow>(&t->node)) {
        hashType(h, a->arg);
        hashCompType(h, *a->result);
    } else if (auto* p = std::get_if<ValueType::Prod>(&t->node)) {
        mix(h, p->items.size());
        for (const auto& i : p->items) hashType(h, i);
    } else {
        const auto& s = std::get<ValueType::Sum>(t->node);
        mix(h, s.items.size());
        for (const auto& i : s.items) hashType(h, i);
    }
}

void hashCompType(uint64_t& h, const CompType& c) {
    hashType(h, c.ret);
    hashEffectCtx(h, c.effects);
}

void hashValue(uint64_t& h, const ValuePtr& v);
void hashComp(uint64_t& h, const CompPtr& m);

void hashValue(uint64_t& h, const ValuePtr& v) {
    mix(h, v->node.index() + 11);
    if (auto* x = std::get_if<Value::Var>(&v->node)) {
        mix(h, static_cast<uint64_t>(x->index));
    } else if (auto* l = std::get_if<Value::Lam>(&v->node)) {
        hashType(h, l->arg_type);
        hashEffectCtx(h, l->body_effects);
        hashComp(h, l->body);
    } else if (auto* t = std::get_if<Value::Tuple>(&v->node)) {
        mix(h, t->items.size());
        for (const auto& i : t->items) hashValue(h, i);
    } else if (auto* p = std::get_if<Value::Proj>(&v->node)) {
        mix(h, static_cast<uint64_t>(p->index));
        hashValue(h, p->tuple);
    } else if (auto* j = std::get_if<Value::Inj>(&v->node)) {
        mix(h, static_cast<uint64_t>(j->tag));
        hashType(h, j->sum_type);
        hashValue(h, j->payload);
    } else {
        const auto& f = std::get<Value::Prim>(v->node);
        mixStr(h, f.fn);
        for (const auto& a : f.args) hashValue(h, a);
    }
}

void hashComp(uint64_t& h, const CompPtr& m) {
    mix(h, m->node.index() + 29);
    if (auto* x = std::get_if<Comp::App>(&m->node)) {
        hashValue(h, x->fn);
        hashValue(h, x->arg);
    } else if (auto* r = std::get_if<Comp::Return>(&m->node)) {
        hashValue(h, r->value);
    } else if (auto* l = std::get_if<Comp::Let>(&m->node)) {
        hashComp(h, l->bound);
        hashComp(h, l->body);
    } else if (auto* o = std::get_if<Comp::OpCall>(&m->node)) {
        mixStr(h, o->op);
        hashValue(h, o->arg);
    } else if (auto* hd = std::get_if<Comp::Handle>(&m->node)) {
        hashEffectCtx(h, hd->handled);
        hashComp(h, hd->subject);
        mix(h, hd->handler.clauses.size());
        for (const auto& [op, cl] : hd->handler.clauses) {
            mixStr(h, op);
            hashComp(h, cl.body);
        }
        hashComp(h, hd->ret_clause);
    } else {
        const auto& c = std::get<Comp::Case>(m->node);
        hashValue(h, c.scrutinee);
        mix(h, c.branches.size());
        for (const auto& b : c.branches) hashComp(h, b.body);
    }
}

}  // namespace

uint64_t alphaHash(const ValuePtr& v) {
    uint64_t h = kFnvOffset;
    hashValue(h, v);
    return h;
}
uint64_t alphaHash(const CompPtr& m) {
    uint64_t h = kFnvOffset;
    hashComp(h, m);
    return h;
}

// ---------------------------------------------------------------------------
// Traversal core: rebuild a term while mapping every variable occurrence.
// `fn(index, depth)` is called for occurrences with index >= depth (free at
// this point of the traversal) and must return a replacement value already
// adjusted for `depth`.
// ---------------------------------------------------------------------------

namespace {

using VarFn = std::function<ValuePtr(const Value::Var&, int depth, const Span&)>;

ValuePtr mapValue(const ValuePtr& v, int depth, const VarFn& fn);
CompPtr mapComp(const CompPtr& m, int depth, const VarFn& fn);
Handler mapHandler(const Handler& h, int depth, const VarFn& fn);
EffectTermPtr mapEffectTerm(const EffectTermPtr& t, int depth, const VarFn& fn);

ValuePtr mapValue(const ValuePtr& v, int depth, const VarFn& fn) {
    if (auto* x = std::get_if<Value::Var>(&v->node)) {
        if (x->index < depth) return v;
        return fn(*x, depth, v->span);
    }
    if (auto* l = std::get_if<Value::Lam>(&v->node)) {
        auto body = mapComp(l->body, depth + 1, fn);
        if (body == l->body) return v;
        auto out = std::make_shared<Value>(Value{Value::Lam{l->hint, l->arg_type, l->body_effects, body}});
        const_cast<Value*>(out.get())->span = v->span;
        return out;
    }
    if (auto* t = std::get_if<Value::Tuple>(&v->node)) {
        std::vector<ValuePtr> items;
        items.reserve(t->items.size());
        bool changed = false;
        for (const auto& i : t->items) {
            items.push_back(mapValue(i, depth, fn));
            changed |= items.back() != i;
        }
        if (!changed) return v;
        auto out = vTuple(std::move(items));
        const_cast<Value*>(out.get())->span = v->span;
        return out;
    }
    if (auto* p = std::get_if<Value::Proj>(&v->node)) {
        auto tup = mapValue(p->tuple, depth, fn);
        if (tup == p->tuple) return v;
        auto out = vProj(p->index, tup);
        const_cast<Value*>(out.get())->span = v->span;
        return out;
    }
    if (auto* j = std::get_if<Value::Inj>(&v->node)) {
        auto payload = mapValue(j->payload, depth, fn);
        if (payload == j->payload) return v;
        auto out = vInj(j->tag, j->sum_type, payload);
        const_cast<Value*>(out.get())->span = v->span;
        return out;
    }
    const auto& f = std::get<Value::Prim>(v->node);
    std::vector<ValuePtr> args;
    args.reserve(f.args.size());
    bool changed = false;
    for (const auto& a : f.args) {
        args.push_back(mapValue(a, depth, fn));
        changed |= args.back() != a;
    }
    if (!changed) return v;
    auto out = vPrim(f.fn, std::move(args));
    const_cast<Value*>(out.get())->span = v->span;
    return out;
}

Handler mapHandler(const Handler& h, int depth, const VarFn& fn) {
    Handler out;
    for (const auto& [op, cl] : h.clauses) {
        out.clauses.emplace(op, HandlerClause{cl.arg_hint, cl.cont_hint, mapComp(cl.body, depth + 2, fn)});
    }
    return out;
}

CompPtr mapComp(const CompPtr& m, int depth, const VarFn& fn) {
    CompPtr out;
    if (auto* x = std::get_if<Comp::App>(&m->node)) {
        auto f = mapValue(x->fn, depth, fn);
        auto a = mapValue(x->arg, depth, fn);
        if (f == x->fn && a == x->arg) return m;
        out = cApp(f, a);
    } else if (auto* r = std::get_if<Comp::Return>(&m->node)) {
        auto val = mapValue(r->value, depth, fn);
        if (val == r->value) return m;
        out = cReturn(val);
    } else if (auto* l = std::get_if<Comp::Let>(&m->node)) {
        auto bound = mapComp(l->bound, depth, fn);
        auto body = mapComp(l->body, depth + 1, fn);
        if (bound == l->bound && body == l->body) return m;
        out = cLet(bound, l->hint, body);
    } else if (auto* o = std::get_if<Comp::OpCall>(&m->node)) {
        auto a = mapValue(o->arg, depth, fn);
        if (a == o->arg) return m;
        out = cOp(o->op, a);
    } else if (auto* h = std::get_if<Comp::Handle>(&m->node)) {
        out = cHandle(mapComp(h->subject, depth, fn), h->handled, mapHandler(h->handler, depth, fn),
                      h->ret_hint, mapComp(h->ret_clause, depth + 1, fn));
    } else {
        const auto& c = std::get<Comp::Case>(m->node);
        auto scrut = mapValue(c.scrutinee, depth, fn);
        std::vector<CaseBranch> branches;
        branches.reserve(c.branches.size());
        for (const auto& b : c.branches) {
            branches.push_back(CaseBranch{b.hint, mapComp(b.body, depth + 1, fn)});
        }
        out = cCase(scrut, std::move(branches));
    }
    const_cast<Comp*>(out.get())->span = m->span;
    return out;
}

EffectTermPtr mapEffectTerm(const EffectTermPtr& t, int depth, const VarFn& fn) {
    if (auto* r = std::get_if<EffectTerm::Return>(&t->node)) {
        return eReturn(mapValue(r->value, depth, fn));
    }
    if (auto* l = std::get_if<EffectTerm::LetOp>(&t->node)) {
        return eLetOp(l->op, mapValue(l->arg, depth, fn), l->hint, mapEffectTerm(l->body, depth + 1, fn));
    }
    const auto& c = std::get<EffectTerm::Case>(t->node);
    std::vector<EffectBranch> branches;
    for (const auto& b : c.branches) {
        branches.push_back(EffectBranch{b.hint, mapEffectTerm(b.body, depth + 1, fn)});
    }
    return eCase(mapValue(c.scrutinee, depth, fn), std::move(branches));
}

VarFn shiftFn(int delta, int cutoff) {
    return [delta, cutoff](const Value::Var& x, int depth, const Span& sp) -> ValuePtr {
        if (x.index < depth + cutoff) {
            auto v = vVar(x.index, x.hint);
            const_cast<Value*>(v.get())->span = sp;
            return v;
        }
        auto v = vVar(x.index + delta, x.hint);
        const_cast<Value*>(v.get())->span = sp;
        return v;
    };
}

VarFn substFn(const SubstMap& subst) {
    return [&subst](const Value::Var& x, int depth, const Span& sp) -> ValuePtr {
        auto it = subst.find(x.index - depth);
        if (it == subst.end()) {
            auto v = vVar(x.index, x.hint);
            const_cast<Value*>(v.get())->span = sp;
            return v;
        }
        return shiftValue(it->second, depth, 0);
    };
}

VarFn openFn(const std::vector<ValuePtr>& vals) {
    int n = static_cast<int>(vals.size());
    return [&vals, n](const Value::Var& x, int depth, const Span& sp) -> ValuePtr {
        int outer = x.index - depth;
        if (outer < n) {
            // vals are listed in binding order: vals[0] is the outermost of
            // the opened binders, i.e. index n-1 at depth 0.
            return shiftValue(vals[n - 1 - outer], depth, 0);
        }
        auto v = vVar(x.index - n, x.hint);
        const_cast<Value*>(v.get())->span = sp;
        return v;
    };
}

}  // namespace

ValuePtr shiftValue(const ValuePtr& v, int delta, int cutoff) {
    if (delta == 0) return v;
    return mapValue(v, 0, shiftFn(delta, cutoff));
}
CompPtr shiftComp(const CompPtr& m, int delta, int cutoff) {
    if (delta == 0) return m;
    return mapComp(m, 0, shiftFn(delta, cutoff));
}
Handler shiftHandler(const Handler& h, int delta, int cutoff) {
    if (delta == 0) return h;
    return mapHandler(h, 0, shiftFn(delta, cutoff));
}
EffectTermPtr shiftEffectTerm(const EffectTermPtr& t, int delta, int cutoff) {
    if (delta == 0) return t;
    return mapEffectTerm(t, 0, shiftFn(delta, cutoff));
}

ValuePtr substValue(const ValuePtr& v, const SubstMap& subst) {
    if (subst.empty()) return v;
    return mapValue(v, 0, substFn(subst));
}
CompPtr substComp(const CompPtr& m, const SubstMap& subst) {
    if (subst.empty()) return m;
    return mapComp(m, 0, substFn(subst));
}
Handler substHandler(const Handler& h, const SubstMap& subst) {
    if (subst.empty()) return h;
    return mapHandler(h, 0, substFn(subst));
}
EffectTermPtr substEffectTerm(const EffectTermPtr& t, const SubstMap& subst) {
    if (subst.empty()) return t;
    return mapEffectTerm(t, 0, substFn(subst));
}

CompPtr openComp(const CompPtr& body, const std::vector<ValuePtr>& vals) {
    if (vals.empty()) return body;
    return mapComp(body, 0, openFn(vals));
}
ValuePtr openValue(const ValuePtr& body, const std::vector<ValuePtr>& vals) {
    if (vals.empty()) return body;
    return mapValue(body, 0, openFn(vals));
}

// ---------------------------------------------------------------------------
// Free variables
// ---------------------------------------------------------------------------

namespace {

void collectFree(const ValuePtr& v, int depth, std::map<int, std::string>& acc);
void collectFree(const CompPtr& m, int depth, std::map<int, std::string>& acc);

void collectFree(const ValuePtr& v, int depth, std::map<int, std::string>& acc) {
    if (auto* x = std::get_if<Value::Var>(&v->node)) {
        if (x->index >= depth) acc.emplace(x->index - depth, x->hint);
    } else if (auto* l = std::get_if<Value::Lam>(&v->node)) {
        collectFree(l->body, depth + 1, acc);
    } else if (auto* t = std::get_if<Value::Tuple>(&v->node)) {
        for (const auto& i : t->items) collectFree(i, depth, acc);
    } else if (auto* p = std::get_if<Value::Proj>(&v->node)) {
        collectFree(p->tuple, depth, acc);
    } else if (auto* j = std::get_if<Value::Inj>(&v->node)) {
        collectFree(j->payload, depth, acc);
    } else {
        for (const auto& a : std::get<Value::Prim>(v->node).args) collectFree(a, depth, acc);
    }
}

void collectFree(const CompPtr& m, int depth, std::map<int, std::string>& acc) {
    if (auto* x = std::get_if<Comp::App>(&m->node)) {
        collectFree(x->fn, depth, acc);
        collectFree(x->arg, depth, acc);
    } else if (auto* r = std::get_if<Comp::Return>(&m->node)) {
        collectFree(r->value, depth, acc);
    } else if (auto* l = std::get_if<Comp::Let>(&m->node)) {
        collectFree(l->bound, depth, acc);
        collectFree(l->body, depth + 1, acc);
    } else if (auto* o = std::get_if<Comp::OpCall>(&m->node)) {
        collectFree(o->arg, depth, acc);
    } else if (auto* h = std::get_if<Comp::Handle>(&m->node)) {
        collectFree(h->subject, depth, acc);
        for (const auto& [op, cl] : h->handler.clauses) collectFree(cl.body, depth + 2, acc);
        collectFree(h->ret_clause, depth + 1, acc);
    } else {
        const auto& c = std::get<Comp::Case>(m->node);
        collectFree(c.scrutinee, depth, acc);
        for (const auto& b : c.branches) collectFree(b.body, depth + 1, acc);
    }
}

std::vector<Ident> toIdents(const std::map<int, std::string>& acc) {
    std::vector<Ident> out;
    out.reserve(acc.size());
    for (const auto& [idx, hint] : acc) out.push_back(Ident{hint, idx});
    return out;
}

}  // namespace

std::vector<Ident> freeVars(const ValuePtr& v) {
    std::map<int, std::string> acc;
    collectFree(v, 0, acc);
    return toIdents(acc);
}
std::vector<Ident> freeVars(const CompPtr& m) {
    std::map<int, std::string> acc;
    collectFree(m, 0, acc);
    return toIdents(acc);
}

}  // namespace effcore
