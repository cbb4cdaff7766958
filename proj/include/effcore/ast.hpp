#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace effcore {

struct Span {
    uint32_t byte_start = 0;
    uint32_t byte_end = 0;
    uint32_t line = 0;
    uint32_t column = 0;
};

// A variable occurrence. Terms use a nameless (de Bruijn) discipline: `index`
// counts binders outward from the occurrence; `hint` is the surface name kept
// for printing only and never participates in equality.
struct Ident {
    std::string hint;
    int index = 0;
};

struct ValueType;
struct CompType;
struct EffectTheory;
using TypePtr = std::shared_ptr<const ValueType>;
using CompTypePtr = std::shared_ptr<const CompType>;
using TheoryPtr = std::shared_ptr<const EffectTheory>;

struct OpSig {
    TypePtr arg;
    TypePtr result;
};

// Finite map from operation names to argument/result types. std::map keeps
// entries in canonical (lexicographic) order, so listing order never matters.
struct Signature {
    std::map<std::string, OpSig> ops;

    bool contains(const std::string& op) const { return ops.count(op) != 0; }
    const OpSig* find(const std::string& op) const {
        auto it = ops.find(op);
        return it == ops.end() ? nullptr : &it->second;
    }
    bool empty() const { return ops.empty(); }
};

// The effect part of a computation type: a signature, plus the effect theory
// in `A ! S / T` mode. `theory_name` is a printing hint only.
struct EffectCtx {
    Signature sig;
    TheoryPtr theory;  // null outside theory mode
    std::string theory_name;
};

struct CompType {
    TypePtr ret;
    EffectCtx effects;
};

struct ValueType {
    struct Base {
        std::string name;
    };
    struct Arrow {
        TypePtr arg;
        CompTypePtr result;
    };
    struct Prod {
        std::vector<TypePtr> items;
    };
    struct Sum {
        std::vector<TypePtr> items;
    };
    std::variant<Base, Arrow, Prod, Sum> node;
};

// ---------------------------------------------------------------------------
// Terms: three mutually recursive sorts (values, computations, handlers).
// ---------------------------------------------------------------------------

struct Value;
struct Comp;
using ValuePtr = std::shared_ptr<const Value>;
using CompPtr = std::shared_ptr<const Comp>;

struct HandlerClause {
    std::string arg_hint;   // binds x at index 1 in body
    std::string cont_hint;  // binds k at index 0 in body
    CompPtr body;
};

struct Handler {
    std::map<std::string, HandlerClause> clauses;
};

struct CaseBranch {
    std::string hint;  // binds at index 0 in body
    CompPtr body;
};

struct Value {
    struct Var {
        int index;
        std::string hint;
    };
    // Lambdas are Church-style: argument type plus the effect context of the
    // body, which the checker needs to type the body without inference.
    struct Lam {
        std::string hint;
        TypePtr arg_type;
        EffectCtx body_effects;
        CompPtr body;
    };
    struct Tuple {
        std::vector<ValuePtr> items;
    };
    struct Proj {
        int index;  // 0-based; printed 1-based
        ValuePtr tuple;
    };
    // Injections carry the full sum type so inference stays syntax-directed.
    struct Inj {
        int tag;  // 0-based
        TypePtr sum_type;
        ValuePtr payload;
    };
    struct Prim {
        std::string fn;
        std::vector<ValuePtr> args;
    };

    std::variant<Var, Lam, Tuple, Proj, Inj, Prim> node;
    Span span{};
};

struct Comp {
    struct App {
        ValuePtr fn;
        ValuePtr arg;
    };
    struct Return {
        ValuePtr value;
    };
    struct Let {
        CompPtr bound;
        std::string hint;
        CompPtr body;
    };
    struct OpCall {
        std::string op;
        ValuePtr arg;
    };
    struct Handle {
        CompPtr subject;
        EffectCtx handled;  // the signature (and theory) the handler targets
        Handler handler;
        std::string ret_hint;
        CompPtr ret_clause;
    };
    struct Case {
        ValuePtr scrutinee;
        std::vector<CaseBranch> branches;
    };

    std::variant<App, Return, Let, OpCall, Handle, Case> node;
    Span span{};
};

// ---------------------------------------------------------------------------
// Effect theory terms: the first-order fragment used by equational axioms.
// Embedded values must be ground (Var / Tuple / Proj / Inj only).
// ---------------------------------------------------------------------------

struct EffectTerm;
using EffectTermPtr = std::shared_ptr<const EffectTerm>;

struct EffectBranch {
    std::string hint;
    EffectTermPtr body;
};

struct EffectTerm {
    struct Return {
        ValuePtr value;
    };
    struct LetOp {
        std::string op;
        ValuePtr arg;
        std::string hint;
        EffectTermPtr body;
    };
    struct Case {
        ValuePtr scrutinee;
        std::vector<EffectBranch> branches;
    };

    std::variant<Return, LetOp, Case> node;
    Span span{};
};

struct Axiom {
    std::string name;
    std::vector<std::pair<std::string, TypePtr>> ground_ctx;
    EffectTermPtr lhs;
    EffectTermPtr rhs;
    TypePtr result;
};

struct EffectTheory {
    std::string name;  // printing hint only
    Signature sig;
    std::vector<Axiom> axioms;
};

// ---------------------------------------------------------------------------
// Construction helpers
// ---------------------------------------------------------------------------

TypePtr tBase(std::string name);
TypePtr tArrow(TypePtr arg, CompTypePtr result);
TypePtr tProd(std::vector<TypePtr> items);
TypePtr tSum(std::vector<TypePtr> items);
TypePtr tUnit();
CompTypePtr tComp(TypePtr ret, EffectCtx effects);
CompTypePtr tComp(TypePtr ret, Signature sig);

ValuePtr vVar(int index, std::string hint = "x");
ValuePtr vLam(std::string hint, TypePtr arg_type, EffectCtx body_effects, CompPtr body);
ValuePtr vTuple(std::vector<ValuePtr> items);
ValuePtr vUnit();
ValuePtr vProj(int index, ValuePtr tuple);
ValuePtr vInj(int tag, TypePtr sum_type, ValuePtr payload);
ValuePtr vPrim(std::string fn, std::vector<ValuePtr> args = {});

CompPtr cApp(ValuePtr fn, ValuePtr arg);
CompPtr cReturn(ValuePtr value);
CompPtr cLet(CompPtr bound, std::string hint, CompPtr body);
CompPtr cOp(std::string op, ValuePtr arg);
CompPtr cHandle(CompPtr subject, EffectCtx handled, Handler handler, std::string ret_hint,
                CompPtr ret_clause);
CompPtr cCase(ValuePtr scrutinee, std::vector<CaseBranch> branches);

EffectTermPtr eReturn(ValuePtr value);
EffectTermPtr eLetOp(std::string op, ValuePtr arg, std::string hint, EffectTermPtr body);
EffectTermPtr eCase(ValuePtr scrutinee, std::vector<EffectBranch> branches);

// ---------------------------------------------------------------------------
// Structural equality for types and signatures (order-insensitive for ops,
// hint-insensitive everywhere).
// ---------------------------------------------------------------------------

bool typeEq(const TypePtr& a, const TypePtr& b);
bool compTypeEq(const CompTypePtr& a, const CompTypePtr& b);
bool compTypeEq(const CompType& a, const CompType& b);
bool sigEq(const Signature& a, const Signature& b);
bool effectCtxEq(const EffectCtx& a, const EffectCtx& b);
bool theoryEq(const EffectTheory& a, const EffectTheory& b);

// A type is ground iff it contains no Arrow.
bool isGround(const TypePtr& t);

// ---------------------------------------------------------------------------
// Alpha equality: with the nameless discipline this is structural equality
// that ignores name hints and spans.
// ---------------------------------------------------------------------------

bool alphaEq(const ValuePtr& a, const ValuePtr& b);
bool alphaEq(const CompPtr& a, const CompPtr& b);
bool alphaEq(const Handler& a, const Handler& b);
bool alphaEq(const EffectTermPtr& a, const EffectTermPtr& b);

// Stable structural hash agreeing with alphaEq.
uint64_t alphaHash(const ValuePtr& v);
uint64_t alphaHash(const CompPtr& m);

// ---------------------------------------------------------------------------
// Shifting and substitution
// ---------------------------------------------------------------------------

// Add `delta` to every free index >= cutoff.
ValuePtr shiftValue(const ValuePtr& v, int delta, int cutoff = 0);
CompPtr shiftComp(const CompPtr& m, int delta, int cutoff = 0);
Handler shiftHandler(const Handler& h, int delta, int cutoff = 0);
EffectTermPtr shiftEffectTerm(const EffectTermPtr& t, int delta, int cutoff = 0);

// Simultaneous capture-avoiding substitution. Keys are free-variable indices
// in the ambient context; unmapped variables are left in place.
using SubstMap = std::map<int, ValuePtr>;

ValuePtr substValue(const ValuePtr& v, const SubstMap& subst);
CompPtr substComp(const CompPtr& m, const SubstMap& subst);
Handler substHandler(const Handler& h, const SubstMap& subst);
EffectTermPtr substEffectTerm(const EffectTermPtr& t, const SubstMap& subst);

// Instantiate the `n` innermost binders of `body` with `vals` (binding order:
// vals[0] is the outermost of the opened binders) and shift the rest down.
CompPtr openComp(const CompPtr& body, const std::vector<ValuePtr>& vals);
ValuePtr openValue(const ValuePtr& body, const std::vector<ValuePtr>& vals);

// Free variables, reported as (outer index, hint) sorted by index.
std::vector<Ident> freeVars(const ValuePtr& v);
std::vector<Ident> freeVars(const CompPtr& m);

// Number of components of the sum type stored on an Inj node.
int sumArity(const TypePtr& sum_type);

// Ground values are built from Var / Tuple / Proj / Inj only.
bool isGroundValue(const ValuePtr& v);

}  // namespace effcore
