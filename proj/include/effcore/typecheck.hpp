#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "effcore/ast.hpp"

namespace effcore {

enum class Mode { Eff, EffPlus, EffTheory };

enum class TypeErrorKind {
    UnboundVar,
    OpNotInSignature,
    SignatureMismatch,
    HandlerClauseMissing,
    HandlerClauseExtra,
    NotGround,
    RespectFailure,
    Mismatch,
};

struct TypeError : std::runtime_error {
    TypeErrorKind kind;
    Span span;
    TypeError(TypeErrorKind k, Span sp, const std::string& msg)
        : std::runtime_error(msg), kind(k), span(sp) {}
};

const char* typeErrorKindName(TypeErrorKind k);

// Ordered typing context; index 0 is the innermost binding.
class Context {
public:
    Context() = default;

    Context extend(std::string hint, TypePtr type) const {
        Context out = *this;
        out.bindings_.emplace_back(std::move(hint), std::move(type));
        return out;
    }
    // Insert a binding so that it ends up at `index` (0 = innermost).
    Context insert(int index, std::string hint, TypePtr type) const {
        Context out = *this;
        out.bindings_.insert(out.bindings_.end() - index, {std::move(hint), std::move(type)});
        return out;
    }
    const TypePtr& lookup(int index, const Span& span) const;
    const std::string& hintAt(int index) const { return bindings_[bindings_.size() - 1 - index].first; }
    int size() const { return static_cast<int>(bindings_.size()); }
    // Bindings outermost-first.
    const std::vector<std::pair<std::string, TypePtr>>& bindings() const { return bindings_; }

private:
    std::vector<std::pair<std::string, TypePtr>> bindings_;
};

enum class RespectsMode { Syntactic, Semantic };

struct AxiomVerdict {
    enum Kind { Holds, Fails, Proved, Unknown } kind;
    std::string axiom;
    std::string detail;  // counterexample description for Fails
};

struct RespectsVerdict {
    std::vector<AxiomVerdict> per_axiom;
    bool accepted() const {
        for (const auto& a : per_axiom)
            if (a.kind != AxiomVerdict::Holds && a.kind != AxiomVerdict::Proved) return false;
        return true;
    }
    bool anyUnknown() const {
        for (const auto& a : per_axiom)
            if (a.kind == AxiomVerdict::Unknown) return true;
        return false;
    }
};

class Checker {
public:
    explicit Checker(Mode mode = Mode::EffPlus, RespectsMode respects = RespectsMode::Semantic)
        : mode_(mode), respects_mode_(respects) {}

    Mode mode() const { return mode_; }
    RespectsMode respectsMode() const { return respects_mode_; }

    // Synthesizes the unique type of a value.
    TypePtr inferValue(const Context& ctx, const ValuePtr& v) const;

    // Synthesizes the return type of a computation under the ambient effect
    // context; the computation's full type is `ret ! ambient`.
    TypePtr inferComp(const Context& ctx, const EffectCtx& ambient, const CompPtr& m) const;

    CompType inferCompType(const Context& ctx, const EffectCtx& ambient, const CompPtr& m) const {
        return CompType{inferComp(ctx, ambient, m), ambient};
    }

    // Checks a computation against an expected type.
    void checkComp(const Context& ctx, const CompPtr& m, const CompType& expected) const;

    // dom(h) must equal dom(sig); each clause body must have type `c` under
    // ctx, x : A_op, k : B_op -> c.
    void checkHandler(const Context& ctx, const Handler& h, const Signature& sig,
                      const CompType& c) const;

    // Typechecks an effect theory term at `expected ! sig` in a ground context.
    void checkEffectTerm(const Context& ground_ctx, const Signature& sig, const EffectTermPtr& t,
                         const TypePtr& expected) const;

    // Validates a theory: ground signature, axioms well-typed at their stated
    // types.
    void checkTheory(const EffectTheory& theory) const;

    void requireGroundSignature(const Signature& sig, const Span& span) const;

private:
    Mode mode_;
    RespectsMode respects_mode_;
    mutable int respects_depth_ = 0;

    void rejectExtension(const Span& span, const char* what) const;
    void requireTypeAvailable(const TypePtr& t, const Span& span) const;

    friend struct RespectsDepthGuard;
};

// The M-hat[H, k] translation: replaces operation calls in an effect term by
// the corresponding handler clauses and feeds results to the continuation k.
// The result lives in context (Gamma, Delta-hat, k) where the handler was
// typed in Gamma, the effect term in Delta-hat (of size ground_ctx_size), and
// k : A-hat -> c sits at index 0.
CompPtr translateEffectTerm(const EffectTermPtr& term, const Handler& h, const Signature& handled,
                            const CompType& c, int ground_ctx_size);

// Decides whether handler `h` (typed in `ctx` at `sig => c`) respects every
// axiom of `theory`. Defined in respects.cpp; Semantic mode decides equality
// in the finite model, Syntactic mode calls the rewrite prover.
RespectsVerdict checkRespects(const Checker& chk, const Context& ctx, const Handler& h,
                              const EffectTheory& theory, const CompType& c, RespectsMode mode);

std::string showType(const TypePtr& t);
std::string showCompType(const CompType& c);
std::string showSignature(const Signature& s);

}  // namespace effcore
