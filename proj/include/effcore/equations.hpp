#pragma once

#include <string>
#include <variant>
#include <vector>

#include "effcore/ast.hpp"
#include "effcore/typecheck.hpp"

namespace effcore {

// The oriented rewrite rules: beta laws, the monad laws for let, the three
// handler equations, and the derivable case-handle commutation. Eta laws are
// applied only at comparison time, never as rewrites.
enum class RewriteRule {
    BetaLam,
    BetaProj,
    BetaCase,
    RetLet,
    LetLet,
    LetRet,
    HandleRet,
    HandleLet,
    HandleOp,
    CaseHandle,
};

const char* rewriteRuleName(RewriteRule r);

struct RwStep {
    std::vector<int> path;  // child indices from the root
    bool is_axiom = false;
    RewriteRule rule = RewriteRule::BetaLam;
    std::string axiom_name;
    // The rewritten subterm before and after.
    std::variant<ValuePtr, CompPtr> before;
    std::variant<ValuePtr, CompPtr> after;
};

struct ProofTrace {
    std::vector<RwStep> steps;
    bool complete = true;  // false when the budget ran out
};

inline constexpr int kDefaultBudget = 100000;

struct NormalizedComp {
    CompPtr term;
    ProofTrace trace;
};
struct NormalizedValue {
    ValuePtr term;
    ProofTrace trace;
};

// Exhaustively applies the oriented rules, outermost-first, left to right.
NormalizedComp normalizeComp(const EffectCtx& ambient, const CompPtr& m, int budget = kDefaultBudget);
NormalizedValue normalizeValue(const ValuePtr& v, int budget = kDefaultBudget);

enum class EqVerdict { Proved, Unknown };

struct EqResult {
    EqVerdict verdict = EqVerdict::Unknown;
    ProofTrace lhs_trace;
    ProofTrace rhs_trace;
    std::string note;

    bool proved() const { return verdict == EqVerdict::Proved; }
};

// Sound, incomplete decision procedure for derivable equality: normalize both
// sides, then compare up to alpha and type-directed eta. With a theory, the
// normal forms are additionally closed under instantiated axioms found by
// bounded matching.
EqResult checkDerivableEq(const Checker& chk, const Context& ctx, const CompPtr& lhs,
                          const CompPtr& rhs, const CompType& type,
                          const EffectTheory* theory = nullptr, int budget = kDefaultBudget);

EqResult checkDerivableEqValue(const Checker& chk, const Context& ctx, const ValuePtr& lhs,
                               const ValuePtr& rhs, const TypePtr& type,
                               const EffectTheory* theory = nullptr, int budget = kDefaultBudget);

// Embeds an effect theory term into the computation syntax.
CompPtr embedEffectTerm(const EffectTermPtr& t);

// Instantiates an axiom with values for its ground context (listed in binding
// order, outermost first). Returns the lhs/rhs computation instance.
std::pair<CompPtr, CompPtr> instantiateAxiom(const Axiom& ax, const std::vector<ValuePtr>& sigma);

// Typed comparison modulo alpha and eta of two normal forms.
bool equalModuloEta(const Checker& chk, const Context& ctx, const CompPtr& a, const CompPtr& b,
                    const CompType& type);
bool equalModuloEtaValue(const Checker& chk, const Context& ctx, const ValuePtr& a, const ValuePtr& b,
                         const TypePtr& type);

}  // namespace effcore
