#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "effcore/ast.hpp"

namespace effcore {

struct ParseError {
    Span span;
    std::string message;
    std::vector<std::string> expected;
};

struct SigDecl {
    std::string name;
    Signature sig;
    Span span;
};

struct TheoryDecl {
    std::string name;
    TheoryPtr theory;
    Span span;
};

// A named term (value or computation) with an explicit context and type.
struct TermDecl {
    std::string name;
    std::vector<std::pair<std::string, TypePtr>> ctx;  // outermost first
    bool is_comp = true;
    CompTypePtr ctype;  // when is_comp
    TypePtr vtype;      // when !is_comp
    CompPtr comp;
    ValuePtr value;
    Span span;
};

struct EqGoal {
    std::string name;
    std::vector<std::pair<std::string, TypePtr>> ctx;
    bool is_comp = true;
    CompTypePtr ctype;
    TypePtr vtype;
    CompPtr lhs_comp, rhs_comp;
    ValuePtr lhs_value, rhs_value;
    Span span;
};

using Decl = std::variant<SigDecl, TheoryDecl, TermDecl, EqGoal>;

struct SourceFile {
    std::vector<Decl> decls;

    const SigDecl* findSig(const std::string& name) const;
    const TheoryDecl* findTheory(const std::string& name) const;
    const TermDecl* findDef(const std::string& name) const;
    const EqGoal* findGoal(const std::string& name) const;
};

// Declarations visible while parsing (filled left to right within a file).
struct ParseEnv {
    std::map<std::string, Signature> sigs;
    std::map<std::string, TheoryPtr> theories;

    bool isOpName(const std::string& name) const;
};

SourceFile parseFile(const std::string& source);

// Parse a single computation/value in a given scope (tests and tooling).
CompPtr parseComp(const std::string& source, const ParseEnv& env = {},
                  const std::vector<std::string>& scope = {});
ValuePtr parseValue(const std::string& source, const ParseEnv& env = {},
                    const std::vector<std::string>& scope = {});
TypePtr parseType(const std::string& source, const ParseEnv& env = {});
CompTypePtr parseCompType(const std::string& source, const ParseEnv& env = {});

ParseEnv envOf(const SourceFile& file);

// ---------------------------------------------------------------------------
// Printing. `scope` lists the hints of the ambient context, outermost first.
// parse(print(x)) is alpha-equal to x.
// ---------------------------------------------------------------------------

std::string printType(const TypePtr& t);
std::string printCompType(const CompType& c);
std::string printSignature(const Signature& s);
std::string printEffectCtx(const EffectCtx& e);
std::string printValue(const ValuePtr& v, const std::vector<std::string>& scope = {});
std::string printComp(const CompPtr& m, const std::vector<std::string>& scope = {});
std::string printEffectTerm(const EffectTermPtr& t, const std::vector<std::string>& scope = {});
std::string printFile(const SourceFile& file);

}  // namespace effcore
