#include "effcore/surface.hpp"

#include <cassert>

#include "effcore/prims.hpp"

namespace effcore {

const SigDecl* SourceFile::findSig(const std::string& name) const {
    for (const auto& d : decls)
        if (auto* s = std::get_if<SigDecl>(&d))
            if (s->name == name) return s;
    return nullptr;
}
const TheoryDecl* SourceFile::findTheory(const std::string& name) const {
    for (const auto& d : decls)
        if (auto* t = std::get_if<TheoryDecl>(&d))
            if (t->name == name) return t;
    return nullptr;
}
const TermDecl* SourceFile::findDef(const std::string& name) const {
    for (const auto& d : decls)
        if (auto* t = std::get_if<TermDecl>(&d))
            if (t->name == name) return t;
    return nullptr;
}
const EqGoal* SourceFile::findGoal(const std::string& name) const {
    for (const auto& d : decls)
        if (auto* g = std::get_if<EqGoal>(&d))
            if (g->name == name) return g;
    return nullptr;
}

bool ParseEnv::isOpName(const std::string& name) const {
    for (const auto& [_, sig] : sigs)
        if (sig.contains(name)) return true;
    for (const auto& [_, th] : theories)
        if (th->sig.contains(name)) return true;
    return false;
}

ParseEnv envOf(const SourceFile& file) {
    ParseEnv env;
    for (const auto& d : file.decls) {
        if (auto* s = std::get_if<SigDecl>(&d)) env.sigs[s->name] = s->sig;
        if (auto* t = std::get_if<TheoryDecl>(&d)) env.theories[t->name] = t->theory;
    }
    return env;
}

namespace {

enum class Tok {
    Ident,
    Int,
    InHash,  // in#<n>
    KwSig,
    KwTheory,
    KwDef,
    KwGoal,
    KwAxiom,
    KwOver,
    KwReturn,
    KwLet,
    KwIn,
    KwHandle,
    KwWith,
    KwTo,
    KwAt,
    KwCase,
    KwOf,
    KwFun,
    KwPi,
    KwInl,
    KwInr,
    KwUnit,
    KwBool,
    KwInt4,
    KwProd,
    KwSum,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Lt,
    Gt,
    Comma,
    Semi,
    Colon,
    Dot,
    Equals,
    Arrow,
    Tilde,
    AtSign,
    Bang,
    Plus,
    Star,
    Slash,
    End,
};

struct Token {
    Tok kind;
    std::string text;
    int int_val = 0;
    Span span;
};

const std::map<std::string, Tok>& keywordTable() {
    static const std::map<std::string, Tok> table = {
        {"sig", Tok::KwSig},       {"theory", Tok::KwTheory}, {"def", Tok::KwDef},
        {"goal", Tok::KwGoal},     {"axiom", Tok::KwAxiom},   {"over", Tok::KwOver},
        {"return", Tok::KwReturn}, {"let", Tok::KwLet},       {"in", Tok::KwIn},
        {"handle", Tok::KwHandle}, {"with", Tok::KwWith},     {"to", Tok::KwTo},
        {"at", Tok::KwAt},         {"case", Tok::KwCase},     {"of", Tok::KwOf},
        {"fun", Tok::KwFun},       {"pi", Tok::KwPi},         {"inl", Tok::KwInl},
        {"inr", Tok::KwInr},       {"unit", Tok::KwUnit},     {"bool", Tok::KwBool},
        {"int4", Tok::KwInt4},     {"prod", Tok::KwProd},     {"sum", Tok::KwSum},
    };
    return table;
}

[[noreturn]] void fail(Span span, std::string message, std::vector<std::string> expected = {}) {
    throw ParseError{span, std::move(message), std::move(expected)};
}

std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    uint32_t line = 1, col = 1;
    size_t i = 0;
    auto isIdentStart = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
    auto isIdentChar = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
    };
    while (i < src.size()) {
        char c = src[i];
        Span sp{static_cast<uint32_t>(i), static_cast<uint32_t>(i + 1), line, col};
        if (c == '\n') {
            ++i;
            ++line;
            col = 1;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
            ++col;
            continue;
        }
        if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
            while (i < src.size() && src[i] != '\n') ++i;
            continue;
        }
        if (isIdentStart(c)) {
            size_t start = i;
            while (i < src.size() && isIdentChar(src[i])) ++i;
            std::string word = src.substr(start, i - start);
            col += static_cast<uint32_t>(i - start);
            sp.byte_end = static_cast<uint32_t>(i);
            if (word == "in" && i < src.size() && src[i] == '#') {
                ++i;
                ++col;
                size_t dstart = i;
                while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
                if (dstart == i) fail(sp, "expected digits after in#");
                int n = std::stoi(src.substr(dstart, i - dstart));
                col += static_cast<uint32_t>(i - dstart);
                sp.byte_end = static_cast<uint32_t>(i);
                out.push_back({Tok::InHash, word, n, sp});
                continue;
            }
            auto kw = keywordTable().find(word);
            out.push_back({kw == keywordTable().end() ? Tok::Ident : kw->second, word, 0, sp});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = i;
            while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
            std::string digits = src.substr(start, i - start);
            col += static_cast<uint32_t>(i - start);
            sp.byte_end = static_cast<uint32_t>(i);
            out.push_back({Tok::Int, digits, std::stoi(digits), sp});
            continue;
        }
        auto push1 = [&](Tok k) {
            out.push_back({k, std::string(1, c), 0, sp});
            ++i;
            ++col;
        };
        switch (c) {
            case '{': push1(Tok::LBrace); break;
            case '}': push1(Tok::RBrace); break;
            case '(': push1(Tok::LParen); break;
            case ')': push1(Tok::RParen); break;
            case '[': push1(Tok::LBracket); break;
            case ']': push1(Tok::RBracket); break;
            case '<': push1(Tok::Lt); break;
            case '>': push1(Tok::Gt); break;
            case ',': push1(Tok::Comma); break;
            case ';': push1(Tok::Semi); break;
            case ':': push1(Tok::Colon); break;
            case '.': push1(Tok::Dot); break;
            case '=': push1(Tok::Equals); break;
            case '~': push1(Tok::Tilde); break;
            case '@': push1(Tok::AtSign); break;
            case '!': push1(Tok::Bang); break;
            case '+': push1(Tok::Plus); break;
            case '*': push1(Tok::Star); break;
            case '/': push1(Tok::Slash); break;
            case '-':
                if (i + 1 < src.size() && src[i + 1] == '>') {
                    sp.byte_end = static_cast<uint32_t>(i + 2);
                    out.push_back({Tok::Arrow, "->", 0, sp});
                    i += 2;
                    col += 2;
                } else {
                    fail(sp, "unexpected '-'", {"->", "--"});
                }
                break;
            default:
                fail(sp, std::string("unsupported character '") + c + "'");
        }
    }
    out.push_back({Tok::End, "", 0,
                   Span{static_cast<uint32_t>(src.size()), static_cast<uint32_t>(src.size()), line, col}});
    return out;
}

const char* tokName(Tok k) {
    switch (k) {
        case Tok::Ident: return "identifier";
        case Tok::Int: return "integer";
        case Tok::InHash: return "in#";
        case Tok::End: return "end of input";
        case Tok::Arrow: return "->";
        case Tok::LBrace: return "{";
        case Tok::RBrace: return "}";
        case Tok::LParen: return "(";
        case Tok::RParen: return ")";
        case Tok::LBracket: return "[";
        case Tok::RBracket: return "]";
        case Tok::Lt: return "<";
        case Tok::Gt: return ">";
        case Tok::Comma: return ",";
        case Tok::Semi: return ";";
        case Tok::Colon: return ":";
        case Tok::Dot: return ".";
        case Tok::Equals: return "=";
        case Tok::Tilde: return "~";
        case Tok::AtSign: return "@";
        case Tok::Bang: return "!";
        case Tok::Plus: return "+";
        case Tok::Star: return "*";
        case Tok::Slash: return "/";
        default: return "keyword";
    }
}

template <typename T>
T withSpan(T node, Span sp) {
    const_cast<typename T::element_type*>(node.get())->span = sp;
    return node;
}

class Parser {
public:
    Parser(std::vector<Token> toks, ParseEnv env) : toks_(std::move(toks)), env_(std::move(env)) {}

    SourceFile file() {
        SourceFile out;
        while (!at(Tok::End)) out.decls.push_back(decl());
        return out;
    }

    CompPtr compIn(std::vector<std::string> scope) {
        scope_ = std::move(scope);
        CompPtr m = comp();
        expect(Tok::End);
        return m;
    }
    ValuePtr valueIn(std::vector<std::string> scope) {
        scope_ = std::move(scope);
        ValuePtr v = value();
        expect(Tok::End);
        return v;
    }
    TypePtr typeOnly() {
        TypePtr t = vtype();
        expect(Tok::End);
        return t;
    }
    CompTypePtr compTypeOnly() {
        TypePtr t = vtype();
        expect(Tok::Bang);
        EffectCtx e = effectCtx();
        expect(Tok::End);
        return tComp(t, e);
    }

private:
    std::vector<Token> toks_;
    size_t pos_ = 0;
    ParseEnv env_;
    std::vector<std::string> scope_;  // outermost first

    const Token& cur() const { return toks_[pos_]; }
    bool at(Tok k) const { return cur().kind == k; }
    Token next() { return toks_[pos_++]; }
    Token expect(Tok k) {
        if (!at(k)) fail(cur().span, std::string("expected ") + tokName(k), {tokName(k)});
        return next();
    }
    std::string ident() { return expect(Tok::Ident).text; }

    int resolve(const std::string& name, Span sp) {
        for (size_t i = scope_.size(); i-- > 0;) {
            if (scope_[i] == name && name != "_") return static_cast<int>(scope_.size() - 1 - i);
        }
        fail(sp, "unbound variable " + name);
    }
    bool inScope(const std::string& name) const {
        if (name == "_") return false;
        for (size_t i = scope_.size(); i-- > 0;)
            if (scope_[i] == name) return true;
        return false;
    }

    // ---- types ----

    TypePtr typeAtom() {
        Token t = cur();
        switch (t.kind) {
            case Tok::KwUnit: next(); return tUnit();
            case Tok::KwBool: next(); return tBool();
            case Tok::KwInt4: next(); return tInt4();
            case Tok::KwProd: {
                next();
                expect(Tok::LParen);
                std::vector<TypePtr> items;
                if (!at(Tok::RParen)) {
                    items.push_back(vtype());
                    while (at(Tok::Comma)) {
                        next();
                        items.push_back(vtype());
                    }
                }
                expect(Tok::RParen);
                return tProd(std::move(items));
            }
            case Tok::KwSum: {
                next();
                expect(Tok::LParen);
                std::vector<TypePtr> items;
                items.push_back(vtype());
                while (at(Tok::Comma)) {
                    next();
                    items.push_back(vtype());
                }
                expect(Tok::RParen);
                return tSum(std::move(items));
            }
            case Tok::LParen: {
                next();
                TypePtr inner = vtype();
                expect(Tok::RParen);
                return inner;
            }
            default:
                fail(t.span, "expected a type", {"unit", "bool", "int4", "prod", "sum", "("});
        }
    }

    TypePtr prodType() {
        TypePtr first = typeAtom();
        if (!at(Tok::Star)) return first;
        std::vector<TypePtr> items{first};
        while (at(Tok::Star)) {
            next();
            items.push_back(typeAtom());
        }
        return tProd(std::move(items));
    }

    TypePtr sumType() {
        TypePtr first = prodType();
        if (!at(Tok::Plus)) return first;
        std::vector<TypePtr> items{first};
        while (at(Tok::Plus)) {
            next();
            items.push_back(prodType());
        }
        return tSum(std::move(items));
    }

    TypePtr vtype() {
        TypePtr lhs = sumType();
        if (at(Tok::Arrow)) {
            next();
            TypePtr ret = sumType();
            expect(Tok::Bang);
            EffectCtx e = effectCtx();
            return tArrow(lhs, tComp(ret, e));
        }
        return lhs;
    }

    Signature sigLiteral() {
        expect(Tok::LBrace);
        Signature out;
        if (!at(Tok::RBrace)) {
            while (true) {
                Token name = expect(Tok::Ident);
                expect(Tok::Colon);
                TypePtr arg = sumType();
                expect(Tok::Arrow);
                TypePtr res = sumType();
                if (out.ops.count(name.text)) fail(name.span, "duplicate operation " + name.text);
                out.ops.emplace(name.text, OpSig{arg, res});
                if (!at(Tok::Comma)) break;
                next();
            }
        }
        expect(Tok::RBrace);
        return out;
    }

    EffectCtx effectCtx() {
        EffectCtx out;
        if (at(Tok::LBrace)) {
            out.sig = sigLiteral();
        } else {
            Token name = expect(Tok::Ident);
            auto sig_it = env_.sigs.find(name.text);
            if (sig_it != env_.sigs.end()) {
                out.sig = sig_it->second;
            } else {
                auto th_it = env_.theories.find(name.text);
                if (th_it == env_.theories.end()) {
                    fail(name.span, "unknown signature or theory " + name.text);
                }
                out.sig = th_it->second->sig;
                out.theory = th_it->second;
                out.theory_name = name.text;
            }
        }
        if (at(Tok::Slash)) {
            next();
            Token name = expect(Tok::Ident);
            auto th_it = env_.theories.find(name.text);
            if (th_it == env_.theories.end()) fail(name.span, "unknown theory " + name.text);
            out.theory = th_it->second;
            out.theory_name = name.text;
        }
        return out;
    }

    // ---- values ----

    bool startsValueAtom() const {
        switch (cur().kind) {
            case Tok::Ident:
            case Tok::Int:
            case Tok::Lt:
            case Tok::KwPi:
            case Tok::KwInl:
            case Tok::KwInr:
            case Tok::InHash:
            case Tok::LParen:
                return true;
            default:
                return false;
        }
    }

    ValuePtr valueAtom() {
        Token t = cur();
        switch (t.kind) {
            case Tok::Ident: {
                next();
                if (inScope(t.text)) return withSpan(vVar(resolve(t.text, t.span), t.text), t.span);
                if (const PrimInfo* prim = findPrim(t.text)) {
                    std::vector<ValuePtr> args;
                    if (at(Tok::LParen)) {
                        next();
                        if (!at(Tok::RParen)) {
                            args.push_back(value());
                            while (at(Tok::Comma)) {
                                next();
                                args.push_back(value());
                            }
                        }
                        expect(Tok::RParen);
                    }
                    if (args.size() != prim->arg_types.size()) {
                        fail(t.span, "primitive " + t.text + " takes " +
                                         std::to_string(prim->arg_types.size()) + " arguments");
                    }
                    return withSpan(vPrim(t.text, std::move(args)), t.span);
                }
                fail(t.span, "unbound variable " + t.text);
            }
            case Tok::Int: {
                next();
                if (t.int_val < 0 || t.int_val > 3) fail(t.span, "int4 literals are 0..3");
                return withSpan(vInt4(t.int_val), t.span);
            }
            case Tok::Lt: {
                next();
                std::vector<ValuePtr> items;
                if (!at(Tok::Gt)) {
                    items.push_back(value());
                    while (at(Tok::Comma)) {
                        next();
                        items.push_back(value());
                    }
                }
                expect(Tok::Gt);
                return withSpan(vTuple(std::move(items)), t.span);
            }
            case Tok::KwPi: {
                next();
                Token idx = expect(Tok::Int);
                if (idx.int_val < 1) fail(idx.span, "projection indices are 1-based");
                ValuePtr tup = valueAtom();
                return withSpan(vProj(idx.int_val - 1, tup), t.span);
            }
            case Tok::KwInl:
            case Tok::KwInr:
            case Tok::InHash: {
                next();
                int tag = t.kind == Tok::KwInl ? 0 : t.kind == Tok::KwInr ? 1 : t.int_val - 1;
                if (tag < 0) fail(t.span, "injection tags are 1-based");
                expect(Tok::LBracket);
                TypePtr sum = vtype();
                expect(Tok::RBracket);
                ValuePtr payload = valueAtom();
                return withSpan(vInj(tag, sum, payload), t.span);
            }
            case Tok::LParen: {
                next();
                ValuePtr v = value();
                expect(Tok::RParen);
                return v;
            }
            default:
                fail(t.span, "expected a value", {"identifier", "<", "pi", "inl", "inr", "in#", "fun", "("});
        }
    }

    ValuePtr value() {
        if (at(Tok::KwFun)) {
            Token t = next();
            std::string name = binderName();
            expect(Tok::Colon);
            TypePtr arg = vtype();
            expect(Tok::AtSign);
            EffectCtx eff = effectCtx();
            expect(Tok::Dot);
            scope_.push_back(name);
            CompPtr body = comp();
            scope_.pop_back();
            return withSpan(vLam(name, arg, eff, body), t.span);
        }
        return valueAtom();
    }

    std::string binderName() {
        if (at(Tok::Ident)) return next().text;
        fail(cur().span, "expected a binder name", {"identifier", "_"});
    }

    // ---- computations ----

    CompPtr comp() {
        Token t = cur();
        switch (t.kind) {
            case Tok::KwReturn: {
                next();
                ValuePtr v = value();
                return withSpan(cReturn(v), t.span);
            }
            case Tok::KwLet: {
                next();
                std::string name = binderName();
                expect(Tok::Equals);
                CompPtr bound = comp();
                expect(Tok::KwIn);
                scope_.push_back(name);
                CompPtr body = comp();
                scope_.pop_back();
                return withSpan(cLet(bound, name, body), t.span);
            }
            case Tok::KwHandle: return handleComp();
            case Tok::KwCase: return caseComp();
            case Tok::LParen: {
                // Either a parenthesized computation or an application whose
                // function is a parenthesized value.
                size_t save = pos_;
                try {
                    next();
                    CompPtr inner = comp();
                    expect(Tok::RParen);
                    return inner;
                } catch (const ParseError&) {
                    pos_ = save;
                }
                ValuePtr fn = valueAtom();
                ValuePtr arg = valueAtom();
                return withSpan(cApp(fn, arg), t.span);
            }
            default: break;
        }
        // Operation call `op(v)` or application `v w`.
        if (at(Tok::Ident) && !inScope(cur().text) && env_.isOpName(cur().text)) {
            Token op = next();
            expect(Tok::LParen);
            ValuePtr arg = value();
            expect(Tok::RParen);
            return withSpan(cOp(op.text, arg), op.span);
        }
        ValuePtr fn = value();
        if (!startsValueAtom()) {
            fail(cur().span, "expected a computation (a bare value needs `return`)");
        }
        ValuePtr arg = valueAtom();
        return withSpan(cApp(fn, arg), t.span);
    }

    CompPtr handleComp() {
        Token t = expect(Tok::KwHandle);
        CompPtr subject = comp();
        bool explicit_ctx = false;
        EffectCtx handled;
        if (at(Tok::KwAt)) {
            next();
            handled = effectCtx();
            explicit_ctx = true;
        }
        expect(Tok::KwWith);
        expect(Tok::LBrace);
        Handler handler;
        std::vector<std::string> clause_order;
        if (!at(Tok::RBrace)) {
            while (true) {
                Token op = expect(Tok::Ident);
                expect(Tok::LParen);
                std::string x = binderName();
                expect(Tok::Comma);
                std::string k = binderName();
                expect(Tok::RParen);
                expect(Tok::Arrow);
                scope_.push_back(x);
                scope_.push_back(k);
                CompPtr body = comp();
                scope_.pop_back();
                scope_.pop_back();
                if (handler.clauses.count(op.text)) {
                    fail(op.span, "duplicate handler clause for operation " + op.text);
                }
                handler.clauses.emplace(op.text, HandlerClause{x, k, body});
                clause_order.push_back(op.text);
                if (!at(Tok::Semi)) break;
                next();
            }
        }
        expect(Tok::RBrace);
        if (!explicit_ctx) handled = resolveHandled(handler, t.span);
        expect(Tok::KwTo);
        std::string ret_name = binderName();
        expect(Tok::Dot);
        scope_.push_back(ret_name);
        CompPtr ret = comp();
        scope_.pop_back();
        return withSpan(cHandle(subject, handled, handler, ret_name, ret), t.span);
    }

    // Without an `at` clause, the handled signature is the unique declared
    // signature (or theory) with exactly the clauses' operation names. A bare
    // snippet over undeclared ops falls back to unit-typed operations.
    EffectCtx resolveHandled(const Handler& handler, Span sp) {
        std::set<std::string> dom;
        for (const auto& [op, _] : handler.clauses) dom.insert(op);
        auto domOf = [](const Signature& s) {
            std::set<std::string> d;
            for (const auto& [op, _] : s.ops) d.insert(op);
            return d;
        };
        const Signature* match = nullptr;
        std::string match_name;
        for (const auto& [name, sig] : env_.sigs) {
            if (domOf(sig) == dom) {
                if (match) fail(sp, "ambiguous handled signature (" + match_name + " vs " + name +
                                        "); add an `at` clause");
                match = &sig;
                match_name = name;
            }
        }
        if (match) return EffectCtx{*match, nullptr, {}};
        for (const auto& [name, th] : env_.theories) {
            if (domOf(th->sig) == dom) {
                if (match) fail(sp, "ambiguous handled signature; add an `at` clause");
                match = &th->sig;
                match_name = name;
                EffectCtx out{th->sig, th, name};
                return out;
            }
        }
        Signature fallback;
        for (const auto& op : dom) fallback.ops.emplace(op, OpSig{tUnit(), tUnit()});
        return EffectCtx{fallback, nullptr, {}};
    }

    CompPtr caseComp() {
        Token t = expect(Tok::KwCase);
        ValuePtr scrut = value();
        expect(Tok::KwOf);
        std::vector<CaseBranch> branches;
        while (true) {
            Token pat = cur();
            int tag;
            if (pat.kind == Tok::KwInl) {
                tag = 0;
            } else if (pat.kind == Tok::KwInr) {
                tag = 1;
            } else if (pat.kind == Tok::InHash) {
                tag = pat.int_val - 1;
            } else {
                fail(pat.span, "expected a case pattern", {"inl", "inr", "in#"});
            }
            next();
            if (tag != static_cast<int>(branches.size())) {
                fail(pat.span, "case branches must appear in tag order");
            }
            std::string name = binderName();
            expect(Tok::Arrow);
            scope_.push_back(name);
            CompPtr body = comp();
            scope_.pop_back();
            branches.push_back(CaseBranch{name, body});
            if (!at(Tok::Semi)) break;
            next();
        }
        return withSpan(cCase(scrut, std::move(branches)), t.span);
    }

    // ---- effect theory terms ----

    EffectTermPtr effectTermOf(const CompPtr& m) {
        if (auto* r = std::get_if<Comp::Return>(&m->node)) {
            return eReturn(r->value);
        }
        if (auto* l = std::get_if<Comp::Let>(&m->node)) {
            auto* op = std::get_if<Comp::OpCall>(&l->bound->node);
            if (!op) {
                fail(l->bound->span, "effect theory terms may only bind operation calls");
            }
            return eLetOp(op->op, op->arg, l->hint, effectTermOf(l->body));
        }
        if (auto* c = std::get_if<Comp::Case>(&m->node)) {
            std::vector<EffectBranch> branches;
            for (const auto& b : c->branches) branches.push_back(EffectBranch{b.hint, effectTermOf(b.body)});
            return eCase(c->scrutinee, std::move(branches));
        }
        fail(m->span, "effect theory terms are built from return, let-op and case only");
    }

    // ---- declarations ----

    std::vector<std::pair<std::string, TypePtr>> declContext() {
        std::vector<std::pair<std::string, TypePtr>> ctx;
        if (at(Tok::LBracket)) {
            next();
            if (!at(Tok::RBracket)) {
                while (true) {
                    std::string name = binderName();
                    expect(Tok::Colon);
                    ctx.emplace_back(name, vtype());
                    if (!at(Tok::Comma)) break;
                    next();
                }
            }
            expect(Tok::RBracket);
        }
        return ctx;
    }

    Decl decl() {
        Token t = cur();
        switch (t.kind) {
            case Tok::KwSig: {
                next();
                std::string name = ident();
                expect(Tok::Equals);
                Signature sig = sigLiteral();
                if (env_.sigs.count(name) || env_.theories.count(name)) {
                    fail(t.span, "duplicate declaration " + name);
                }
                env_.sigs[name] = sig;
                return SigDecl{name, sig, t.span};
            }
            case Tok::KwTheory: {
                next();
                std::string name = ident();
                expect(Tok::KwOver);
                Signature sig;
                if (at(Tok::LBrace)) {
                    sig = sigLiteral();
                } else {
                    Token ref = expect(Tok::Ident);
                    auto it = env_.sigs.find(ref.text);
                    if (it == env_.sigs.end()) fail(ref.span, "unknown signature " + ref.text);
                    sig = it->second;
                }
                expect(Tok::LBrace);
                std::vector<Axiom> axioms;
                while (at(Tok::KwAxiom)) {
                    next();
                    std::string ax_name = ident();
                    auto ctx = declContext();
                    expect(Tok::Colon);
                    TypePtr result = vtype();
                    expect(Tok::Equals);
                    std::vector<std::string> saved = scope_;
                    scope_.clear();
                    for (const auto& [n, _] : ctx) scope_.push_back(n);
                    CompPtr lhs = comp();
                    expect(Tok::Tilde);
                    CompPtr rhs = comp();
                    scope_ = saved;
                    axioms.push_back(Axiom{ax_name, ctx, effectTermOf(lhs), effectTermOf(rhs), result});
                }
                expect(Tok::RBrace);
                auto theory = std::make_shared<EffectTheory>(EffectTheory{name, sig, std::move(axioms)});
                if (env_.sigs.count(name) || env_.theories.count(name)) {
                    fail(t.span, "duplicate declaration " + name);
                }
                env_.theories[name] = theory;
                return TheoryDecl{name, theory, t.span};
            }
            case Tok::KwDef:
            case Tok::KwGoal: {
                bool is_goal = t.kind == Tok::KwGoal;
                next();
                std::string name = ident();
                auto ctx = declContext();
                expect(Tok::Colon);
                TypePtr vt = vtype();
                bool is_comp = at(Tok::Bang);
                EffectCtx eff;
                if (is_comp) {
                    next();
                    eff = effectCtx();
                }
                expect(Tok::Equals);
                std::vector<std::string> saved = scope_;
                scope_.clear();
                for (const auto& [n, _] : ctx) scope_.push_back(n);
                if (!is_goal) {
                    TermDecl d;
                    d.name = name;
                    d.ctx = ctx;
                    d.is_comp = is_comp;
                    d.span = t.span;
                    if (is_comp) {
                        d.ctype = tComp(vt, eff);
                        d.comp = comp();
                    } else {
                        d.vtype = vt;
                        d.value = value();
                    }
                    scope_ = saved;
                    return d;
                }
                EqGoal g;
                g.name = name;
                g.ctx = ctx;
                g.is_comp = is_comp;
                g.span = t.span;
                if (is_comp) {
                    g.ctype = tComp(vt, eff);
                    g.lhs_comp = comp();
                    expect(Tok::Tilde);
                    g.rhs_comp = comp();
                } else {
                    g.vtype = vt;
                    g.lhs_value = value();
                    expect(Tok::Tilde);
                    g.rhs_value = value();
                }
                scope_ = saved;
                return g;
            }
            default:
                fail(t.span, "expected a declaration", {"sig", "theory", "def", "goal"});
        }
    }
};

}  // namespace

SourceFile parseFile(const std::string& source) {
    Parser p(lex(source), ParseEnv{});
    return p.file();
}

CompPtr parseComp(const std::string& source, const ParseEnv& env, const std::vector<std::string>& scope) {
    Parser p(lex(source), env);
    return p.compIn(scope);
}
ValuePtr parseValue(const std::string& source, const ParseEnv& env, const std::vector<std::string>& scope) {
    Parser p(lex(source), env);
    return p.valueIn(scope);
}
TypePtr parseType(const std::string& source, const ParseEnv& env) {
    Parser p(lex(source), env);
    return p.typeOnly();
}
CompTypePtr parseCompType(const std::string& source, const ParseEnv& env) {
    Parser p(lex(source), env);
    return p.compTypeOnly();
}

}  // namespace effcore
