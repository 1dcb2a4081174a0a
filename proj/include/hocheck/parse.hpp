#ifndef HOCHECK_PARSE_HPP
#define HOCHECK_PARSE_HPP

#include <cctype>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "print.hpp"
#include "signature.hpp"
#include "term.hpp"
#include "typing.hpp"

namespace hocheck {

struct Pos {
    int line = 1;
    int column = 1;
};

struct ParseError : std::runtime_error {
    enum class Kind { lexical, syntax, unbound_variable, precedence, undeclared, meta_type, declaration };

    ParseError(Kind k, Pos p, const std::string& msg) : std::runtime_error(msg), kind(k), pos(p) {}

    Kind kind;
    Pos pos;
};

inline const char* error_kind_name(ParseError::Kind k)
{
    switch (k) {
    case ParseError::Kind::lexical: return "lexical error";
    case ParseError::Kind::syntax: return "syntax error";
    case ParseError::Kind::unbound_variable: return "unbound variable";
    case ParseError::Kind::precedence: return "precedence ambiguity";
    case ParseError::Kind::undeclared: return "undeclared constant";
    case ParseError::Kind::meta_type: return "meta-type error";
    case ParseError::Kind::declaration: return "bad declaration";
    }
    return "error";
}

struct TypeDecl {
    std::string name;
    MetaType type;
    Pos pos;
};

struct InfixDecl {
    std::string name;
    Infix infix;
    Pos pos;
};

struct DefLemma {
    Term name; // the declared constant
    Term inference;
    Term proof;
    Pos pos;
};

struct DefDefinition {
    Term result_tp;
    Term name;
    Term typeinf;
    Term body;
    Pos pos;
};

struct Solve {
    Term goal;
    Pos pos;
};

using Statement = std::variant<TypeDecl, InfixDecl, DefLemma, DefDefinition, Solve>;

struct SourceFile {
    std::string path;
    std::vector<Statement> statements;
    /// The input signature extended with this file's declarations.
    Signature sig;
};

namespace detail {

enum class Tok { ident, backslash, lparen, rparen, dot, comma, op, arrow, eof };

struct Token {
    Tok kind;
    std::string text;
    Pos pos;
};

class Lexer {
public:
    Lexer(const std::string& src) : src_(src) {}

    std::vector<Token> run()
    {
        std::vector<Token> out;
        for (;;) {
            skip();
            Pos p{line_, col_};
            if (i_ >= src_.size()) {
                out.push_back({Tok::eof, "", p});
                return out;
            }
            char c = src_[i_];
            if (is_ident(c)) {
                std::string s;
                while (i_ < src_.size() && is_ident(src_[i_])) s += next();
                out.push_back({Tok::ident, s, p});
                continue;
            }
            if (c == '\\') { next(); out.push_back({Tok::backslash, "\\", p}); continue; }
            if (c == '(') { next(); out.push_back({Tok::lparen, "(", p}); continue; }
            if (c == ')') { next(); out.push_back({Tok::rparen, ")", p}); continue; }
            if (c == ',') { next(); out.push_back({Tok::comma, ",", p}); continue; }
            if (c == '.') { next(); out.push_back({Tok::dot, ".", p}); continue; }
            bool matched = false;
            for (const char* sym : {"==>>", "<<==", "=>", ":-", "->"}) {
                std::string s(sym);
                if (src_.compare(i_, s.size(), s) == 0) {
                    for (std::size_t k = 0; k < s.size(); ++k) next();
                    out.push_back({s == "->" ? Tok::arrow : Tok::op, s, p});
                    matched = true;
                    break;
                }
            }
            if (!matched)
                throw ParseError(ParseError::Kind::lexical, p, std::string("unexpected character '") + c + "'");
        }
    }

private:
    static bool is_ident(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }

    char next()
    {
        char c = src_[i_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip()
    {
        while (i_ < src_.size()) {
            char c = src_[i_];
            if (c == '%') {
                while (i_ < src_.size() && src_[i_] != '\n') next();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                next();
            } else {
                break;
            }
        }
    }

    const std::string& src_;
    std::size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
};

} // namespace detail

/// Parser for `.hol` files. Positions of parsed nodes are kept so that later
/// meta-type errors can point at the source.
class Parser {
public:
    Parser(const std::string& text, Signature sig) : sig_(std::move(sig)), toks_(detail::Lexer(text).run()) {}

    SourceFile file(std::string path = {})
    {
        SourceFile f;
        f.path = std::move(path);
        while (peek().kind != detail::Tok::eof) f.statements.push_back(statement());
        f.sig = sig_;
        return f;
    }

    /// A single expression (no terminating dot), elaborated at `expected` if given.
    Term expression(const std::optional<MetaType>& expected = std::nullopt)
    {
        Term t = expr(kLowest, nullptr);
        if (peek().kind == detail::Tok::dot) advance();
        expect(detail::Tok::eof, "end of input");
        return elab(t, expected);
    }

    const Signature& signature() const { return sig_; }

private:
    using Tok = detail::Tok;
    static constexpr int kLowest = -1000;

    const detail::Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    const detail::Token& advance() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

    [[noreturn]] void fail(ParseError::Kind k, Pos p, const std::string& msg) const { throw ParseError(k, p, msg); }

    const detail::Token& expect(Tok k, const char* what)
    {
        if (peek().kind != k) {
            std::string got = peek().kind == Tok::eof ? "end of input" : "'" + peek().text + "'";
            fail(ParseError::Kind::syntax, peek().pos, std::string("expected ") + what + ", found " + got);
        }
        return advance();
    }

    Term note(Term t, Pos p)
    {
        positions_.emplace(t.id(), p);
        return t;
    }

    Pos position_of(const Term& t, Pos fallback) const
    {
        auto it = positions_.find(t.id());
        return it == positions_.end() ? fallback : it->second;
    }

    Term elab(const Term& t, const std::optional<MetaType>& expected)
    {
        try {
            return elaborate(t, sig_, expected);
        } catch (const MetaTypeError& e) {
            fail(ParseError::Kind::meta_type, position_of(e.subterm, stmt_pos_), e.what());
        }
    }

    // ---- statements ----

    Statement statement()
    {
        stmt_pos_ = peek().pos;
        const detail::Token& t = peek();
        if (t.kind == Tok::ident) {
            if (t.text == "type") return type_decl();
            if (t.text == "kind") return kind_decl();
            if (t.text == "infixl" || t.text == "infixr" || t.text == "infix") return infix_decl();
            if (t.text == "def_lemma") return def_lemma();
            if (t.text == "def_definition") return def_definition();
        }
        Pos p = peek().pos;
        Term g = expr(kLowest, nullptr);
        expect(Tok::dot, "'.'");
        return Solve{elab(g, MetaType::o()), p};
    }

    std::string decl_name()
    {
        if (peek().kind == Tok::ident || peek().kind == Tok::op || peek().kind == Tok::comma) return advance().text;
        fail(ParseError::Kind::syntax, peek().pos, "expected a constant name");
    }

    static bool keyword_scheme(const std::string& name) { return name == "def_lemma" || name == "def_definition"; }

    Statement type_decl()
    {
        Pos p = advance().pos;
        std::string name = decl_name();
        MetaType ty = meta_type(keyword_scheme(name));
        expect(Tok::dot, "'.'");
        if (!keyword_scheme(name)) {
            try {
                sig_.declare(name, ty);
            } catch (const SignatureError& e) {
                fail(ParseError::Kind::declaration, p, e.what());
            }
        }
        return TypeDecl{name, ty, p};
    }

    Statement kind_decl()
    {
        Pos p = advance().pos;
        const detail::Token& n = expect(Tok::ident, "a kind name");
        const detail::Token& k = expect(Tok::ident, "'type'");
        expect(Tok::dot, "'.'");
        if (k.text != "type" || !base_from_name(n.text))
            fail(ParseError::Kind::declaration, p, "user-defined base meta-types are not supported ('" + n.text + "')");
        // Declaring a builtin base is accepted and has no effect.
        return TypeDecl{"", MetaType::base(*base_from_name(n.text)), p};
    }

    MetaType meta_type(bool allow_vars)
    {
        MetaType dom = meta_type_atom(allow_vars);
        if (peek().kind == Tok::arrow) {
            advance();
            return MetaType::arrow(dom, meta_type(allow_vars));
        }
        return dom;
    }

    MetaType meta_type_atom(bool allow_vars)
    {
        if (peek().kind == Tok::lparen) {
            advance();
            MetaType t = meta_type(allow_vars);
            expect(Tok::rparen, "')'");
            return t;
        }
        const detail::Token& t = expect(Tok::ident, "a meta-type");
        if (auto b = base_from_name(t.text)) return MetaType::base(*b);
        if (allow_vars && std::isupper(static_cast<unsigned char>(t.text[0]))) return MetaType::var(0);
        fail(ParseError::Kind::declaration, t.pos, "unknown meta-type '" + t.text + "'");
    }

    Statement infix_decl()
    {
        const detail::Token& kw = advance();
        Fixity fx = kw.text == "infixl" ? Fixity::infixl : kw.text == "infixr" ? Fixity::infixr : Fixity::infix;
        std::string name = decl_name();
        const detail::Token& n = expect(Tok::ident, "a precedence");
        int prec = 0;
        try {
            std::size_t used = 0;
            prec = std::stoi(n.text, &used);
            if (used != n.text.size()) throw std::invalid_argument("");
        } catch (...) {
            fail(ParseError::Kind::declaration, n.pos, "precedence must be an integer");
        }
        expect(Tok::dot, "'.'");
        try {
            sig_.declare_infix(name, {fx, prec});
        } catch (const SignatureError& e) {
            fail(ParseError::Kind::declaration, kw.pos, e.what());
        }
        return InfixDecl{name, {fx, prec}, kw.pos};
    }

    Term registry_name()
    {
        const detail::Token& t = expect(Tok::ident, "a lemma or definition name");
        const ConstDecl* d = sig_.find(t.text);
        if (!d) fail(ParseError::Kind::undeclared, t.pos, "undeclared constant '" + t.text + "'");
        if (d->builtin) fail(ParseError::Kind::declaration, t.pos, "'" + t.text + "' is a builtin constant");
        return Term::constant(t.text, d->type);
    }

    Statement def_lemma()
    {
        Pos p = advance().pos;
        Term name = registry_name();
        Term inf = argument();
        Term proof = argument();
        expect(Tok::dot, "'.'");
        const MetaType& a = name.type();
        return DefLemma{name, elab(inf, MetaType::arrow(a, MetaType::o())), elab(proof, a), p};
    }

    Statement def_definition()
    {
        Pos p = advance().pos;
        Term tp = argument();
        Term name = registry_name();
        Term inf = argument();
        Term body = argument();
        expect(Tok::dot, "'.'");
        const MetaType& a = name.type();
        return DefDefinition{elab(tp, MetaType::tp()), name, elab(inf, MetaType::arrow(a, MetaType::o())),
                             elab(body, a), p};
    }

    Term argument()
    {
        if (starts_lambda()) return lambda();
        if (!starts_primary()) fail(ParseError::Kind::syntax, peek().pos, "expected an argument");
        return primary();
    }

    // ---- expressions ----

    struct Level {
        int prec;
        Fixity fixity;
    };

    /// The infix operator at the cursor, if any.
    std::optional<std::pair<std::string, Infix>> infix_here() const
    {
        const detail::Token& t = peek();
        std::string name;
        if (t.kind == Tok::comma) {
            name = names::conj;
        } else if (t.kind == Tok::op) {
            name = t.text == "=>" ? names::impl_fwd : t.text == ":-" ? names::impl_bwd : t.text;
        } else if (t.kind == Tok::ident && !in_scope(t.text) && peek(1).kind != Tok::backslash) {
            name = t.text;
        } else {
            return std::nullopt;
        }
        const Infix* fx = sig_.infix(name);
        if (!fx) return std::nullopt;
        return std::make_pair(name, *fx);
    }

    Term expr(int min_prec, const Level* outer)
    {
        Term lhs = application();
        std::optional<Level> prev;
        for (;;) {
            auto op = infix_here();
            if (!op || op->second.precedence < min_prec) break;
            const Infix fx = op->second;
            Pos p = peek().pos;
            const bool same_as_outer = outer && outer->prec == fx.precedence;
            if ((same_as_outer && (outer->fixity != fx.fixity || fx.fixity == Fixity::infix)) ||
                (prev && prev->prec == fx.precedence && (prev->fixity != fx.fixity || fx.fixity == Fixity::infix)))
                fail(ParseError::Kind::precedence, p,
                     "cannot mix '" + op->first + "' with an operator of the same precedence without parentheses");
            advance();
            Level here{fx.precedence, fx.fixity};
            Term rhs = expr(fx.fixity == Fixity::infixr ? fx.precedence : fx.precedence + 1, &here);
            const ConstDecl* d = sig_.find(op->first);
            Term c = note(Term::constant(op->first, Signature::instantiate(*d)), p);
            lhs = note(Term::app(note(Term::app(c, lhs), p), rhs), p);
            prev = here;
        }
        return lhs;
    }

    bool starts_lambda() const { return peek().kind == Tok::ident && peek(1).kind == Tok::backslash; }

    bool starts_primary() const
    {
        if (peek().kind == Tok::lparen) return true;
        if (peek().kind != Tok::ident) return false;
        return !infix_here();
    }

    Term application()
    {
        if (starts_lambda()) return lambda();
        if (!starts_primary()) {
            std::string got = peek().kind == Tok::eof ? "end of input" : "'" + peek().text + "'";
            fail(ParseError::Kind::syntax, peek().pos, "expected a term, found " + got);
        }
        Pos p = peek().pos;
        Term head = primary();
        for (;;) {
            if (starts_lambda()) {
                head = note(Term::app(head, lambda()), p);
                break;
            }
            if (!starts_primary()) break;
            head = note(Term::app(head, primary()), p);
        }
        return head;
    }

    Term lambda()
    {
        const detail::Token& name = advance();
        advance(); // backslash
        scope_.push_back(name.text);
        Term body = expr(kLowest, nullptr);
        scope_.pop_back();
        return note(Term::lam(MetaType::fresh_var(), body, name.text), name.pos);
    }

    bool in_scope(const std::string& n) const
    {
        for (const auto& s : scope_)
            if (s == n) return true;
        return false;
    }

    Term primary()
    {
        const detail::Token& t = peek();
        if (t.kind == Tok::lparen) {
            // `(op)` names an infix constant.
            const detail::Token& inner = peek(1);
            if (peek(2).kind == Tok::rparen &&
                (inner.kind == Tok::comma || inner.kind == Tok::op ||
                 (inner.kind == Tok::ident && sig_.infix(inner.text) && !in_scope(inner.text)))) {
                advance();
                advance();
                advance();
                std::string name = inner.kind == Tok::comma ? names::conj
                                   : inner.text == "=>"     ? names::impl_fwd
                                   : inner.text == ":-"     ? names::impl_bwd
                                                            : inner.text;
                return constant(name, inner.pos);
            }
            advance();
            Term e = expr(kLowest, nullptr);
            expect(Tok::rparen, "')'");
            return e;
        }
        const detail::Token& id = expect(Tok::ident, "a term");
        for (std::size_t i = scope_.size(); i-- > 0;)
            if (scope_[i] == id.text) return note(Term::bound(static_cast<std::uint32_t>(scope_.size() - 1 - i)), id.pos);
        if (std::isupper(static_cast<unsigned char>(id.text[0])))
            fail(ParseError::Kind::unbound_variable, id.pos,
                 "unbound variable '" + id.text + "' (capitalized names must be bound by a lambda or pi)");
        return constant(id.text, id.pos);
    }

    Term constant(const std::string& name, Pos p)
    {
        const ConstDecl* d = sig_.find(name);
        if (!d) fail(ParseError::Kind::undeclared, p, "undeclared constant '" + name + "'");
        return note(Term::constant(name, Signature::instantiate(*d)), p);
    }

    Signature sig_;
    std::vector<detail::Token> toks_;
    std::size_t pos_ = 0;
    std::vector<std::string> scope_;
    std::unordered_map<const void*, Pos> positions_;
    Pos stmt_pos_;
};

inline SourceFile parse_file(const std::string& text, const Signature& sig = Signature::core(), std::string path = {})
{
    return Parser(text, sig).file(std::move(path));
}

/// Parses and elaborates a single term.
inline Term parse_term(const std::string& text, const Signature& sig = Signature::core(),
                       const std::optional<MetaType>& expected = std::nullopt)
{
    return Parser(text, sig).expression(expected);
}

/// Prints `t` so that it can stand as an argument of an application.
inline std::string print_argument(const Term& t, const Signature& sig)
{
    std::string s = print(t, sig);
    if (s.find(' ') == std::string::npos) return s;
    return "(" + s + ")";
}

inline std::string print_fixity(Fixity f)
{
    switch (f) {
    case Fixity::infixl: return "infixl";
    case Fixity::infixr: return "infixr";
    case Fixity::infix: return "infix";
    }
    return "infix";
}

inline std::string print_statement(const Statement& st, const Signature& sig)
{
    struct V {
        const Signature& sig;
        std::string operator()(const TypeDecl& d) const
        {
            if (d.name.empty()) return "kind " + d.type.str() + " type.";
            std::string ty = d.type.str();
            if (d.name == "def_lemma" || d.name == "def_definition") {
                // Scheme variables print as A.
                std::string out;
                for (std::size_t i = 0; i < ty.size(); ++i) {
                    if (ty[i] == '\'') {
                        while (i + 1 < ty.size() && std::isdigit(static_cast<unsigned char>(ty[i + 1]))) ++i;
                        out += 'A';
                    } else {
                        out += ty[i];
                    }
                }
                ty = out;
            }
            return "type " + d.name + " " + ty + ".";
        }
        std::string operator()(const InfixDecl& d) const
        {
            return print_fixity(d.infix.fixity) + " " + d.name + " " + std::to_string(d.infix.precedence) + ".";
        }
        std::string operator()(const DefLemma& d) const
        {
            return "def_lemma " + d.name.name() + " " + print_argument(d.inference, sig) + " " +
                   print_argument(d.proof, sig) + ".";
        }
        std::string operator()(const DefDefinition& d) const
        {
            return "def_definition " + print_argument(d.result_tp, sig) + " " + d.name.name() + " " +
                   print_argument(d.typeinf, sig) + " " + print_argument(d.body, sig) + ".";
        }
        std::string operator()(const Solve& s) const { return print(s.goal, sig) + "."; }
    };
    return std::visit(V{sig}, st);
}

} // namespace hocheck

#endif // HOCHECK_PARSE_HPP
