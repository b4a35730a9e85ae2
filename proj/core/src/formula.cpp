#include "recalc/formula.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <utility>

#include "recalc/number_format.hpp"

namespace recalc {

namespace {

std::atomic<std::uint64_t> g_parse_calls{0};

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

}  // namespace

std::uint64_t parse_call_count() { return g_parse_calls.load(std::memory_order_relaxed); }

std::string_view builtin_name(Builtin f) {
    switch (f) {
        case Builtin::Sum: return "SUM";
        case Builtin::Min: return "MIN";
        case Builtin::Max: return "MAX";
        case Builtin::Average: return "AVERAGE";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Lexer

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (is_space(c)) {
            ++i;
            continue;
        }
        std::size_t start = i;
        if (is_digit(c)) {
            while (i < n && is_digit(text[i])) ++i;
            if (i < n && text[i] == '.') {
                ++i;
                if (i >= n || !is_digit(text[i]))
                    throw SyntaxError("expected digits after decimal point", i);
                while (i < n && is_digit(text[i])) ++i;
            }
            if (i < n && (text[i] == 'e' || text[i] == 'E')) {
                std::size_t mark = i;
                ++i;
                if (i < n && (text[i] == '+' || text[i] == '-')) ++i;
                if (i < n && is_digit(text[i])) {
                    while (i < n && is_digit(text[i])) ++i;
                } else {
                    i = mark;  // "1E" followed by non-digit: not an exponent
                }
            }
            std::string lex(text.substr(start, i - start));
            double v = 0;
            auto res = std::from_chars(lex.data(), lex.data() + lex.size(), v);
            if (res.ec != std::errc() || !std::isfinite(v))
                throw SyntaxError("number literal out of range", start);
            out.push_back({TokenKind::Number, std::move(lex), start, v, {}});
            continue;
        }
        if (is_upper(c)) {
            std::size_t letters = 0;
            while (i < n && is_upper(text[i])) {
                ++i;
                ++letters;
            }
            std::size_t digits_start = i;
            while (i < n && is_digit(text[i])) ++i;
            std::string lex(text.substr(start, i - start));
            if (i == digits_start) {
                out.push_back({TokenKind::Name, std::move(lex), start, 0, {}});
            } else {
                CellRef ref;
                try {
                    ref = CellRef::parse(lex);
                } catch (const MalformedRef&) {
                    throw SyntaxError("invalid cell reference \"" + lex + "\"", start);
                }
                out.push_back({TokenKind::Ref, std::move(lex), start, 0, ref});
            }
            continue;
        }
        TokenKind kind;
        switch (c) {
            case '+': kind = TokenKind::Plus; break;
            case '-': kind = TokenKind::Minus; break;
            case '*': kind = TokenKind::Star; break;
            case '/': kind = TokenKind::Slash; break;
            case '^': kind = TokenKind::Caret; break;
            case '(': kind = TokenKind::LParen; break;
            case ')': kind = TokenKind::RParen; break;
            case ',': kind = TokenKind::Comma; break;
            case ':': kind = TokenKind::Colon; break;
            default:
                throw SyntaxError(std::string("unexpected character '") + c + "'", i);
        }
        out.push_back({kind, std::string(1, c), i, 0, {}});
        ++i;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Node constructors

AstPtr make_number(double value) {
    return std::make_shared<FormulaAst>(FormulaAst{NumberLiteral{value}});
}
AstPtr make_reference(CellRef ref) {
    return std::make_shared<FormulaAst>(FormulaAst{Reference{ref}});
}
AstPtr make_negate(AstPtr operand) {
    return std::make_shared<FormulaAst>(FormulaAst{Negate{std::move(operand)}});
}
AstPtr make_binary(BinaryOp op, AstPtr left, AstPtr right) {
    return std::make_shared<FormulaAst>(FormulaAst{Binary{op, std::move(left), std::move(right)}});
}
AstPtr make_call(Builtin name, std::vector<CallArg> args) {
    return std::make_shared<FormulaAst>(FormulaAst{FunctionCall{name, std::move(args)}});
}

// ---------------------------------------------------------------------------
// Parser
//
//   expr   := term (("+"|"-") term)*
//   term   := factor (("*"|"/") factor)*
//   factor := ("-")* power
//   power  := atom ("^" factor)?
//   atom   := NUMBER | REF | NAME "(" arg ("," arg)* ")" | "(" expr ")"
//   arg    := expr | REF ":" REF

namespace {

constexpr int max_nesting = 512;

class Parser {
public:
    Parser(std::vector<Token> tokens, std::size_t input_size)
        : tokens_(std::move(tokens)), end_offset_(input_size) {}

    AstPtr parse() {
        if (tokens_.empty()) throw SyntaxError("empty formula", 0);
        AstPtr ast = expr();
        if (pos_ != tokens_.size())
            throw SyntaxError("unexpected token \"" + tokens_[pos_].lexeme + "\"",
                              tokens_[pos_].offset);
        return ast;
    }

private:
    const Token* peek() const { return pos_ < tokens_.size() ? &tokens_[pos_] : nullptr; }

    bool at(TokenKind k) const {
        const Token* t = peek();
        return t && t->kind == k;
    }

    const Token& take() {
        if (pos_ >= tokens_.size()) throw SyntaxError("unexpected end of formula", end_offset_);
        return tokens_[pos_++];
    }

    const Token& expect(TokenKind k, const char* what) {
        if (pos_ >= tokens_.size())
            throw SyntaxError(std::string("expected ") + what, end_offset_);
        if (tokens_[pos_].kind != k)
            throw SyntaxError(std::string("expected ") + what + ", found \"" +
                                  tokens_[pos_].lexeme + "\"",
                              tokens_[pos_].offset);
        return tokens_[pos_++];
    }

    struct DepthGuard {
        explicit DepthGuard(Parser& p) : p_(p) {
            if (++p_.depth_ > max_nesting)
                throw SyntaxError("formula nested too deeply", p_.peek() ? p_.peek()->offset : 0);
        }
        ~DepthGuard() { --p_.depth_; }
        Parser& p_;
    };

    AstPtr expr() {
        DepthGuard guard(*this);
        AstPtr left = term();
        while (at(TokenKind::Plus) || at(TokenKind::Minus)) {
            BinaryOp op = take().kind == TokenKind::Plus ? BinaryOp::Add : BinaryOp::Sub;
            left = make_binary(op, std::move(left), term());
        }
        return left;
    }

    AstPtr term() {
        AstPtr left = factor();
        while (at(TokenKind::Star) || at(TokenKind::Slash)) {
            BinaryOp op = take().kind == TokenKind::Star ? BinaryOp::Mul : BinaryOp::Div;
            left = make_binary(op, std::move(left), factor());
        }
        return left;
    }

    AstPtr factor() {
        DepthGuard guard(*this);
        int negs = 0;
        while (at(TokenKind::Minus)) {
            take();
            ++negs;
        }
        AstPtr node = power();
        for (int k = 0; k < negs; ++k) node = make_negate(std::move(node));
        return node;
    }

    AstPtr power() {
        AstPtr base = atom();
        if (at(TokenKind::Caret)) {
            take();
            return make_binary(BinaryOp::Pow, std::move(base), factor());
        }
        return base;
    }

    AstPtr atom() {
        const Token& t = take();
        switch (t.kind) {
            case TokenKind::Number:
                return make_number(t.number);
            case TokenKind::Ref:
                return make_reference(t.ref);
            case TokenKind::Name:
                return call(t);
            case TokenKind::LParen: {
                AstPtr inner = expr();
                expect(TokenKind::RParen, "')'");
                return inner;
            }
            default:
                throw SyntaxError("unexpected token \"" + t.lexeme + "\"", t.offset);
        }
    }

    AstPtr call(const Token& name_tok) {
        Builtin fn;
        if (name_tok.lexeme == "SUM")
            fn = Builtin::Sum;
        else if (name_tok.lexeme == "MIN")
            fn = Builtin::Min;
        else if (name_tok.lexeme == "MAX")
            fn = Builtin::Max;
        else if (name_tok.lexeme == "AVERAGE")
            fn = Builtin::Average;
        else
            throw SyntaxError("unknown function \"" + name_tok.lexeme + "\"", name_tok.offset);
        expect(TokenKind::LParen, "'('");
        std::vector<CallArg> args;
        args.push_back(arg());
        while (at(TokenKind::Comma)) {
            take();
            args.push_back(arg());
        }
        expect(TokenKind::RParen, "')'");
        return make_call(fn, std::move(args));
    }

    CallArg arg() {
        if (at(TokenKind::Ref) && pos_ + 1 < tokens_.size() &&
            tokens_[pos_ + 1].kind == TokenKind::Colon) {
            CellRef start = take().ref;
            take();  // ':'
            const Token& end_tok = expect(TokenKind::Ref, "cell reference after ':'");
            return RangeArg{start, end_tok.ref};
        }
        return CallArg{expr()};
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::size_t end_offset_;
    int depth_ = 0;
};

}  // namespace

AstPtr parse_formula(std::string_view text) {
    g_parse_calls.fetch_add(1, std::memory_order_relaxed);
    return Parser(tokenize(text), text.size()).parse();
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

// Effective precedence levels: + - (1), * / (2), unary minus (3), ^ (4),
// atoms (5). Parenthesization below restores exactly the parse structure.
int node_prec(const FormulaAst& ast) {
    return std::visit(
        [](const auto& node) -> int {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, Binary>) {
                switch (node.op) {
                    case BinaryOp::Add:
                    case BinaryOp::Sub: return 1;
                    case BinaryOp::Mul:
                    case BinaryOp::Div: return 2;
                    case BinaryOp::Pow: return 4;
                }
                return 1;
            } else if constexpr (std::is_same_v<T, Negate>) {
                return 3;
            } else {
                return 5;
            }
        },
        ast.node);
}

char op_char(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return '+';
        case BinaryOp::Sub: return '-';
        case BinaryOp::Mul: return '*';
        case BinaryOp::Div: return '/';
        case BinaryOp::Pow: return '^';
    }
    return '?';
}

void render_node(const FormulaAst& ast, std::string& out);

void render_child(const FormulaAst& child, bool parens, std::string& out) {
    if (parens) {
        out += '(';
        render_node(child, out);
        out += ')';
    } else {
        render_node(child, out);
    }
}

void render_node(const FormulaAst& ast, std::string& out) {
    std::visit(
        [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, NumberLiteral>) {
                append_number(out, node.value);
            } else if constexpr (std::is_same_v<T, Reference>) {
                out += node.ref.to_string();
            } else if constexpr (std::is_same_v<T, Negate>) {
                out += '-';
                render_child(*node.operand, node_prec(*node.operand) < 3, out);
            } else if constexpr (std::is_same_v<T, Binary>) {
                int p = node_prec(ast);
                if (node.op == BinaryOp::Pow) {
                    // Right-associative; the left side must be an atom.
                    render_child(*node.left, node_prec(*node.left) <= 4, out);
                    out += '^';
                    render_child(*node.right, node_prec(*node.right) <= 2, out);
                } else {
                    render_child(*node.left, node_prec(*node.left) < p, out);
                    out += op_char(node.op);
                    render_child(*node.right, node_prec(*node.right) <= p, out);
                }
            } else if constexpr (std::is_same_v<T, FunctionCall>) {
                out += builtin_name(node.name);
                out += '(';
                bool first = true;
                for (const CallArg& a : node.args) {
                    if (!first) out += ',';
                    first = false;
                    if (const auto* range = std::get_if<RangeArg>(&a)) {
                        out += range->start.to_string();
                        out += ':';
                        out += range->end.to_string();
                    } else {
                        render_node(*std::get<AstPtr>(a), out);
                    }
                }
                out += ')';
            }
        },
        ast.node);
}

}  // namespace

std::string render_formula(const FormulaAst& ast) {
    std::string out;
    render_node(ast, out);
    return out;
}

// ---------------------------------------------------------------------------
// Children, constancy, equality

std::vector<CellRef> expand_range(const CellRef& a, const CellRef& b) {
    std::uint32_t r0 = std::min(a.row(), b.row()), r1 = std::max(a.row(), b.row());
    std::uint32_t c0 = std::min(a.column(), b.column()), c1 = std::max(a.column(), b.column());
    std::vector<CellRef> out;
    out.reserve(static_cast<std::size_t>(r1 - r0 + 1) * (c1 - c0 + 1));
    for (std::uint32_t r = r0; r <= r1; ++r)
        for (std::uint32_t c = c0; c <= c1; ++c) out.emplace_back(c, r);
    return out;
}

namespace {

void collect_children(const FormulaAst& ast, std::vector<CellRef>& out) {
    std::visit(
        [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, Reference>) {
                out.push_back(node.ref);
            } else if constexpr (std::is_same_v<T, Negate>) {
                collect_children(*node.operand, out);
            } else if constexpr (std::is_same_v<T, Binary>) {
                collect_children(*node.left, out);
                collect_children(*node.right, out);
            } else if constexpr (std::is_same_v<T, FunctionCall>) {
                for (const CallArg& a : node.args) {
                    if (const auto* range = std::get_if<RangeArg>(&a)) {
                        for (const CellRef& r : expand_range(range->start, range->end))
                            out.push_back(r);
                    } else {
                        collect_children(*std::get<AstPtr>(a), out);
                    }
                }
            }
        },
        ast.node);
}

}  // namespace

std::vector<CellRef> extract_children(const FormulaAst& ast) {
    std::vector<CellRef> out;
    collect_children(ast, out);
    return out;
}

bool is_constant(const FormulaAst& ast) {
    return std::visit(
        [](const auto& node) -> bool {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, NumberLiteral>) {
                return true;
            } else if constexpr (std::is_same_v<T, Reference>) {
                return false;
            } else if constexpr (std::is_same_v<T, Negate>) {
                return is_constant(*node.operand);
            } else if constexpr (std::is_same_v<T, Binary>) {
                return is_constant(*node.left) && is_constant(*node.right);
            } else {
                for (const CallArg& a : node.args)
                    if (std::holds_alternative<RangeArg>(a) ||
                        !is_constant(*std::get<AstPtr>(a)))
                        return false;
                return true;
            }
        },
        ast.node);
}

bool ast_equal(const FormulaAst& a, const FormulaAst& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        [&](const auto& na) -> bool {
            using T = std::decay_t<decltype(na)>;
            const T& nb = std::get<T>(b.node);
            if constexpr (std::is_same_v<T, NumberLiteral>) {
                return na.value == nb.value;
            } else if constexpr (std::is_same_v<T, Reference>) {
                return na.ref == nb.ref;
            } else if constexpr (std::is_same_v<T, Negate>) {
                return ast_equal(*na.operand, *nb.operand);
            } else if constexpr (std::is_same_v<T, Binary>) {
                return na.op == nb.op && ast_equal(*na.left, *nb.left) &&
                       ast_equal(*na.right, *nb.right);
            } else {
                if (na.name != nb.name || na.args.size() != nb.args.size()) return false;
                for (std::size_t i = 0; i < na.args.size(); ++i) {
                    const CallArg& ca = na.args[i];
                    const CallArg& cb = nb.args[i];
                    if (ca.index() != cb.index()) return false;
                    if (const auto* ra = std::get_if<RangeArg>(&ca)) {
                        const auto& rb = std::get<RangeArg>(cb);
                        if (!(ra->start == rb.start && ra->end == rb.end)) return false;
                    } else if (!ast_equal(*std::get<AstPtr>(ca), *std::get<AstPtr>(cb))) {
                        return false;
                    }
                }
                return true;
            }
        },
        a.node);
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double checked(double v) {
    if (!std::isfinite(v)) throw EvalError("non-finite result");
    return v;
}

double apply_builtin(Builtin fn, const std::vector<double>& vals) {
    if (vals.empty()) throw EvalError("function requires at least one argument");
    double acc = vals[0];
    switch (fn) {
        case Builtin::Sum:
        case Builtin::Average:
            for (std::size_t i = 1; i < vals.size(); ++i) acc += vals[i];
            if (fn == Builtin::Average) acc /= static_cast<double>(vals.size());
            break;
        case Builtin::Min:
            for (std::size_t i = 1; i < vals.size(); ++i) acc = std::min(acc, vals[i]);
            break;
        case Builtin::Max:
            for (std::size_t i = 1; i < vals.size(); ++i) acc = std::max(acc, vals[i]);
            break;
    }
    return checked(acc);
}

}  // namespace

double eval_formula(const FormulaAst& ast,
                    const std::function<double(const CellRef&)>& lookup) {
    return std::visit(
        [&](const auto& node) -> double {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, NumberLiteral>) {
                return node.value;
            } else if constexpr (std::is_same_v<T, Reference>) {
                return lookup(node.ref);
            } else if constexpr (std::is_same_v<T, Negate>) {
                return -eval_formula(*node.operand, lookup);
            } else if constexpr (std::is_same_v<T, Binary>) {
                double l = eval_formula(*node.left, lookup);
                double r = eval_formula(*node.right, lookup);
                switch (node.op) {
                    case BinaryOp::Add: return checked(l + r);
                    case BinaryOp::Sub: return checked(l - r);
                    case BinaryOp::Mul: return checked(l * r);
                    case BinaryOp::Div:
                        if (r == 0.0) throw EvalError("division by zero");
                        return checked(l / r);
                    case BinaryOp::Pow: return checked(std::pow(l, r));
                }
                throw EvalError("bad operator");
            } else if constexpr (std::is_same_v<T, FunctionCall>) {
                std::vector<double> vals;
                vals.reserve(node.args.size());
                for (const CallArg& a : node.args) {
                    if (const auto* range = std::get_if<RangeArg>(&a)) {
                        for (const CellRef& r : expand_range(range->start, range->end))
                            vals.push_back(lookup(r));
                    } else {
                        vals.push_back(eval_formula(*std::get<AstPtr>(a), lookup));
                    }
                }
                return apply_builtin(node.name, vals);
            }
        },
        ast.node);
}

}  // namespace recalc
