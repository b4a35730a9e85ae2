#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "recalc/cell_ref.hpp"
#include "recalc/errors.hpp"

namespace recalc {

// ---------------------------------------------------------------------------
// Tokens

enum class TokenKind {
    Number,
    Ref,
    Name,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Colon,
};

struct Token {
    TokenKind kind;
    std::string lexeme;
    std::size_t offset = 0;  // position in the input text
    double number = 0;       // valid for Number
    CellRef ref;             // valid for Ref
};

/// Splits formula text into tokens, dropping whitespace. Concatenating the
/// lexemes reproduces the input with whitespace stripped.
std::vector<Token> tokenize(std::string_view text);

// ---------------------------------------------------------------------------
// Abstract syntax tree

struct FormulaAst;
using AstPtr = std::shared_ptr<const FormulaAst>;

enum class BinaryOp { Add, Sub, Mul, Div, Pow };

enum class Builtin { Sum, Min, Max, Average };

std::string_view builtin_name(Builtin f);

struct NumberLiteral {
    double value;
};

struct Reference {
    CellRef ref;
};

struct Negate {
    AstPtr operand;
};

struct Binary {
    BinaryOp op;
    AstPtr left;
    AstPtr right;
};

/// "A1:B3" — allowed only as a direct argument of a function call,
/// which the argument variant below enforces by construction.
struct RangeArg {
    CellRef start;
    CellRef end;
};

using CallArg = std::variant<AstPtr, RangeArg>;

struct FunctionCall {
    Builtin name;
    std::vector<CallArg> args;  // nonempty
};

struct FormulaAst {
    std::variant<NumberLiteral, Reference, Negate, Binary, FunctionCall> node;
};

AstPtr make_number(double value);
AstPtr make_reference(CellRef ref);
AstPtr make_negate(AstPtr operand);
AstPtr make_binary(BinaryOp op, AstPtr left, AstPtr right);
AstPtr make_call(Builtin name, std::vector<CallArg> args);

// ---------------------------------------------------------------------------
// Operations

/// Parses a formula body (no leading '='). Precedence: ^ above unary minus
/// above * / above + -; ^ is right-associative, * / + - left-associative.
/// Throws SyntaxError with the character offset of the problem.
AstPtr parse_formula(std::string_view text);

/// Canonical text with minimal parentheses; parse_formula(render_formula(a))
/// is structurally equal to a for any parser-producible tree.
std::string render_formula(const FormulaAst& ast);

/// Every cell referenced by the tree in left-to-right textual order,
/// duplicates preserved. Ranges expand row-major. Constant formulas
/// yield the empty list.
std::vector<CellRef> extract_children(const FormulaAst& ast);

/// True iff the tree contains no Reference and no RangeArg.
bool is_constant(const FormulaAst& ast);

bool ast_equal(const FormulaAst& a, const FormulaAst& b);

/// All cells covered by the rectangle spanned by the two corners,
/// in row-major order.
std::vector<CellRef> expand_range(const CellRef& a, const CellRef& b);

/// Evaluates the tree, resolving references through `lookup` (which throws
/// UnboundRef for unbound cells). Division by zero and non-finite results
/// raise EvalError.
double eval_formula(const FormulaAst& ast,
                    const std::function<double(const CellRef&)>& lookup);

/// Cumulative number of parse_formula calls in this process. Lets tests
/// assert that plan-backed evaluation never parses formula text.
std::uint64_t parse_call_count();

}  // namespace recalc
