#pragma once

// Shared test utilities: independent oracles and seeded random generators.
// The evaluators here are deliberately written from the documented semantics
// rather than calling back into the code under test.

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "recalc/formula.hpp"
#include "recalc/workbook.hpp"

namespace testutil {

using namespace recalc;

// ---------------------------------------------------------------------------
// Independent recursive evaluator

inline double oracle_eval(const FormulaAst& ast, const std::map<CellRef, double>& env) {
    struct V {
        const std::map<CellRef, double>& env;
        static double ok(double v) {
            if (!std::isfinite(v)) throw std::domain_error("non-finite");
            return v;
        }
        double go(const FormulaAst& a) {
            if (const auto* n = std::get_if<NumberLiteral>(&a.node)) return n->value;
            if (const auto* r = std::get_if<Reference>(&a.node)) return env.at(r->ref);
            if (const auto* u = std::get_if<Negate>(&a.node)) return -go(*u->operand);
            if (const auto* b = std::get_if<Binary>(&a.node)) {
                double l = go(*b->left), r = go(*b->right);
                switch (b->op) {
                    case BinaryOp::Add: return ok(l + r);
                    case BinaryOp::Sub: return ok(l - r);
                    case BinaryOp::Mul: return ok(l * r);
                    case BinaryOp::Div:
                        if (r == 0.0) throw std::domain_error("div0");
                        return ok(l / r);
                    case BinaryOp::Pow: return ok(std::pow(l, r));
                }
            }
            const auto& call = std::get<FunctionCall>(a.node);
            std::vector<double> vals;
            for (const CallArg& arg : call.args) {
                if (const auto* range = std::get_if<RangeArg>(&arg)) {
                    for (std::uint32_t row = std::min(range->start.row(), range->end.row());
                         row <= std::max(range->start.row(), range->end.row()); ++row)
                        for (std::uint32_t col =
                                 std::min(range->start.column(), range->end.column());
                             col <= std::max(range->start.column(), range->end.column());
                             ++col)
                            vals.push_back(env.at(CellRef(col, row)));
                } else {
                    vals.push_back(go(*std::get<AstPtr>(arg)));
                }
            }
            double acc = vals.at(0);
            for (std::size_t i = 1; i < vals.size(); ++i) {
                switch (call.name) {
                    case Builtin::Sum:
                    case Builtin::Average: acc += vals[i]; break;
                    case Builtin::Min: acc = std::min(acc, vals[i]); break;
                    case Builtin::Max: acc = std::max(acc, vals[i]); break;
                }
            }
            if (call.name == Builtin::Average) acc /= double(vals.size());
            return ok(acc);
        }
    };
    return V{env}.go(ast);
}

// ---------------------------------------------------------------------------
// Shunting-yard evaluator (precedence oracle; arithmetic subset, no calls)

inline double shunting_yard_eval(const std::string& text,
                                 const std::map<CellRef, double>& env) {
    struct Op {
        char c;
        bool unary;
    };
    std::vector<double> out;
    std::vector<Op> ops;
    auto prec = [](const Op& o) { return o.unary ? 3 : o.c == '^' ? 4
                                      : (o.c == '*' || o.c == '/') ? 2 : 1; };
    auto ok = [](double v) {
        if (!std::isfinite(v)) throw std::domain_error("non-finite");
        return v;
    };
    auto apply = [&](const Op& o) {
        if (o.unary) {
            out.back() = -out.back();
            return;
        }
        double r = out.back();
        out.pop_back();
        double l = out.back();
        out.pop_back();
        switch (o.c) {
            case '+': out.push_back(ok(l + r)); break;
            case '-': out.push_back(ok(l - r)); break;
            case '*': out.push_back(ok(l * r)); break;
            case '/':
                if (r == 0.0) throw std::domain_error("div0");
                out.push_back(ok(l / r));
                break;
            case '^': out.push_back(ok(std::pow(l, r))); break;
        }
    };

    bool expect_operand = true;
    for (const Token& t : tokenize(text)) {
        switch (t.kind) {
            case TokenKind::Number:
                out.push_back(t.number);
                expect_operand = false;
                break;
            case TokenKind::Ref:
                out.push_back(env.at(t.ref));
                expect_operand = false;
                break;
            case TokenKind::LParen:
                ops.push_back({'(', false});
                expect_operand = true;
                break;
            case TokenKind::RParen:
                while (!ops.empty() && ops.back().c != '(') {
                    apply(ops.back());
                    ops.pop_back();
                }
                ops.pop_back();  // '('
                expect_operand = false;
                break;
            case TokenKind::Minus:
                if (expect_operand) {
                    ops.push_back({'-', true});  // prefix; binds rightward, never pops
                    break;
                }
                [[fallthrough]];
            case TokenKind::Plus:
            case TokenKind::Star:
            case TokenKind::Slash:
            case TokenKind::Caret: {
                Op cur{t.lexeme[0], false};
                bool right_assoc = cur.c == '^';
                while (!ops.empty() && ops.back().c != '(' &&
                       (prec(ops.back()) > prec(cur) ||
                        (prec(ops.back()) == prec(cur) && !right_assoc))) {
                    apply(ops.back());
                    ops.pop_back();
                }
                ops.push_back(cur);
                expect_operand = true;
                break;
            }
            default:
                throw std::domain_error("token outside the oracle subset");
        }
    }
    while (!ops.empty()) {
        apply(ops.back());
        ops.pop_back();
    }
    return out.back();
}

// ---------------------------------------------------------------------------
// Random parser-reachable ASTs

inline AstPtr random_ast(std::mt19937_64& rng, int depth, bool allow_refs) {
    auto ref = [&] {
        return CellRef(1 + rng() % 6, 1 + rng() % 6);
    };
    std::uint64_t pick = rng() % 100;
    if (depth <= 0 || pick < 25) {
        if (allow_refs && pick % 2 == 0) return make_reference(ref());
        switch (rng() % 4) {
            case 0: return make_number(double(rng() % 10));
            case 1: return make_number(double(rng() % 1000));
            case 2: return make_number(double(rng() % 100) / 4.0);
            default: return make_number(double(rng() % 50) * 0.1);
        }
    }
    if (pick < 35) return make_negate(random_ast(rng, depth - 1, allow_refs));
    if (pick < 80) {
        auto op = static_cast<BinaryOp>(rng() % 5);
        return make_binary(op, random_ast(rng, depth - 1, allow_refs),
                           random_ast(rng, depth - 1, allow_refs));
    }
    auto fn = static_cast<Builtin>(rng() % 4);
    std::vector<CallArg> args;
    std::size_t argc = 1 + rng() % 3;
    for (std::size_t i = 0; i < argc; ++i) {
        if (allow_refs && rng() % 4 == 0) {
            CellRef a = ref(), b = ref();
            args.push_back(RangeArg{a, b});
        } else {
            args.push_back(CallArg{random_ast(rng, depth - 1, allow_refs)});
        }
    }
    return make_call(fn, std::move(args));
}

// Random arithmetic expression text (no refs, no calls) for the
// precedence property.
inline std::string random_expr_text(std::mt19937_64& rng, int depth) {
    auto space = [&]() -> std::string { return rng() % 4 == 0 ? " " : ""; };
    if (depth <= 0 || rng() % 100 < 30) return std::to_string(1 + rng() % 9);
    switch (rng() % 7) {
        case 0: return "-" + space() + random_expr_text(rng, depth - 1);
        case 1: return "(" + space() + random_expr_text(rng, depth) + space() + ")";
        case 2:
            return random_expr_text(rng, depth - 1) + space() + "^" + space() +
                   std::to_string(1 + rng() % 3);
        default: {
            const char* ops = "+-*/";
            char op = ops[rng() % 4];
            return random_expr_text(rng, depth - 1) + space() + op + space() +
                   random_expr_text(rng, depth - 1);
        }
    }
}

// ---------------------------------------------------------------------------
// Random admissible workbooks (integer-valued unless with_division)

struct RandomWorkbook {
    std::string xml;
    std::vector<CellRef> refs;       // index order = row-major
    std::vector<CellRef> constants;  // cells holding constant formulas
};

inline RandomWorkbook random_workbook_xml(std::mt19937_64& rng, std::size_t n,
                                          bool with_division = false) {
    RandomWorkbook out;
    std::uint32_t width = 1 + rng() % 8;
    auto ref_of = [&](std::size_t i) {
        return CellRef(std::uint32_t(i % width) + 1, std::uint32_t(i / width) + 1);
    };
    out.xml = "<workbook name=\"random\">\n";
    for (std::size_t i = 0; i < n; ++i) {
        CellRef ref = ref_of(i);
        out.refs.push_back(ref);
        std::string formula;
        if (i == 0 || rng() % 100 < 30) {
            formula = std::to_string(rng() % 10);
            out.constants.push_back(ref);
        } else {
            auto pick = [&] { return ref_of(rng() % i).to_string(); };
            switch (rng() % 8) {
                case 0: formula = pick() + "+" + pick(); break;
                case 1: formula = pick() + "-" + pick(); break;
                case 2: formula = pick() + "+" + std::to_string(rng() % 10); break;
                case 3: formula = std::to_string(2 + rng() % 2) + "*" + pick(); break;
                case 4: formula = "MIN(" + pick() + "," + pick() + ")"; break;
                case 5: formula = "MAX(" + pick() + "," + pick() + ")+" + pick(); break;
                case 6: {
                    std::size_t full_rows = i / width;
                    if (full_rows == 0) {
                        formula = pick() + "+" + pick();
                        break;
                    }
                    std::uint32_t row = 1 + std::uint32_t(rng() % full_rows);
                    std::uint32_t c0 = 1 + std::uint32_t(rng() % width);
                    std::uint32_t c1 = 1 + std::uint32_t(rng() % width);
                    formula = "SUM(" + CellRef(std::min(c0, c1), row).to_string() + ":" +
                              CellRef(std::max(c0, c1), row).to_string() + ")";
                    break;
                }
                default:
                    if (with_division)
                        formula = pick() + "/" + std::to_string(2 + rng() % 3);
                    else
                        formula = pick() + "+" + pick();
                    break;
            }
        }
        out.xml += "  <cell ref=\"" + ref.to_string() + "\" formula=\"" + formula + "\"/>\n";
    }
    out.xml += "</workbook>\n";
    return out;
}

// ---------------------------------------------------------------------------
// Brute-force oracles

// Children recovered by re-parsing formula text; does not touch the
// workbook's adjacency indexes.
inline std::map<CellRef, std::vector<CellRef>> scan_children(const Workbook& wb) {
    std::map<CellRef, std::vector<CellRef>> out;
    for (std::size_t i = 0; i < wb.cell_count(); ++i) {
        const Cell& cell = wb.cell_at(i);
        out[cell.ref] = extract_children(*parse_formula(cell.formula_text));
    }
    return out;
}

// Transitive closure over the transposed edge relation, by worklist.
inline std::set<CellRef> brute_dependents(const Workbook& wb,
                                          const std::vector<CellRef>& origin) {
    auto children = scan_children(wb);
    std::map<CellRef, std::set<CellRef>> parents;
    for (const auto& [parent, kids] : children)
        for (const CellRef& child : kids) parents[child].insert(parent);

    std::set<CellRef> seen;
    std::vector<CellRef> work(origin.begin(), origin.end());
    while (!work.empty()) {
        CellRef cur = work.back();
        work.pop_back();
        for (const CellRef& p : parents[cur])
            if (seen.insert(p).second) work.push_back(p);
    }
    for (const CellRef& o : origin) seen.erase(o);
    return seen;
}

// Full recompute by memoized recursion over the formulas.
inline std::map<CellRef, double> oracle_values(const Workbook& wb) {
    std::map<CellRef, double> memo;
    struct Rec {
        const Workbook& wb;
        std::map<CellRef, double>& memo;
        double value(const CellRef& ref) {
            auto it = memo.find(ref);
            if (it != memo.end()) return it->second;
            const Cell& cell = wb.cell(ref);
            std::map<CellRef, double> env;
            for (const CellRef& c : cell.children) env[c] = value(c);
            double v = oracle_eval(*cell.ast, env);
            memo[ref] = v;
            return v;
        }
    } rec{wb, memo};
    for (std::size_t i = 0; i < wb.cell_count(); ++i) rec.value(wb.cell_at(i).ref);
    return memo;
}

inline bool approx_equal(double a, double b, double rel = 1e-9) {
    if (a == b) return true;
    double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) <= rel * scale;
}

}  // namespace testutil
