#include "recalc/plan.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "recalc/number_format.hpp"

namespace recalc {

// ---------------------------------------------------------------------------
// Compilation

namespace {

void lower(const FormulaAst& ast, std::vector<Instruction>& out) {
    std::visit(
        [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, NumberLiteral>) {
                out.push_back({.op = Opcode::Push, .value = node.value});
            } else if constexpr (std::is_same_v<T, Reference>) {
                out.push_back({.op = Opcode::Load, .ref = node.ref});
            } else if constexpr (std::is_same_v<T, Negate>) {
                lower(*node.operand, out);
                out.push_back({.op = Opcode::Neg});
            } else if constexpr (std::is_same_v<T, Binary>) {
                lower(*node.left, out);
                lower(*node.right, out);
                switch (node.op) {
                    case BinaryOp::Add: out.push_back({.op = Opcode::Add}); break;
                    case BinaryOp::Sub: out.push_back({.op = Opcode::Sub}); break;
                    case BinaryOp::Mul: out.push_back({.op = Opcode::Mul}); break;
                    case BinaryOp::Div: out.push_back({.op = Opcode::Div}); break;
                    case BinaryOp::Pow: out.push_back({.op = Opcode::Pow}); break;
                }
            } else if constexpr (std::is_same_v<T, FunctionCall>) {
                std::uint32_t argc = 0;
                for (const CallArg& a : node.args) {
                    if (const auto* range = std::get_if<RangeArg>(&a)) {
                        for (const CellRef& r : expand_range(range->start, range->end)) {
                            out.push_back({.op = Opcode::Load, .ref = r});
                            ++argc;
                        }
                    } else {
                        lower(*std::get<AstPtr>(a), out);
                        ++argc;
                    }
                }
                out.push_back({.op = Opcode::Call, .func = node.name, .argc = argc});
            }
        },
        ast.node);
}

int stack_delta(const Instruction& in) {
    switch (in.op) {
        case Opcode::Push:
        case Opcode::Load: return 1;
        case Opcode::Neg: return 0;
        case Opcode::Call: return 1 - static_cast<int>(in.argc);
        default: return -1;  // binary operators
    }
}

int stack_need(const Instruction& in) {
    switch (in.op) {
        case Opcode::Push:
        case Opcode::Load: return 0;
        case Opcode::Neg: return 1;
        case Opcode::Call: return static_cast<int>(in.argc);
        default: return 2;
    }
}

void check_balanced(const CompiledProgram& prog) {
    long depth = 0;
    for (const Instruction& in : prog.instructions) {
        if (in.op == Opcode::Call && in.argc == 0)
            throw PlanFormatError("program for " + prog.ref.to_string() +
                                  ": CALL with zero arguments");
        if (depth < stack_need(in))
            throw PlanFormatError("program for " + prog.ref.to_string() +
                                  ": stack underflow");
        depth += stack_delta(in);
    }
    if (depth != 1)
        throw PlanFormatError("program for " + prog.ref.to_string() +
                              ": unbalanced stack effect");
}

std::vector<CellRef> load_targets(const std::vector<Instruction>& instructions) {
    std::vector<CellRef> out;
    for (const Instruction& in : instructions)
        if (in.op == Opcode::Load &&
            std::find(out.begin(), out.end(), in.ref) == out.end())
            out.push_back(in.ref);
    return out;
}

}  // namespace

CompiledProgram compile_cell(const Cell& cell) {
    CompiledProgram prog;
    prog.ref = cell.ref;
    lower(*cell.ast, prog.instructions);
    prog.children = load_targets(prog.instructions);
    return prog;
}

CompiledPlan compile_plan(const Workbook& wb) {
    std::vector<CompiledProgram> programs;
    programs.reserve(wb.cell_count());
    for (std::size_t i = 0; i < wb.cell_count(); ++i)
        programs.push_back(compile_cell(wb.cell_at(i)));
    return CompiledPlan::from_programs(std::move(programs));
}

CompiledPlan CompiledPlan::from_programs(std::vector<CompiledProgram> programs) {
    CompiledPlan plan;
    plan.programs_ = std::move(programs);
    std::sort(plan.programs_.begin(), plan.programs_.end(),
              [](const CompiledProgram& a, const CompiledProgram& b) { return a.ref < b.ref; });

    const std::size_t n = plan.programs_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const CompiledProgram& p = plan.programs_[i];
        if (i > 0 && p.ref == plan.programs_[i - 1].ref)
            throw PlanFormatError("duplicate cell " + p.ref.to_string());
        check_balanced(p);
        plan.order_.push_back(p.ref);
        plan.index_.emplace(p.ref, i);
    }

    plan.child_idx_.resize(n);
    plan.parent_idx_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (const CellRef& c : plan.programs_[i].children) {
            std::size_t j = plan.find(c);
            if (j == npos)
                throw PlanFormatError("program for " + plan.programs_[i].ref.to_string() +
                                      " loads missing cell " + c.to_string());
            plan.child_idx_[i].push_back(j);
            plan.parent_idx_[j].push_back(i);
        }
    }
    for (auto& p : plan.parent_idx_) std::sort(p.begin(), p.end());

    // Cycle check (Kahn).
    std::vector<std::size_t> pending(n);
    std::queue<std::size_t> ready;
    std::size_t placed = 0;
    for (std::size_t i = 0; i < n; ++i) {
        pending[i] = plan.child_idx_[i].size();
        if (pending[i] == 0) ready.push(i);
    }
    while (!ready.empty()) {
        std::size_t i = ready.front();
        ready.pop();
        ++placed;
        for (std::size_t p : plan.parent_idx_[i])
            if (--pending[p] == 0) ready.push(p);
    }
    if (placed != n) throw PlanFormatError("plan contains a dependency cycle");
    return plan;
}

std::size_t CompiledPlan::find(const CellRef& ref) const {
    auto it = index_.find(ref);
    return it == index_.end() ? npos : it->second;
}

std::size_t CompiledPlan::index_of(const CellRef& ref) const {
    std::size_t i = find(ref);
    if (i == npos) throw UnknownCell(ref);
    return i;
}

std::vector<CellRef> CompiledPlan::parents(const CellRef& ref) const {
    std::vector<CellRef> out;
    for (std::size_t p : parent_idx_[index_of(ref)]) out.push_back(programs_[p].ref);
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

std::string save_plan(const CompiledPlan& plan) {
    std::string out = "GRIDPLAN 1\n";
    for (std::size_t i = 0; i < plan.cell_count(); ++i) {
        const CompiledProgram& p = plan.program_at(i);
        out += "CELL " + p.ref.to_string() + ' ' + std::to_string(p.instructions.size()) +
               '\n';
        for (const Instruction& in : p.instructions) {
            switch (in.op) {
                case Opcode::Push:
                    out += "PUSH ";
                    append_number(out, in.value);
                    break;
                case Opcode::Load: out += "LOAD " + in.ref.to_string(); break;
                case Opcode::Add: out += "ADD"; break;
                case Opcode::Sub: out += "SUB"; break;
                case Opcode::Mul: out += "MUL"; break;
                case Opcode::Div: out += "DIV"; break;
                case Opcode::Pow: out += "POW"; break;
                case Opcode::Neg: out += "NEG"; break;
                case Opcode::Call:
                    out += "CALL ";
                    out += builtin_name(in.func);
                    out += ' ' + std::to_string(in.argc);
                    break;
            }
            out += '\n';
        }
    }
    out += "END\n";
    return out;
}

namespace {

class PlanReader {
public:
    explicit PlanReader(std::string_view text) : text_(text) {}

    CompiledPlan read() {
        std::string_view magic = next_line("plan header");
        if (magic.substr(0, 9) != "GRIDPLAN ")
            throw PlanFormatError("bad magic; expected \"GRIDPLAN\"");
        std::string_view version = magic.substr(9);
        if (version != "1")
            throw PlanFormatError("unsupported plan version \"" + std::string(version) + "\"");

        std::vector<CompiledProgram> programs;
        CellRef prev;
        bool have_prev = false;
        while (true) {
            std::string_view line = next_line("CELL or END");
            if (line == "END") break;
            if (line.substr(0, 5) != "CELL ")
                throw PlanFormatError("line " + std::to_string(line_no_) +
                                      ": expected CELL or END");
            CompiledProgram prog = read_cell(line.substr(5));
            if (have_prev && !(prev < prog.ref))
                throw PlanFormatError("cell " + prog.ref.to_string() +
                                      " out of row-major order");
            prev = prog.ref;
            have_prev = true;
            programs.push_back(std::move(prog));
        }
        if (pos_ != text_.size())
            throw PlanFormatError("content after END");
        return CompiledPlan::from_programs(std::move(programs));
    }

private:
    std::string_view next_line(const char* what) {
        if (pos_ >= text_.size())
            throw PlanFormatError(std::string("unexpected end of plan; expected ") + what);
        std::size_t nl = text_.find('\n', pos_);
        std::string_view line;
        if (nl == std::string_view::npos) {
            line = text_.substr(pos_);
            pos_ = text_.size();
        } else {
            line = text_.substr(pos_, nl - pos_);
            pos_ = nl + 1;
        }
        ++line_no_;
        return line;
    }

    [[noreturn]] void fail(const std::string& message) const {
        throw PlanFormatError("line " + std::to_string(line_no_) + ": " + message);
    }

    CellRef parse_ref(std::string_view text) const {
        try {
            return CellRef::parse(text);
        } catch (const MalformedRef&) {
            fail("bad cell reference \"" + std::string(text) + "\"");
        }
    }

    std::uint64_t parse_count_field(std::string_view text) const {
        if (text.empty()) fail("missing count");
        std::uint64_t v = 0;
        for (char c : text) {
            if (c < '0' || c > '9') fail("bad count \"" + std::string(text) + "\"");
            v = v * 10 + static_cast<std::uint64_t>(c - '0');
            if (v > 1'000'000'000ULL) fail("count out of range");
        }
        return v;
    }

    CompiledProgram read_cell(std::string_view rest) {
        std::size_t space = rest.find(' ');
        if (space == std::string_view::npos) fail("expected \"CELL <ref> <count>\"");
        CompiledProgram prog;
        prog.ref = parse_ref(rest.substr(0, space));
        std::uint64_t count = parse_count_field(rest.substr(space + 1));
        if (count == 0) fail("cell " + prog.ref.to_string() + " has no instructions");
        prog.instructions.reserve(count);
        for (std::uint64_t k = 0; k < count; ++k)
            prog.instructions.push_back(read_instruction());
        prog.children = load_targets(prog.instructions);
        return prog;
    }

    Instruction read_instruction() {
        std::string_view line = next_line("instruction");
        if (line == "ADD") return {.op = Opcode::Add};
        if (line == "SUB") return {.op = Opcode::Sub};
        if (line == "MUL") return {.op = Opcode::Mul};
        if (line == "DIV") return {.op = Opcode::Div};
        if (line == "POW") return {.op = Opcode::Pow};
        if (line == "NEG") return {.op = Opcode::Neg};
        if (line.substr(0, 5) == "PUSH ") {
            double v = 0;
            if (!parse_number(line.substr(5), v)) fail("bad PUSH operand");
            return {.op = Opcode::Push, .value = v};
        }
        if (line.substr(0, 5) == "LOAD ")
            return {.op = Opcode::Load, .ref = parse_ref(line.substr(5))};
        if (line.substr(0, 5) == "CALL ") {
            std::string_view rest = line.substr(5);
            std::size_t space = rest.find(' ');
            if (space == std::string_view::npos) fail("expected \"CALL <NAME> <argc>\"");
            std::string_view name = rest.substr(0, space);
            Builtin fn;
            if (name == "SUM")
                fn = Builtin::Sum;
            else if (name == "MIN")
                fn = Builtin::Min;
            else if (name == "MAX")
                fn = Builtin::Max;
            else if (name == "AVERAGE")
                fn = Builtin::Average;
            else
                fail("unknown function \"" + std::string(name) + "\"");
            std::uint64_t argc = parse_count_field(rest.substr(space + 1));
            if (argc == 0) fail("CALL with zero arguments");
            return {.op = Opcode::Call, .func = fn, .argc = static_cast<std::uint32_t>(argc)};
        }
        fail("unrecognized instruction \"" + std::string(line) + "\"");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_no_ = 0;
};

}  // namespace

CompiledPlan load_plan(std::string_view bytes) { return PlanReader(bytes).read(); }

// ---------------------------------------------------------------------------
// Execution

double exec_program(const CompiledProgram& prog,
                    const std::function<double(const CellRef&)>& env) {
    std::vector<double> stack;
    stack.reserve(8);
    auto pop = [&]() -> double {
        if (stack.empty()) throw EvalError("stack underflow");
        double v = stack.back();
        stack.pop_back();
        return v;
    };
    auto checked = [](double v) -> double {
        if (!std::isfinite(v)) throw EvalError("non-finite result");
        return v;
    };
    for (const Instruction& in : prog.instructions) {
        switch (in.op) {
            case Opcode::Push: stack.push_back(in.value); break;
            case Opcode::Load: stack.push_back(env(in.ref)); break;
            case Opcode::Neg: {
                double v = pop();
                stack.push_back(-v);
                break;
            }
            case Opcode::Add: {
                double r = pop(), l = pop();
                stack.push_back(checked(l + r));
                break;
            }
            case Opcode::Sub: {
                double r = pop(), l = pop();
                stack.push_back(checked(l - r));
                break;
            }
            case Opcode::Mul: {
                double r = pop(), l = pop();
                stack.push_back(checked(l * r));
                break;
            }
            case Opcode::Div: {
                double r = pop(), l = pop();
                if (r == 0.0) throw EvalError("division by zero");
                stack.push_back(checked(l / r));
                break;
            }
            case Opcode::Pow: {
                double r = pop(), l = pop();
                stack.push_back(checked(std::pow(l, r)));
                break;
            }
            case Opcode::Call: {
                if (in.argc == 0 || stack.size() < in.argc)
                    throw EvalError("CALL arity violation");
                std::size_t base = stack.size() - in.argc;
                double acc = stack[base];
                switch (in.func) {
                    case Builtin::Sum:
                    case Builtin::Average:
                        for (std::size_t k = base + 1; k < stack.size(); ++k)
                            acc += stack[k];
                        if (in.func == Builtin::Average)
                            acc /= static_cast<double>(in.argc);
                        break;
                    case Builtin::Min:
                        for (std::size_t k = base + 1; k < stack.size(); ++k)
                            acc = std::min(acc, stack[k]);
                        break;
                    case Builtin::Max:
                        for (std::size_t k = base + 1; k < stack.size(); ++k)
                            acc = std::max(acc, stack[k]);
                        break;
                }
                stack.resize(base);
                stack.push_back(checked(acc));
                break;
            }
        }
    }
    if (stack.size() != 1) throw EvalError("program left " +
                                           std::to_string(stack.size()) +
                                           " values on the stack");
    return stack.back();
}

double exec_program(const CompiledProgram& prog,
                    const std::unordered_map<CellRef, double>& env) {
    return exec_program(prog, [&](const CellRef& r) -> double {
        auto it = env.find(r);
        if (it == env.end()) throw UnboundRef(r);
        return it->second;
    });
}

}  // namespace recalc
