#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "recalc/workbook.hpp"

namespace recalc {

enum class Opcode : std::uint8_t { Push, Load, Add, Sub, Mul, Div, Pow, Neg, Call };

struct Instruction {
    Opcode op;
    double value = 0;          // Push
    CellRef ref{};             // Load
    Builtin func = Builtin::Sum;  // Call
    std::uint32_t argc = 0;    // Call
};

/// Straight-line postfix program for one cell. Executing it on an empty
/// stack leaves exactly one value.
struct CompiledProgram {
    CellRef ref;
    std::vector<Instruction> instructions;
    std::vector<CellRef> children;  // deduplicated Load targets, first occurrence
};

/// Per-cell stack programs plus reverse adjacency; the offline artifact
/// that lets the engines run without touching formula text.
class CompiledPlan {
public:
    static constexpr int format_version = 1;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    /// Sorts programs row-major, indexes them, rebuilds reverse adjacency,
    /// and validates stack balance, Load targets, and acyclicity.
    static CompiledPlan from_programs(std::vector<CompiledProgram> programs);

    std::size_t cell_count() const { return programs_.size(); }
    std::size_t find(const CellRef& ref) const;
    std::size_t index_of(const CellRef& ref) const;  // throws UnknownCell
    const CompiledProgram& program_at(std::size_t idx) const { return programs_[idx]; }
    const CompiledProgram& program(const CellRef& ref) const {
        return programs_[index_of(ref)];
    }
    const std::vector<CellRef>& order() const { return order_; }
    const std::vector<std::size_t>& children_of(std::size_t idx) const {
        return child_idx_[idx];
    }
    const std::vector<std::size_t>& parents_of(std::size_t idx) const {
        return parent_idx_[idx];
    }
    std::vector<CellRef> parents(const CellRef& ref) const;
    int version() const { return format_version; }

private:
    CompiledPlan() = default;

    std::vector<CompiledProgram> programs_;  // row-major
    std::vector<CellRef> order_;
    std::unordered_map<CellRef, std::size_t> index_;
    std::vector<std::vector<std::size_t>> child_idx_;
    std::vector<std::vector<std::size_t>> parent_idx_;
};

/// Lowers one cell's formula to postfix code. Program evaluation over any
/// child-value environment matches AST evaluation over the same environment.
CompiledProgram compile_cell(const Cell& cell);

/// Compiles every cell of a validated workbook, row-major. Deterministic.
CompiledPlan compile_plan(const Workbook& wb);

/// Versioned text serialization, bit-exact:
///   GRIDPLAN 1
///   CELL <ref> <instruction-count>
///   <one instruction per line>
///   ...
///   END
std::string save_plan(const CompiledPlan& plan);

/// Parses bytes produced by save_plan. Throws PlanFormatError on bad magic,
/// version mismatch, malformed instructions, unbalanced stack effects,
/// unresolved Load targets, or cycles.
CompiledPlan load_plan(std::string_view bytes);

/// Stack-machine execution against an environment binding every child.
double exec_program(const CompiledProgram& prog,
                    const std::function<double(const CellRef&)>& env);
double exec_program(const CompiledProgram& prog,
                    const std::unordered_map<CellRef, double>& env);

}  // namespace recalc
