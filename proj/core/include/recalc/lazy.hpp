#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "recalc/plan.hpp"
#include "recalc/workbook.hpp"

namespace recalc {

struct LazyCounters {
    std::uint64_t evals = 0;        // evaluations of formulas with references
    std::uint64_t recomputes = 0;   // dirty cells recomputed (constants included)
    std::uint64_t discoveries = 0;  // cell states created
};

/// Deferred-recomputation registry. Cells are instantiated on demand; a
/// write marks the discovered ancestors dirty, and a read recomputes only
/// the dirty cells on its path. States record the direct parents discovered
/// so far, never more than the true parent set.
///
/// Backed either by a workbook (formulas interpreted from their trees) or by
/// a compiled plan (stack programs; formula text is never consulted).
///
/// Single-owner mutable value: one thread of control at a time.
class LazyRegistry {
public:
    explicit LazyRegistry(std::shared_ptr<const Workbook> workbook);
    explicit LazyRegistry(std::shared_ptr<const CompiledPlan> plan);

    /// Instantiates the cell and every descendant, registering each
    /// discovered parent in its children's ancestor sets. Idempotent.
    void get_cell(const CellRef& ref);

    /// Discovers the cell if needed, stores the value, marks the cell clean,
    /// and marks all transitively discovered ancestors dirty. Performs no
    /// evaluation. Throws NotConstant for non-constant targets.
    void set_value(const CellRef& ref, double value);

    /// Discovers the cell if needed; recomputes it (and any dirty
    /// descendants) only when dirty, then returns the cached value.
    double get_value(const CellRef& ref);

    bool is_discovered(const CellRef& ref) const;
    bool is_dirty(const CellRef& ref) const;  // false when undiscovered
    std::size_t discovered_count() const { return counters_.discoveries; }
    std::vector<CellRef> discovered() const;  // row-major
    std::vector<CellRef> discovered_ancestors(const CellRef& ref) const;

    const LazyCounters& counters() const { return counters_; }

    std::size_t cell_count() const { return states_.size(); }

private:
    enum : std::uint8_t {
        flag_discovered = 1,
        flag_dirty = 2,
        flag_on_stack = 4,
    };

    struct State {
        double val = 0;
        std::uint8_t flags = 0;
        std::vector<std::uint32_t> ancestors;  // discovered direct parents
    };

    // Plan instructions with Load targets resolved to state slots.
    struct SlotInstruction {
        Opcode op;
        double value;
        std::uint32_t slot;
        Builtin func;
        std::uint32_t argc;
    };

    std::size_t resolve(const CellRef& ref) const;
    CellRef ref_at(std::size_t idx) const;
    const std::vector<std::size_t>& children_of(std::size_t idx) const;
    void discover(std::size_t idx);
    double evaluate(std::size_t idx);

    std::shared_ptr<const Workbook> workbook_;
    std::shared_ptr<const CompiledPlan> plan_;
    std::vector<std::vector<SlotInstruction>> code_;  // plan backend only
    std::vector<State> states_;
    LazyCounters counters_;
};

}  // namespace recalc
