#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "recalc/cell_ref.hpp"
#include "recalc/errors.hpp"
#include "recalc/formula.hpp"

namespace recalc {

struct Cell {
    CellRef ref;
    std::string formula_text;            // canonical rendering of ast
    AstPtr ast;
    std::vector<CellRef> children;       // deduplicated, first-occurrence order
    std::vector<CellRef> occurrences;    // every reference in formula order, duplicates kept
    std::optional<double> value;         // cached; populated at load
};

/// A loaded, validated spreadsheet: cells in row-major order, forward and
/// reverse adjacency, a canonical child-first topological order, and cached
/// values. Immutable in normal use; set_constant returns an updated copy.
class Workbook {
public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    /// Parses the workbook XML, builds adjacency, rejects cycles, and
    /// evaluates every cell. Throws XmlError, SyntaxError, DanglingRef,
    /// DuplicateCell, CircularReference, or EvalError (undefined value).
    static Workbook load(std::string_view xml_text);

    const std::string& name() const { return name_; }
    std::size_t cell_count() const { return cells_.size(); }
    std::size_t edge_count() const;

    bool contains(const CellRef& ref) const { return find(ref) != npos; }
    std::size_t find(const CellRef& ref) const;           // npos when absent
    std::size_t index_of(const CellRef& ref) const;       // throws UnknownCell

    const Cell& cell_at(std::size_t idx) const { return cells_[idx]; }
    const Cell& cell(const CellRef& ref) const { return cells_[index_of(ref)]; }

    /// Cell references in row-major order (also the index order).
    const std::vector<CellRef>& order() const { return order_; }

    const std::vector<std::size_t>& children_of(std::size_t idx) const {
        return child_idx_[idx];
    }
    const std::vector<std::size_t>& parents_of(std::size_t idx) const {
        return parent_idx_[idx];
    }
    std::vector<CellRef> parents(const CellRef& ref) const;

    /// Child-first topological order over cell indices; deterministic
    /// (ties broken row-major).
    const std::vector<std::size_t>& topo_order() const { return topo_; }
    std::size_t topo_rank(std::size_t idx) const { return topo_rank_[idx]; }

    double value_at(std::size_t idx) const;                // throws EvalError if unset

    /// Replaces a constant cell's formula with the literal `value` and
    /// refreshes its cache. Structure is unchanged. Single-owner callers
    /// only; the pure set_constant below copies first.
    void set_constant_in_place(const CellRef& ref, double value);

    /// Overwrites one cached value. Engine use; single-owner callers only.
    void store_value_at(std::size_t idx, double value) { cells_[idx].value = value; }

    /// Recomputes every cached value from scratch in topological order.
    /// Returns the number of non-constant formulas evaluated.
    std::uint64_t recompute_all();

private:
    Workbook() = default;

    std::string name_;
    std::vector<Cell> cells_;                       // row-major
    std::vector<CellRef> order_;                    // refs of cells_, same order
    std::unordered_map<CellRef, std::size_t> index_;
    std::vector<std::vector<std::size_t>> child_idx_;
    std::vector<std::vector<std::size_t>> parent_idx_;  // sorted ascending
    std::vector<std::size_t> topo_;
    std::vector<std::size_t> topo_rank_;
};

Workbook load_workbook(std::string_view xml_text);

/// Topological order of all cells (children before parents), deterministic.
/// Throws CircularReference with a witness cycle.
std::vector<CellRef> validate_acyclic(const Workbook& wb);

/// Returns a copy of `wb` where `ref`'s formula is the literal `value`.
/// Throws UnknownCell or NotConstant.
Workbook set_constant(const Workbook& wb, const CellRef& ref, double value);

}  // namespace recalc
