#pragma once

#include <span>
#include <vector>

#include "recalc/workbook.hpp"

namespace recalc {

/// Breadth-first frontier history. rounds[0] is the changed set; each
/// following round holds the direct dependents of the previous one; the
/// final round is empty. Every round is sorted row-major.
struct FrontierTrace {
    std::vector<std::vector<CellRef>> rounds;
};

/// The set of cells whose values may change when the origin cells change.
/// The origin itself is excluded. Both vectors are sorted row-major.
struct DependencySet {
    std::vector<CellRef> members;
    std::vector<CellRef> origin;

    bool contains(const CellRef& ref) const;
};

struct CallTreeNode {
    CellRef ref;
    std::vector<CallTreeNode> children;
};

/// Rooted tree obtained by expanding a cell's formula references
/// left-to-right, one node per occurrence.
struct CallTree {
    CallTreeNode root;
};

/// Union of parents[x] over x in `cells`, sorted row-major. Throws
/// UnknownCell for refs absent from the workbook.
std::vector<CellRef> direct_dependents(const Workbook& wb, std::span<const CellRef> cells);

/// Iterates the direct-dependents frontier from the changed set until it
/// empties, then returns the deduplicated union of all later rounds with
/// the origin removed. The frontier count is checked against the cell-count
/// bound at run time.
std::pair<DependencySet, FrontierTrace> dependency_set(const Workbook& wb,
                                                       std::span<const CellRef> changed);

/// Expands `root` recursively; refs listed in `cut` become leaves and keep
/// their current values. Duplicate references in one formula produce
/// duplicate nodes.
CallTree build_call_tree(const Workbook& wb, const CellRef& root,
                         std::span<const CellRef> cut);

}  // namespace recalc
