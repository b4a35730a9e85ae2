#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "recalc/depgraph.hpp"
#include "recalc/workbook.hpp"

namespace recalc {

/// ";"-delimited "REF=FORMULA;" assignments in left-to-right post-order
/// emission order. Evaluating the segments sequentially yields the root
/// cell's value as the final assignment.
struct ParserString {
    std::string text;
};

/// Old/new value per recomputed cell (origin included), plus the number of
/// member recomputations performed.
struct RecomputeReport {
    std::map<CellRef, std::pair<double, double>> changed_cells;
    std::uint64_t recompute_count = 0;
};

/// Walks the root's call tree left-to-right post-order and emits one
/// assignment per visited node: cells in `dep` or `changed` carry their
/// formula text, everything else carries its current cached value as a
/// constant. Redundant re-emissions of the same cell are kept. When
/// `history` is non-null it receives the full string prefix after each
/// append.
ParserString build_parser_string(const Workbook& wb, const CellRef& root,
                                 const DependencySet& dep,
                                 std::span<const CellRef> changed,
                                 std::vector<std::string>* history = nullptr);

/// Executes assignments left to right in a fresh environment; later
/// assignments overwrite earlier ones. Throws UnboundRef when a segment
/// reads a ref no earlier segment assigned, EvalError on arithmetic
/// failures, SyntaxError on malformed text.
std::map<CellRef, double> eval_parser_string(std::string_view parser_string);

/// Sets a constant cell and immediately recomputes every member of its
/// dependency set via per-member parser strings, in topological order.
/// Single-owner callers; on EvalError the workbook may hold a partial
/// update (the pure variant below does not).
RecomputeReport set_and_recompute_in_place(Workbook& wb, const CellRef& ref, double value);

/// Pure variant: returns the updated workbook and the report.
std::pair<Workbook, RecomputeReport> set_and_recompute(const Workbook& wb, const CellRef& ref,
                                                       double value);

}  // namespace recalc
