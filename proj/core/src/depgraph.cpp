#include "recalc/depgraph.hpp"

#include <algorithm>
#include <unordered_set>

namespace recalc {

bool DependencySet::contains(const CellRef& ref) const {
    return std::binary_search(members.begin(), members.end(), ref);
}

namespace {

// Sorted unique index set for the given refs; validates existence.
std::vector<std::size_t> to_indices(const Workbook& wb, std::span<const CellRef> refs) {
    std::vector<std::size_t> out;
    out.reserve(refs.size());
    for (const CellRef& r : refs) out.push_back(wb.index_of(r));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<CellRef> to_refs(const Workbook& wb, const std::vector<std::size_t>& idx) {
    std::vector<CellRef> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(wb.cell_at(i).ref);
    return out;
}

}  // namespace

std::vector<CellRef> direct_dependents(const Workbook& wb, std::span<const CellRef> cells) {
    std::vector<std::size_t> frontier = to_indices(wb, cells);
    std::vector<std::size_t> next;
    for (std::size_t i : frontier)
        for (std::size_t p : wb.parents_of(i)) next.push_back(p);
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    return to_refs(wb, next);
}

std::pair<DependencySet, FrontierTrace> dependency_set(const Workbook& wb,
                                                       std::span<const CellRef> changed) {
    std::vector<std::size_t> origin = to_indices(wb, changed);

    FrontierTrace trace;
    trace.rounds.push_back(to_refs(wb, origin));

    std::vector<char> in_members(wb.cell_count(), 0);
    std::vector<std::size_t> frontier = origin;
    std::size_t rounds_done = 0;
    while (!frontier.empty()) {
        if (++rounds_done > wb.cell_count())
            throw Error("frontier iteration exceeded the cell-count bound; "
                        "dependency graph is not acyclic");
        std::vector<std::size_t> next;
        for (std::size_t i : frontier)
            for (std::size_t p : wb.parents_of(i)) next.push_back(p);
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        for (std::size_t i : next) in_members[i] = 1;
        trace.rounds.push_back(to_refs(wb, next));
        frontier = std::move(next);
    }

    DependencySet dep;
    dep.origin = to_refs(wb, origin);
    for (std::size_t i = 0; i < in_members.size(); ++i)
        if (in_members[i] &&
            !std::binary_search(origin.begin(), origin.end(), i))
            dep.members.push_back(wb.cell_at(i).ref);
    return {std::move(dep), std::move(trace)};
}

CallTree build_call_tree(const Workbook& wb, const CellRef& root,
                         std::span<const CellRef> cut) {
    std::unordered_set<CellRef> cut_set(cut.begin(), cut.end());
    for (const CellRef& r : cut) wb.index_of(r);  // validate

    CallTree tree;
    tree.root.ref = root;
    wb.index_of(root);

    // Iterative expansion; nodes in `cut` stay leaves.
    struct Item {
        CallTreeNode* node;
    };
    std::vector<Item> stack{{&tree.root}};
    while (!stack.empty()) {
        CallTreeNode* node = stack.back().node;
        stack.pop_back();
        if (cut_set.contains(node->ref)) continue;
        const Cell& cell = wb.cell(node->ref);
        node->children.reserve(cell.occurrences.size());
        for (const CellRef& c : cell.occurrences) node->children.push_back({c, {}});
        for (CallTreeNode& child : node->children) stack.push_back({&child});
    }
    return tree;
}

}  // namespace recalc
