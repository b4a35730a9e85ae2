#include "recalc/eager.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "recalc/number_format.hpp"

namespace recalc {

namespace {

// Left-to-right post-order emission over the root's call tree. Cells for
// which `expand` holds are descended into and emitted with their formula;
// everything else becomes a constant assignment of its cached value.
template <typename ExpandPred>
void emit_call_tree(const Workbook& wb, std::size_t root_idx, ExpandPred expand,
                    std::string& out, std::vector<std::string>* history) {
    auto emit = [&](std::string_view ref_text, const std::string& body) {
        out += ref_text;
        out += '=';
        out += body;
        out += ';';
        if (history) history->push_back(out);
    };
    auto emit_value = [&](std::size_t idx) {
        const Cell& cell = wb.cell_at(idx);
        emit(cell.ref.to_string(), format_number(wb.value_at(idx)));
    };

    if (!expand(root_idx)) {
        emit_value(root_idx);
        return;
    }

    struct Frame {
        std::size_t idx;
        std::size_t next = 0;
    };
    std::vector<Frame> stack{{root_idx}};
    while (!stack.empty()) {
        Frame& top = stack.back();
        const Cell& cell = wb.cell_at(top.idx);
        if (top.next < cell.occurrences.size()) {
            std::size_t child = wb.index_of(cell.occurrences[top.next++]);
            if (expand(child))
                stack.push_back({child});
            else
                emit_value(child);
        } else {
            emit(cell.ref.to_string(), cell.formula_text);
            stack.pop_back();
        }
    }
}

struct SegmentResult {
    std::unordered_map<CellRef, double> env;
    std::uint64_t evals = 0;  // segments whose body references other cells
};

SegmentResult eval_segments(std::string_view text) {
    SegmentResult result;
    result.env.reserve(8);
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t semi = text.find(';', pos);
        if (semi == std::string_view::npos)
            throw SyntaxError("parser string segment missing ';'", pos);
        std::string_view segment = text.substr(pos, semi - pos);
        std::size_t eq = segment.find('=');
        if (eq == std::string_view::npos || eq == 0)
            throw SyntaxError("parser string segment missing '='", pos);
        CellRef target;
        try {
            target = CellRef::parse(segment.substr(0, eq));
        } catch (const MalformedRef&) {
            throw SyntaxError("malformed assignment target", pos);
        }
        AstPtr body;
        try {
            body = parse_formula(segment.substr(eq + 1));
        } catch (const SyntaxError& e) {
            throw SyntaxError("segment for " + target.to_string() + ": ", e);
        }
        bool references = false;
        double v = eval_formula(*body, [&](const CellRef& r) -> double {
            references = true;
            auto it = result.env.find(r);
            if (it == result.env.end()) throw UnboundRef(r);
            return it->second;
        });
        if (references) ++result.evals;
        result.env[target] = v;
        pos = semi + 1;
    }
    return result;
}

}  // namespace

ParserString build_parser_string(const Workbook& wb, const CellRef& root,
                                 const DependencySet& dep,
                                 std::span<const CellRef> changed,
                                 std::vector<std::string>* history) {
    std::unordered_set<CellRef> expand_refs(dep.members.begin(), dep.members.end());
    expand_refs.insert(changed.begin(), changed.end());
    ParserString ps;
    emit_call_tree(
        wb, wb.index_of(root),
        [&](std::size_t idx) { return expand_refs.contains(wb.cell_at(idx).ref); }, ps.text,
        history);
    return ps;
}

std::map<CellRef, double> eval_parser_string(std::string_view parser_string) {
    SegmentResult r = eval_segments(parser_string);
    return {r.env.begin(), r.env.end()};
}

RecomputeReport set_and_recompute_in_place(Workbook& wb, const CellRef& ref, double value) {
    std::size_t origin_idx = wb.index_of(ref);
    if (!wb.cell_at(origin_idx).children.empty()) throw NotConstant(ref);

    const CellRef changed[] = {ref};
    auto [dep, trace] = dependency_set(wb, changed);

    RecomputeReport report;
    double old_origin = wb.value_at(origin_idx);
    wb.set_constant_in_place(ref, value);
    report.changed_cells.emplace(ref, std::make_pair(old_origin, value));

    // Members in topological order; each one's children are already fresh
    // by the time its parser string is built, so they cut to constants.
    std::vector<std::size_t> members;
    members.reserve(dep.members.size());
    for (const CellRef& m : dep.members) members.push_back(wb.index_of(m));
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
        return wb.topo_rank(a) < wb.topo_rank(b);
    });

    std::string buffer;
    for (std::size_t idx : members) {
        buffer.clear();
        emit_call_tree(wb, idx, [&](std::size_t i) { return i == idx; }, buffer, nullptr);
        SegmentResult r = eval_segments(buffer);
        auto it = r.env.find(wb.cell_at(idx).ref);
        if (it == r.env.end()) throw UnboundRef(wb.cell_at(idx).ref);
        double old_value = wb.value_at(idx);
        wb.store_value_at(idx, it->second);
        report.changed_cells.emplace(wb.cell_at(idx).ref,
                                     std::make_pair(old_value, it->second));
        ++report.recompute_count;
    }
    return report;
}

std::pair<Workbook, RecomputeReport> set_and_recompute(const Workbook& wb, const CellRef& ref,
                                                       double value) {
    Workbook copy = wb;
    RecomputeReport report = set_and_recompute_in_place(copy, ref, value);
    return {std::move(copy), std::move(report)};
}

}  // namespace recalc
