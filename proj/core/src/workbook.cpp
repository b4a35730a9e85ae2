#include "recalc/workbook.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_set>
#include <utility>

#include "recalc/number_format.hpp"

namespace recalc {

// ---------------------------------------------------------------------------
// Workbook XML
//
//   <workbook name="NAME">
//     <cell ref="A1" formula="1"/>
//     ...
//   </workbook>
//
// One self-closing cell element per cell, attributes in the order
// (ref, formula). Nothing else is permitted apart from an optional XML
// declaration, comments, and whitespace.

namespace {

struct RawCell {
    std::string ref_text;
    std::string formula;
};

class XmlScanner {
public:
    explicit XmlScanner(std::string_view text) : s_(text) {}

    void parse(std::string& name_out, std::vector<RawCell>& cells_out) {
        if (s_.substr(0, 3) == "\xEF\xBB\xBF") i_ = 3;  // UTF-8 BOM
        skip_misc();
        if (starts_with("<?xml")) {
            std::size_t end = s_.find("?>", i_);
            if (end == std::string_view::npos) fail("unterminated XML declaration");
            i_ = end + 2;
            skip_misc();
        }
        expect("<workbook");
        name_out = attribute("name");
        skip_ws();
        expect(">");
        while (true) {
            skip_misc();
            if (starts_with("</workbook>")) {
                i_ += 11;
                break;
            }
            if (!starts_with("<cell")) fail("expected <cell> or </workbook>");
            i_ += 5;
            RawCell rc;
            rc.ref_text = attribute("ref");
            rc.formula = attribute("formula");
            skip_ws();
            expect("/>");
            cells_out.push_back(std::move(rc));
        }
        skip_misc();
        if (i_ != s_.size()) fail("content after </workbook>");
    }

private:
    [[noreturn]] void fail(const std::string& message) const {
        throw XmlError("workbook XML: " + message + " (byte " + std::to_string(i_) + ")");
    }

    bool starts_with(std::string_view token) const {
        return s_.substr(i_, token.size()) == token;
    }

    void expect(std::string_view token) {
        if (!starts_with(token)) fail("expected \"" + std::string(token) + "\"");
        i_ += token.size();
    }

    void skip_ws() {
        while (i_ < s_.size() &&
               (s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\r' || s_[i_] == '\n'))
            ++i_;
    }

    void skip_misc() {
        while (true) {
            skip_ws();
            if (starts_with("<!--")) {
                std::size_t end = s_.find("-->", i_ + 4);
                if (end == std::string_view::npos) fail("unterminated comment");
                i_ = end + 3;
                continue;
            }
            return;
        }
    }

    std::string attribute(std::string_view want) {
        skip_ws();
        std::size_t start = i_;
        while (i_ < s_.size() && s_[i_] >= 'a' && s_[i_] <= 'z') ++i_;
        std::string_view got = s_.substr(start, i_ - start);
        if (got.empty()) fail("expected attribute \"" + std::string(want) + "\"");
        if (got != want)
            fail("expected attribute \"" + std::string(want) + "\", found \"" +
                 std::string(got) + "\"");
        expect("=");
        if (i_ >= s_.size() || (s_[i_] != '"' && s_[i_] != '\'')) fail("expected quoted value");
        char quote = s_[i_++];
        std::string value;
        while (i_ < s_.size() && s_[i_] != quote) {
            char c = s_[i_];
            if (c == '<') fail("'<' in attribute value");
            if (c == '&') {
                value += entity();
                continue;
            }
            value += c;
            ++i_;
        }
        if (i_ >= s_.size()) fail("unterminated attribute value");
        ++i_;  // closing quote
        return value;
    }

    char entity() {
        std::size_t end = s_.find(';', i_);
        if (end == std::string_view::npos || end - i_ > 6) fail("malformed entity");
        std::string_view e = s_.substr(i_, end - i_ + 1);
        i_ = end + 1;
        if (e == "&amp;") return '&';
        if (e == "&lt;") return '<';
        if (e == "&gt;") return '>';
        if (e == "&quot;") return '"';
        if (e == "&apos;") return '\'';
        fail("unknown entity \"" + std::string(e) + "\"");
    }

    std::string_view s_;
    std::size_t i_ = 0;
};

}  // namespace

// ---------------------------------------------------------------------------
// Construction

Workbook Workbook::load(std::string_view xml_text) {
    std::string name;
    std::vector<RawCell> raw;
    XmlScanner(xml_text).parse(name, raw);

    Workbook wb;
    wb.name_ = std::move(name);
    wb.cells_.reserve(raw.size());
    for (const RawCell& rc : raw) {
        Cell cell;
        try {
            cell.ref = CellRef::parse(rc.ref_text);
        } catch (const MalformedRef& e) {
            throw XmlError("workbook XML: bad cell ref \"" + rc.ref_text + "\": " + e.what());
        }
        try {
            cell.ast = parse_formula(rc.formula);
        } catch (const SyntaxError& e) {
            throw SyntaxError("cell " + cell.ref.to_string() + ": ", e);
        }
        cell.formula_text = render_formula(*cell.ast);
        cell.occurrences = extract_children(*cell.ast);
        for (const CellRef& c : cell.occurrences) {
            if (c == cell.ref) throw CircularReference({cell.ref});
            if (std::find(cell.children.begin(), cell.children.end(), c) ==
                cell.children.end())
                cell.children.push_back(c);
        }
        wb.cells_.push_back(std::move(cell));
    }

    std::sort(wb.cells_.begin(), wb.cells_.end(),
              [](const Cell& a, const Cell& b) { return a.ref < b.ref; });
    for (std::size_t i = 0; i < wb.cells_.size(); ++i) {
        if (i > 0 && wb.cells_[i].ref == wb.cells_[i - 1].ref)
            throw DuplicateCell("duplicate cell " + wb.cells_[i].ref.to_string());
        wb.order_.push_back(wb.cells_[i].ref);
        wb.index_.emplace(wb.cells_[i].ref, i);
    }

    const std::size_t n = wb.cells_.size();
    wb.child_idx_.resize(n);
    wb.parent_idx_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (const CellRef& c : wb.cells_[i].children) {
            std::size_t j = wb.find(c);
            if (j == npos)
                throw DanglingRef("cell " + wb.cells_[i].ref.to_string() +
                                  " references missing cell " + c.to_string());
            wb.child_idx_[i].push_back(j);
            wb.parent_idx_[j].push_back(i);
        }
    }
    for (auto& p : wb.parent_idx_) std::sort(p.begin(), p.end());

    // Child-first topological order, ties broken row-major (= index order).
    std::vector<std::size_t> pending(n);
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < n; ++i) {
        pending[i] = wb.child_idx_[i].size();
        if (pending[i] == 0) ready.push(i);
    }
    while (!ready.empty()) {
        std::size_t i = ready.top();
        ready.pop();
        wb.topo_.push_back(i);
        for (std::size_t p : wb.parent_idx_[i])
            if (--pending[p] == 0) ready.push(p);
    }
    if (wb.topo_.size() != n) {
        // Walk the unresolved cells to produce one witness cycle.
        std::size_t start = npos;
        for (std::size_t i = 0; i < n; ++i)
            if (pending[i] > 0) {
                start = i;
                break;
            }
        std::vector<std::size_t> path;
        std::unordered_map<std::size_t, std::size_t> pos;
        std::size_t cur = start;
        while (pos.find(cur) == pos.end()) {
            pos.emplace(cur, path.size());
            path.push_back(cur);
            std::size_t next = npos;
            for (std::size_t c : wb.child_idx_[cur])
                if (pending[c] > 0 && (next == npos || c < next)) next = c;
            cur = next;
        }
        std::vector<CellRef> cycle;
        for (std::size_t k = pos[cur]; k < path.size(); ++k)
            cycle.push_back(wb.cells_[path[k]].ref);
        throw CircularReference(std::move(cycle));
    }
    wb.topo_rank_.resize(n);
    for (std::size_t r = 0; r < n; ++r) wb.topo_rank_[wb.topo_[r]] = r;

    wb.recompute_all();
    return wb;
}

std::size_t Workbook::edge_count() const {
    std::size_t edges = 0;
    for (const auto& c : child_idx_) edges += c.size();
    return edges;
}

std::size_t Workbook::find(const CellRef& ref) const {
    auto it = index_.find(ref);
    return it == index_.end() ? npos : it->second;
}

std::size_t Workbook::index_of(const CellRef& ref) const {
    std::size_t i = find(ref);
    if (i == npos) throw UnknownCell(ref);
    return i;
}

std::vector<CellRef> Workbook::parents(const CellRef& ref) const {
    std::vector<CellRef> out;
    for (std::size_t p : parent_idx_[index_of(ref)]) out.push_back(cells_[p].ref);
    return out;
}

double Workbook::value_at(std::size_t idx) const {
    const std::optional<double>& v = cells_[idx].value;
    if (!v) throw EvalError("cell " + cells_[idx].ref.to_string() + " has no value");
    return *v;
}

std::uint64_t Workbook::recompute_all() {
    std::uint64_t evals = 0;
    auto lookup = [this](const CellRef& r) -> double {
        std::size_t j = find(r);
        if (j == npos) throw UnboundRef(r);
        return value_at(j);
    };
    for (std::size_t idx : topo_) {
        Cell& cell = cells_[idx];
        try {
            cell.value = eval_formula(*cell.ast, lookup);
        } catch (const EvalError& e) {
            throw EvalError("cell " + cell.ref.to_string() + ": " + e.what());
        }
        if (!cell.children.empty()) ++evals;
    }
    return evals;
}

void Workbook::set_constant_in_place(const CellRef& ref, double value) {
    Cell& cell = cells_[index_of(ref)];
    if (!cell.children.empty()) throw NotConstant(ref);
    cell.ast = std::signbit(value) ? make_negate(make_number(-value)) : make_number(value);
    cell.formula_text = format_number(value);
    cell.value = value;
}

Workbook load_workbook(std::string_view xml_text) { return Workbook::load(xml_text); }

std::vector<CellRef> validate_acyclic(const Workbook& wb) {
    std::vector<CellRef> out;
    out.reserve(wb.cell_count());
    for (std::size_t idx : wb.topo_order()) out.push_back(wb.cell_at(idx).ref);
    return out;
}

Workbook set_constant(const Workbook& wb, const CellRef& ref, double value) {
    Workbook copy = wb;
    copy.set_constant_in_place(ref, value);
    return copy;
}

}  // namespace recalc
