#include "recalc/cell_ref.hpp"

#include "recalc/errors.hpp"

namespace recalc {

CellRef::CellRef(std::uint32_t column, std::uint32_t row) : column_(column), row_(row) {
    if (column == 0 || column > max_column || row == 0)
        throw MalformedRef("cell coordinates out of range");
}

CellRef CellRef::parse(std::string_view text) {
    std::size_t i = 0;
    std::uint32_t col = 0;
    while (i < text.size() && text[i] >= 'A' && text[i] <= 'Z') {
        col = col * 26 + static_cast<std::uint32_t>(text[i] - 'A' + 1);
        ++i;
    }
    if (i == 0 || i > 3 || col > max_column)
        throw MalformedRef("malformed cell reference \"" + std::string(text) + "\"");
    if (i == text.size() || text[i] < '0' || text[i] > '9')
        throw MalformedRef("malformed cell reference \"" + std::string(text) + "\"");
    if (text[i] == '0')  // row 0 or leading zero; either way not canonical
        throw MalformedRef("malformed cell reference \"" + std::string(text) + "\"");
    std::uint64_t row = 0;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
        row = row * 10 + static_cast<std::uint64_t>(text[i] - '0');
        if (row > 0xffffffffULL)
            throw MalformedRef("row out of range in \"" + std::string(text) + "\"");
        ++i;
    }
    if (i != text.size())
        throw MalformedRef("malformed cell reference \"" + std::string(text) + "\"");
    return CellRef(col, static_cast<std::uint32_t>(row));
}

std::string CellRef::column_letters() const {
    char buf[4];
    int n = 0;
    std::uint32_t c = column_;
    while (c > 0) {
        std::uint32_t rem = (c - 1) % 26;
        buf[n++] = static_cast<char>('A' + rem);
        c = (c - 1) / 26;
    }
    std::string out;
    for (int k = n - 1; k >= 0; --k) out += buf[k];
    return out;
}

std::string CellRef::to_string() const {
    return column_letters() + std::to_string(row_);
}

}  // namespace recalc
