#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace recalc {

/// A1-style cell coordinate. Column and row are both 1-based;
/// column 1 is "A", column 16384 is "XFD".
class CellRef {
public:
    static constexpr std::uint32_t max_column = 16384;  // "XFD"

    CellRef() = default;
    CellRef(std::uint32_t column, std::uint32_t row);

    /// Parses canonical A1 form ("B3"). Throws MalformedRef on anything
    /// else: lowercase letters, row 0, leading zeros, '$' markers,
    /// embedded spaces, trailing characters, columns past "XFD".
    static CellRef parse(std::string_view text);

    std::uint32_t column() const { return column_; }
    std::uint32_t row() const { return row_; }

    std::string column_letters() const;
    std::string to_string() const;

    bool operator==(const CellRef& other) const {
        return row_ == other.row_ && column_ == other.column_;
    }

    // Row-major order: row first, then column.
    std::strong_ordering operator<=>(const CellRef& other) const {
        if (auto c = row_ <=> other.row_; c != std::strong_ordering::equal) return c;
        return column_ <=> other.column_;
    }

    std::uint64_t packed() const {
        return (static_cast<std::uint64_t>(row_) << 32) | column_;
    }

private:
    std::uint32_t column_ = 1;
    std::uint32_t row_ = 1;
};

}  // namespace recalc

template <>
struct std::hash<recalc::CellRef> {
    std::size_t operator()(const recalc::CellRef& r) const noexcept {
        return std::hash<std::uint64_t>{}(r.packed());
    }
};
