#pragma once

#include <string>
#include <string_view>

namespace recalc {

/// Shortest decimal text that round-trips to the same double.
/// Integer-valued doubles print without a decimal point.
std::string format_number(double value);

void append_number(std::string& out, double value);

/// Strict full-string parse of a decimal literal (optional sign, fraction,
/// exponent). Returns false on trailing characters or non-finite values.
bool parse_number(std::string_view text, double& out);

}  // namespace recalc
