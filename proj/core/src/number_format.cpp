#include "recalc/number_format.hpp"

#include <charconv>
#include <cmath>

namespace recalc {

void append_number(std::string& out, double value) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    out.append(buf, res.ptr);
}

std::string format_number(double value) {
    std::string s;
    append_number(s, value);
    return s;
}

bool parse_number(std::string_view text, double& out) {
    if (text.empty()) return false;
    double v = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return false;
    if (!std::isfinite(v)) return false;
    out = v;
    return true;
}

}  // namespace recalc
