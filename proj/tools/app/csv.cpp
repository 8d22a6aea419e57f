#include "csv.hpp"

#include <cmath>

#include <fmt/format.h>

namespace cogmac::app {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    return fmt::format("{:.9g}", v);
}

namespace {

std::string cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

void line(std::ostream& os, const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) os << ',';
        os << cell(cells[i]);
    }
    os << '\n';
}

}  // namespace

void write_csv(std::ostream& os, const Table& t) {
    line(os, t.header);
    for (const auto& r : t.rows) line(os, r);
}

}  // namespace cogmac::app
