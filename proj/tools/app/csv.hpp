#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cogmac::app {

// 9 significant digits, '.' separator whatever the locale, no negative zero
std::string format_number(double v);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// '\n' line endings; cells containing ',' or '"' are quoted
void write_csv(std::ostream& os, const Table& t);

}  // namespace cogmac::app
