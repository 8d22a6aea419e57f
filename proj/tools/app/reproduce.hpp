#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "app/csv.hpp"

namespace cogmac::app {

struct Check {
    std::string name;
    std::string reference;  // published value or band
    std::string computed;
    std::string tolerance;
    bool pass = false;
};

struct Report {
    std::string target;
    std::vector<Check> checks;
    bool pass() const;
};

struct ReproduceOptions {
    int jobs = 1;
    std::uint64_t seed = 1;
    long cycles = 100000;  // Monte Carlo targets only
};

// ch6_psen_bar, ch6_optimum, ch5_table1, ch3_table, sim_agreement
const std::vector<std::string>& reproduce_targets();
Report reproduce(const std::string& target, const ReproduceOptions& opt);

// one line per check plus a verdict line
void print_report(std::ostream& os, const Report& r);
Table report_table(const Report& r);

}  // namespace cogmac::app
