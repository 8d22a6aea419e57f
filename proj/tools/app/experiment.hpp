#pragma once

#include <cstdint>
#include <optional>

#include "app/config.hpp"
#include "app/csv.hpp"

namespace cogmac::app {

struct RunOptions {
    int jobs = 1;
    std::optional<std::uint64_t> seed;  // overrides the file
    std::optional<long> cycles;         // overrides the file
    bool wall_time = false;             // adds a wall_time_s column; breaks byte stability
};

inline constexpr std::uint64_t kDefaultSeed = 1;

// rows follow the sweep order (last axis fastest) whatever the completion order
Table run_experiment(const ExperimentSpec& spec, const RunOptions& opt);

// builds and checks every sweep point's scenario; runs no model
void validate_experiment(const ExperimentSpec& spec);

// seed of sweep point k, derived from the run seed
std::uint64_t point_seed(std::uint64_t base, std::size_t k);

}  // namespace cogmac::app
