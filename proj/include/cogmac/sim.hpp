#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "cogmac/assign.hpp"
#include "cogmac/csma.hpp"
#include "cogmac/fdcmac.hpp"
#include "cogmac/hdmac.hpp"
#include "cogmac/model.hpp"
#include "cogmac/sdcss.hpp"
#include "cogmac/sensing.hpp"

// Monte Carlo counterparts of the analytic models. Event rules and sensing statistics are
// rebuilt here from the protocol description; only q/q_inv and plain timing fields are shared.
namespace cogmac {

inline constexpr long kMinSimCycles = 10000;
inline constexpr long kDefaultSimCycles = 100000;

struct SimEstimate {
    double mean = 0;
    double half_ci95 = 0;
    long cycles = 0;
    std::uint64_t seed = 0;

    // |analytic - mean| <= max(rel * analytic, half_ci95)
    bool agrees(double analytic, double rel = 0.02) const;
};

enum class Stream : std::uint32_t { pu = 1, sensing, backoff, choice, report, contention };

// one mt19937_64 per (purpose, index), each seeded through splitmix64 from the run seed
class RngStreams {
public:
    explicit RngStreams(std::uint64_t seed) : seed_(seed) {}
    std::mt19937_64 make(Stream purpose, std::uint32_t index) const;

private:
    std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t& state);

struct PuInterval {
    double start = 0;
    double end = 0;
    bool active = false;
};

// alternating exponential idle/active periods, first state drawn from the stationary split
std::vector<PuInterval> gen_pu_trace(const PuChannelStats& stats, double horizon, std::uint64_t seed);

// Bianchi backoff on one control channel per cycle; every link sees its own channel states
SimEstimate sim_hdmac(const HdScenario& sc, double tau, BackoffConfig cfg, long cycles, std::uint64_t seed,
                      std::ostream* trace = nullptr);

struct AssignSimResult {
    std::vector<SimEstimate> per_su;
    SimEstimate total;
    double collision_rate = 0;  // cycles with at least one RTS collision
};

// err == nullptr: perfect sensing. w is the contention window
AssignSimResult sim_assign(const AssignmentState& st, const AvailabilityMatrix& a, const SensingErrorMatrix* err, int w,
                           const AssignTiming& timing, long cycles, std::uint64_t seed, std::ostream* trace = nullptr);

// errs == nullptr: error-free reporting
SimEstimate sim_sdcss(const SensingSets& sets, const SdcssParams& params, const ReportErrorMatrix* errs, long cycles,
                      std::uint64_t seed, std::ostream* trace = nullptr);

// continuous-time PU process running across CA cycles; ratio estimator bits / elapsed time
SimEstimate sim_fdcmac(const FdcScenario& sc, double t_s, Power p_sen, long cycles, std::uint64_t seed,
                       std::ostream* trace = nullptr);

// time from the start of a p-persistent contention to the end of the first successful handshake
SimEstimate sim_ppersist_contention(double p, int n0, double slot, double t_succ_hs, double t_coll, long epochs,
                                    std::uint64_t seed);

}  // namespace cogmac
