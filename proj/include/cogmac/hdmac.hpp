#pragma once

#include <span>
#include <vector>

#include "cogmac/csma.hpp"
#include "cogmac/model.hpp"

namespace cogmac {

struct HdLink {
    PuChannelStats pu = PuChannelStats::from_idle(0.75);
    double snr = 0.01;
    double pd_target = 0.8;
};

struct HdScenario {
    int n_su = 10;
    int n_ch = 1;
    std::vector<HdLink> links;  // one entry per secondary link
    double f_s = 6e6;
    MacTiming timing;
    BackoffConfig backoff;
    Handshake handshake = Handshake::basic;

    bool homogeneous() const;
    void validate() const;
};

// 1 Mb/s timings with T = 100 ms and sigma = 20 us
MacTiming hd_default_timing();
HdScenario hd_default_scenario(int n_su, int n_ch);

double join_probability(double pf, double pd, const PuChannelStats& stats);
std::vector<double> contention_size_pmf(std::span<const double> join);

// exact keeps floor((T - tau)/T_sd); relaxed drops the floor (used by the smooth-envelope witness)
enum class FloorMode { exact, relaxed };

// per-n0 contention quantities for one backoff configuration
struct ContentionTable {
    std::vector<double> ps_pt;   // P_s P_t, index n0
    std::vector<double> t_slot;  // average generic slot, index n0
};

ContentionTable contention_table(BackoffConfig cfg, int n_max, const MacTiming& timing, Handshake hs);

double conditional_throughput(double tau, BackoffConfig cfg, int n0, const HdScenario& sc,
                              FloorMode fm = FloorMode::exact);

// per-link idle-report probabilities at sensing time tau with the detection target met exactly
std::vector<double> link_idle_probs(double tau, const HdScenario& sc);

double single_channel_nt(double tau, BackoffConfig cfg, const HdScenario& sc, FloorMode fm = FloorMode::exact);
double multi_channel_nt(double tau, BackoffConfig cfg, const HdScenario& sc, FloorMode fm = FloorMode::exact);
// dispatch on n_ch
double hd_nt(double tau, BackoffConfig cfg, const HdScenario& sc, FloorMode fm = FloorMode::exact);
double hd_nt(double tau, const ContentionTable& ct, const HdScenario& sc, FloorMode fm = FloorMode::exact);

struct TauOptimum {
    double tau = 0;
    double nt = 0;
    bool boundary = false;
};

TauOptimum optimize_tau(BackoffConfig cfg, const HdScenario& sc, FloorMode fm = FloorMode::exact);

struct WTauOptimum {
    int w = 1;
    double tau = 0;
    double nt = 0;
    std::vector<TauOptimum> per_w;  // index w-1
};

WTauOptimum optimize_w_tau(const HdScenario& sc, int w_max, int jobs = 1);

}  // namespace cogmac
