#pragma once

#include <vector>

#include "cogmac/csma.hpp"
#include "cogmac/model.hpp"
#include "cogmac/sensing.hpp"

namespace cogmac {

enum class FdMode { hdtx, fdtx };

struct FdcScenario {
    int n_su = 40;
    double p_access = 0.0022;
    MacTiming timing;
    double t_frame = 15e-3;  // T
    double t_eva = 40e-3;
    PuChannelStats pu = PuChannelStats::from_means(150e-3, 50e-3);
    Power p_pu{0.01};
    Power p_max{db_to_linear(15.0)};
    SelfInterference si{0.08, 0.95};
    double pd_target = 0.8;
    double f_s = 6e6;
    FdMode mode = FdMode::fdtx;
    // off: sensing-stage SNR is P_sen/N0 and one-way. on: the sensing stage sees theta*I(P_sen)
    // and carries phi flows, the reading that reproduces the low-QSIC optimum
    bool sensing_rate_with_si = false;

    double theta() const { return mode == FdMode::fdtx ? 1.0 : 0.0; }
    double phi() const { return mode == FdMode::fdtx ? 2.0 : 1.0; }
    void validate() const;
};

// defaults from the numerical study: sigma = 20 us, SIFS = 2 sigma, DIFS = 10 sigma, ACK = CTS = RTS = 20 sigma
MacTiming fdc_default_timing();
FdcScenario fdc_default_scenario();

struct FdcRates {
    double gamma_s1 = 0, gamma_s2 = 0, gamma_d1 = 0, gamma_d2 = 0;
};

FdcRates fdc_rates(const FdcScenario& sc, Power p_sen);

double t_overhead(const FdcScenario& sc);

struct DataBits {
    double b1 = 0, b2 = 0, b3 = 0;
    double b31 = 0, b32 = 0;
    double pf00 = 0;
    double eps = 0;
    double total() const { return b1 + b2 + b3; }
};

DataBits data_bits(const FdcScenario& sc, double t_s, Power p_sen);
double fdc_nt(const FdcScenario& sc, double t_s, Power p_sen);

Power critical_psen(const FdcScenario& sc);

struct TsOptimum {
    double t_s = 0;
    double nt = 0;
    bool boundary = false;  // optimum at T_S = T
};

TsOptimum optimize_ts(const FdcScenario& sc, Power p_sen);

struct FdcConfigRow {
    Power p_sen;
    TsOptimum best;
};

struct FdcConfiguration {
    std::vector<FdcConfigRow> table;
    double t_s = 0;
    Power p_sen;
    double nt = 0;
};

// jobs > 1 spreads grid points over worker threads; table order follows the grid
FdcConfiguration configure(const FdcScenario& sc, const std::vector<Power>& p_sen_grid, int jobs = 1);

}  // namespace cogmac
