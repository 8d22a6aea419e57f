#pragma once

#include <cstdint>
#include <vector>

#include "cogmac/model.hpp"
#include "cogmac/sensing.hpp"

namespace cogmac {

// who senses what. a[j] is the busy-vote threshold for channel j, 0 while nobody senses j
class SensingSets {
public:
    SensingSets() = default;
    SensingSets(int n_su, int n_ch);
    // bit (i * n_ch + j) set <=> SU i senses channel j; a defaults to the OR rule
    static SensingSets from_code(int n_su, int n_ch, std::uint64_t code);

    int n_su() const { return static_cast<int>(per_su_.size()); }
    int n_ch() const { return static_cast<int>(per_channel_.size()); }

    void add(int su, int ch);
    void remove(int su, int ch);
    bool has(int su, int ch) const;
    const std::vector<int>& of_su(int su) const { return per_su_[su]; }
    const std::vector<int>& of_channel(int ch) const { return per_channel_[ch]; }
    int b(int ch) const { return static_cast<int>(per_channel_[ch].size()); }
    int pairs() const;
    std::uint64_t code() const;

    std::vector<int> a;

    void validate() const;
    bool operator==(const SensingSets& o) const { return per_su_ == o.per_su_ && a == o.a; }

private:
    std::vector<std::vector<int>> per_su_;
    std::vector<std::vector<int>> per_channel_;
};

struct SdcssParams {
    std::vector<std::vector<double>> tau;  // [su][ch], 0 off the sensing sets
    double p = 0.1026;
    std::vector<double> pd_targets;  // per channel
    MacTiming timing;
    SnrGrid snr;
    std::vector<PuChannelStats> pu;  // per channel
    double f_s = 6e6;

    int n_su() const { return snr.n_su; }
    int n_ch() const { return snr.n_ch; }
    // max_i sum_j tau_ij
    double total_sensing_time() const;
    double reporting_time() const { return n_su() * timing.report_slot; }
    void validate(const SensingSets& sets) const;
};

// slot 20 us, PS 450 slots, T = 100 ms, t_r = 80 us
MacTiming sdcss_default_timing();

// packets delivered on one channel with n contenders, as a fraction of the cycle
double channel_cond_throughput(int n, const SdcssParams& params);

struct AccessVector {
    std::vector<int> n;  // per channel contender count
    double prob = 0;
};

// all SUs choose uniformly among k_e channels
std::vector<AccessVector> access_vector_pmf_ne(int k_e, int n_su);
// each SU i picks uniformly from avail[i] (empty: stays out); counts realized by sequential
// per-channel selection among the SUs not yet placed
std::vector<AccessVector> access_vector_pmf_re(const std::vector<std::vector<int>>& avail, int n_ch);

struct ChannelDetection {
    double pd_sensor = 0;          // common per-sensor detection probability
    std::vector<double> pf_sensor;  // per sensor, order of of_channel(j)
    double pd = 0, pf = 0;         // fused
};

ChannelDetection channel_detection(int ch, const SensingSets& sets, const SdcssParams& params);

// per-channel normalized throughput, no reporting errors
double sdcss_nt_no_err(const SensingSets& sets, const SdcssParams& params);
// same with bit flips on the exchanged reports; N <= 4, M <= 3
double sdcss_nt_with_err(const SensingSets& sets, const SdcssParams& params, const ReportErrorMatrix& errs);

inline constexpr int kReportErrMaxSu = 4;
inline constexpr int kReportErrMaxCh = 3;

struct SdcssScenario {
    int n_su = 4;
    int n_ch = 4;
    SnrGrid snr;
    std::vector<PuChannelStats> pu;
    std::vector<double> pd_targets;
    MacTiming timing;
    double f_s = 6e6;

    SdcssParams params(const std::vector<std::vector<double>>& tau, double p) const;
    void validate() const;
};

// two SNR levels: `strong` pairs (su, ch) get snr_hi, the rest snr_lo
SdcssScenario sdcss_two_level_scenario(int n_su, int n_ch, const std::vector<std::pair<int, int>>& strong,
                                       double snr_hi_db, double snr_lo_db, double p_idle, double pd_target);

struct SenseAccessOptions {
    std::vector<double> p_grid;  // empty: 60 log-spaced points in [1e-4, 0.5]
    double tau_min = 1e-5;
    double tau_init = 1e-3;
    int scan_points = 24;     // per-coordinate scan in log tau before the golden refinement
    double golden_tol = 1e-3;  // in log tau
    double tol = 1e-6;        // stop when a descent round gains less than this
    int max_rounds = 30;
    long a_cap = 4096;        // enumerate all a-vectors up to this many
    bool a_inner = false;     // pick each a_j as the fused-P_f minimizer inside every evaluation
    int jobs = 1;

    std::vector<double> resolved_p_grid() const;
};

struct SdcssConfig {
    SensingSets sets;  // with the chosen a
    std::vector<std::vector<double>> tau;
    double p = 0;
    double nt = 0;
};

SdcssConfig optimize_sense_access(const SensingSets& sets, const SdcssScenario& sc, const SenseAccessOptions& opt = {},
                                  const std::vector<std::vector<double>>* tau_start = nullptr);

// rows: SUs, columns: channels. returns the SU for each channel minimizing the total cost
std::vector<int> hungarian_min_cost(const std::vector<std::vector<double>>& cost);

struct GreedySetsResult {
    SdcssConfig best;
    std::vector<double> trace;  // NT after the seed and after every accepted assignment
};

// delta_stop <= 0: 1e-3 of the current NT
GreedySetsResult greedy_sensing_sets(const SdcssScenario& sc, const SenseAccessOptions& opt = {},
                                     double delta_stop = -1);

inline constexpr int kBruteForceMaxPairs = 16;

SdcssConfig brute_force_sensing_sets(const SdcssScenario& sc, const SenseAccessOptions& opt = {}, int jobs = 1);

}  // namespace cogmac
