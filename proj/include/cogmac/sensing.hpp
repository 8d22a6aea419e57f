#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cogmac/model.hpp"

namespace cogmac {

struct SensorSpec {
    double snr = 0.01;          // gamma, linear
    double sample_rate = 6e6;   // f_s
    double sense_time = 1e-3;   // tau
    std::optional<double> threshold;  // epsilon, noise power normalized to 1
    void validate() const;
};

double energy_pd(const SensorSpec& s);
double energy_pf(const SensorSpec& s);
// threshold at which energy_pd hits the target
double threshold_for_pd(double pd_target, const SensorSpec& s);
double pf_for_target_pd(double pd_target, const SensorSpec& s);

struct FusionRule {
    int a = 1;
    int b = 1;
    void validate() const;
};

// P(at least a of the b independent sensors report busy)
double fuse_a_out_of_b(std::span<const double> per_sensor, FusionRule rule);
// P(at least a successes) for independent Bernoulli(p_k); O(b^2), no argument checks
double at_least_a(std::span<const double> p, int a);
// common per-sensor value giving the fused target (all sensors equal)
double per_sensor_for_fused(double fused_target, FusionRule rule);

struct ReportErrorMatrix {
    int n = 0;
    std::vector<double> p_err;  // (receiver, sender), row major

    explicit ReportErrorMatrix(int n_su = 0, double fill = 0.0);
    double at(int rx, int tx) const { return p_err[static_cast<size_t>(rx) * n + tx]; }
    double& at(int rx, int tx) { return p_err[static_cast<size_t>(rx) * n + tx]; }
    bool all_zero() const;
    void validate() const;
};

double apply_report_errors(double p_sender, double p_err);

// fused busy probability seen by `receiver`; sensors[k] is the SU that produced per_sensor[k].
// the receiver's own report never crosses the air so it carries no error
double fuse_with_errors(int receiver, std::span<const int> sensors, std::span<const double> per_sensor,
                        const ReportErrorMatrix& errs, FusionRule rule);

struct SelfInterference {
    double zeta = 0.0;
    double xi = 1.0;
    void validate() const;
};

Power self_interference_power(Power p, const SelfInterference& si);

double fd_pf00(double eps, double t_s, double f_s, Power p_sen, const SelfInterference& si);
double fd_pd01(double eps, double t_s, double t_change, double f_s, Power p_sen, Power p_pu,
               const SelfInterference& si);
double fd_avg_pd(double eps, double t_s, const PuChannelStats& stats, double f_s, Power p_sen, Power p_pu,
                 const SelfInterference& si);
double fd_threshold_for_target(double pd_target, double t_s, const PuChannelStats& stats, double f_s,
                               Power p_sen, Power p_pu, const SelfInterference& si);
double fd_pf_for_target(double pd_target, double t_s, const PuChannelStats& stats, double f_s, Power p_sen,
                        Power p_pu, const SelfInterference& si);

}  // namespace cogmac
