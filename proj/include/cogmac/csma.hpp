#pragma once

#include "cogmac/model.hpp"

namespace cogmac {

struct BackoffConfig {
    int w0 = 32;
    int m = 3;
    void validate() const;
};

struct SlotOutcomeProbs {
    double p_succ = 0, p_idle = 1, p_coll = 0;
};

enum class Handshake { basic, rtscts };

struct FixedPoint {
    double phi = 0;     // per-slot transmit probability
    double p_coll = 0;  // conditional collision probability
};

// phi implied by a given collision probability (Markov chain of binary exponential backoff)
double bianchi_phi_of_p(double p, BackoffConfig cfg);
FixedPoint bianchi_fixed_point(BackoffConfig cfg, int n0);

struct GenericSlot {
    double p_t = 0;  // some station transmits
    double p_s = 0;  // success given transmission
    SlotOutcomeProbs probs;
    double t_success = 0;
    double t_collision = 0;
    double t_slot_avg = 0;
};

void busy_durations(const MacTiming& t, Handshake hs, double& t_success, double& t_collision);
GenericSlot generic_slot_stats(double phi, int n0, const MacTiming& timing, Handshake hs);

SlotOutcomeProbs ppersist_slot_probs(double p, int n0);

struct ContentionBreakdown {
    double mean_idle = 0;        // seconds per idle run
    double mean_collisions = 0;  // collisions before first success
    double t_success_hs = 0;     // successful RTS/CTS exchange
    double t_collision = 0;
    double total = 0;            // T_cont
};

// idle/collision/handshake composition; t_success_hs and t_collision given explicitly
ContentionBreakdown contention_overhead(double p, int n0, double slot, double t_success_hs, double t_collision);
// handshake durations DIFS+RTS+CTS+2PD and RTS+DIFS+PD
ContentionBreakdown ppersist_contention_detail(double p, int n0, const MacTiming& timing);
double ppersist_contention_overhead(double p, int n0, const MacTiming& timing);
// PS + 2 SIFS + 2 PD + ACK
double ppersist_data_time(const MacTiming& timing);
double ppersist_saturation_throughput(double p, int n0, const MacTiming& timing);

}  // namespace cogmac
