#pragma once

#include <vector>

#include "cogmac/model.hpp"

namespace cogmac {

// p[i][j]: channel j available at SU i
struct AvailabilityMatrix {
    std::vector<std::vector<double>> p;

    AvailabilityMatrix() = default;
    explicit AvailabilityMatrix(std::vector<std::vector<double>> rows);
    int n_su() const { return static_cast<int>(p.size()); }
    int n_ch() const { return p.empty() ? 0 : static_cast<int>(p.front().size()); }
    double at(int i, int j) const { return p[i][j]; }
    double bar(int i, int j) const { return 1.0 - p[i][j]; }
    void validate() const;
};

struct SensingErrorMatrix {
    std::vector<std::vector<double>> pd, pf;
    void validate(int n_su, int n_ch) const;
    double p_idle(const AvailabilityMatrix& a, int i, int j) const;
};

// Per-SU separate sets S_i, common sets S_i^com, and per-channel user sets U_j.
// Channels with no user are unassigned.
class AssignmentState {
public:
    AssignmentState() = default;
    AssignmentState(int n_su, int n_ch);

    int n_su() const { return static_cast<int>(users_.size()); }
    int n_ch() const { return static_cast<int>(owners_.size()); }

    void add(int su, int ch);
    void remove(int su, int ch);
    bool has(int su, int ch) const;

    const std::vector<int>& users_of(int ch) const { return owners_[ch]; }
    std::vector<int> separate(int su) const;
    std::vector<int> common(int su) const;
    std::vector<int> all_of(int su) const { return users_[su]; }
    bool has_overlap() const;
    void validate() const;

    bool operator==(const AssignmentState& o) const { return owners_ == o.owners_; }

private:
    std::vector<std::vector<int>> users_;   // per SU, sorted channel list
    std::vector<std::vector<int>> owners_;  // per channel, sorted SU list
};

// prod over a channel set of (1 - p_ij)
double all_busy(const AvailabilityMatrix& a, int i, const std::vector<int>& chans);

double user_throughput_nonoverlap(const std::vector<int>& chans, const AvailabilityMatrix& a, int su);

AssignmentState greedy_nonoverlap(const AvailabilityMatrix& a);

// conditional first-collision probability with m contenders and window w
double first_collision_given(int m, int w);
// probability that SU i enters the contention stage
std::vector<double> contention_probs(const AvailabilityMatrix& a, const AssignmentState& st);
double first_collision_probability(int w, const AvailabilityMatrix& a, const AssignmentState& st);
int contention_window_for(double eps_p, const AvailabilityMatrix& a, const AssignmentState& st);

struct AssignTiming {
    double theta = 20e-6;
    double rts = 48e-6;
    double cts = 40e-6;
    double sifs = 28e-6;
    double sen = 0.0;
    double syn = 0.0;
    double cycle = 3e-3;
    void validate() const;
};

double mac_overhead(int w, const AssignTiming& t);

double estimate_overlap_gain(int i, int j, const AssignmentState& st, const AvailabilityMatrix& a, double delta);

struct ThroughputBreakdown {
    std::vector<double> per_su;
    double total = 0;
    double min() const;
};

// largest sharing degree and set size handled by the enumerating evaluators
inline constexpr int kMaxSharing = 8;
inline constexpr int kMaxSetSize = 8;

// Group I..IV labelling of the other sharers of channel j, seen from SU i. weight is the total
// probability mass (1 up to rounding); value carries the 1/(1+A4) contention factor
struct PartitionSum {
    double weight = 0;
    double value = 0;
};
PartitionSum sharing_partition(int i, int j, const AssignmentState& st, const AvailabilityMatrix& a,
                               const SensingErrorMatrix* err = nullptr);

ThroughputBreakdown exact_throughput(const AssignmentState& st, const AvailabilityMatrix& a, double delta);
ThroughputBreakdown exact_throughput_imperfect(const AssignmentState& st, const AvailabilityMatrix& a,
                                               const SensingErrorMatrix& err, double delta);

struct AssignConfig {
    double eps_p = 0.03;
    double eps = -1;  // < 0: 1e-3 of the phase-1 total throughput
    double eps_delta = 0.01;
    AssignTiming timing;
};

struct OverlapResult {
    AssignmentState state;
    int w = 2;
    double delta = 0;
};

// W and delta for a state
OverlapResult with_overhead(const AssignmentState& st, const AvailabilityMatrix& a, const AssignConfig& cfg);

OverlapResult greedy_overlap(const AvailabilityMatrix& a, const AssignConfig& cfg = {});
AssignmentState maxmin_greedy_nonoverlap(const AvailabilityMatrix& a);
OverlapResult maxmin_overlap(const AvailabilityMatrix& a, const AssignConfig& cfg = {});

enum class Objective { sum, maxmin };

struct BruteForceResult {
    OverlapResult best;
    double value = 0;
};

BruteForceResult brute_force_assignment(const AvailabilityMatrix& a, Objective obj, const AssignConfig& cfg = {},
                                        int jobs = 1);

double throughput_error_bound(double eps_p, const AvailabilityMatrix& a, const AssignmentState& st);

}  // namespace cogmac
