#pragma once

// Reference computations by plain enumeration or quadrature. Slow on purpose; used to pin the
// library's closed forms and dynamic programs.

#include <cstdint>
#include <map>
#include <vector>

#include "cogmac/assign.hpp"
#include "cogmac/fdcmac.hpp"
#include "cogmac/sdcss.hpp"

namespace oracle {

// P(at least a of the sensors fire) over all 2^b outcomes
double fusion_enum(const std::vector<double>& p, int a);

// pmf of the number of joiners over all 2^N join patterns
std::vector<double> contention_pmf_enum(const std::vector<double>& join);

// all k^N choice tuples, keyed by per-channel counts
std::map<std::vector<int>, double> access_pmf_uniform_enum(int k, int n);
// each SU picks uniformly from its own list (empty: stays out)
std::map<std::vector<int>, double> access_pmf_lists_enum(const std::vector<std::vector<int>>& avail, int n_ch);

// min-cost channel -> SU map; every SU takes at most cap channels
double assignment_cost_enum(const std::vector<std::vector<double>>& cost, int cap);
double assignment_cost(const std::vector<std::vector<double>>& cost, const std::vector<int>& su_of);

// m users draw backoffs in [0, w-1]; probability that the smallest value is shared
double first_collision_enum(int m, int w);

// per-SU expected throughput of the assignment MAC with a collision-free contention stage:
// every pattern of channel availability and every uniform channel choice is enumerated
std::vector<double> assign_throughput_enum(const cogmac::AssignmentState& st, const cogmac::AvailabilityMatrix& a,
                                           double delta);

// p-persistent contention time with n users, same handshake conventions as the SDCSS model
double ppersist_contention_time(double p, int n, const cogmac::MacTiming& t);
// SDCSS throughput when every channel is idle and perfectly sensed: n ~ Bin(N, 1/M) users per channel,
// each channel delivers floor(room / (T_cont(n) + T_S)) packets
double pure_ppersist_nt(int n_su, int n_ch, double p, double sensing_total, const cogmac::MacTiming& t);

// single-stage FD: the SU senses and transmits at P_sen for the whole frame; PU arrival time
// integrated by composite Simpson
double fd_single_stage_nt(const cogmac::FdcScenario& sc, cogmac::Power p_sen);

}  // namespace oracle
