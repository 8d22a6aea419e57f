#include "oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numeric>

namespace oracle {

double fusion_enum(const std::vector<double>& p, int a) {
    const int b = static_cast<int>(p.size());
    double s = 0;
    for (unsigned mask = 0; mask < (1u << b); ++mask) {
        if (std::popcount(mask) < a) continue;
        double pr = 1;
        for (int k = 0; k < b; ++k) pr *= (mask >> k & 1u) ? p[k] : 1 - p[k];
        s += pr;
    }
    return s;
}

std::vector<double> contention_pmf_enum(const std::vector<double>& join) {
    const int n = static_cast<int>(join.size());
    std::vector<double> pmf(n + 1, 0.0);
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        double pr = 1;
        for (int k = 0; k < n; ++k) pr *= (mask >> k & 1u) ? join[k] : 1 - join[k];
        pmf[std::popcount(mask)] += pr;
    }
    return pmf;
}

std::map<std::vector<int>, double> access_pmf_uniform_enum(int k, int n) {
    std::map<std::vector<int>, double> out;
    const double each = std::pow(static_cast<double>(k), -n);
    std::vector<int> pick(n, 0);
    while (true) {
        std::vector<int> counts(k, 0);
        for (int c : pick) ++counts[c];
        out[counts] += each;
        int i = 0;
        while (i < n && ++pick[i] == k) pick[i++] = 0;
        if (i == n) break;
    }
    return out;
}

std::map<std::vector<int>, double> access_pmf_lists_enum(const std::vector<std::vector<int>>& avail, int n_ch) {
    std::map<std::vector<int>, double> out;
    const int n = static_cast<int>(avail.size());
    std::vector<int> pos(n, 0);
    while (true) {
        std::vector<int> counts(n_ch, 0);
        double pr = 1;
        for (int i = 0; i < n; ++i) {
            if (avail[i].empty()) continue;
            ++counts[avail[i][pos[i]]];
            pr /= static_cast<double>(avail[i].size());
        }
        out[counts] += pr;
        int i = 0;
        while (i < n && (avail[i].empty() || ++pos[i] == static_cast<int>(avail[i].size()))) pos[i++] = 0;
        if (i == n) break;
    }
    return out;
}

double assignment_cost(const std::vector<std::vector<double>>& cost, const std::vector<int>& su_of) {
    double s = 0;
    for (size_t j = 0; j < su_of.size(); ++j) s += cost[su_of[j]][j];
    return s;
}

double assignment_cost_enum(const std::vector<std::vector<double>>& cost, int cap) {
    const int n = static_cast<int>(cost.size()), m = static_cast<int>(cost[0].size());
    double best = INFINITY;
    std::vector<int> load(n, 0);
    std::function<void(int, double)> rec = [&](int j, double acc) {
        if (j == m) {
            best = std::min(best, acc);
            return;
        }
        for (int i = 0; i < n; ++i) {
            if (load[i] == cap) continue;
            ++load[i];
            rec(j + 1, acc + cost[i][j]);
            --load[i];
        }
    };
    rec(0, 0.0);
    return best;
}

double first_collision_enum(int m, int w) {
    std::vector<int> v(m, 0);
    long hits = 0, total = 0;
    while (true) {
        int lo = *std::min_element(v.begin(), v.end());
        hits += std::count(v.begin(), v.end(), lo) >= 2;
        ++total;
        int i = 0;
        while (i < m && ++v[i] == w) v[i++] = 0;
        if (i == m) break;
    }
    return static_cast<double>(hits) / static_cast<double>(total);
}

std::vector<double> assign_throughput_enum(const cogmac::AssignmentState& st, const cogmac::AvailabilityMatrix& a,
                                           double delta) {
    const int n = st.n_su();
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j : st.all_of(i)) pairs.push_back({i, j});
    const int np = static_cast<int>(pairs.size());
    std::vector<double> out(n, 0.0);
    for (unsigned mask = 0; mask < (1u << np); ++mask) {
        double pr = 1;
        for (int k = 0; k < np; ++k) {
            auto [i, j] = pairs[k];
            pr *= (mask >> k & 1u) ? a.at(i, j) : 1 - a.at(i, j);
        }
        auto up = [&](int i, int j) {
            for (int k = 0; k < np; ++k)
                if (pairs[k].first == i && pairs[k].second == j) return (mask >> k & 1u) != 0;
            return false;
        };
        // users without an available separate channel pick among available common ones
        std::vector<std::vector<int>> options(n);
        for (int i = 0; i < n; ++i) {
            bool own = false;
            for (int j : st.separate(i)) own = own || up(i, j);
            if (own) {
                out[i] += pr;
                continue;
            }
            for (int j : st.common(i))
                if (up(i, j)) options[i].push_back(j);
        }
        std::vector<int> pos(n, 0);
        while (true) {
            double w = pr;
            std::vector<int> choosers(a.n_ch(), 0);
            for (int i = 0; i < n; ++i)
                if (!options[i].empty()) {
                    w /= static_cast<double>(options[i].size());
                    ++choosers[options[i][pos[i]]];
                }
            for (int i = 0; i < n; ++i)
                if (!options[i].empty()) out[i] += w * (1 - delta) / choosers[options[i][pos[i]]];
            int i = 0;
            while (i < n && (options[i].empty() || ++pos[i] == static_cast<int>(options[i].size()))) pos[i++] = 0;
            if (i == n) break;
        }
    }
    return out;
}

double ppersist_contention_time(double p, int n, const cogmac::MacTiming& t) {
    const double hs = t.difs + t.rts + t.cts + 2 * t.pd, coll = t.rts + t.difs + t.pd;
    const double idle = std::pow(1 - p, n), succ = n * p * std::pow(1 - p, n - 1);
    // busy slots until the first success; each busy slot is preceded by a geometric idle run
    const double busy = (1 - idle) / succ;
    const double idle_run = idle / (1 - idle) * t.slot;
    return (busy - 1) * coll + busy * idle_run + hs;
}

double pure_ppersist_nt(int n_su, int n_ch, double p, double sensing_total, const cogmac::MacTiming& t) {
    const double ts = t.packet + 2 * t.sifs + 2 * t.pd + t.ack;
    const double room = t.cycle - sensing_total - n_su * t.report_slot;
    double nt = 0;
    const double q1 = 1.0 / n_ch;
    for (int n = 1; n <= n_su; ++n) {
        double binom = std::tgamma(n_su + 1.0) / (std::tgamma(n + 1.0) * std::tgamma(n_su - n + 1.0));
        double pr = binom * std::pow(q1, n) * std::pow(1 - q1, n_su - n);
        double packets = std::floor(room / (ppersist_contention_time(p, n, t) + ts) + 1e-12);
        nt += pr * packets * ts / t.cycle;
    }
    return nt;  // per channel, identical for all channels
}

double fd_single_stage_nt(const cogmac::FdcScenario& sc, cogmac::Power p_sen) {
    const double T = sc.t_frame, tid = *sc.pu.mean_idle, tac = *sc.pu.mean_active;
    const double t_ove = cogmac::t_overhead(sc);
    const double l_idle = std::log2(1 + p_sen.linear);
    const double l_busy = std::log2(1 + p_sen.linear / (1 + sc.p_pu.linear));
    // PU idle when contention starts and through the overhead
    const double start = sc.pu.p_idle * std::exp(-t_ove / tid);
    double bits = start * std::exp(-T / tid) * T * l_idle;
    // PU arrives at t and stays until the frame ends
    auto dens = [&](double t) { return start * std::exp(-t / tid) / tid * std::exp(-(T - t) / tac); };
    auto f = [&](double t) { return dens(t) * (t * l_idle + (T - t) * l_busy); };
    const int panels = 4000;
    const double h = T / panels;
    double s = f(0) + f(T);
    for (int k = 1; k < panels; ++k) s += f(k * h) * (k % 2 ? 4 : 2);
    bits += s * h / 3;
    return bits / (t_ove + T);
}

}  // namespace oracle
