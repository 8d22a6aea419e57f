#include "cogmac/hdmac.hpp"

#include <bit>
#include <cmath>

#include "cogmac/search.hpp"
#include "cogmac/sensing.hpp"

namespace cogmac {

bool HdScenario::homogeneous() const {
    for (const HdLink& l : links) {
        const HdLink& f = links.front();
        if (std::fabs(l.pu.p_idle - f.pu.p_idle) > 1e-12 || std::fabs(l.snr - f.snr) > 1e-12 ||
            std::fabs(l.pd_target - f.pd_target) > 1e-12)
            return false;
    }
    return true;
}

void HdScenario::validate() const {
    timing.validate();
    backoff.validate();
    if (n_su < 1 || n_ch < 1) throw DomainError("HdScenario: n_su and n_ch must be >= 1");
    if (static_cast<int>(links.size()) != n_su) throw ContractError("HdScenario: need one link record per SU");
    if (!(timing.cycle > 0)) throw DomainError("HdScenario: cycle must be > 0");
    if (!(f_s > 0)) throw DomainError("HdScenario: f_s must be > 0");
    for (const HdLink& l : links) {
        l.pu.validate();
        if (!(l.snr > 0)) throw DomainError("HdScenario: link snr must be > 0");
        if (!(l.pd_target > 0 && l.pd_target < 1)) throw DomainError("HdScenario: pd_target must lie in (0,1)");
    }
}

MacTiming hd_default_timing() {
    MacTiming t;
    t.slot = 20e-6;
    t.packet = 8184e-6;
    t.header = 400e-6;
    t.ack = 240e-6;
    t.rts = 288e-6;
    t.cts = 240e-6;
    t.sifs = 28e-6;
    t.difs = 128e-6;
    t.pd = 1e-6;
    t.cycle = 100e-3;
    return t;
}

HdScenario hd_default_scenario(int n_su, int n_ch) {
    HdScenario sc;
    sc.n_su = n_su;
    sc.n_ch = n_ch;
    sc.links.assign(n_su, HdLink{});
    sc.timing = hd_default_timing();
    return sc;
}

double join_probability(double pf, double pd, const PuChannelStats& stats) {
    check_probability(pf, "join_probability.pf");
    check_probability(pd, "join_probability.pd");
    stats.validate();
    return (1.0 - pf) * stats.p_idle + (1.0 - pd) * stats.p_busy;
}

std::vector<double> contention_size_pmf(std::span<const double> join) {
    const int n = static_cast<int>(join.size());
    for (double v : join) check_probability(v, "contention_size_pmf");
    std::vector<double> pmf(n + 1, 0.0);
    if (n <= 12) {
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            double w = 1.0;
            for (int i = 0; i < n; ++i) w *= (mask >> i & 1u) ? join[i] : 1.0 - join[i];
            pmf[std::popcount(mask)] += w;
        }
        return pmf;
    }
    pmf[0] = 1.0;
    for (int k = 0; k < n; ++k)
        for (int l = k + 1; l >= 0; --l) {
            double v = pmf[l] * (1.0 - join[k]);
            if (l > 0) v += pmf[l - 1] * join[k];
            pmf[l] = v;
        }
    return pmf;
}

ContentionTable contention_table(BackoffConfig cfg, int n_max, const MacTiming& timing, Handshake hs) {
    ContentionTable ct;
    ct.ps_pt.assign(n_max + 1, 0.0);
    ct.t_slot.assign(n_max + 1, timing.slot);
    for (int n0 = 1; n0 <= n_max; ++n0) {
        FixedPoint fp = bianchi_fixed_point(cfg, n0);
        GenericSlot g = generic_slot_stats(fp.phi, n0, timing, hs);
        ct.ps_pt[n0] = g.p_s * g.p_t;
        ct.t_slot[n0] = g.t_slot_avg;
    }
    return ct;
}

namespace {

double cond_from_table(double tau, int n0, const ContentionTable& ct, const MacTiming& t, FloorMode fm) {
    if (n0 == 0) return 0.0;
    double k = (t.cycle - tau) / ct.t_slot[n0];
    if (k <= 0) return 0.0;
    if (fm == FloorMode::exact) k = std::floor(k + 1e-12);
    return k * ct.ps_pt[n0] * t.packet / t.cycle;
}

void check_tau(double tau, const HdScenario& sc) {
    if (!(tau > 0 && tau <= sc.timing.cycle * (1 + 1e-12))) throw DomainError("hdmac: tau must lie in (0, T]");
}

}  // namespace

double conditional_throughput(double tau, BackoffConfig cfg, int n0, const HdScenario& sc, FloorMode fm) {
    check_tau(tau, sc);
    if (n0 < 0) throw DomainError("conditional_throughput: n0 must be >= 0");
    if (n0 == 0) return 0.0;
    ContentionTable ct = contention_table(cfg, n0, sc.timing, sc.handshake);
    return cond_from_table(tau, n0, ct, sc.timing, fm);
}

std::vector<double> link_idle_probs(double tau, const HdScenario& sc) {
    std::vector<double> out(sc.links.size());
    for (size_t i = 0; i < sc.links.size(); ++i) {
        const HdLink& l = sc.links[i];
        SensorSpec s{l.snr, sc.f_s, tau, std::nullopt};
        double pf = pf_for_target_pd(l.pd_target, s);
        out[i] = join_probability(pf, l.pd_target, l.pu);
    }
    return out;
}

namespace {

double single_from_table(double tau, const ContentionTable& ct, const HdScenario& sc, FloorMode fm) {
    std::vector<double> join = link_idle_probs(tau, sc);
    std::vector<double> pmf = contention_size_pmf(join);
    double nt = 0.0;
    for (int n0 = 1; n0 <= sc.n_su; ++n0) nt += cond_from_table(tau, n0, ct, sc.timing, fm) * pmf[n0];
    return nt;
}

double multi_from_table(double tau, const ContentionTable& ct, const HdScenario& sc, FloorMode fm) {
    if (!sc.homogeneous()) throw ContractError("multi_channel_nt: analysis covers homogeneous links only; use simulation");
    const double p_idle = link_idle_probs(tau, sc).front();
    const double p_busy = 1.0 - p_idle;
    const double su_active = 1.0 - std::pow(p_busy, sc.n_ch);
    std::vector<double> join(sc.n_su, su_active);
    std::vector<double> pmf = contention_size_pmf(join);
    double nt = 0.0;
    for (int n0 = 1; n0 <= sc.n_su; ++n0) nt += cond_from_table(tau, n0, ct, sc.timing, fm) * pmf[n0];
    // E[l]/M
    return nt * p_idle;
}

}  // namespace

double single_channel_nt(double tau, BackoffConfig cfg, const HdScenario& sc, FloorMode fm) {
    sc.validate();
    if (sc.n_ch != 1) throw ContractError("single_channel_nt: scenario has more than one channel");
    check_tau(tau, sc);
    return single_from_table(tau, contention_table(cfg, sc.n_su, sc.timing, sc.handshake), sc, fm);
}

double multi_channel_nt(double tau, BackoffConfig cfg, const HdScenario& sc, FloorMode fm) {
    sc.validate();
    check_tau(tau, sc);
    return multi_from_table(tau, contention_table(cfg, sc.n_su, sc.timing, sc.handshake), sc, fm);
}

double hd_nt(double tau, const ContentionTable& ct, const HdScenario& sc, FloorMode fm) {
    check_tau(tau, sc);
    return sc.n_ch == 1 ? single_from_table(tau, ct, sc, fm) : multi_from_table(tau, ct, sc, fm);
}

double hd_nt(double tau, BackoffConfig cfg, const HdScenario& sc, FloorMode fm) {
    sc.validate();
    return hd_nt(tau, contention_table(cfg, sc.n_su, sc.timing, sc.handshake), sc, fm);
}

TauOptimum optimize_tau(BackoffConfig cfg, const HdScenario& sc, FloorMode fm) {
    sc.validate();
    ContentionTable ct = contention_table(cfg, sc.n_su, sc.timing, sc.handshake);
    const double T = sc.timing.cycle;
    auto f = [&](double tau) { return hd_nt(std::min(tau, T), ct, sc, fm); };
    // dense scan first: the floor makes NT(tau) a fine sawtooth around its unimodal envelope
    Maximum m = scan_then_golden(f, T / 4000.0, T, 3999, 1e-5 * T);
    TauOptimum r{m.x, m.f, m.x >= T * (1 - 1e-9) || m.x <= T / 4000.0};
    return r;
}

WTauOptimum optimize_w_tau(const HdScenario& sc, int w_max, int jobs) {
    if (w_max < 1) throw DomainError("optimize_w_tau: w_max must be >= 1");
    WTauOptimum out;
    out.per_w.resize(w_max);
    parallel_for(w_max, jobs, [&](int k) {
        BackoffConfig cfg{k + 1, sc.backoff.m};
        out.per_w[k] = optimize_tau(cfg, sc);
    });
    int best = 0;
    for (int k = 1; k < w_max; ++k)
        if (out.per_w[k].nt > out.per_w[best].nt) best = k;
    out.w = best + 1;
    out.tau = out.per_w[best].tau;
    out.nt = out.per_w[best].nt;
    return out;
}

}  // namespace cogmac
