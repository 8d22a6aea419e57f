#include "cogmac/csma.hpp"

#include <cmath>
#include <limits>

namespace cogmac {

void BackoffConfig::validate() const {
    if (w0 < 1) throw DomainError("BackoffConfig: w0 must be >= 1");
    if (m < 0) throw DomainError("BackoffConfig: m must be >= 0");
}

double bianchi_phi_of_p(double p, BackoffConfig cfg) {
    cfg.validate();
    const double w = cfg.w0;
    // geometric sum written out so p = 1/2 is not singular
    double s = 0.0, term = 1.0;
    for (int k = 0; k < cfg.m; ++k) {
        s += term;
        term *= 2.0 * p;
    }
    return 2.0 / (1.0 + w + p * w * s);
}

FixedPoint bianchi_fixed_point(BackoffConfig cfg, int n0) {
    cfg.validate();
    if (n0 < 1) throw DomainError("bianchi_fixed_point: n0 must be >= 1");
    auto induced = [&](double phi) { return 1.0 - std::pow(1.0 - phi, n0 - 1); };
    if (n0 == 1) {
        double phi = bianchi_phi_of_p(0.0, cfg);
        return {phi, 0.0};
    }
    // g(phi) = phi - phi_of_p(p(phi)) is increasing; root is unique in (0,1]
    auto g = [&](double phi) { return phi - bianchi_phi_of_p(induced(phi), cfg); };
    double lo = 0.0, hi = 1.0;
    if (g(hi) <= 0) return {1.0, induced(1.0)};
    int it = 0;
    while (hi - lo > 1e-15 && it < 200) {
        double mid = 0.5 * (lo + hi);
        if (g(mid) < 0)
            lo = mid;
        else
            hi = mid;
        ++it;
    }
    double phi = 0.5 * (lo + hi);
    if (std::fabs(g(phi)) > 1e-10) throw NumericError("bianchi_fixed_point: residual above 1e-10");
    return {phi, induced(phi)};
}

void busy_durations(const MacTiming& t, Handshake hs, double& ts, double& tc) {
    if (hs == Handshake::basic) {
        ts = t.header + t.packet + t.sifs + 2 * t.pd + t.ack + t.difs;
        tc = t.header + t.packet + t.difs + t.pd;
    } else {
        ts = t.header + t.packet + 3 * t.sifs + 2 * t.pd + t.rts + t.cts + t.ack + t.difs;
        tc = t.header + t.difs + t.rts + t.pd;
    }
}

GenericSlot generic_slot_stats(double phi, int n0, const MacTiming& timing, Handshake hs) {
    check_probability(phi, "generic_slot_stats.phi");
    if (n0 < 1) throw DomainError("generic_slot_stats: n0 must be >= 1");
    GenericSlot g;
    busy_durations(timing, hs, g.t_success, g.t_collision);
    g.p_t = 1.0 - std::pow(1.0 - phi, n0);
    g.p_s = g.p_t > 0 ? n0 * phi * std::pow(1.0 - phi, n0 - 1) / g.p_t : 0.0;
    g.probs.p_idle = 1.0 - g.p_t;
    g.probs.p_succ = g.p_t * g.p_s;
    g.probs.p_coll = g.p_t * (1.0 - g.p_s);
    g.t_slot_avg = (1.0 - g.p_t) * timing.slot + g.p_t * g.p_s * g.t_success + g.p_t * (1.0 - g.p_s) * g.t_collision;
    return g;
}

SlotOutcomeProbs ppersist_slot_probs(double p, int n0) {
    check_probability(p, "ppersist_slot_probs.p");
    if (n0 < 1) throw DomainError("ppersist_slot_probs: n0 must be >= 1");
    SlotOutcomeProbs r;
    r.p_succ = n0 * p * std::pow(1.0 - p, n0 - 1);
    r.p_idle = std::pow(1.0 - p, n0);
    r.p_coll = 1.0 - r.p_succ - r.p_idle;
    if (r.p_coll < 0) r.p_coll = 0;  // rounding at n0 = 1
    return r;
}

ContentionBreakdown contention_overhead(double p, int n0, double slot, double t_success_hs, double t_collision) {
    if (!(p > 0 && p < 1)) throw DomainError("contention_overhead: p must lie in (0,1)");
    if (n0 < 1) throw DomainError("contention_overhead: n0 must be >= 1");
    ContentionBreakdown c;
    double pi = std::pow(1.0 - p, n0);
    double ps = n0 * p * std::pow(1.0 - p, n0 - 1);
    if (!(ps > 0) || !(1.0 - pi > 0)) throw NumericError("contention_overhead: success probability underflow");
    c.mean_idle = pi / (1.0 - pi) * slot;
    c.mean_collisions = n0 == 1 ? 0.0 : std::max(0.0, (1.0 - pi) / ps - 1.0);
    c.t_success_hs = t_success_hs;
    c.t_collision = t_collision;
    c.total = c.mean_collisions * t_collision + c.mean_idle * (c.mean_collisions + 1.0) + t_success_hs;
    if (!std::isfinite(c.total)) throw NumericError("contention_overhead: divergent overhead");
    return c;
}

ContentionBreakdown ppersist_contention_detail(double p, int n0, const MacTiming& t) {
    return contention_overhead(p, n0, t.slot, t.difs + t.rts + t.cts + 2 * t.pd, t.rts + t.difs + t.pd);
}

double ppersist_contention_overhead(double p, int n0, const MacTiming& timing) {
    return ppersist_contention_detail(p, n0, timing).total;
}

double ppersist_data_time(const MacTiming& t) { return t.packet + 2 * t.sifs + 2 * t.pd + t.ack; }

double ppersist_saturation_throughput(double p, int n0, const MacTiming& timing) {
    double ts = ppersist_data_time(timing);
    if (n0 == 1 && p == 1.0) {
        double hs = timing.difs + timing.rts + timing.cts + 2 * timing.pd;
        return ts / (hs + ts);
    }
    return ts / (ppersist_contention_overhead(p, n0, timing) + ts);
}

}  // namespace cogmac
