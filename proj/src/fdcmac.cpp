#include "cogmac/fdcmac.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "cogmac/search.hpp"

namespace cogmac {

void FdcScenario::validate() const {
    timing.validate();
    pu.validate();
    si.validate();
    if (n_su < 1) throw DomainError("FdcScenario: n_su must be >= 1");
    if (!(p_access > 0 && p_access < 1)) throw DomainError("FdcScenario: p_access must lie in (0,1)");
    if (!(t_frame > 0)) throw DomainError("FdcScenario: t_frame must be > 0");
    if (!(t_frame < t_eva)) throw DomainError("FdcScenario: t_frame must be below t_eva");
    if (!pu.mean_idle || !pu.mean_active) throw DomainError("FdcScenario: PU mean idle/active times required");
    if (!(pd_target > 0 && pd_target < 1)) throw DomainError("FdcScenario: pd_target must lie in (0,1)");
    if (!(f_s > 0)) throw DomainError("FdcScenario: f_s must be > 0");
    if (!(p_pu.linear >= 0) || !(p_max.linear >= 0)) throw DomainError("FdcScenario: negative power");
}

MacTiming fdc_default_timing() {
    MacTiming t;
    t.slot = 20e-6;
    t.pd = 1e-6;
    t.sifs = 2 * t.slot;
    t.difs = 10 * t.slot;
    t.ack = t.cts = t.rts = 20 * t.slot;
    t.packet = 1.0;  // unused by the FD model, kept positive for validation
    return t;
}

FdcScenario fdc_default_scenario() {
    FdcScenario sc;
    sc.timing = fdc_default_timing();
    return sc;
}

FdcRates fdc_rates(const FdcScenario& sc, Power p_sen) {
    const double pd = sc.p_max.linear;
    const double i_dat = self_interference_power(sc.p_max, sc.si).linear;
    FdcRates r;
    const double i_sen = sc.sensing_rate_with_si ? sc.theta() * self_interference_power(p_sen, sc.si).linear : 0.0;
    r.gamma_s1 = p_sen.linear / (1.0 + i_sen);
    r.gamma_s2 = p_sen.linear / (1.0 + sc.p_pu.linear + i_sen);
    r.gamma_d1 = pd / (1.0 + sc.theta() * i_dat);
    r.gamma_d2 = pd / (1.0 + sc.p_pu.linear + sc.theta() * i_dat);
    return r;
}

double t_overhead(const FdcScenario& sc) {
    const MacTiming& t = sc.timing;
    double t_succ = t.difs + t.rts + t.sifs + t.cts + 2 * t.pd;
    double t_coll = t.difs + t.rts + t.pd;
    auto c = contention_overhead(sc.p_access, sc.n_su, t.slot, t_succ, t_coll);
    return c.total + 2 * t.sifs + 2 * t.pd + t.ack;
}

namespace {

// integrals of e^{u s} weighted by 1, (s-a), (b-s) over [a, b]; stable as u -> 0
struct ExpMoments {
    double i0, up, down;
};

ExpMoments exp_moments(double u, double a, double b) {
    const double h = b - a;
    const double z = u * h;
    double p1, p2;
    if (std::fabs(z) < 1e-5) {
        p1 = 1.0 + z / 2.0 + z * z / 6.0;
        p2 = 0.5 + z / 3.0 + z * z / 8.0;
    } else {
        p1 = std::expm1(z) / z;
        p2 = (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
    }
    const double ea = std::exp(u * a);
    ExpMoments m;
    m.i0 = ea * h * p1;
    m.up = ea * h * h * p2;
    m.down = h * m.i0 - m.up;
    return m;
}

}  // namespace

DataBits data_bits(const FdcScenario& sc, double t_s, Power p_sen) {
    sc.validate();
    const double T = sc.t_frame;
    if (!(t_s > 0 && t_s <= T * (1 + 1e-12))) throw DomainError("data_bits: t_s must lie in (0, T]");
    t_s = std::min(t_s, T);
    if (p_sen.linear > sc.p_max.linear * (1 + 1e-12)) throw DomainError("data_bits: p_sen above p_max");

    const double tid = *sc.pu.mean_idle, tac = *sc.pu.mean_active;
    const double u = 1.0 / tac - 1.0 / tid;
    const double t_ove = t_overhead(sc);
    const double ke = sc.pu.p_idle * std::exp(-(t_ove / tid + T / tac));
    const double phi = sc.phi();
    const FdcRates g = fdc_rates(sc, p_sen);
    const double flows = sc.sensing_rate_with_si ? phi : 1.0;
    const double ls1 = flows * std::log2(1 + g.gamma_s1), ls2 = flows * std::log2(1 + g.gamma_s2);
    const double ld1 = std::log2(1 + g.gamma_d1), ld2 = std::log2(1 + g.gamma_d2);

    DataBits r;
    r.eps = fd_threshold_for_target(sc.pd_target, t_s, sc.pu, sc.f_s, p_sen, sc.p_pu, sc.si);
    r.pf00 = fd_pf00(r.eps, t_s, sc.f_s, p_sen, sc.si);
    const double ok = 1.0 - r.pf00;

    // PU idle for the whole data phase
    r.b1 = ke * std::exp(u * T) * (t_s * ls1 + phi * ok * (T - t_s) * ld1);

    // PU arrives during the transmission stage
    if (t_s < T) {
        ExpMoments m = exp_moments(u, t_s, T);
        r.b2 = ke / tid * (t_s * ls1 * m.i0 + phi * ok * (ld2 * m.down + ld1 * m.up));
    }

    // PU arrives during the FD sensing stage
    const double td11 = phi * (T - t_s) * ld2;
    ExpMoments s = exp_moments(u, 0.0, t_s);
    r.b31 = ke / tid * (ls1 * s.up + ls2 * s.down + td11 * s.i0);
    if (td11 > 0) {
        auto f = [&](double t) {
            t = std::min(std::max(t, 0.0), t_s);
            return fd_pd01(r.eps, t_s, t, sc.f_s, p_sen, sc.p_pu, sc.si) * std::exp(u * t) / tid;
        };
        double err = 0;
        double t32 = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, t_s, 15, 1e-10, &err);
        if (!std::isfinite(t32) || err > 1e-8)
            throw NumericError("data_bits: quadrature failed for the sensing-stage detection integral on [0, " +
                               std::to_string(t_s) + "]");
        r.b32 = -ke * td11 * t32;
    }
    r.b3 = r.b31 + r.b32;
    return r;
}

double fdc_nt(const FdcScenario& sc, double t_s, Power p_sen) {
    return data_bits(sc, t_s, p_sen).total() / (t_overhead(sc) + sc.t_frame);
}

Power critical_psen(const FdcScenario& sc) {
    const double pd = sc.p_max.linear;
    const double i = self_interference_power(sc.p_max, sc.si).linear;
    const double x = 1.0 + pd / (1.0 + i);
    return Power{x * x - 1.0};
}

TsOptimum optimize_ts(const FdcScenario& sc, Power p_sen) {
    sc.validate();
    const double T = sc.t_frame;
    TsOptimum r;
    if (sc.mode == FdMode::fdtx && !sc.sensing_rate_with_si && p_sen.linear > critical_psen(sc).linear) {
        // increasing over the whole data phase
        r.t_s = T;
        r.nt = fdc_nt(sc, T, p_sen);
        r.boundary = true;
        return r;
    }
    auto f = [&](double ts) { return fdc_nt(sc, ts, p_sen); };
    // smallest admissible sensing time keeps f_s T_S >= 1
    const double lo = std::max(T * 1e-3, 1.0 / sc.f_s);
    Maximum m = scan_then_golden(f, lo, T, 48, 1e-5 * T);
    r.t_s = m.x;
    r.nt = m.f;
    r.boundary = m.x >= T * (1 - 1e-9);
    return r;
}

FdcConfiguration configure(const FdcScenario& sc, const std::vector<Power>& grid, int jobs) {
    if (grid.empty()) throw ContractError("configure: empty P_sen grid");
    for (const Power& p : grid)
        if (!(p.linear >= 0 && p.linear <= sc.p_max.linear * (1 + 1e-12)))
            throw DomainError("configure: P_sen grid must lie in [0, P_max]");
    FdcConfiguration out;
    out.table.resize(grid.size());
    parallel_for(static_cast<int>(grid.size()), jobs, [&](int k) { out.table[k] = {grid[k], optimize_ts(sc, grid[k])}; });
    size_t best = 0;
    for (size_t k = 1; k < out.table.size(); ++k)
        if (out.table[k].best.nt > out.table[best].best.nt) best = k;
    out.t_s = out.table[best].best.t_s;
    out.p_sen = out.table[best].p_sen;
    out.nt = out.table[best].best.nt;
    return out;
}

}  // namespace cogmac
