#include "app/experiment.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <utility>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cogmac/assign.hpp"
#include "cogmac/csma.hpp"
#include "cogmac/fdcmac.hpp"
#include "cogmac/hdmac.hpp"
#include "cogmac/sdcss.hpp"
#include "cogmac/search.hpp"
#include "cogmac/sim.hpp"

namespace cogmac::app {

namespace {

using Columns = std::vector<std::pair<std::string, std::string>>;

struct PointResult {
    Columns extra;  // protocol specific, before the NT columns
    std::optional<double> analytic;
    std::optional<SimEstimate> sim;
};

struct Ctx {
    const Params& p;
    Mode mode;
    bool dry;  // build and check only
    std::uint64_t seed;
    long cycles;
};

bool wants_analytic(Mode m) { return m == Mode::analytic || m == Mode::both; }
bool wants_sim(Mode m) { return m == Mode::simulate || m == Mode::both; }

void check_prob(const Params& p, const std::string& key, double v) {
    if (!(v >= 0 && v <= 1)) p.fail(key, fmt::format("value {} outside [0, 1]", v));
}

void check_pos(const Params& p, const std::string& key, double v) {
    if (!(v > 0) || !std::isfinite(v)) p.fail(key, fmt::format("value {} must be > 0", v));
}

int count_key(const Params& p, const std::string& key, long def, long lo) {
    long v = p.integer(key, def);
    if (v < lo) p.fail(key, fmt::format("must be >= {}", lo));
    if (v > 1'000'000) p.fail(key, "too large");
    return static_cast<int>(v);
}

void timing_overrides(const Params& p, MacTiming& t) {
    auto set = [&](const char* k, double& f) {
        std::string key = std::string("timing.") + k;
        if (p.has(key)) {
            f = p.num(key);
            if (!(f >= 0)) p.fail(key, "durations must be >= 0");
        }
    };
    set("slot", t.slot);
    set("sifs", t.sifs);
    set("difs", t.difs);
    set("pd", t.pd);
    set("ack", t.ack);
    set("rts", t.rts);
    set("cts", t.cts);
    set("packet", t.packet);
    set("header", t.header);
    set("report_slot", t.report_slot);
    set("cycle", t.cycle);
}

// library precondition failures while building a point become input errors at the scenario table
template <class F>
auto guarded(const Params& p, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const DomainError& e) {
        throw InputError(fmt::format("{}:{}: {}", p.spec().file, p.spec().scenario_line, e.what()));
    } catch (const ContractError& e) {
        throw InputError(fmt::format("{}:{}: {}", p.spec().file, p.spec().scenario_line, e.what()));
    }
}

// ------------------------------------------------------------------ hdmac

HdScenario build_hd(const Params& p, bool multi) {
    const int n = count_key(p, "n_su", 10, 1);
    const int m = count_key(p, "n_ch", multi ? 5 : 1, 1);
    if (!multi && m != 1) p.fail("n_ch", "hdmac_single uses one data channel");
    HdScenario sc = hd_default_scenario(n, m);
    sc.backoff.w0 = count_key(p, "w", sc.backoff.w0, 1);
    sc.backoff.m = count_key(p, "m", sc.backoff.m, 0);
    std::string hs = p.str("handshake", "basic");
    if (hs == "basic")
        sc.handshake = Handshake::basic;
    else if (hs == "rtscts")
        sc.handshake = Handshake::rtscts;
    else
        p.fail("handshake", "expected basic or rtscts");
    sc.f_s = p.num("f_s", sc.f_s);
    check_pos(p, "f_s", sc.f_s);
    const HdLink def;
    auto pi = p.per("p_idle", n, def.pu.p_idle);
    auto snr = p.per("snr", n, def.snr);
    auto pd = p.per("pd_target", n, def.pd_target);
    for (int i = 0; i < n; ++i) {
        check_prob(p, "p_idle", pi[i]);
        check_pos(p, "snr", snr[i]);
        if (!(pd[i] > 0 && pd[i] < 1)) p.fail("pd_target", "must lie in (0, 1)");
        sc.links[i].pu = PuChannelStats::from_idle(pi[i]);
        sc.links[i].snr = snr[i];
        sc.links[i].pd_target = pd[i];
    }
    timing_overrides(p, sc.timing);
    guarded(p, [&] {
        sc.validate();
        return 0;
    });
    return sc;
}

PointResult run_hd(const Ctx& c, bool multi) {
    HdScenario sc = build_hd(c.p, multi);
    PointResult r;
    if (c.mode == Mode::optimize) {
        std::optional<int> w_max;
        if (c.p.has("w_max")) w_max = count_key(c.p, "w_max", 0, 1);
        if (c.dry) return r;
        if (w_max) {
            WTauOptimum o = guarded(c.p, [&] { return optimize_w_tau(sc, *w_max, 1); });
            r.extra = {{"w", std::to_string(o.w)}, {"tau", format_number(o.tau)}};
            r.analytic = o.nt;
        } else {
            TauOptimum o = guarded(c.p, [&] { return optimize_tau(sc.backoff, sc); });
            r.extra = {{"tau", format_number(o.tau)}, {"boundary", o.boundary ? "1" : "0"}};
            r.analytic = o.nt;
        }
        return r;
    }
    const double tau = c.p.num("tau");
    if (!(tau > 0 && tau < sc.timing.cycle)) c.p.fail("tau", "must lie in (0, cycle)");
    if (multi && wants_analytic(c.mode) && !sc.homogeneous())
        c.p.fail("p_idle", "the multi-channel analysis covers homogeneous links only; use mode = \"simulate\"");
    if (c.dry) return r;
    if (wants_analytic(c.mode)) r.analytic = guarded(c.p, [&] { return hd_nt(tau, sc.backoff, sc); });
    if (wants_sim(c.mode)) r.sim = guarded(c.p, [&] { return sim_hdmac(sc, tau, sc.backoff, c.cycles, c.seed); });
    return r;
}

// ------------------------------------------------------------------ assign

const std::vector<std::string> kAssignAlgorithms = {"greedy_overlap",    "maxmin_overlap", "greedy_nonoverlap",
                                                    "maxmin_nonoverlap", "brute_sum",      "brute_maxmin"};

PointResult run_assign(const Ctx& c) {
    const Params& p = c.p;
    AvailabilityMatrix a;
    if (p.has("p")) {
        for (const char* k : {"n_su", "n_ch", "p_min", "p_max", "p_seed"})
            if (p.has(k)) p.fail(k, "not allowed together with an explicit p matrix");
        a = AvailabilityMatrix(p.matrix("p"));
        for (const auto& row : a.p)
            for (double v : row) check_prob(p, "p", v);
    } else {
        const int n = count_key(p, "n_su", 3, 1), m = count_key(p, "n_ch", 6, 1);
        const double lo = p.num("p_min", 0.7), hi = p.num("p_max", 0.9);
        check_prob(p, "p_min", lo);
        check_prob(p, "p_max", hi);
        if (lo > hi) p.fail("p_min", "p_min exceeds p_max");
        std::mt19937_64 rng(static_cast<std::uint64_t>(p.integer("p_seed", 1)));
        std::uniform_real_distribution<double> u(lo, hi);
        std::vector<std::vector<double>> rows(n, std::vector<double>(m));
        for (auto& row : rows)
            for (double& v : row) v = u(rng);
        a = AvailabilityMatrix(rows);
    }
    const int n = a.n_su(), m = a.n_ch();
    std::optional<SensingErrorMatrix> err;
    if (p.has("pd") || p.has("pf")) {
        SensingErrorMatrix e;
        e.pd = p.grid("pd", n, m, 1.0);
        e.pf = p.grid("pf", n, m, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) {
                check_prob(p, "pd", e.pd[i][j]);
                check_prob(p, "pf", e.pf[i][j]);
            }
        err = e;
    }
    AssignConfig cfg;
    cfg.eps_p = p.num("eps_p", cfg.eps_p);
    if (!(cfg.eps_p > 0 && cfg.eps_p < 1)) p.fail("eps_p", "must lie in (0, 1)");
    cfg.eps_delta = p.num("eps_delta", cfg.eps_delta);
    if (!(cfg.eps_delta >= 0)) p.fail("eps_delta", "must be >= 0");
    auto tset = [&](const char* k, double& f) {
        std::string key = std::string("timing.") + k;
        if (p.has(key)) {
            f = p.num(key);
            if (!(f >= 0)) p.fail(key, "durations must be >= 0");
        }
    };
    tset("theta", cfg.timing.theta);
    tset("rts", cfg.timing.rts);
    tset("cts", cfg.timing.cts);
    tset("sifs", cfg.timing.sifs);
    tset("sen", cfg.timing.sen);
    tset("syn", cfg.timing.syn);
    tset("cycle", cfg.timing.cycle);
    const std::string alg = p.str("algorithm", "greedy_overlap");
    bool known = false;
    for (const auto& k : kAssignAlgorithms) known = known || k == alg;
    if (!known) p.fail("algorithm", "unknown algorithm '" + alg + "'");
    if (err && alg.rfind("brute", 0) == 0) p.fail("algorithm", "brute force search assumes perfect sensing");
    std::optional<int> w_fixed;
    if (p.has("w")) w_fixed = count_key(p, "w", 2, 1);
    guarded(p, [&] {
        a.validate();
        if (err) err->validate(n, m);
        cfg.timing.validate();
        return 0;
    });
    PointResult r;
    if (c.dry) return r;

    OverlapResult o = guarded(p, [&]() -> OverlapResult {
        if (alg == "greedy_overlap") return greedy_overlap(a, cfg);
        if (alg == "maxmin_overlap") return maxmin_overlap(a, cfg);
        if (alg == "greedy_nonoverlap") return with_overhead(greedy_nonoverlap(a), a, cfg);
        if (alg == "maxmin_nonoverlap") return with_overhead(maxmin_greedy_nonoverlap(a), a, cfg);
        return brute_force_assignment(a, alg == "brute_sum" ? Objective::sum : Objective::maxmin, cfg, 1).best;
    });
    if (w_fixed) {
        o.w = *w_fixed;
        o.delta = guarded(p, [&] { return mac_overhead(o.w, cfg.timing); });
    }
    ThroughputBreakdown tb = guarded(p, [&] {
        return err ? exact_throughput_imperfect(o.state, a, *err, o.delta) : exact_throughput(o.state, a, o.delta);
    });
    r.extra = {{"w", std::to_string(o.w)},
               {"delta", format_number(o.delta)},
               {"overlap", o.state.has_overlap() ? "1" : "0"},
               {"nt_min", format_number(tb.min())},
               {"e_t", format_number(throughput_error_bound(cfg.eps_p, a, o.state))}};
    if (c.mode != Mode::simulate) r.analytic = tb.total;
    if (wants_sim(c.mode)) {
        AssignSimResult s = guarded(p, [&] {
            return sim_assign(o.state, a, err ? &*err : nullptr, o.w, cfg.timing, c.cycles, c.seed);
        });
        r.sim = s.total;
        r.extra.emplace_back("collision_rate", format_number(s.collision_rate));
    } else {
        r.extra.emplace_back("collision_rate", "");
    }
    return r;
}

// ------------------------------------------------------------------ sdcss

SdcssScenario build_sdcss(const Params& p) {
    const int n = count_key(p, "n_su", 4, 1), m = count_key(p, "n_ch", 4, 1);
    SdcssScenario sc;
    sc.n_su = n;
    sc.n_ch = m;
    if (p.has("snr")) {
        for (const char* k : {"strong", "snr_hi", "snr_lo"})
            if (p.has(k)) p.fail(k, "not allowed together with an explicit snr");
        auto g = p.grid("snr", n, m, 0);
        sc.snr = SnrGrid(n, m, 1.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) {
                check_pos(p, "snr", g[i][j]);
                sc.snr.at(i, j) = g[i][j];
            }
    } else {
        const double hi = p.num("snr_hi", db_to_linear(-15)), lo = p.num("snr_lo", db_to_linear(-20));
        check_pos(p, "snr_hi", hi);
        check_pos(p, "snr_lo", lo);
        sc.snr = SnrGrid(n, m, lo);
        if (p.has("strong")) {
            for (const auto& pr : p.matrix("strong")) {
                if (pr.size() != 2) p.fail("strong", "entries are [su, channel] pairs, 1-based");
                int i = static_cast<int>(pr[0]) - 1, j = static_cast<int>(pr[1]) - 1;
                if (pr[0] != std::floor(pr[0]) || pr[1] != std::floor(pr[1]) || i < 0 || i >= n || j < 0 || j >= m)
                    p.fail("strong", fmt::format("pair [{}, {}] out of range", pr[0], pr[1]));
                sc.snr.at(i, j) = hi;
            }
        }
    }
    auto pi = p.per("p_idle", m, 0.5);
    auto pd = p.per("pd_target", m, 0.9);
    for (int j = 0; j < m; ++j) {
        check_prob(p, "p_idle", pi[j]);
        if (!(pd[j] > 0 && pd[j] < 1)) p.fail("pd_target", "must lie in (0, 1)");
        sc.pu.push_back(PuChannelStats::from_idle(pi[j]));
    }
    sc.pd_targets = pd;
    sc.timing = sdcss_default_timing();
    timing_overrides(p, sc.timing);
    sc.f_s = p.num("f_s", sc.f_s);
    check_pos(p, "f_s", sc.f_s);
    guarded(p, [&] {
        sc.validate();
        return 0;
    });
    return sc;
}

SensingSets build_sets(const Params& p, int n, int m) {
    auto g = p.matrix("sets");
    if (static_cast<int>(g.size()) != n || static_cast<int>(g.front().size()) != m)
        p.fail("sets", fmt::format("expected a {}x{} 0/1 matrix", n, m));
    SensingSets s(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            if (g[i][j] != 0 && g[i][j] != 1) p.fail("sets", "entries must be 0 or 1");
            if (g[i][j] == 1) s.add(i, j);
        }
    if (p.has("a")) {
        auto a = p.list("a");
        if (static_cast<int>(a.size()) != m) p.fail("a", fmt::format("expected {} entries", m));
        for (int j = 0; j < m; ++j) {
            if (a[j] != std::floor(a[j])) p.fail("a", "entries must be integers");
            s.a[j] = static_cast<int>(a[j]);
        }
    }
    try {
        s.validate();
    } catch (const std::exception& e) {
        p.fail(p.has("a") ? "a" : "sets", e.what());
    }
    return s;
}

PointResult run_sdcss(const Ctx& c) {
    const Params& p = c.p;
    SdcssScenario sc = build_sdcss(p);
    const int n = sc.n_su, m = sc.n_ch;
    PointResult r;
    if (c.mode == Mode::optimize) {
        for (const char* k : {"sets", "a", "tau", "p", "report_error"})
            if (p.has(k)) p.fail(k, "not used by mode = \"optimize\"");
        SenseAccessOptions opt;
        if (p.has("p_grid")) {
            opt.p_grid = p.list("p_grid");
            for (double v : opt.p_grid)
                if (!(v > 0 && v <= 1)) p.fail("p_grid", "values must lie in (0, 1]");
        }
        opt.scan_points = count_key(p, "scan_points", opt.scan_points, 2);
        opt.a_inner = p.flag("a_inner", opt.a_inner);
        const std::string search = p.str("search", "greedy");
        if (search != "greedy" && search != "brute_force" && search != "both")
            p.fail("search", "expected greedy, brute_force or both");
        if (search != "greedy" && n * m > kBruteForceMaxPairs)
            p.fail("search", fmt::format("brute force covers at most {} pairs", kBruteForceMaxPairs));
        if (c.dry) return r;
        std::optional<SdcssConfig> greedy, best;
        if (search != "brute_force") greedy = guarded(p, [&] { return greedy_sensing_sets(sc, opt).best; });
        if (search != "greedy") best = guarded(p, [&] { return brute_force_sensing_sets(sc, opt, 1); });
        const SdcssConfig& shown = greedy ? *greedy : *best;
        r.extra = {{"p_access", format_number(shown.p)},
                   {"pairs", std::to_string(shown.sets.pairs())},
                   {"nt_greedy", greedy ? format_number(greedy->nt) : ""},
                   {"nt_optimal", best ? format_number(best->nt) : ""},
                   {"gap_percent", greedy && best ? format_number(100.0 * (best->nt - greedy->nt) / best->nt) : ""}};
        r.analytic = shown.nt;
        return r;
    }
    SensingSets sets = build_sets(p, n, m);
    auto tau = p.grid("tau", n, m, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            if (!sets.has(i, j)) tau[i][j] = 0;
            else check_pos(p, "tau", tau[i][j]);
        }
    const double pa = p.num("p", 0.1026);
    if (!(pa > 0 && pa <= 1)) p.fail("p", "must lie in (0, 1]");
    std::optional<ReportErrorMatrix> errs;
    if (p.has("report_error")) {
        auto g = p.grid("report_error", n, n, 0);
        ReportErrorMatrix e(n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                check_prob(p, "report_error", g[i][k]);
                e.at(i, k) = i == k ? 0.0 : g[i][k];
            }
        if (!e.all_zero()) {
            if (wants_analytic(c.mode) && (n > kReportErrMaxSu || m > kReportErrMaxCh))
                p.fail("report_error", fmt::format("the reporting-error analysis covers N <= {}, M <= {}",
                                                   kReportErrMaxSu, kReportErrMaxCh));
            errs = e;
        }
    }
    SdcssParams prm = guarded(p, [&] {
        SdcssParams q = sc.params(tau, pa);
        q.validate(sets);
        return q;
    });
    if (!(prm.total_sensing_time() + prm.reporting_time() < sc.timing.cycle))
        p.fail("tau", "sensing and reporting exceed the cycle");
    if (c.dry) return r;
    if (wants_analytic(c.mode))
        r.analytic = guarded(p, [&] { return errs ? sdcss_nt_with_err(sets, prm, *errs) : sdcss_nt_no_err(sets, prm); });
    if (wants_sim(c.mode))
        r.sim = guarded(p, [&] { return sim_sdcss(sets, prm, errs ? &*errs : nullptr, c.cycles, c.seed); });
    return r;
}

// ------------------------------------------------------------------ fdcmac

FdcScenario build_fdc(const Params& p) {
    FdcScenario sc = fdc_default_scenario();
    sc.n_su = count_key(p, "n_su", sc.n_su, 1);
    sc.p_access = p.num("p_access", sc.p_access);
    if (!(sc.p_access > 0 && sc.p_access <= 1)) p.fail("p_access", "must lie in (0, 1]");
    sc.t_frame = p.num("t_frame", sc.t_frame);
    check_pos(p, "t_frame", sc.t_frame);
    sc.t_eva = p.num("t_eva", sc.t_eva);
    check_pos(p, "t_eva", sc.t_eva);
    double mi = p.num("mean_idle", *sc.pu.mean_idle), ma = p.num("mean_active", *sc.pu.mean_active);
    check_pos(p, "mean_idle", mi);
    check_pos(p, "mean_active", ma);
    sc.pu = PuChannelStats::from_means(mi, ma);
    sc.p_pu.linear = p.num("p_pu", sc.p_pu.linear);
    check_pos(p, "p_pu", sc.p_pu.linear);
    sc.p_max.linear = p.num("p_max", sc.p_max.linear);
    check_pos(p, "p_max", sc.p_max.linear);
    sc.si.zeta = p.num("zeta", sc.si.zeta);
    if (!(sc.si.zeta >= 0)) p.fail("zeta", "must be >= 0");
    sc.si.xi = p.num("xi", sc.si.xi);
    if (!(sc.si.xi >= 0)) p.fail("xi", "must be >= 0");
    sc.pd_target = p.num("pd_target", sc.pd_target);
    if (!(sc.pd_target > 0 && sc.pd_target < 1)) p.fail("pd_target", "must lie in (0, 1)");
    sc.f_s = p.num("f_s", sc.f_s);
    check_pos(p, "f_s", sc.f_s);
    std::string mode = p.str("mode", "fdtx");
    if (mode == "fdtx")
        sc.mode = FdMode::fdtx;
    else if (mode == "hdtx")
        sc.mode = FdMode::hdtx;
    else
        p.fail("mode", "expected fdtx or hdtx");
    sc.sensing_rate_with_si = p.flag("sensing_rate_with_si", false);
    timing_overrides(p, sc.timing);
    guarded(p, [&] {
        sc.validate();
        return 0;
    });
    return sc;
}

PointResult run_fdc(const Ctx& c) {
    const Params& p = c.p;
    FdcScenario sc = build_fdc(p);
    PointResult r;
    if (c.mode == Mode::optimize) {
        std::vector<Power> grid;
        if (p.has("p_sen_grid")) {
            for (double v : p.list("p_sen_grid")) {
                if (!(v >= 0 && v <= sc.p_max.linear * (1 + 1e-12))) p.fail("p_sen_grid", "values must lie in [0, p_max]");
                grid.push_back(Power{v});
            }
        } else {
            // 0 dB up to P_max in 0.05 dB steps
            const double top = sc.p_max.db();
            for (int k = 0; k * 0.05 <= top + 1e-9; ++k) grid.push_back(Power::from_db(k * 0.05));
        }
        if (c.dry) return r;
        FdcConfiguration cfg = guarded(p, [&] { return configure(sc, grid, 1); });
        r.extra = {{"t_s", format_number(cfg.t_s)}, {"p_sen_db", format_number(cfg.p_sen.db())}};
        r.analytic = cfg.nt;
        return r;
    }
    const double t_s = p.num("t_s");
    if (!(t_s > 0 && t_s <= sc.t_frame * (1 + 1e-12))) p.fail("t_s", "must lie in (0, t_frame]");
    Power ps{p.num("p_sen")};
    if (!(ps.linear >= 0 && ps.linear <= sc.p_max.linear * (1 + 1e-12))) p.fail("p_sen", "must lie in [0, p_max]");
    if (c.dry) return r;
    if (wants_analytic(c.mode)) r.analytic = guarded(p, [&] { return fdc_nt(sc, t_s, ps); });
    if (wants_sim(c.mode)) r.sim = guarded(p, [&] { return sim_fdcmac(sc, t_s, ps, c.cycles, c.seed); });
    return r;
}

// ------------------------------------------------------------------ csma

PointResult run_csma(const Ctx& c) {
    const Params& p = c.p;
    const double pa = p.num("p");
    if (!(pa > 0 && pa <= 1)) p.fail("p", "must lie in (0, 1]");
    const int n0 = count_key(p, "n0", 1, 1);
    if (pa == 1.0 && n0 > 1) p.fail("p", "p = 1 with several users never succeeds");
    MacTiming t = sdcss_default_timing();
    timing_overrides(p, t);
    guarded(p, [&] {
        t.validate();
        return 0;
    });
    PointResult r;
    if (c.dry) return r;
    const double ts = ppersist_data_time(t);
    if (c.mode != Mode::simulate) r.analytic = guarded(p, [&] { return ppersist_saturation_throughput(pa, n0, t); });
    if (wants_sim(c.mode)) {
        const double hs = t.difs + t.rts + t.cts + 2 * t.pd, coll = t.rts + t.difs + t.pd;
        SimEstimate cont = guarded(p, [&] { return sim_ppersist_contention(pa, n0, t.slot, hs, coll, c.cycles, c.seed); });
        // ratio ts / (T_cont + ts), CI through the derivative
        SimEstimate e = cont;
        e.mean = ts / (cont.mean + ts);
        e.half_ci95 = ts / ((cont.mean + ts) * (cont.mean + ts)) * cont.half_ci95;
        r.sim = e;
    }
    return r;
}

PointResult run_point(const Ctx& c) {
    switch (c.p.spec().protocol) {
        case Protocol::hdmac_single: return run_hd(c, false);
        case Protocol::hdmac_multi: return run_hd(c, true);
        case Protocol::assign: return run_assign(c);
        case Protocol::sdcss: return run_sdcss(c);
        case Protocol::fdcmac: return run_fdc(c);
        case Protocol::csma: return run_csma(c);
    }
    return {};
}

std::vector<std::vector<size_t>> sweep_points(const ExperimentSpec& spec) {
    std::vector<std::vector<size_t>> pts{{}};
    for (const auto& ax : spec.sweep) {
        std::vector<std::vector<size_t>> next;
        for (const auto& pt : pts)
            for (size_t k = 0; k < ax.values.size(); ++k) {
                auto q = pt;
                q.push_back(k);
                next.push_back(std::move(q));
            }
        pts = std::move(next);
    }
    return pts;
}

}  // namespace

std::uint64_t point_seed(std::uint64_t base, std::size_t k) {
    std::uint64_t s = base ^ (0xD1B54A32D192ED03ULL * (static_cast<std::uint64_t>(k) + 1));
    return splitmix64(s);
}

void validate_experiment(const ExperimentSpec& spec) {
    if (spec.cycles && *spec.cycles < kMinSimCycles)
        throw InputError(fmt::format("{}: cycles must be >= {}", spec.file, kMinSimCycles));
    for (const auto& idx : sweep_points(spec)) {
        Params p(spec, apply_point(spec, idx));
        run_point(Ctx{p, spec.mode, true, 0, 0});
    }
}

Table run_experiment(const ExperimentSpec& spec, const RunOptions& opt) {
    const long cycles = opt.cycles.value_or(spec.cycles.value_or(kDefaultSimCycles));
    if (wants_sim(spec.mode) && cycles < kMinSimCycles)
        throw InputError(fmt::format("cycles must be >= {} (got {})", kMinSimCycles, cycles));
    const std::uint64_t seed = opt.seed.value_or(spec.seed.value_or(kDefaultSeed));
    validate_experiment(spec);

    const auto pts = sweep_points(spec);
    std::vector<PointResult> res(pts.size());
    std::vector<double> wall(pts.size());
    spdlog::info("{}: {} point(s), mode {}, seed {}, jobs {}", spec.file, pts.size(), to_string(spec.mode), seed,
                 opt.jobs);
    parallel_for(static_cast<int>(pts.size()), opt.jobs, [&](int k) {
        auto t0 = std::chrono::steady_clock::now();
        Params p(spec, apply_point(spec, pts[k]));
        res[k] = run_point(Ctx{p, spec.mode, false, point_seed(seed, k), cycles});
        wall[k] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        spdlog::debug("point {} done in {:.3f} s", k, wall[k]);
    });

    Table t;
    for (const auto& ax : spec.sweep) t.header.push_back(ax.path);
    if (!res.empty())
        for (const auto& [name, v] : res.front().extra) t.header.push_back(name);
    t.header.insert(t.header.end(), {"nt_analytic", "sim_mean", "sim_ci95"});
    if (spec.mode == Mode::both) t.header.push_back("rel_gap");
    if (opt.wall_time) t.header.push_back("wall_time_s");

    for (size_t k = 0; k < pts.size(); ++k) {
        const PointResult& r = res[k];
        std::vector<std::string> row;
        for (size_t a = 0; a < spec.sweep.size(); ++a) row.push_back(spec.sweep[a].labels[pts[k][a]]);
        for (const auto& [name, v] : r.extra) row.push_back(v);
        row.push_back(r.analytic ? format_number(*r.analytic) : "");
        row.push_back(r.sim ? format_number(r.sim->mean) : "");
        row.push_back(r.sim ? format_number(r.sim->half_ci95) : "");
        if (spec.mode == Mode::both)
            row.push_back(r.analytic && r.sim && *r.analytic != 0
                              ? format_number((r.sim->mean - *r.analytic) / *r.analytic)
                              : "");
        if (opt.wall_time) row.push_back(format_number(wall[k]));
        if (row.size() != t.header.size())
            throw std::logic_error("experiment: column count differs between sweep points");
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace cogmac::app
