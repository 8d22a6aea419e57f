#include "app/reproduce.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "app/config.hpp"
#include "cogmac/assign.hpp"
#include "cogmac/fdcmac.hpp"
#include "cogmac/hdmac.hpp"
#include "cogmac/sdcss.hpp"
#include "cogmac/search.hpp"
#include "cogmac/sim.hpp"

namespace cogmac::app {

namespace {

std::string g6(double v) { return fmt::format("{:.6g}", v); }

Check within(std::string name, double ref, double got, double tol, const std::string& unit = "") {
    Check c;
    c.name = std::move(name);
    c.reference = g6(ref) + unit;
    c.computed = g6(got) + unit;
    c.tolerance = "+-" + g6(tol) + unit;
    c.pass = std::fabs(got - ref) <= tol;
    return c;
}

// ---------------------------------------------------------------- critical power

Report psen_bar() {
    Report r{"ch6_psen_bar", {}};
    FdcScenario a = fdc_default_scenario();
    a.si = {0.7, 1.0};
    a.p_max = Power::from_db(15.0);
    r.checks.push_back(within("P_sen critical, zeta=0.7 xi=1", 6.6294, critical_psen(a).db(), 0.01, " dB"));
    FdcScenario b = fdc_default_scenario();
    b.si = {0.08, 1.0};
    b.p_max = Power::from_db(15.0);
    r.checks.push_back(within("P_sen critical, zeta=0.08 xi=1", 19.9201, critical_psen(b).db(), 0.01, " dB"));
    return r;
}

// ---------------------------------------------------------------- FD optimum

std::vector<Power> psen_grid(double lo_db, double hi_db, double step_db) {
    std::vector<Power> g;
    for (int k = 0; lo_db + k * step_db <= hi_db + 1e-9; ++k) g.push_back(Power::from_db(lo_db + k * step_db));
    return g;
}

// 0.25 dB scan over [0, P_max], then 0.05 dB around the coarse optimum
FdcConfiguration two_pass_configure(const FdcScenario& sc, int jobs) {
    const double top = sc.p_max.db();
    FdcConfiguration coarse = configure(sc, psen_grid(0, top, 0.25), jobs);
    const double c = coarse.p_sen.db();
    FdcConfiguration fine = configure(sc, psen_grid(std::max(0.0, c - 0.25), std::min(top, c + 0.25), 0.05), jobs);
    return fine.nt >= coarse.nt ? fine : coarse;
}

void optimum_checks(Report& r, const std::string& label, const FdcScenario& sc, double nt, double ts, double ps_db,
                    int jobs) {
    FdcConfiguration cfg = two_pass_configure(sc, jobs);
    r.checks.push_back(within(label + " NT", nt, cfg.nt, 0.05 * nt));
    r.checks.push_back(within(label + " T_S*", ts * 1e3, cfg.t_s * 1e3, 0.3, " ms"));
    r.checks.push_back(within(label + " P_sen*", ps_db, cfg.p_sen.db(), 0.75, " dB"));
}

Report fd_optimum(const ReproduceOptions& opt) {
    Report r{"ch6_optimum", {}};
    FdcScenario hi = fdc_default_scenario();
    hi.si = {0.08, 0.95};
    optimum_checks(r, "high QSIC", hi, 2.3924, 2.44e-3, 4.6552, opt.jobs);
    FdcScenario lo = fdc_default_scenario();
    lo.si = {0.8, 0.95};
    optimum_checks(r, "low QSIC", lo, 1.6757, 15e-3, 15.0, opt.jobs);
    return r;
}

// ---------------------------------------------------------------- SDCSS greedy gap

const std::vector<std::pair<int, int>> kTable1Strong = {{0, 0}, {1, 0}, {2, 0}, {1, 1}, {3, 1},
                                                        {0, 2}, {3, 2}, {0, 3}, {2, 3}};

Report sdcss_table(const ReproduceOptions& opt) {
    Report r{"ch5_table1", {}};
    std::vector<double> ph;
    for (int k = 1; k <= 10; ++k) ph.push_back(k / 10.0);
    SenseAccessOptions so;
    so.a_inner = true;
    so.p_grid = {0.1};
    so.scan_points = 10;
    std::vector<double> g(ph.size()), b(ph.size());
    parallel_for(static_cast<int>(ph.size()), opt.jobs, [&](int k) {
        SdcssScenario sc = sdcss_two_level_scenario(4, 4, kTable1Strong, -15, -20, ph[k], 0.9);
        g[k] = greedy_sensing_sets(sc, so).best.nt;
        b[k] = brute_force_sensing_sets(sc, so, 1).nt;
        spdlog::info("P(H0)={:.1f}: greedy {:.5f}, optimal {:.5f}", ph[k], g[k], b[k]);
    });
    for (size_t k = 0; k < ph.size(); ++k) {
        Check c;
        c.name = fmt::format("greedy gap at P(H0)={:.1f}", ph[k]);
        c.reference = "<= 5% (published worst 4.09%)";
        double gap = b[k] > 0 ? 100.0 * (b[k] - g[k]) / b[k] : 0.0;
        c.computed = fmt::format("{:.3f}% (greedy {:.5f}, optimal {:.5f})", gap, g[k], b[k]);
        c.tolerance = "5%";
        c.pass = gap <= 5.0;
        r.checks.push_back(c);
    }
    return r;
}

// ---------------------------------------------------------------- multi-channel table

Report hd_table(const ReproduceOptions& opt) {
    Report r{"ch3_table", {}};
    const std::vector<int> ws = {16, 64, 182, 512, 1024};
    const std::vector<double> taus = {1e-3, 2.6e-3, 10e-3, 20e-3};
    constexpr int kDraws = 30;
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> snr_db(-20, -15), p_idle(0.7, 0.8);
    std::vector<HdScenario> draws;
    for (int d = 0; d < kDraws; ++d) {
        HdScenario sc = hd_default_scenario(10, 5);
        const double s = db_to_linear(snr_db(rng)), pi = p_idle(rng);
        for (auto& l : sc.links) {
            l.snr = s;
            l.pu = PuChannelStats::from_idle(pi);
        }
        draws.push_back(sc);
    }
    std::vector<std::vector<double>> cell(ws.size(), std::vector<double>(taus.size(), 0));
    parallel_for(static_cast<int>(ws.size()), opt.jobs, [&](int wi) {
        BackoffConfig cfg{ws[wi], 4};
        for (size_t ti = 0; ti < taus.size(); ++ti) {
            double acc = 0;
            for (const auto& sc : draws) acc += multi_channel_nt(taus[ti], cfg, sc);
            cell[wi][ti] = acc / kDraws;
        }
    });
    for (size_t wi = 0; wi < ws.size(); ++wi) {
        std::string row;
        for (size_t ti = 0; ti < taus.size(); ++ti) row += fmt::format(" {:.4f}", cell[wi][ti]);
        spdlog::info("W={:5d}:{}", ws[wi], row);
    }
    const size_t w0 = 2, t0 = 1;
    const double star = cell[w0][t0];
    Check band;
    band.name = "NT(W=182, tau=2.6 ms) in band";
    band.reference = "[0.63, 0.73] (published 0.6822)";
    band.computed = g6(star);
    band.tolerance = "band";
    band.pass = star >= 0.63 && star <= 0.73;
    r.checks.push_back(band);
    double row_max = 0, col_max = 0;
    for (double v : cell[w0]) row_max = std::max(row_max, v);
    for (const auto& rw : cell) col_max = std::max(col_max, rw[t0]);
    Check rc;
    rc.name = "row maximum (over tau at W=182)";
    rc.reference = "max " + g6(row_max);
    rc.computed = g6(star);
    rc.tolerance = "0.01";
    rc.pass = star >= row_max - 0.01;
    r.checks.push_back(rc);
    Check cc;
    cc.name = "column maximum (over W at tau=2.6 ms)";
    cc.reference = "max " + g6(col_max);
    cc.computed = g6(star);
    cc.tolerance = "0.01";
    cc.pass = star >= col_max - 0.01;
    r.checks.push_back(cc);
    return r;
}

// ---------------------------------------------------------------- analytic vs Monte Carlo

struct Comparison {
    double analytic = 0;
    SimEstimate sim;
    std::optional<double> e_t;  // assignment error bound, analytic - sim must not exceed it
};

struct SimCase {
    std::string name;
    std::function<Comparison(long cycles, std::uint64_t seed)> run;
};

HdScenario hd_hetero(int n, std::uint64_t seed) {
    HdScenario sc = hd_default_scenario(n, 1);
    std::mt19937_64 g(seed);
    for (auto& l : sc.links) {
        l.snr = db_to_linear(std::uniform_real_distribution<>(-20, -15)(g));
        l.pu = PuChannelStats::from_idle(std::uniform_real_distribution<>(0.7, 0.8)(g));
    }
    return sc;
}

HdScenario hd_homo(int n, int m) {
    HdScenario sc = hd_default_scenario(n, m);
    for (auto& l : sc.links) {
        l.snr = db_to_linear(-17.5);
        l.pu = PuChannelStats::from_idle(0.75);
    }
    return sc;
}

Comparison hd_case(const HdScenario& sc, BackoffConfig cfg, double tau, long cycles, std::uint64_t seed) {
    return {hd_nt(tau, cfg, sc), sim_hdmac(sc, tau, cfg, cycles, seed), std::nullopt};
}

AvailabilityMatrix random_availability(int n, int m, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::vector<std::vector<double>> p(n, std::vector<double>(m));
    for (auto& r : p)
        for (auto& v : r) v = std::uniform_real_distribution<>(0.7, 0.9)(g);
    return AvailabilityMatrix(p);
}

Comparison sdcss_table_case(double ph, double tau0, long cycles, std::uint64_t seed) {
    SdcssScenario sc = sdcss_two_level_scenario(4, 4, kTable1Strong, -15, -20, ph, 0.9);
    SensingSets sets(4, 4);
    std::vector<std::vector<double>> tau(4, std::vector<double>(4, 0));
    for (auto [i, j] : kTable1Strong) {
        sets.add(i, j);
        tau[i][j] = tau0;
    }
    SdcssParams prm = sc.params(tau, 0.1026);
    return {sdcss_nt_no_err(sets, prm), sim_sdcss(sets, prm, nullptr, cycles, seed), std::nullopt};
}

Comparison sdcss_err_case(double pe, long cycles, std::uint64_t seed) {
    SdcssScenario sc = sdcss_two_level_scenario(4, 3, {{0, 0}, {1, 1}, {2, 2}, {3, 0}}, -15, -20, 0.8, 0.9);
    SensingSets sets(4, 3);
    for (auto [i, j] : std::vector<std::pair<int, int>>{{0, 0}, {1, 0}, {3, 0}, {1, 1}, {2, 1}, {2, 2}, {0, 2}})
        sets.add(i, j);
    std::vector<std::vector<double>> tau(4, std::vector<double>(3, 0));
    for (int i = 0; i < 4; ++i)
        for (int j : sets.of_su(i)) tau[i][j] = 2e-3;
    SdcssParams prm = sc.params(tau, 0.2);
    ReportErrorMatrix e(4, pe);
    for (int i = 0; i < 4; ++i) e.at(i, i) = 0;
    return {sdcss_nt_with_err(sets, prm, e), sim_sdcss(sets, prm, &e, cycles, seed), std::nullopt};
}

Comparison fdc_case(FdcScenario sc, long cycles, std::uint64_t seed) {
    const Power ps = Power::from_db(4.6552);
    return {fdc_nt(sc, 2.44e-3, ps), sim_fdcmac(sc, 2.44e-3, ps, cycles, seed), std::nullopt};
}

std::vector<SimCase> sim_cases() {
    std::vector<SimCase> cs;
    cs.push_back({"hdmac N=1", [](long n, std::uint64_t s) { return hd_case(hd_hetero(1, 7), {32, 3}, 2.6e-3, n, s); }});
    cs.push_back({"hdmac N=5 heterogeneous",
                  [](long n, std::uint64_t s) { return hd_case(hd_hetero(5, 7), {32, 3}, 2.6e-3, n, s); }});
    cs.push_back({"hdmac N=10 heterogeneous W=32",
                  [](long n, std::uint64_t s) { return hd_case(hd_hetero(10, 7), {32, 3}, 2.6e-3, n, s); }});
    cs.push_back({"hdmac N=10 W=64", [](long n, std::uint64_t s) { return hd_case(hd_homo(10, 1), {64, 3}, 2.6e-3, n, s); }});
    cs.push_back({"hdmac N=10 RTS/CTS W=16", [](long n, std::uint64_t s) {
                      HdScenario sc = hd_homo(10, 1);
                      sc.handshake = Handshake::rtscts;
                      return hd_case(sc, {16, 3}, 2.6e-3, n, s);
                  }});
    cs.push_back({"hdmac multi N=10 M=5 W=182 m=4",
                  [](long n, std::uint64_t s) { return hd_case(hd_homo(10, 5), {182, 4}, 2.6e-3, n, s); }});
    cs.push_back({"assign 3x6 overlapping example", [](long n, std::uint64_t s) {
                      AvailabilityMatrix a = random_availability(3, 6, 3);
                      AssignmentState st(3, 6);
                      for (auto [i, j] : std::vector<std::pair<int, int>>{
                               {0, 0}, {1, 1}, {2, 2}, {0, 3}, {1, 3}, {1, 4}, {2, 4}, {0, 5}, {1, 5}, {2, 5}})
                          st.add(i, j);
                      AssignConfig cfg;
                      OverlapResult ov = with_overhead(st, a, cfg);
                      Comparison c;
                      c.analytic = exact_throughput(st, a, ov.delta).total;
                      c.sim = sim_assign(st, a, nullptr, ov.w, cfg.timing, n, s).total;
                      c.e_t = throughput_error_bound(cfg.eps_p, a, st);
                      return c;
                  }});
    cs.push_back({"assign 5x5 greedy, imperfect sensing", [](long n, std::uint64_t s) {
                      AvailabilityMatrix a = random_availability(5, 5, 5);
                      std::mt19937_64 g(55);
                      SensingErrorMatrix e;
                      e.pd.assign(5, std::vector<double>(5, 0.9));
                      e.pf.assign(5, std::vector<double>(5));
                      for (auto& r : e.pf)
                          for (auto& v : r) v = std::uniform_real_distribution<>(0.1, 0.15)(g);
                      AssignConfig cfg;
                      OverlapResult ov = greedy_overlap(a, cfg);
                      Comparison c;
                      c.analytic = exact_throughput_imperfect(ov.state, a, e, ov.delta).total;
                      c.sim = sim_assign(ov.state, a, &e, ov.w, cfg.timing, n, s).total;
                      c.e_t = throughput_error_bound(cfg.eps_p, a, ov.state);
                      return c;
                  }});
    cs.push_back({"sdcss 4x4 P(H0)=0.5 tau=1 ms", [](long n, std::uint64_t s) { return sdcss_table_case(0.5, 1e-3, n, s); }});
    cs.push_back({"sdcss 4x4 P(H0)=0.9 tau=2 ms", [](long n, std::uint64_t s) { return sdcss_table_case(0.9, 2e-3, n, s); }});
    cs.push_back({"sdcss 4x3 report errors P_e=0.01", [](long n, std::uint64_t s) { return sdcss_err_case(0.01, n, s); }});
    cs.push_back({"sdcss 4x3 report errors P_e=0.05", [](long n, std::uint64_t s) { return sdcss_err_case(0.05, n, s); }});
    cs.push_back({"fdcmac default PU", [](long n, std::uint64_t s) { return fdc_case(fdc_default_scenario(), n, s); }});
    cs.push_back({"fdcmac slow PU", [](long n, std::uint64_t s) {
                      FdcScenario sc = fdc_default_scenario();
                      sc.pu = PuChannelStats::from_means(1.5, 0.5);
                      return fdc_case(sc, n, s);
                  }});
    cs.push_back({"fdcmac HDTx", [](long n, std::uint64_t s) {
                      FdcScenario sc = fdc_default_scenario();
                      sc.mode = FdMode::hdtx;
                      return fdc_case(sc, n, s);
                  }});
    return cs;
}

Report sim_agreement(const ReproduceOptions& opt) {
    Report r{"sim_agreement", {}};
    auto cases = sim_cases();
    std::vector<Comparison> out(cases.size());
    parallel_for(static_cast<int>(cases.size()), opt.jobs, [&](int k) {
        std::uint64_t st = opt.seed + 0x9E3779B97F4A7C15ULL * (k + 1);
        out[k] = cases[k].run(opt.cycles, splitmix64(st));
        spdlog::info("{}: analytic {:.5f}, sim {:.5f} +- {:.5f}", cases[k].name, out[k].analytic, out[k].sim.mean,
                     out[k].sim.half_ci95);
    });
    for (size_t k = 0; k < cases.size(); ++k) {
        const Comparison& c = out[k];
        Check ch;
        ch.name = cases[k].name;
        ch.reference = "analytic " + g6(c.analytic);
        ch.computed = fmt::format("sim {} +- {} (gap {:+.2f}%)", g6(c.sim.mean), g6(c.sim.half_ci95),
                                  100.0 * (c.sim.mean - c.analytic) / c.analytic);
        ch.tolerance = "max(2%, CI)";
        ch.pass = c.sim.agrees(c.analytic);
        r.checks.push_back(ch);
        if (c.e_t) {
            Check b;
            b.name = cases[k].name + ", error bound";
            b.reference = "analytic - sim <= E_t = " + g6(*c.e_t);
            b.computed = g6(c.analytic - c.sim.mean);
            b.tolerance = "+CI";
            b.pass = c.analytic - c.sim.mean <= *c.e_t + c.sim.half_ci95;
            r.checks.push_back(b);
        }
    }
    return r;
}

}  // namespace

bool Report::pass() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const std::vector<std::string>& reproduce_targets() {
    static const std::vector<std::string> t = {"ch6_psen_bar", "ch6_optimum", "ch5_table1", "ch3_table",
                                               "sim_agreement"};
    return t;
}

Report reproduce(const std::string& target, const ReproduceOptions& opt) {
    if (target == "ch6_psen_bar") return psen_bar();
    if (target == "ch6_optimum") return fd_optimum(opt);
    if (target == "ch5_table1") return sdcss_table(opt);
    if (target == "ch3_table") return hd_table(opt);
    if (target == "sim_agreement") {
        if (opt.cycles < kMinSimCycles) throw InputError(fmt::format("cycles must be >= {}", kMinSimCycles));
        return sim_agreement(opt);
    }
    std::string known;
    for (const auto& t : reproduce_targets()) known += (known.empty() ? "" : ", ") + t;
    throw InputError("unknown reproduce target '" + target + "' (known: " + known + ")");
}

void print_report(std::ostream& os, const Report& r) {
    for (const auto& c : r.checks)
        os << fmt::format("[{}] {}: reference {}, computed {}, tolerance {}\n", c.pass ? "PASS" : "FAIL", c.name,
                          c.reference, c.computed, c.tolerance);
    os << fmt::format("{}: {}\n", r.target, r.pass() ? "PASS" : "FAIL");
}

Table report_table(const Report& r) {
    Table t;
    t.header = {"target", "check", "reference", "computed", "tolerance", "verdict"};
    for (const auto& c : r.checks)
        t.rows.push_back({r.target, c.name, c.reference, c.computed, c.tolerance, c.pass ? "pass" : "fail"});
    return t;
}

}  // namespace cogmac::app
