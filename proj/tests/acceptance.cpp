// Acceptance runner: one verdict line per criterion.
//   cogmac_acceptance          all criteria
//   cogmac_acceptance 3 6      selected criteria
// Criteria 1-5 go through the reproduce targets, 6-8 compare against the oracles in this directory.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <string>

#include <fmt/format.h>

#include "app/reproduce.hpp"
#include "cogmac/hdmac.hpp"
#include "cogmac/sensing.hpp"
#include "oracles.hpp"

using namespace cogmac;

namespace {

// collects failures for one criterion; prints only the first few
struct Tally {
    int checks = 0;
    int failed = 0;
    void expect(bool ok, const std::string& what) {
        ++checks;
        if (ok) return;
        if (++failed <= 5) std::cout << "  mismatch: " << what << "\n";
    }
    void close(double got, double want, double rel, const std::string& what) {
        const double err = std::abs(got - want);
        expect(err <= rel * std::max(1.0, std::abs(want)), fmt::format("{}: got {:.12g}, want {:.12g}", what, got, want));
    }
    std::string summary() const { return fmt::format("{} checks, {} failed", checks, failed); }
};

bool via_reproduce(const std::string& target, std::string& note) {
    app::ReproduceOptions opt;
    app::Report r = app::reproduce(target, opt);
    app::print_report(std::cout, r);
    int bad = 0;
    for (const auto& c : r.checks) bad += !c.pass;
    note = fmt::format("{} ({} checks, {} failed)", target, r.checks.size(), bad);
    return r.pass();
}

std::vector<double> uniform(std::mt19937_64& g, int n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(g);
    return v;
}

bool oracle_suite(std::string& note) {
    Tally t;
    std::mt19937_64 g(20240601);

    for (int b = 1; b <= 10; ++b) {
        auto p = uniform(g, b, 0, 1);
        for (int a = 1; a <= b; ++a) t.close(at_least_a(p, a), oracle::fusion_enum(p, a), 1e-12, fmt::format("fusion a={} b={}", a, b));
    }

    for (int n = 1; n <= 12; ++n) {
        auto join = uniform(g, n, 0, 1);
        auto got = contention_size_pmf(join);
        auto want = oracle::contention_pmf_enum(join);
        t.expect(got.size() == want.size(), fmt::format("contention pmf size N={}", n));
        for (size_t k = 0; k < std::min(got.size(), want.size()); ++k)
            t.close(got[k], want[k], 1e-12, fmt::format("contention pmf N={} n0={}", n, k));
    }

    auto same_pmf = [&](const std::vector<AccessVector>& got, const std::map<std::vector<int>, double>& want,
                        const std::string& what) {
        std::map<std::vector<int>, double> m;
        for (const auto& a : got) m[a.n] += a.prob;
        t.expect(m.size() == want.size(), what + " support");
        for (const auto& [k, p] : want) t.close(m.count(k) ? m.at(k) : 0.0, p, 1e-12, what);
    };
    for (int k = 1; k <= 4; ++k)
        for (int n = 0; n <= 8; ++n)
            same_pmf(access_vector_pmf_ne(k, n), oracle::access_pmf_uniform_enum(k, n), fmt::format("access pmf k={} N={}", k, n));
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 2 + rep % 7, m = 2 + rep % 3;
        std::vector<std::vector<int>> avail(n);
        for (auto& l : avail)
            for (int j = 0; j < m; ++j)
                if (g() % 2) l.push_back(j);
        same_pmf(access_vector_pmf_re(avail, m), oracle::access_pmf_lists_enum(avail, m), fmt::format("access pmf lists rep {}", rep));
    }

    for (int n = 1; n <= 7; ++n)
        for (int rep = 0; rep < 4; ++rep) {
            std::vector<std::vector<double>> c(n);
            for (auto& r : c) r = uniform(g, n, -2, 5);
            t.close(oracle::assignment_cost(c, hungarian_min_cost(c)), oracle::assignment_cost_enum(c, 1), 1e-12,
                    fmt::format("hungarian {}x{}", n, n));
        }

    for (auto [m, w] : std::vector<std::pair<int, int>>{{2, 2}, {2, 1000}, {3, 16}, {3, 100}, {4, 32}, {5, 16}, {6, 10}, {8, 5}})
        t.close(first_collision_given(m, w), oracle::first_collision_enum(m, w), 1e-12, fmt::format("first collision m={} W={}", m, w));

    for (int rep = 0; rep < 6; ++rep) {
        const int n = 2 + rep % 3, m = 2 + rep % 2;
        std::vector<std::pair<int, int>> strong;
        for (int i = 0; i < n; ++i) strong.push_back({i, i % m});
        SdcssScenario sc = sdcss_two_level_scenario(n, m, strong, -15, -20, 0.2 + 0.12 * rep, 0.9);
        SensingSets s(n, m);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j)
                if (j == i % m || g() % 3 == 0) s.add(i, j);
        for (int j = 0; j < m; ++j) s.a[j] = 1 + static_cast<int>(g() % s.b(j));
        std::vector<std::vector<double>> tau(n, std::vector<double>(m, 0));
        for (int i = 0; i < n; ++i)
            for (int j : s.of_su(i)) tau[i][j] = 0.5e-3 + 1e-3 * static_cast<double>(g() % 3);
        SdcssParams prm = sc.params(tau, 0.05 + 0.03 * rep);
        t.close(sdcss_nt_with_err(s, prm, ReportErrorMatrix(n, 0.0)), sdcss_nt_no_err(s, prm), 1e-10,
                fmt::format("report errors off, {}x{} rep {}", n, m, rep));
    }

    note = t.summary();
    return t.failed == 0;
}

bool reductions(std::string& note) {
    Tally t;
    for (double tid : {0.15, 0.5, 1.5})
        for (FdMode mode : {FdMode::fdtx, FdMode::hdtx})
            for (double db : {0.0, 4.6552, 10.0, 15.0}) {
                FdcScenario sc = fdc_default_scenario();
                sc.pu = PuChannelStats::from_means(tid, tid / 3);
                sc.mode = mode;
                Power p = Power::from_db(db);
                t.close(fdc_nt(sc, sc.t_frame, p), oracle::fd_single_stage_nt(sc, p), 1e-7,
                        fmt::format("single-stage FD, idle {} s, {} dB", tid, db));
            }

    std::mt19937_64 g(77);
    for (int rep = 0; rep < 10; ++rep) {
        const int n = 2 + rep % 4, m = n + rep % 5;
        std::vector<std::vector<double>> rows(n);
        for (auto& r : rows) r = uniform(g, m, 0.05, 0.95);
        AvailabilityMatrix a(rows);
        AssignmentState st = greedy_nonoverlap(a);
        double want = 0;
        for (int i = 0; i < n; ++i) {
            double busy = 1;
            for (int j : st.all_of(i)) busy *= 1 - a.at(i, j);
            want += 1 - busy;
        }
        t.close(exact_throughput(st, a, 0.05).total, want, 1e-13, fmt::format("assign without commons {}x{}", n, m));
    }

    for (int n_su : {1, 3, 5, 8})
        for (int m : {1, 2, 3}) {
            std::vector<std::pair<int, int>> strong;
            for (int i = 0; i < n_su; ++i)
                for (int j = 0; j < m; ++j) strong.push_back({i, j});
            SdcssScenario sc = sdcss_two_level_scenario(n_su, m, strong, 40, 40, 1.0, 0.9);
            SensingSets s(n_su, m);
            for (int j = 0; j < m; ++j) s.add(j % n_su, j);
            std::vector<std::vector<double>> tau(n_su, std::vector<double>(m, 0));
            for (int j = 0; j < m; ++j) tau[j % n_su][j] = 1e-3;
            for (double p : {0.05, 0.1026, 0.3}) {
                SdcssParams prm = sc.params(tau, p);
                t.close(sdcss_nt_no_err(s, prm), oracle::pure_ppersist_nt(n_su, m, p, prm.total_sensing_time(), sc.timing),
                        1e-10, fmt::format("pure p-persistent N={} M={} p={}", n_su, m, p));
            }
        }

    note = t.summary();
    return t.failed == 0;
}

// interior or boundary maximum, increasing before it and decreasing after it; flat runs allowed
bool unimodal(const std::vector<double>& v, double tol) {
    const size_t peak = std::max_element(v.begin(), v.end()) - v.begin();
    for (size_t k = 1; k <= peak; ++k)
        if (v[k] < v[k - 1] - tol) return false;
    for (size_t k = peak + 1; k < v.size(); ++k)
        if (v[k] > v[k - 1] + tol) return false;
    return true;
}

bool witnesses(std::string& note) {
    Tally t;
    std::mt19937_64 g(8);
    const int points = 2000;

    for (int rep = 0; rep < 12; ++rep) {
        const bool multi = rep % 3 == 2;
        HdScenario sc = hd_default_scenario(multi ? 10 : 1 + static_cast<int>(g() % 15), multi ? 5 : 1);
        std::uniform_real_distribution<double> snr(-20, -15), idle(0.5, 0.9);
        const double s0 = snr(g), p0 = idle(g);
        for (auto& l : sc.links) {
            l.snr = db_to_linear(multi ? s0 : snr(g));
            l.pu = PuChannelStats::from_idle(multi ? p0 : idle(g));
        }
        BackoffConfig cfg{16 << (g() % 4), 3};
        std::vector<double> nt;
        const double top = 0.5 * sc.timing.cycle;
        for (int k = 1; k <= points; ++k) nt.push_back(hd_nt(top * k / points, cfg, sc, FloorMode::relaxed));
        t.expect(unimodal(nt, 1e-12), fmt::format("NT(tau) scenario {} (N={}, M={}, W={})", rep, sc.n_su, sc.n_ch, cfg.w0));
    }

    for (auto [zeta, xi] : std::vector<std::pair<double, double>>{{0.08, 0.95}, {0.8, 0.95}, {0.3, 1.0}})
        for (FdMode mode : {FdMode::fdtx, FdMode::hdtx})
            for (double db : {0.0, 3.0, 4.6552, 8.0, 12.0, 15.0}) {
                FdcScenario sc = fdc_default_scenario();
                sc.si = {zeta, xi};
                sc.mode = mode;
                Power p = Power::from_db(db);
                std::vector<double> nt;
                for (int k = 1; k <= points; ++k) nt.push_back(fdc_nt(sc, sc.t_frame * k / points, p));
                t.expect(unimodal(nt, 1e-12), fmt::format("NT(T_S) zeta={} xi={} {} P_sen={} dB", zeta, xi,
                                                           mode == FdMode::fdtx ? "FDTx" : "HDTx", db));
            }

    note = t.summary();
    return t.failed == 0;
}

const char* kTitles[] = {"",
                         "critical sensing power",
                         "FDC-MAC optimum",
                         "SDCSS greedy optimality gap",
                         "multi-channel table band",
                         "analytic vs simulation agreement",
                         "oracle equivalence",
                         "structural reductions",
                         "unimodality witnesses"};

bool run(int n, std::string& note) {
    switch (n) {
        case 1: return via_reproduce("ch6_psen_bar", note);
        case 2: return via_reproduce("ch6_optimum", note);
        case 3: return via_reproduce("ch5_table1", note);
        case 4: return via_reproduce("ch3_table", note);
        case 5: return via_reproduce("sim_agreement", note);
        case 6: return oracle_suite(note);
        case 7: return reductions(note);
        case 8: return witnesses(note);
    }
    return false;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> which;
    for (int k = 1; k < argc; ++k) {
        const int n = std::atoi(argv[k]);
        if (n < 1 || n > 8) {
            std::cerr << "usage: cogmac_acceptance [1-8 ...]\n";
            return 2;
        }
        which.push_back(n);
    }
    if (which.empty())
        for (int n = 1; n <= 8; ++n) which.push_back(n);

    bool all = true;
    for (int n : which) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string note;
        bool ok = false;
        try {
            ok = run(n, note);
        } catch (const std::exception& e) {
            note = std::string("error: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << fmt::format("acceptance {}: {} {} ({}, {:.1f} s)\n", n, ok ? "PASS" : "FAIL", kTitles[n], note, secs)
                  << std::flush;
        all = all && ok;
    }
    return all ? 0 : 1;
}
