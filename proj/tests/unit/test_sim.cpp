#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "../oracles.hpp"
#include "cogmac/sim.hpp"

using namespace cogmac;

TEST_SUITE("sim") {
    TEST_CASE("same seed, same estimate; other seed, other estimate") {
        HdScenario sc = hd_default_scenario(5, 1);
        BackoffConfig cfg{32, 3};
        SimEstimate a = sim_hdmac(sc, 2.6e-3, cfg, kMinSimCycles, 11);
        SimEstimate b = sim_hdmac(sc, 2.6e-3, cfg, kMinSimCycles, 11);
        SimEstimate c = sim_hdmac(sc, 2.6e-3, cfg, kMinSimCycles, 12);
        CHECK(a.mean == b.mean);
        CHECK(a.half_ci95 == b.half_ci95);
        CHECK(a.mean != c.mean);
    }

    TEST_CASE("rng streams are independent of creation order") {
        RngStreams s(5);
        auto a = s.make(Stream::pu, 3);
        auto x = s.make(Stream::backoff, 0);
        auto b = s.make(Stream::pu, 3);
        (void)x;
        CHECK(a() == b());
        CHECK(s.make(Stream::pu, 3)() != s.make(Stream::pu, 4)());
    }

    TEST_CASE("agreement rule is max of relative band and CI") {
        SimEstimate e{1.0, 0.05, kMinSimCycles, 0};
        CHECK(e.agrees(1.04));
        CHECK_FALSE(e.agrees(1.06));
        e.half_ci95 = 0.001;
        CHECK(e.agrees(1.019));
        CHECK_FALSE(e.agrees(1.03));
    }

    TEST_CASE("PU trace durations are exponential (KS)") {
        PuChannelStats st = PuChannelStats::from_means(0.15, 0.05);
        auto tr = gen_pu_trace(st, 2000.0, 99);
        std::vector<double> idle, act;
        for (size_t k = 1; k + 1 < tr.size(); ++k) (tr[k].active ? act : idle).push_back(tr[k].end - tr[k].start);
        auto ks = [](std::vector<double> v, double mean) {
            std::sort(v.begin(), v.end());
            double d = 0;
            const double n = static_cast<double>(v.size());
            for (size_t i = 0; i < v.size(); ++i) {
                double f = 1 - std::exp(-v[i] / mean);
                d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
            }
            return d * std::sqrt(n);
        };
        REQUIRE(idle.size() > 1000);
        REQUIRE(act.size() > 1000);
        // 1% critical value of the Kolmogorov distribution
        CHECK(ks(idle, 0.15) < 1.63);
        CHECK(ks(act, 0.05) < 1.63);
        for (size_t k = 1; k < tr.size(); ++k) {
            CHECK(tr[k].start == tr[k - 1].end);
            CHECK(tr[k].active != tr[k - 1].active);
        }
    }

    TEST_CASE("p-persistent contention time matches the closed form") {
        MacTiming t = sdcss_default_timing();
        const double hs = t.difs + t.rts + t.cts + 2 * t.pd, coll = t.rts + t.difs + t.pd;
        for (int n : {1, 2, 5}) {
            SimEstimate e = sim_ppersist_contention(0.1026, n, t.slot, hs, coll, 200000, 4 + n);
            double want = oracle::ppersist_contention_time(0.1026, n, t);
            CHECK(std::abs(e.mean - want) <= std::max(3 * e.half_ci95, 0.01 * want));
        }
    }

    TEST_CASE("too few cycles are rejected") {
        HdScenario sc = hd_default_scenario(2, 1);
        CHECK_THROWS(sim_hdmac(sc, 2.6e-3, BackoffConfig{32, 3}, 10, 1));
    }
}
