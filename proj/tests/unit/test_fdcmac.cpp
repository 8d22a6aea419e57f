#include <doctest.h>

#include <cmath>

#include "../oracles.hpp"
#include "cogmac/fdcmac.hpp"

using namespace cogmac;

TEST_SUITE("fdcmac") {
    TEST_CASE("sensing for the whole frame reduces to single-stage FD") {
        for (double tid : {0.15, 1.5}) {
            FdcScenario sc = fdc_default_scenario();
            sc.pu = PuChannelStats::from_means(tid, tid / 3);
            for (double db : {0.0, 4.6552, 12.0}) {
                Power p = Power::from_db(db);
                CHECK(fdc_nt(sc, sc.t_frame, p) == doctest::Approx(oracle::fd_single_stage_nt(sc, p)).epsilon(1e-7));
            }
        }
    }

    TEST_CASE("critical power equalizes one HD flow against two FD flows at P_max") {
        for (auto [zeta, xi] : std::vector<std::pair<double, double>>{{0.7, 1.0}, {0.08, 1.0}, {0.3, 0.9}}) {
            FdcScenario sc = fdc_default_scenario();
            sc.si = {zeta, xi};
            const double pm = sc.p_max.linear;
            const double i = self_interference_power(sc.p_max, sc.si).linear;
            const double crit = critical_psen(sc).linear;
            CHECK(std::log2(1 + crit) == doctest::Approx(2 * std::log2(1 + pm / (1 + i))).epsilon(1e-9));
        }
    }

    TEST_CASE("critical powers of the two QSIC levels") {
        FdcScenario sc = fdc_default_scenario();
        sc.si = {0.7, 1.0};
        CHECK(critical_psen(sc).db() == doctest::Approx(6.6294).epsilon(2e-3));
        sc.si = {0.08, 1.0};
        CHECK(critical_psen(sc).db() == doctest::Approx(19.9201).epsilon(1e-3));
    }

    TEST_CASE("data bits split sums to the total and stays non-negative") {
        FdcScenario sc = fdc_default_scenario();
        for (double ts : {0.5e-3, 2.44e-3, 10e-3}) {
            DataBits b = data_bits(sc, ts, Power::from_db(4.6552));
            CHECK(b.b1 >= 0);
            CHECK(b.b2 >= 0);
            CHECK(b.b3 >= 0);
            CHECK(b.b31 + b.b32 == doctest::Approx(b.b3));
            CHECK(b.total() == doctest::Approx(b.b1 + b.b2 + b.b3));
        }
    }

    TEST_CASE("optimize_ts beats a fine grid") {
        for (FdMode m : {FdMode::fdtx, FdMode::hdtx}) {
            FdcScenario sc = fdc_default_scenario();
            sc.mode = m;
            Power p = Power::from_db(4.6552);
            TsOptimum o = optimize_ts(sc, p);
            CHECK(o.nt == doctest::Approx(fdc_nt(sc, o.t_s, p)));
            for (int k = 1; k <= 300; ++k) CHECK(o.nt >= fdc_nt(sc, sc.t_frame * k / 300.0, p) - 1e-9);
        }
    }

    TEST_CASE("above the critical power the whole frame is spent sensing") {
        FdcScenario sc = fdc_default_scenario();
        sc.si = {0.7, 1.0};
        Power p = Power::from_db(critical_psen(sc).db() + 3);
        TsOptimum o = optimize_ts(sc, p);
        CHECK(o.boundary);
        CHECK(o.t_s == doctest::Approx(sc.t_frame));
    }

    TEST_CASE("configure picks the best row") {
        FdcScenario sc = fdc_default_scenario();
        std::vector<Power> g;
        for (double db = 0; db <= 15; db += 1.5) g.push_back(Power::from_db(db));
        FdcConfiguration c = configure(sc, g);
        REQUIRE(c.table.size() == g.size());
        for (const auto& row : c.table) CHECK(c.nt >= row.best.nt);
        FdcConfiguration c2 = configure(sc, g, 3);
        CHECK(c2.nt == c.nt);
        CHECK(c2.t_s == c.t_s);
    }

    TEST_CASE("invalid scenarios are rejected") {
        FdcScenario sc = fdc_default_scenario();
        sc.pd_target = 1.5;
        CHECK_THROWS(sc.validate());
        sc = fdc_default_scenario();
        CHECK_THROWS(fdc_nt(sc, 2 * sc.t_frame, Power::from_db(3)));
    }
}
