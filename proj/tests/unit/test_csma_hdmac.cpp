#include <doctest.h>

#include <random>

#include "../oracles.hpp"
#include "cogmac/csma.hpp"
#include "cogmac/hdmac.hpp"

using namespace cogmac;

TEST_SUITE("csma") {
    TEST_CASE("Bianchi fixed point is self consistent") {
        for (int n : {1, 2, 5, 10, 30}) {
            BackoffConfig cfg{32, 3};
            FixedPoint fp = bianchi_fixed_point(cfg, n);
            CHECK(fp.phi == doctest::Approx(bianchi_phi_of_p(fp.p_coll, cfg)).epsilon(1e-9));
            CHECK(fp.p_coll == doctest::Approx(1 - std::pow(1 - fp.phi, n - 1)).epsilon(1e-9));
        }
    }

    TEST_CASE("one station never collides") {
        FixedPoint fp = bianchi_fixed_point({32, 3}, 1);
        CHECK(fp.p_coll == doctest::Approx(0));
        CHECK(fp.phi == doctest::Approx(2.0 / 33.0).epsilon(1e-9));
    }

    TEST_CASE("slot outcome probabilities sum to one") {
        for (int n : {1, 2, 7}) {
            auto s = ppersist_slot_probs(0.1, n);
            CHECK(s.p_succ + s.p_idle + s.p_coll == doctest::Approx(1.0));
            auto g = generic_slot_stats(0.05, n, hd_default_timing(), Handshake::basic);
            CHECK(g.probs.p_succ + g.probs.p_idle + g.probs.p_coll == doctest::Approx(1.0));
        }
    }

    TEST_CASE("p-persistent contention overhead matches the independent closed form") {
        MacTiming t = hd_default_timing();
        for (int n : {1, 2, 4, 9})
            for (double p : {0.01, 0.1026, 0.4})
                CHECK(ppersist_contention_overhead(p, n, t) ==
                      doctest::Approx(oracle::ppersist_contention_time(p, n, t)).epsilon(1e-12));
    }

    TEST_CASE("basic access busy periods") {
        MacTiming t = hd_default_timing();
        double ts, tc;
        busy_durations(t, Handshake::basic, ts, tc);
        CHECK(ts == doctest::Approx(t.header + t.packet + t.sifs + 2 * t.pd + t.ack + t.difs));
        CHECK(tc == doctest::Approx(t.header + t.packet + t.difs + t.pd));
        busy_durations(t, Handshake::rtscts, ts, tc);
        CHECK(tc == doctest::Approx(t.header + t.rts + t.difs + t.pd));
    }
}

TEST_SUITE("hdmac") {
    TEST_CASE("contention size pmf matches 2^N enumeration") {
        std::mt19937_64 g(5);
        std::uniform_real_distribution<double> u(0, 1);
        for (int n : {1, 3, 8, 12, 14, 16}) {
            std::vector<double> join(n);
            for (auto& v : join) v = u(g);
            auto got = contention_size_pmf(join);
            auto want = oracle::contention_pmf_enum(join);
            REQUIRE(got.size() == want.size());
            for (size_t k = 0; k < got.size(); ++k) CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-12));
        }
    }

    TEST_CASE("join probability") {
        auto s = PuChannelStats::from_idle(0.75);
        CHECK(join_probability(0.1, 0.9, s) == doctest::Approx(0.9 * 0.75 + 0.1 * 0.25));
    }

    TEST_CASE("multi-channel model at M = 1 is the single-channel model scaled by E[l]/M") {
        // the multi-channel payload factor is the unconditioned P_idle, so one channel counts it twice
        for (double tau : {1e-3, 2.6e-3, 10e-3}) {
            HdScenario sc = hd_default_scenario(10, 1);
            for (auto& l : sc.links) l.snr = db_to_linear(-17);
            const double p_idle = link_idle_probs(tau, sc).front();
            CHECK(multi_channel_nt(tau, {64, 4}, sc) ==
                  doctest::Approx(p_idle * single_channel_nt(tau, {64, 4}, sc)).epsilon(1e-12));
        }
    }

    TEST_CASE("relaxed floor bounds the exact throughput from above") {
        HdScenario sc = hd_default_scenario(10, 1);
        for (double tau : {1e-3, 5e-3, 20e-3})
            CHECK(single_channel_nt(tau, {32, 3}, sc, FloorMode::relaxed) >= single_channel_nt(tau, {32, 3}, sc) - 1e-12);
    }

    TEST_CASE("optimize_tau beats a coarse grid") {
        HdScenario sc = hd_default_scenario(10, 1);
        TauOptimum o = optimize_tau({32, 3}, sc);
        for (int k = 1; k < 100; ++k) CHECK(single_channel_nt(k * 1e-3 * 0.99, {32, 3}, sc) <= o.nt + 1e-9);
    }

    TEST_CASE("heterogeneous multi-channel analysis is refused") {
        HdScenario sc = hd_default_scenario(4, 3);
        sc.links[0].snr = 0.02;
        CHECK_THROWS_AS(multi_channel_nt(2e-3, {32, 3}, sc), ContractError);
    }
}
