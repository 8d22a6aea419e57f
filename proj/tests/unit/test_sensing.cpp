#include <doctest.h>

#include <random>

#include "../oracles.hpp"
#include "cogmac/sensing.hpp"

using namespace cogmac;

TEST_SUITE("sensing") {
    TEST_CASE("energy detector meets its detection target") {
        SensorSpec s;
        s.snr = db_to_linear(-15);
        s.sense_time = 2e-3;
        for (double pd : {0.5, 0.8, 0.9, 0.99}) {
            SensorSpec t = s;
            t.threshold = threshold_for_pd(pd, s);
            CHECK(energy_pd(t) == doctest::Approx(pd).epsilon(1e-10));
            CHECK(energy_pf(t) == doctest::Approx(pf_for_target_pd(pd, s)).epsilon(1e-10));
        }
    }

    TEST_CASE("false alarm falls with sensing time") {
        SensorSpec s;
        s.snr = db_to_linear(-20);
        double prev = 1;
        for (double tau : {0.5e-3, 1e-3, 2e-3, 5e-3, 10e-3}) {
            s.sense_time = tau;
            double pf = pf_for_target_pd(0.9, s);
            CHECK(pf < prev);
            prev = pf;
        }
    }

    TEST_CASE("a-out-of-b fusion matches enumeration") {
        std::mt19937_64 g(11);
        std::uniform_real_distribution<double> u(0, 1);
        for (int b = 1; b <= 10; ++b) {
            std::vector<double> p(b);
            for (auto& v : p) v = u(g);
            for (int a = 1; a <= b; ++a) {
                CHECK(at_least_a(p, a) == doctest::Approx(oracle::fusion_enum(p, a)).epsilon(1e-12));
                CHECK(fuse_a_out_of_b(p, {a, b}) == doctest::Approx(oracle::fusion_enum(p, a)).epsilon(1e-12));
            }
        }
    }

    TEST_CASE("per-sensor value reproduces the fused target") {
        for (int b = 1; b <= 6; ++b)
            for (int a = 1; a <= b; ++a) {
                double p = per_sensor_for_fused(0.9, {a, b});
                std::vector<double> v(b, p);
                CHECK(fuse_a_out_of_b(v, {a, b}) == doctest::Approx(0.9).epsilon(1e-10));
            }
    }

    TEST_CASE("reporting errors flip other sensors only") {
        ReportErrorMatrix e(3, 0.1);
        CHECK(apply_report_errors(0.2, 0.1) == doctest::Approx(0.2 * 0.9 + 0.8 * 0.1));
        std::vector<int> sensors = {0, 1};
        std::vector<double> p = {0.3, 0.6};
        // receiver 0 sees its own bit clean and sensor 1's bit flipped with 0.1
        double p1 = apply_report_errors(0.6, 0.1);
        double want = oracle::fusion_enum({0.3, p1}, 1);
        CHECK(fuse_with_errors(0, sensors, p, e, {1, 2}) == doctest::Approx(want).epsilon(1e-14));
        ReportErrorMatrix z(3, 0.0);
        CHECK(fuse_with_errors(2, sensors, p, z, {2, 2}) == doctest::Approx(0.18));
    }

    TEST_CASE("self interference grows with power") {
        SelfInterference si{0.08, 0.95};
        CHECK(self_interference_power(Power{0}, si).linear == doctest::Approx(0));
        CHECK(self_interference_power(Power{10}, si).linear < self_interference_power(Power{20}, si).linear);
    }

    TEST_CASE("averaged FD detection meets the target at the chosen threshold") {
        auto stats = PuChannelStats::from_means(150e-3, 50e-3);
        SelfInterference si{0.08, 0.95};
        for (double ts : {1e-3, 2.44e-3, 8e-3}) {
            double eps = fd_threshold_for_target(0.8, ts, stats, 6e6, Power::from_db(4.6552), Power{0.01}, si);
            CHECK(fd_avg_pd(eps, ts, stats, 6e6, Power::from_db(4.6552), Power{0.01}, si) ==
                  doctest::Approx(0.8).epsilon(1e-7));
        }
    }
}
