#include <doctest.h>

#include <random>

#include "../oracles.hpp"
#include "cogmac/assign.hpp"

using namespace cogmac;

namespace {

AvailabilityMatrix random_matrix(int n, int m, unsigned seed) {
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> u(0.3, 0.9);
    std::vector<std::vector<double>> p(n, std::vector<double>(m));
    for (auto& r : p)
        for (auto& v : r) v = u(g);
    return AvailabilityMatrix(p);
}

}  // namespace

TEST_SUITE("assign") {
    TEST_CASE("first-collision probability matches W^m enumeration") {
        for (int w : {2, 3, 5, 8, 16, 32})
            for (int m : {2, 3, 4})
                CHECK(first_collision_given(m, w) == doctest::Approx(oracle::first_collision_enum(m, w)).epsilon(1e-12));
        CHECK(first_collision_given(1, 8) == 0.0);
    }

    TEST_CASE("separate and common sets") {
        AssignmentState st(3, 4);
        st.add(0, 0);
        st.add(0, 1);
        st.add(1, 1);
        st.add(2, 3);
        CHECK(st.separate(0) == std::vector<int>{0});
        CHECK(st.common(0) == std::vector<int>{1});
        CHECK(st.common(1) == std::vector<int>{1});
        CHECK(st.separate(2) == std::vector<int>{3});
        CHECK(st.has_overlap());
        st.remove(1, 1);
        CHECK_FALSE(st.has_overlap());
    }

    TEST_CASE("exact throughput matches enumeration of availability and choices") {
        AvailabilityMatrix a = random_matrix(3, 5, 21);
        std::vector<std::vector<std::pair<int, int>>> states = {
            {{0, 0}, {1, 1}, {2, 2}, {0, 3}, {1, 3}},
            {{0, 0}, {0, 3}, {1, 3}, {1, 4}, {2, 4}, {2, 2}},
            {{0, 3}, {1, 3}, {2, 3}, {0, 4}, {1, 4}},
            {{0, 0}, {1, 1}, {0, 2}, {1, 2}, {2, 2}, {0, 3}, {1, 3}, {2, 4}},
        };
        for (const auto& pairs : states) {
            AssignmentState st(3, 5);
            for (auto [i, j] : pairs) st.add(i, j);
            for (double delta : {0.0, 0.06}) {
                auto got = exact_throughput(st, a, delta);
                auto want = oracle::assign_throughput_enum(st, a, delta);
                double tot = 0;
                for (int i = 0; i < 3; ++i) {
                    CHECK(got.per_su[i] == doctest::Approx(want[i]).epsilon(1e-12));
                    tot += want[i];
                }
                CHECK(got.total == doctest::Approx(tot).epsilon(1e-12));
            }
        }
    }

    TEST_CASE("no common channels: sum of 1 - prod(1 - p)") {
        AvailabilityMatrix a = random_matrix(4, 7, 3);
        AssignmentState st = greedy_nonoverlap(a);
        CHECK_FALSE(st.has_overlap());
        double want = 0;
        for (int i = 0; i < 4; ++i) {
            double busy = 1;
            for (int j : st.all_of(i)) busy *= 1 - a.at(i, j);
            want += 1 - busy;
        }
        CHECK(exact_throughput(st, a, 0.05).total == doctest::Approx(want).epsilon(1e-14));
    }

    TEST_CASE("overlap greedy with a huge threshold keeps the non-overlapping state") {
        for (unsigned seed = 1; seed <= 4; ++seed) {
            AvailabilityMatrix a = random_matrix(3, 6, seed);
            AssignConfig cfg;
            cfg.eps = 1e9;
            CHECK(greedy_overlap(a, cfg).state == greedy_nonoverlap(a));
        }
    }

    TEST_CASE("overlap greedy adds nothing when channels are plentiful and mostly free") {
        std::mt19937_64 g(9);
        std::uniform_real_distribution<double> u(0.8, 0.95);
        std::vector<std::vector<double>> p(3, std::vector<double>(9));
        for (auto& r : p)
            for (auto& v : r) v = u(g);
        AvailabilityMatrix a(p);
        CHECK(greedy_overlap(a).state == greedy_nonoverlap(a));
    }

    TEST_CASE("max-min overlap keeps the minimum at least the non-overlapping one") {
        for (unsigned seed = 1; seed <= 4; ++seed) {
            AvailabilityMatrix a = random_matrix(3, 6, seed);
            OverlapResult o = maxmin_overlap(a);
            double base = exact_throughput(maxmin_greedy_nonoverlap(a), a, 0).min();
            CHECK(exact_throughput(o.state, a, o.delta).min() >= base - 1e-12);
        }
    }

    TEST_CASE("brute force is at least as good as the greedy sum") {
        AvailabilityMatrix a = random_matrix(2, 4, 9);
        AssignConfig cfg;
        auto bf = brute_force_assignment(a, Objective::sum, cfg);
        OverlapResult g = greedy_overlap(a, cfg);
        CHECK(bf.value >= exact_throughput(g.state, a, g.delta).total - 1e-12);
    }

    TEST_CASE("contention window grows as the collision target tightens") {
        AvailabilityMatrix a = random_matrix(3, 4, 4);
        AssignmentState st(3, 4);
        for (int i = 0; i < 3; ++i) st.add(i, 3);
        int loose = contention_window_for(0.2, a, st), tight = contention_window_for(0.01, a, st);
        CHECK(tight > loose);
        CHECK(first_collision_probability(tight, a, st) <= 0.01);
        CHECK(mac_overhead(tight, {}) > mac_overhead(loose, {}));
    }

    TEST_CASE("imperfect sensing with perfect detectors equals the perfect model") {
        AvailabilityMatrix a = random_matrix(3, 5, 8);
        AssignmentState st(3, 5);
        for (auto [i, j] : std::vector<std::pair<int, int>>{{0, 0}, {1, 1}, {0, 2}, {1, 2}, {2, 2}, {2, 3}, {1, 4}})
            st.add(i, j);
        SensingErrorMatrix e;
        e.pd.assign(3, std::vector<double>(5, 1.0));
        e.pf.assign(3, std::vector<double>(5, 0.0));
        CHECK(exact_throughput_imperfect(st, a, e, 0.04).total == doctest::Approx(exact_throughput(st, a, 0.04).total).epsilon(1e-12));
    }
}
