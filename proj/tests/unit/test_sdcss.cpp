#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "../oracles.hpp"
#include "cogmac/sdcss.hpp"

using namespace cogmac;

namespace {

std::map<std::vector<int>, double> as_map(const std::vector<AccessVector>& v) {
    std::map<std::vector<int>, double> m;
    for (const auto& a : v) m[a.n] += a.prob;
    return m;
}

void check_same(const std::map<std::vector<int>, double>& got, const std::map<std::vector<int>, double>& want) {
    CHECK(got.size() == want.size());
    for (const auto& [k, p] : want) {
        auto it = got.find(k);
        REQUIRE(it != got.end());
        CHECK(it->second == doctest::Approx(p).epsilon(1e-12));
    }
}

SdcssScenario small_scenario(double p_idle) {
    return sdcss_two_level_scenario(4, 3, {{0, 0}, {1, 1}, {2, 2}, {3, 0}}, -15, -20, p_idle, 0.9);
}

SensingSets small_sets() {
    SensingSets s(4, 3);
    for (auto [i, j] : std::vector<std::pair<int, int>>{{0, 0}, {1, 0}, {3, 0}, {1, 1}, {2, 1}, {2, 2}, {0, 2}}) s.add(i, j);
    return s;
}

std::vector<std::vector<double>> fixed_tau(const SensingSets& s, double tau) {
    std::vector<std::vector<double>> t(s.n_su(), std::vector<double>(s.n_ch(), 0));
    for (int i = 0; i < s.n_su(); ++i)
        for (int j : s.of_su(i)) t[i][j] = tau;
    return t;
}

}  // namespace

TEST_SUITE("sdcss") {
    TEST_CASE("uniform access-vector pmf matches k^N enumeration") {
        for (int k = 1; k <= 4; ++k)
            for (int n = 0; n <= 8; ++n) check_same(as_map(access_vector_pmf_ne(k, n)), oracle::access_pmf_uniform_enum(k, n));
    }

    TEST_CASE("per-SU access-vector pmf matches brute force over choices") {
        std::vector<std::vector<std::vector<int>>> cases = {
            {{0, 1}, {1, 2}, {0, 2}, {2}},
            {{0}, {}, {0, 1, 2}, {1}},
            {{0, 1, 2}, {0, 1, 2}, {0, 1, 2}},
            {{}, {}, {}},
            {{1}, {0, 1}, {0}, {0, 1}, {1}},
        };
        for (const auto& c : cases) check_same(as_map(access_vector_pmf_re(c, 3)), oracle::access_pmf_lists_enum(c, 3));
    }

    TEST_CASE("Hungarian matches permutation brute force") {
        std::mt19937_64 g(17);
        std::uniform_real_distribution<double> u(-1, 5);
        for (int n = 1; n <= 7; ++n)
            for (int rep = 0; rep < 3; ++rep) {
                std::vector<std::vector<double>> c(n, std::vector<double>(n));
                for (auto& r : c)
                    for (auto& v : r) v = u(g);
                auto su_of = hungarian_min_cost(c);
                std::vector<int> seen = su_of;
                std::sort(seen.begin(), seen.end());
                std::vector<int> all(n);
                std::iota(all.begin(), all.end(), 0);
                CHECK(seen == all);
                CHECK(oracle::assignment_cost(c, su_of) == doctest::Approx(oracle::assignment_cost_enum(c, 1)).epsilon(1e-12));
            }
    }

    TEST_CASE("Hungarian with more channels than SUs spreads the load") {
        std::mt19937_64 g(3);
        std::uniform_real_distribution<double> u(0, 1);
        for (auto [n, m] : std::vector<std::pair<int, int>>{{2, 3}, {2, 4}, {3, 7}, {1, 4}}) {
            std::vector<std::vector<double>> c(n, std::vector<double>(m));
            for (auto& r : c)
                for (auto& v : r) v = u(g);
            auto su_of = hungarian_min_cost(c);
            const int cap = (m + n - 1) / n;
            CHECK(oracle::assignment_cost(c, su_of) == doctest::Approx(oracle::assignment_cost_enum(c, cap)).epsilon(1e-12));
        }
    }

    TEST_CASE("reporting-error evaluator at zero error equals the error-free one") {
        for (double ph : {0.2, 0.5, 0.8}) {
            SdcssScenario sc = small_scenario(ph);
            SensingSets s = small_sets();
            s.a = {2, 1, 2};
            SdcssParams prm = sc.params(fixed_tau(s, 1.5e-3), 0.15);
            ReportErrorMatrix z(4, 0.0);
            CHECK(sdcss_nt_with_err(s, prm, z) == doctest::Approx(sdcss_nt_no_err(s, prm)).epsilon(1e-10));
        }
    }

    TEST_CASE("reporting errors do not help") {
        SdcssScenario sc = small_scenario(0.5);
        SensingSets s = small_sets();
        SdcssParams prm = sc.params(fixed_tau(s, 2e-3), 0.2);
        ReportErrorMatrix e(4, 0.05);
        for (int i = 0; i < 4; ++i) e.at(i, i) = 0;
        // errors only add false busy votes or hide busy ones; NT stays finite and within (0, 1)
        double nt = sdcss_nt_with_err(s, prm, e);
        CHECK(nt > 0);
        CHECK(nt < 1);
    }

    TEST_CASE("perfect sensing of idle channels reduces to the p-persistent model") {
        for (int n_su : {3, 5}) {
            const int m = 3;
            std::vector<std::pair<int, int>> strong;
            for (int i = 0; i < n_su; ++i)
                for (int j = 0; j < m; ++j) strong.push_back({i, j});
            SdcssScenario sc = sdcss_two_level_scenario(n_su, m, strong, 40, 40, 1.0, 0.9);
            SensingSets s(n_su, m);
            for (int j = 0; j < m; ++j) s.add(j % n_su, j);
            SdcssParams prm = sc.params(fixed_tau(s, 1e-3), 0.1026);
            double want = oracle::pure_ppersist_nt(n_su, m, 0.1026, prm.total_sensing_time(), sc.timing);
            CHECK(sdcss_nt_no_err(s, prm) == doctest::Approx(want).epsilon(1e-12));
        }
    }

    TEST_CASE("fused detection meets the channel target") {
        SdcssScenario sc = small_scenario(0.5);
        SensingSets s = small_sets();
        s.a = {2, 1, 1};
        SdcssParams prm = sc.params(fixed_tau(s, 1e-3), 0.1);
        for (int j = 0; j < 3; ++j) {
            ChannelDetection d = channel_detection(j, s, prm);
            CHECK(d.pd == doctest::Approx(0.9).epsilon(1e-9));
            CHECK(d.pf >= 0);
            CHECK(d.pf <= 1);
        }
    }

    TEST_CASE("sensing-set codes round trip") {
        SensingSets s = small_sets();
        SensingSets t = SensingSets::from_code(4, 3, s.code());
        CHECK(t == s);
        CHECK(s.pairs() == 7);
        CHECK(s.b(0) == 3);
        s.a[0] = 4;
        CHECK_THROWS(s.validate());
    }

    TEST_CASE("greedy search trace never decreases") {
        SdcssScenario sc = sdcss_two_level_scenario(3, 3, {{0, 0}, {1, 1}, {2, 2}}, -15, -20, 0.6, 0.9);
        SenseAccessOptions opt;
        opt.p_grid = {0.1};
        opt.scan_points = 6;
        auto r = greedy_sensing_sets(sc, opt);
        for (size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k] >= r.trace[k - 1] - 1e-12);
        CHECK(r.best.nt == doctest::Approx(r.trace.back()));
    }
}
