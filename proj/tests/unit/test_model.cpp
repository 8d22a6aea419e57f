#include <doctest.h>

#include <cmath>

#include "cogmac/model.hpp"

using namespace cogmac;

TEST_SUITE("model") {
    TEST_CASE("q and q_inv invert each other") {
        for (double p : {1e-9, 1e-4, 0.01, 0.2, 0.5, 0.8, 0.99, 1 - 1e-6}) CHECK(q(q_inv(p)) == doctest::Approx(p).epsilon(1e-10));
        CHECK(q(0) == doctest::Approx(0.5));
        CHECK(q(1.959963984540054) == doctest::Approx(0.025).epsilon(1e-12));
        CHECK(q(-3) == doctest::Approx(1 - q(3)).epsilon(1e-14));
    }

    TEST_CASE("q_inv rejects values outside (0, 1)") {
        CHECK_THROWS_AS(q_inv(0.0), DomainError);
        CHECK_THROWS_AS(q_inv(1.0), DomainError);
        CHECK_THROWS_AS(q_inv(std::nan("")), DomainError);
    }

    TEST_CASE("dB round trip") {
        CHECK(db_to_linear(10) == doctest::Approx(10));
        CHECK(db_to_linear(-20) == doctest::Approx(0.01));
        CHECK(linear_to_db(db_to_linear(4.6552)) == doctest::Approx(4.6552).epsilon(1e-14));
        CHECK(Power::from_db(15).db() == doctest::Approx(15));
    }

    TEST_CASE("slots_of accepts whole slot counts only") {
        CHECK(slots_of(8184e-6, 8e-6) == 1023);
        CHECK(slots_of(0.0, 20e-6) == 0);
        CHECK_THROWS(slots_of(30e-6, 20e-6));
    }

    TEST_CASE("PU channel statistics") {
        auto s = PuChannelStats::from_means(150e-3, 50e-3);
        CHECK(s.p_idle == doctest::Approx(0.75));
        CHECK(s.p_busy == doctest::Approx(0.25));
        CHECK_NOTHROW(s.validate());
        CHECK_THROWS(PuChannelStats::from_idle(1.2).validate());
        CHECK_THROWS(check_probability(-0.1, "x"));
    }

    TEST_CASE("SNR grid indexing is row major") {
        SnrGrid g(2, 3, 1.0);
        g.at(1, 2) = 5;
        CHECK(g.values[5] == 5);
        CHECK_NOTHROW(g.validate());
        g.at(0, 0) = -1;
        CHECK_THROWS(g.validate());
    }
}
