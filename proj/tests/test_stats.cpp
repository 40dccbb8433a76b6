#include "cbb84/stats.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace cbb84::stats;

TEST_CASE("sigma") {
    CHECK(sigma({0.10, 1000}) == doctest::Approx(0.009487).epsilon(1e-4));
    CHECK(sigma({0.0, 50}) == 0.0);
    CHECK(sigma({1.0, 50}) == 0.0);
    CHECK(sigma({0.5, 4}) == 0.25);
    CHECK_THROWS_AS(sigma({1.2, 10}), std::invalid_argument);
    CHECK_THROWS_AS(sigma({0.2, 0}), std::invalid_argument);
}

TEST_CASE("sigma shape") {
    for (std::uint64_t n : {10u, 49u, 1000u}) {
        const double peak = sigma({0.5, n});
        for (int i = 0; i <= 100; ++i) CHECK(sigma({i / 100.0, n}) <= peak);
    }
    for (double r : {0.01, 0.1, 0.5, 0.9}) {
        for (std::uint64_t n = 1; n < 500; ++n) CHECK(sigma({r, n + 1}) < sigma({r, n}));
    }
}

TEST_CASE("confidence_threshold") {
    CHECK(confidence_threshold({0.10, 1000}, 2.57) == doctest::Approx(0.1244).epsilon(0.0005 / 0.1244));
    CHECK(confidence_threshold({0.10, 1000}, 20) == doctest::Approx(0.2897).epsilon(0.0005 / 0.2897));
    CHECK(confidence_threshold({0.10, 1000}, 0) == 0.10);
    CHECK(confidence_threshold({0.9, 4}, 50) == 1.0);
    CHECK_THROWS_AS(confidence_threshold({0.1, 10}, -1), std::invalid_argument);
    double previous = 0.0;
    for (int zi = 0; zi <= 40; ++zi) {
        const double v = confidence_threshold({0.1, 100}, zi * 0.5);
        CHECK(v >= previous);
        previous = v;
    }
    previous = 0.0;
    for (int ri = 0; ri <= 100; ++ri) {
        const double v = confidence_threshold({ri / 100.0, 100}, 2.0);
        CHECK(v >= previous);
        previous = v;
    }
}

TEST_CASE("cheat_probability") {
    CHECK(cheat_probability({0.2, 100}, 0.2) == 0.5);
    CHECK(cheat_probability({0.0, 100}, 0.1) == 0.0);
    CHECK_THROWS_AS(cheat_probability({0.2, 100}, 0.1), std::invalid_argument);
    // One-sided tail at 2.53 sigma.
    CHECK(cheat_probability({0.10, 1000}, 0.124) == doctest::Approx(0.005706).epsilon(1e-3));
    CHECK(normal_upper_tail(0.0) == 0.5);
    CHECK(normal_upper_tail(1.959963984540054) == doctest::Approx(0.025).epsilon(1e-10));
}

TEST_CASE("cheat_probability_binomial") {
    const double direct = oracle::binomial_upper_tail(10, 4, 0.1);
    CHECK(cheat_probability_binomial({0.1, 10}, 0.35) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(cheat_probability_binomial({0.1, 10}, 0.4) == doctest::Approx(oracle::binomial_upper_tail(10, 5, 0.1)).epsilon(1e-12));
    CHECK(cheat_probability_binomial({0.25, 49}, 0.124) ==
          doctest::Approx(oracle::binomial_upper_tail(49, 7, 0.25)).epsilon(1e-12));
    CHECK(cheat_probability_binomial({0.0, 10}, 0.1) == 0.0);
    CHECK(cheat_probability_binomial({1.0, 10}, 0.5) == 1.0);
    CHECK(cheat_probability_binomial({0.3, 10}, 1.0) == 0.0);
    CHECK_THROWS_AS(cheat_probability_binomial({0.1, 2'000'000}, 0.2), std::invalid_argument);
}

TEST_CASE("Gaussian and binomial tails agree for n >= 1000") {
    // Thresholds sit halfway between attainable counts so the discrete tail
    // is compared at the continuity-corrected point.
    for (std::uint64_t n : {1000u, 2000u, 10000u}) {
        for (double r = 0.05; r <= 0.2500001; r += 0.01) {
            for (double z : {0.5, 1.0, 2.0, 2.57, 3.0}) {
                const double raw = r + z * sigma({r, n});
                const double thr = (std::floor(raw * n) + 0.5) / static_cast<double>(n);
                const double g = cheat_probability({r, n}, thr);
                const double b = cheat_probability_binomial({r, n}, thr);
                CHECK(std::abs(g - b) <= 0.01);
            }
        }
    }
}

TEST_CASE("iterate_error_rate") {
    const auto seq = iterate_error_rate({0.3, 0.01}, 3);
    REQUIRE(seq.size() == 3);
    CHECK(seq[0].step == 1);
    CHECK(seq[0].rate == doctest::Approx(std::exp(-9.0)).epsilon(1e-12));
    CHECK(seq[0].rate == doctest::Approx(1.234098e-4).epsilon(1e-6));
    CHECK_FALSE(seq[0].underflow);
    CHECK(seq[1].rate < 1e-300);
    CHECK(seq[1].underflow);
    CHECK(seq[2].floored);
    CHECK(seq[2].rate == std::numeric_limits<double>::denorm_min());
    CHECK(seq[0].rate < 0.01);
    CHECK(seq[1].rate < seq[0].rate);
    CHECK(seq[2].rate < seq[1].rate);

    // T^2 / r0 small pushes r1 toward 1 from below.
    const auto near_one = iterate_error_rate({1e-4, 0.99}, 1);
    CHECK(near_one[0].rate < 1.0);
    CHECK(near_one[0].rate > 0.99999);

    CHECK_THROWS_AS(iterate_error_rate({0.0, 0.1}, 2), std::invalid_argument);
    CHECK_THROWS_AS(iterate_error_rate({0.3, 1.0}, 2), std::invalid_argument);
    CHECK_THROWS_AS(iterate_error_rate({0.3, 0.1}, 0), std::invalid_argument);
}

TEST_CASE("super-exponential decrease below the threshold") {
    for (double t : {0.1, 0.2, 0.3, 0.5}) {
        for (double r0 : {0.001, 0.005, 0.01, 0.02}) {
            if (!(r0 * std::log(1 / r0) < t * t)) continue;
            const auto seq = iterate_error_rate({t, r0}, 6);
            double prev = r0;
            double prev_log = std::log(1 / r0);
            for (const auto& s : seq) {
                if (s.floored) break;
                CHECK(s.rate < prev);
                const double log_inv = t * t / prev;  // log(1 / r_{i+1})
                CHECK(log_inv > prev_log);
                prev_log = log_inv;
                prev = s.rate;
            }
        }
    }
}
