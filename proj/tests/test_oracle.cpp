#include "doctest.h"

#include "planted/oracle.hpp"
#include "planted/sim.hpp"
#include "test_support.hpp"

using namespace planted;

TEST_CASE("oracle returns true planted values") {
    const Assignment planted = gen_planted(100, 8);
    VerifiedOracle oracle(planted, 8);
    for (auto [v, val] : oracle.sample_batch(5)) CHECK(val == planted.test(v));
    CHECK(oracle.used() == 5);
}

TEST_CASE("oracle accounting is the sum of batch sizes") {
    VerifiedOracle oracle(gen_planted(10, 1), 1);
    CHECK(oracle.used() == 0);
    oracle.sample_batch(7);
    CHECK(oracle.used() == 7);
    VerifiedOracle two(gen_planted(10, 1), 1);
    two.sample_batch(3);
    two.sample_batch(4);
    CHECK(two.used() == 7);
}

TEST_CASE("oracle budget cap") {
    VerifiedOracle oracle(gen_planted(10, 2), 2, 10);
    oracle.sample_batch(6);
    CHECK_THROWS_AS(oracle.sample_batch(5), BudgetExhausted);
    CHECK(oracle.used() == 6);  // the refused batch is not drawn
    CHECK_NOTHROW(oracle.sample_batch(4));
    CHECK(oracle.used() == 10);
}

TEST_CASE("oracle samples uniformly with replacement") {
    const std::size_t n = 50;
    const std::size_t draws = 50000;
    VerifiedOracle oracle(gen_planted(n, 3), 3);
    std::vector<double> observed(n, 0.0);
    for (auto [v, val] : oracle.sample_batch(draws)) observed[v] += 1.0;

    const std::vector<double> expected(n, static_cast<double>(draws) / n);
    // df = 49, 1% critical value 74.92
    CHECK(planted::testing::chi_square_stat(observed, expected) < 74.92);

    const double sd = std::sqrt(static_cast<double>(draws) * (1.0 / n) * (1.0 - 1.0 / n));
    for (std::size_t v = 0; v < n; ++v)
        CHECK(std::abs(observed[v] - expected[v]) <= 4.5 * sd);
}

TEST_CASE("oracle streams are seed-deterministic") {
    const Assignment planted = gen_planted(30, 4);
    VerifiedOracle a(planted, 123), b(planted, 123), c(planted, 124);
    const auto ba = a.sample_batch(20);
    const auto bb = b.sample_batch(20);
    CHECK(ba == bb);
    CHECK(ba != c.sample_batch(20));
}
