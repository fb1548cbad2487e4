#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "battsched/mixedrv.hpp"
#include "oracles.hpp"

using namespace battsched;

namespace {

GaussianMixture2 random_mixture(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double w = 0.05 + 0.9 * u(rng);
    return GaussianMixture2({w, -3.0 + 6.0 * u(rng), 0.1 + 1.9 * u(rng)},
                            {1.0 - w, -3.0 + 6.0 * u(rng), 0.1 + 1.9 * u(rng)});
}

DispatchPolicy random_policy(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    double l = u(rng), h = u(rng);
    if (l > h) std::swap(l, h);
    std::uniform_real_distribution<double> ud(-3.0, 3.0);
    return DispatchPolicy::from_setpoints(l, h, ud(rng));
}

const GaussianMixture2 kStdNormal({1.0, 0, 1}, {0.0, 0, 1});

}  // namespace

TEST_CASE("policy validation") {
    CHECK_THROWS_AS(DispatchPolicy::from_setpoints(1.0, -1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(DispatchPolicy::from_split(-1, 1, 0.5, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(DispatchPolicy::from_split(-1, 1, -0.5, -0.2), std::invalid_argument);
    CHECK_THROWS_AS(DispatchPolicy::from_split(-1, 1, -0.1, 0.1), std::invalid_argument);
    const auto pol = DispatchPolicy::from_setpoints(-1, 1, -0.7);
    CHECK(pol.pg_des_sell == doctest::Approx(-0.7));
    CHECK(pol.pg_des_buy == doctest::Approx(0.0));
}

TEST_CASE("boundary probabilities: degenerate and wide intervals") {
    const auto mid = boundary_probabilities(kStdNormal,
                                            DispatchPolicy::from_setpoints(0, 0, 0));
    CHECK(mid.p1 == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mid.p2 == doctest::Approx(0.5).epsilon(1e-12));

    const auto wide = boundary_probabilities(
        kStdNormal, DispatchPolicy::from_setpoints(-40, 40, 0));
    CHECK(wide.p1 == doctest::Approx(0.0));
    CHECK(wide.p2 == doctest::Approx(0.0));
}

TEST_CASE("boundary probabilities: Monte-Carlo oracle") {
    const GaussianMixture2 f({0.5, -1.0, 0.5}, {0.5, 2.0, 1.0});
    const auto pol = DispatchPolicy::from_setpoints(-1.0, 1.5, 0.3);
    const auto bp = boundary_probabilities(f, pol);

    const auto mc1 = oracle::mc_expect(
        f, [&](double z) { return z <= pol.pb_lo + pol.pg_des ? 1.0 : 0.0; }, 10'000'000,
        7);
    const auto mc2 = oracle::mc_expect(
        f, [&](double z) { return z >= pol.pb_hi + pol.pg_des ? 1.0 : 0.0; }, 10'000'000,
        8);
    CHECK(std::abs(bp.p1 - mc1.mean) <= 3.0 * mc1.stderr_);
    CHECK(std::abs(bp.p2 - mc2.mean) <= 3.0 * mc2.stderr_);
}

TEST_CASE("expected battery power: limits and degenerate interval") {
    CHECK(expected_battery_power(kStdNormal, DispatchPolicy::from_setpoints(-40, 40, 0)) ==
          doctest::Approx(0.0).epsilon(1e-9));
    CHECK(expected_battery_power(kStdNormal,
                                 DispatchPolicy::from_setpoints(0.7, 0.7, -2.0)) ==
          doctest::Approx(0.7));
}

TEST_CASE("expected battery power: Monte-Carlo oracle") {
    const GaussianMixture2 f({0.6, 0.8, 0.4}, {0.4, 2.1, 0.9});
    const auto pol = DispatchPolicy::from_setpoints(-0.5, 1.2, 0.6);
    const auto mc = oracle::mc_expect(
        f,
        [&](double z) { return std::clamp(z - pol.pg_des, pol.pb_lo, pol.pb_hi); },
        10'000'000, 9);
    CHECK(std::abs(expected_battery_power(f, pol) - mc.mean) <= 3.0 * mc.stderr_);
}

TEST_CASE("expected grid split: pinned regimes") {
    const GaussianMixture2 high({1.0, 5.0, 0.1}, {0.0, 5.0, 0.1});
    const auto g1 = expected_grid_split(high, DispatchPolicy::from_setpoints(-40, 40, 5.0));
    CHECK(g1.exp_sell == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(g1.exp_buy == doctest::Approx(5.0).epsilon(1e-9));

    const auto g2 =
        expected_grid_split(kStdNormal, DispatchPolicy::from_setpoints(-40, 40, 0.0));
    CHECK(g2.exp_sell == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(g2.exp_buy == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("expected grid split: Monte-Carlo oracle") {
    const GaussianMixture2 f({0.5, -1.5, 0.6}, {0.5, 1.0, 0.8});
    const auto pol = DispatchPolicy::from_setpoints(-1.0, 1.0, -0.2);
    auto realized_pg = [&](double z) {
        return z - std::clamp(z - pol.pg_des, pol.pb_lo, pol.pb_hi);
    };
    const auto mc_sell = oracle::mc_expect(
        f, [&](double z) { return std::min(realized_pg(z), 0.0); }, 10'000'000, 10);
    const auto mc_buy = oracle::mc_expect(
        f, [&](double z) { return std::max(realized_pg(z), 0.0); }, 10'000'000, 11);
    const auto g = expected_grid_split(f, pol);
    CHECK(std::abs(g.exp_sell - mc_sell.mean) <= 3.0 * mc_sell.stderr_);
    CHECK(std::abs(g.exp_buy - mc_buy.mean) <= 3.0 * mc_buy.stderr_);
}

TEST_CASE("realize: tracking and clipping") {
    const auto pol = DispatchPolicy::from_setpoints(-2, 2, 1);
    const auto a = realize(pol, 3.0);
    CHECK(a.p_b == 2.0);
    CHECK(a.p_g == 1.0);
    const auto b = realize(pol, 5.0);
    CHECK(b.p_b == 2.0);
    CHECK(b.p_g == 3.0);
    const auto c = realize(pol, -4.0);
    CHECK(c.p_b == -2.0);
    CHECK(c.p_g == -2.0);
}

TEST_CASE("power balance holds exactly") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 1000; ++i) {
        const auto pol = random_policy(rng);
        const double p_l = u(rng);
        const auto r = realize(pol, p_l);
        CHECK(r.p_g == p_l - r.p_b);  // bitwise: p_g is defined as the remainder
        CHECK(r.p_b + r.p_g == doctest::Approx(p_l).epsilon(1e-15));
    }
}

TEST_CASE("mass conservation and linearity of expectations") {
    std::mt19937_64 rng(22);
    for (int i = 0; i < 300; ++i) {
        const auto f = random_mixture(rng);
        const auto pol = random_policy(rng);
        const auto bp = boundary_probabilities(f, pol);
        const double interior = f.mass(pol.pb_lo, pol.pb_hi, pol.pg_des);
        CHECK(bp.p1 + bp.p2 + interior == doctest::Approx(1.0).epsilon(1e-10));

        const auto g = expected_grid_split(f, pol);
        const double e_pb = expected_battery_power(f, pol);
        CHECK(e_pb + g.exp_sell + g.exp_buy == doctest::Approx(f.mean()).epsilon(1e-9));
        CHECK(g.exp_sell <= 1e-9);
        CHECK(g.exp_buy >= -1e-9);
        CHECK(e_pb >= pol.pb_lo);
        CHECK(e_pb <= pol.pb_hi);
    }
}

TEST_CASE("degenerate interval collapses to the Fixed-Battery grid split") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 50; ++i) {
        const auto f = random_mixture(rng);
        const double c = u(rng);
        const auto pol = DispatchPolicy::from_setpoints(c, c, u(rng));
        const auto g = expected_grid_split(f, pol);
        CHECK(g.exp_sell ==
              doctest::Approx(f.partial_expectation(-inf, 0.0, c)).epsilon(1e-10));
        CHECK(g.exp_buy ==
              doctest::Approx(f.partial_expectation(0.0, inf, c)).epsilon(1e-10));
    }
}

TEST_CASE("widening the interval never sheds discrete mass") {
    std::mt19937_64 rng(24);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const auto f = random_mixture(rng);
        const auto pol = random_policy(rng);
        const auto wide = DispatchPolicy::from_setpoints(pol.pb_lo - u(rng),
                                                         pol.pb_hi + u(rng), pol.pg_des);
        const auto bp = boundary_probabilities(f, pol);
        const auto bw = boundary_probabilities(f, wide);
        CHECK(1.0 - bw.p1 - bw.p2 >= 1.0 - bp.p1 - bp.p2 - 1e-12);
    }
}
