#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "alsolver.hpp"
#include "battsched/scheduler.hpp"
#include "oracles.hpp"

using namespace battsched;

namespace {

const BatterySpec kSpec{0.0, 7.68, -5.12, 5.12, 0.98, 0.98};

HorizonProblem point_problem(const std::vector<double>& netload,
                             const std::vector<double>& c_buy,
                             const std::vector<double>& c_sell, double soe0,
                             double sigma = 1e-8) {
    HorizonProblem prob{{}, kSpec, {soe0}, 1.0};
    for (size_t k = 0; k < netload.size(); ++k)
        prob.frames.push_back({GaussianMixture2::single(netload[k], sigma), c_buy[k],
                               c_sell[k]});
    return prob;
}

GaussianMixture2 random_mixture(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double w = 0.05 + 0.9 * u(rng);
    return GaussianMixture2({w, -2.0 + 4.0 * u(rng), 0.2 + 1.2 * u(rng)},
                            {1.0 - w, -2.0 + 4.0 * u(rng), 0.2 + 1.2 * u(rng)});
}

HorizonProblem random_problem(std::mt19937_64& rng, int K) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    HorizonProblem prob{{}, kSpec, {kSpec.e_max * u(rng)}, 1.0};
    for (int k = 0; k < K; ++k)
        prob.frames.push_back(
            {random_mixture(rng), 0.2 + 0.4 * u(rng), 0.02 + 0.1 * u(rng)});
    return prob;
}

// Solver iterates may carry a relaxed sell/buy split; build the policy struct
// directly, bypassing the complementarity validation.
DispatchPolicy raw_policy(double l, double h, double s, double b) {
    DispatchPolicy pol;
    pol.pb_lo = l;
    pol.pb_hi = h;
    pol.pg_des = s + b;
    pol.pg_des_sell = s;
    pol.pg_des_buy = b;
    return pol;
}

}  // namespace

TEST_CASE("objective: export-only regime earns revenue") {
    auto prob = point_problem({-3.0}, {0.4}, {0.08}, 3.84);
    prob.frames[0].netload = GaussianMixture2::single(-3.0, 0.2);
    const auto pol = DispatchPolicy::from_setpoints(-1.0, 1.0, -3.0);
    const double cost = objective(prob, {pol});
    CHECK(cost < 0.0);
    CHECK(cost == doctest::Approx(0.08 * -3.0).epsilon(1e-3));
}

TEST_CASE("objective: deterministic pass-through") {
    for (const double p_l : {2.0, -1.5}) {
        auto prob = point_problem({p_l}, {0.4}, {0.08}, 3.84);
        const auto pol = DispatchPolicy::from_setpoints(0.0, 0.0, p_l);
        const double want = 0.4 * std::max(p_l, 0.0) + 0.08 * std::min(p_l, 0.0);
        CHECK(objective(prob, {pol}) == doctest::Approx(want).epsilon(1e-6));
    }
}

TEST_CASE("objective: Monte-Carlo cost oracle on a 3-step problem") {
    std::mt19937_64 rng(41);
    const auto prob = random_problem(rng, 3);
    std::vector<DispatchPolicy> pols;
    for (int k = 0; k < 3; ++k) {
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        double l = u(rng), h = u(rng);
        if (l > h) std::swap(l, h);
        pols.push_back(DispatchPolicy::from_setpoints(l, h, u(rng)));
    }
    const double got = objective(prob, pols);

    // sample hourly net-loads, realize the policies, price the grid power
    std::mt19937_64 mc_rng(4242);
    double sum = 0.0, sum2 = 0.0;
    const int N = 1'000'000;
    for (int i = 0; i < N; ++i) {
        double cost = 0.0;
        for (int k = 0; k < 3; ++k) {
            const double p_l = oracle::sample(prob.frames[k].netload, mc_rng);
            const auto r = realize(pols[k], p_l);
            cost += prob.frames[k].c_buy * std::max(r.p_g, 0.0) +
                    prob.frames[k].c_sell * std::min(r.p_g, 0.0);
        }
        sum += cost;
        sum2 += cost * cost;
    }
    const double mean = sum / N;
    const double se = std::sqrt(std::max(0.0, sum2 / N - mean * mean) / N);
    CHECK(std::abs(got - mean) <= 3.0 * se);
}

TEST_CASE("gradient matches central finite differences") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int K = 3;
    int checked = 0;
    for (int trial = 0; trial < 17; ++trial) {
        const auto prob = random_problem(rng, K);
        std::vector<DispatchPolicy> pols;
        for (int k = 0; k < K; ++k) {
            const double l = -4.0 + 2.0 * u(rng);
            const double h = 0.5 + 3.0 * u(rng);
            pols.push_back(raw_policy(l, h, -2.0 + 1.8 * u(rng), 0.2 + 1.8 * u(rng)));
        }
        const auto grad = gradient(prob, pols);
        for (int k = 0; k < K; ++k) {
            for (int j = 0; j < 4; ++j) {
                auto perturbed = [&](double eps) {
                    auto p2 = pols;
                    double* f[] = {&p2[k].pb_lo, &p2[k].pb_hi, &p2[k].pg_des_sell,
                                   &p2[k].pg_des_buy};
                    *f[j] += eps;
                    p2[k].pg_des = p2[k].pg_des_sell + p2[k].pg_des_buy;
                    return objective(prob, p2);
                };
                const double x = j == 0   ? pols[k].pb_lo
                                 : j == 1 ? pols[k].pb_hi
                                 : j == 2 ? pols[k].pg_des_sell
                                          : pols[k].pg_des_buy;
                const double h_fd = 1e-5 * std::max(1.0, std::abs(x));
                const double fd = (perturbed(h_fd) - perturbed(-h_fd)) / (2.0 * h_fd);
                const double denom = std::max(std::abs(fd), 1e-3);
                CHECK(std::abs(grad[4 * k + j] - fd) <= 1e-4 * denom);
                ++checked;
            }
        }
        if (checked >= 50 * 4) break;
    }
    CHECK(checked >= 50);
}

TEST_CASE("closed-form battery power sensitivities") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 30; ++i) {
        const auto f = random_mixture(rng);
        const double l = -3.0 + 2.0 * u(rng);
        const double h = 0.5 + 2.5 * u(rng);
        const double d = -2.0 + 4.0 * u(rng);
        const auto pol = DispatchPolicy::from_setpoints(l, h, d);
        const auto bp = boundary_probabilities(f, pol);
        const double eps = 1e-6;

        // d E[P_B] / d pb_hi = P2
        const auto hi_p = DispatchPolicy::from_setpoints(l, h + eps, d);
        const auto hi_m = DispatchPolicy::from_setpoints(l, h - eps, d);
        const double fd_hi = (expected_battery_power(f, hi_p) -
                              expected_battery_power(f, hi_m)) /
                             (2.0 * eps);
        CHECK(fd_hi == doctest::Approx(bp.p2).epsilon(1e-4));

        // d E[P_B] / d pb_lo = P1
        const auto lo_p = DispatchPolicy::from_setpoints(l + eps, h, d);
        const auto lo_m = DispatchPolicy::from_setpoints(l - eps, h, d);
        const double fd_lo = (expected_battery_power(f, lo_p) -
                              expected_battery_power(f, lo_m)) /
                             (2.0 * eps);
        CHECK(fd_lo == doctest::Approx(bp.p1).epsilon(1e-4));

        // d E[P_B] / d pg_des = -(1 - P1 - P2)
        const auto d_p = DispatchPolicy::from_setpoints(l, h, d + eps);
        const auto d_m = DispatchPolicy::from_setpoints(l, h, d - eps);
        const double fd_d = (expected_battery_power(f, d_p) -
                             expected_battery_power(f, d_m)) /
                            (2.0 * eps);
        CHECK(fd_d == doctest::Approx(-(1.0 - bp.p1 - bp.p2)).epsilon(1e-4));
    }
}

TEST_CASE("solve: one hour, empty battery, forced import") {
    const auto prob = point_problem({2.0}, {0.4}, {0.08}, 0.0);
    const auto sol = solve(prob);
    REQUIRE(sol.status != SolverStatus::infeasible);
    CHECK(sol.expected_cost == doctest::Approx(0.80).epsilon(2e-3));
    CHECK(sol.policies[0].pg_des == doctest::Approx(2.0).epsilon(1e-2));
}

TEST_CASE("solve: two hours, store the surplus, then discharge") {
    const auto prob = point_problem({-3.0, 3.0}, {0.4, 0.4}, {0.08, 0.08}, 0.0);
    const auto sol = solve(prob);
    REQUIRE(sol.status != SolverStatus::infeasible);

    oracle::SearchProblem sp{{-3.0, 3.0}, {0.4, 0.4}, {0.08, 0.08}, kSpec, 0.0, 1.0};
    const double want = oracle::grid_search_cost(sp, 0.01);
    CHECK(std::abs(sol.expected_cost - want) <= 1e-3);
    // hour 1 charges roughly the full surplus
    const double e1 = expected_battery_power(prob.frames[0].netload, sol.policies[0]);
    CHECK(e1 == doctest::Approx(-3.0).epsilon(0.02));
}

TEST_CASE("solve: interval solution at least as good as a zero-width one") {
    HorizonProblem prob{{}, kSpec, {3.84}, 1.0};
    prob.frames.push_back({GaussianMixture2::single(0.0, 1.0), 0.4, 0.08});
    const auto sol = solve(prob);
    REQUIRE(sol.status != SolverStatus::infeasible);
    const double d = sol.policies[0].pg_des;
    const double c = std::clamp(0.0 - d, -1.0, 1.0);
    const auto fb = DispatchPolicy::from_setpoints(c, c, d);
    CHECK(sol.expected_cost <= objective(prob, {fb}) + 1e-6);
}

TEST_CASE("solve: deterministic collapse equals the setpoint baseline") {
    const std::vector<double> net = {1.5, -2.0, 2.5};
    const std::vector<double> buy = {0.45, 0.35, 0.50};
    const std::vector<double> sell = {0.08, 0.05, 0.10};
    const auto prob = point_problem(net, buy, sell, 3.84, 1e-6);
    const auto interval_sol = solve(prob);
    const auto setpoint_sol = solve_setpoints(prob);
    REQUIRE(interval_sol.status != SolverStatus::infeasible);
    REQUIRE(setpoint_sol.status != SolverStatus::infeasible);
    CHECK(std::abs(interval_sol.expected_cost - setpoint_sol.expected_cost) <= 1e-4);
}

TEST_CASE("solve: returned solutions are feasible") {
    std::mt19937_64 rng(44);
    for (int trial = 0; trial < 5; ++trial) {
        const auto prob = random_problem(rng, 6);
        const auto sol = solve(prob);
        REQUIRE(sol.status != SolverStatus::infeasible);
        REQUIRE(sol.policies.size() == 6);
        REQUIRE(sol.expected_soe.size() == 7);
        for (int k = 0; k < 6; ++k) {
            const auto& pol = sol.policies[k];
            CHECK(pol.pb_lo >= kSpec.p_min - 1e-9);
            CHECK(pol.pb_hi <= kSpec.p_max + 1e-9);
            CHECK(pol.pb_lo <= pol.pb_hi + 1e-9);
            CHECK(pol.pg_des_sell <= 1e-12);
            CHECK(pol.pg_des_buy >= -1e-12);
            CHECK(pol.pg_des_sell * pol.pg_des_buy >= -1e-8);
            // SoE-coupled interval constraints
            const double e_k = sol.expected_soe[k];
            CHECK(pol.pb_lo >= (e_k - kSpec.e_max) / (kSpec.eta_ch * prob.dt) - 1e-6);
            CHECK(pol.pb_hi <= (e_k - kSpec.e_min) * kSpec.eta_dis / prob.dt + 1e-6);
        }
        for (double e : sol.expected_soe) {
            CHECK(e >= kSpec.e_min - 1e-6);
            CHECK(e <= kSpec.e_max + 1e-6);
        }
    }
}

TEST_CASE("inner merit values are nonincreasing across accepted iterations") {
    std::mt19937_64 rng(45);
    const auto prob = random_problem(rng, 4);
    // exercise the solver core directly on a representative problem
    opt::Box box;
    box.lo.assign(4, -2.0);
    box.hi.assign(4, 2.0);
    auto fg = [](const std::vector<double>& x, std::vector<double>* g) {
        // Rosenbrock-style coupled bowl
        double f = 0.0;
        if (g) g->assign(x.size(), 0.0);
        for (size_t i = 0; i + 1 < x.size(); ++i) {
            const double a = x[i + 1] - x[i] * x[i];
            const double b = 1.0 - x[i];
            f += 10.0 * a * a + b * b;
            if (g) {
                (*g)[i] += -40.0 * a * x[i] - 2.0 * b;
                (*g)[i + 1] += 20.0 * a;
            }
        }
        return f;
    };
    const auto res = opt::minimize_projected(fg, {-1.5, 1.0, 1.5, -1.0}, box, 200, 1e-10,
                                             true);
    REQUIRE(res.f_history.size() > 2);
    for (size_t i = 1; i < res.f_history.size(); ++i)
        CHECK(res.f_history[i] <= res.f_history[i - 1] + 1e-12);
    CHECK(res.f < 1e-6);
}

TEST_CASE("adding starts never worsens the objective") {
    std::mt19937_64 rng(46);
    const auto prob = random_problem(rng, 5);
    SolverOptions three;
    three.multistart = 3;
    SolverOptions six;
    six.multistart = 6;
    six.seed = 99;
    const auto a = solve(prob, three);
    const auto b = solve(prob, six);
    REQUIRE(a.status != SolverStatus::infeasible);
    REQUIRE(b.status != SolverStatus::infeasible);
    CHECK(b.expected_cost <= a.expected_cost + 1e-7);
}

TEST_CASE("inconsistent problem reports infeasible with no policies") {
    HorizonProblem prob{{}, kSpec, {3.84}, 1.0};
    prob.frames.push_back({GaussianMixture2::single(1.0, 0.5), 0.4, 0.08});
    prob.spec.e_min = 9.0;  // above e_max
    const auto sol = solve(prob);
    CHECK(sol.status == SolverStatus::infeasible);
    CHECK(sol.policies.empty());
    const auto sps = solve_setpoints(prob);
    CHECK(sps.status == SolverStatus::infeasible);
    CHECK(sps.setpoints.empty());
}

TEST_CASE("solve timing stays interactive for a day horizon") {
    std::mt19937_64 rng(47);
    const auto prob = random_problem(rng, 24);
    const auto t0 = std::chrono::steady_clock::now();
    const auto sol = solve(prob);
    const auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0);
    REQUIRE(sol.status != SolverStatus::infeasible);
    CHECK(dt.count() < 2.0);
    MESSAGE("K=24 solve took ", dt.count(), " s, cost ", sol.expected_cost);
}
