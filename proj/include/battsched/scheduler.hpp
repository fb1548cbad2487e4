#pragma once

#include <vector>

#include "battsched/battery.hpp"
#include "battsched/mixedrv.hpp"

namespace battsched {

// One hour of planning input: net-load uncertainty and prices.
struct HorizonFrame {
    GaussianMixture2 netload;
    double c_buy = 0.0;   // eur/kWh
    double c_sell = 0.0;  // eur/kWh
};

struct HorizonProblem {
    std::vector<HorizonFrame> frames;
    BatterySpec spec;
    BatteryState initial_state;
    double dt = 1.0;  // hours
};

enum class SolverStatus { converged, max_iterations, infeasible };

const char* to_string(SolverStatus s);

struct SolverOptions {
    int max_outer = 200;
    int max_inner = 300;
    double feas_tol = 1e-6;
    double stat_tol = 1e-5;
    int multistart = 3;     // 3 deterministic starts; extras are seeded perturbations
    unsigned seed = 0;
};

struct HorizonSolution {
    std::vector<DispatchPolicy> policies;    // K entries
    std::vector<double> expected_soe;        // K+1 entries, kWh
    double expected_cost = 0.0;              // eur
    SolverStatus status = SolverStatus::infeasible;
};

// Expected electricity cost of running the given per-hour policies:
// sum_k dt * (c_buy(k) * exp_buy(k) + c_sell(k) * exp_sell(k)).
double objective(const HorizonProblem& prob, const std::vector<DispatchPolicy>& policies);

// Analytic d objective / d(pb_lo, pb_hi, pg_des_sell, pg_des_buy), 4 per step.
std::vector<double> gradient(const HorizonProblem& prob,
                             const std::vector<DispatchPolicy>& policies);

// Optimizes per-hour battery power intervals plus desired grid setpoints.
// `warm` optionally seeds an extra start (e.g. the previous receding-horizon
// solution shifted by one step).
HorizonSolution solve(const HorizonProblem& prob, const SolverOptions& opts = {},
                      const std::vector<DispatchPolicy>* warm = nullptr);

// Fixed-setpoint flavor: one battery power per hour, the grid absorbs all
// deviations. Shares the solver machinery; used by the FB-style controllers
// and as the deterministic baseline.
struct SetpointSolution {
    std::vector<double> setpoints;     // K battery powers, kW
    std::vector<double> expected_soe;  // K+1
    double expected_cost = 0.0;
    SolverStatus status = SolverStatus::infeasible;
};

SetpointSolution solve_setpoints(const HorizonProblem& prob, const SolverOptions& opts = {},
                                 const std::vector<double>* warm = nullptr);

}  // namespace battsched
