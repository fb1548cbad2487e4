#include "battsched/controllers.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace battsched {

namespace {

// Spread used when wrapping point forecasts for the deterministic planners.
constexpr double kPointSigma = 1e-4;  // kW

HorizonProblem make_problem(const std::vector<GaussianMixture2>& forecast,
                            const std::vector<double>& c_buy,
                            const std::vector<double>& c_sell, const BatterySpec& spec,
                            BatteryState state, double dt) {
    if (forecast.empty() || forecast.size() != c_buy.size() ||
        forecast.size() != c_sell.size())
        throw std::invalid_argument("planner: forecast and price lengths must match");
    HorizonProblem prob{{}, spec, state, dt};
    prob.frames.reserve(forecast.size());
    for (size_t k = 0; k < forecast.size(); ++k)
        prob.frames.push_back({forecast[k], c_buy[k], c_sell[k]});
    return prob;
}

HorizonProblem make_point_problem(const std::vector<double>& points,
                                  const std::vector<double>& c_buy,
                                  const std::vector<double>& c_sell,
                                  const BatterySpec& spec, BatteryState state, double dt) {
    std::vector<GaussianMixture2> forecast;
    forecast.reserve(points.size());
    for (double p : points) forecast.push_back(GaussianMixture2::single(p, kPointSigma));
    return make_problem(forecast, c_buy, c_sell, spec, state, dt);
}

void warn_not_converged(const char* who, SolverStatus status) {
    if (status == SolverStatus::max_iterations)
        std::fprintf(stderr, "[battsched] %s: solver hit iteration cap, using best feasible solution\n",
                     who);
}

// Shift a receding-horizon plan by one step, duplicating the tail entry.
template <class T>
std::vector<T> shifted(const std::vector<T>& prev, size_t want) {
    std::vector<T> out;
    if (prev.empty()) return out;
    out.assign(prev.begin() + 1, prev.end());
    while (out.size() < want) out.push_back(prev.back());
    out.resize(want);
    return out;
}

HourAction setpoint_action(const std::vector<double>& point_forecast,
                           const std::vector<double>& c_buy,
                           const std::vector<double>& c_sell, const BatterySpec& spec,
                           BatteryState state, double dt, const SolverOptions& opts,
                           PlannerMemory* memory, const char* who, bool grid_action) {
    const HorizonProblem prob =
        make_point_problem(point_forecast, c_buy, c_sell, spec, state, dt);

    std::vector<double> warm;
    if (memory) warm = shifted(memory->last_setpoints, prob.frames.size());
    const SetpointSolution sol =
        solve_setpoints(prob, opts, warm.empty() ? nullptr : &warm);
    if (sol.status == SolverStatus::infeasible)
        throw std::runtime_error(std::string(who) + ": solver reported infeasible problem");
    warn_not_converged(who, sol.status);
    if (memory) memory->last_setpoints = sol.setpoints;

    const PowerInterval fi = feasible_interval(spec, state, dt);
    HourAction act;
    if (grid_action) {
        act.type = HourAction::Type::policy;
        act.policy = DispatchPolicy::from_setpoints(fi.lo, fi.hi,
                                                    point_forecast[0] - sol.setpoints[0]);
    } else {
        act.type = HourAction::Type::setpoint;
        act.setpoint = std::clamp(sol.setpoints[0], fi.lo, fi.hi);
    }
    return act;
}

}  // namespace

ControllerKind controller_from_name(const std::string& name) {
    if (name == "SMPC-FG") return ControllerKind::SMPC_FG;
    if (name == "MPC-FG") return ControllerKind::MPC_FG;
    if (name == "MPC-FB") return ControllerKind::MPC_FB;
    if (name == "SMPC-FB") return ControllerKind::SMPC_FB;
    if (name == "MPC-Ideal") return ControllerKind::MPC_IDEAL;
    if (name == "RBC") return ControllerKind::RBC;
    throw std::invalid_argument(
        "unknown controller '" + name +
        "'; valid: SMPC-FG, MPC-FG, MPC-FB, SMPC-FB, MPC-Ideal, RBC");
}

const char* to_string(ControllerKind kind) {
    switch (kind) {
        case ControllerKind::SMPC_FG: return "SMPC-FG";
        case ControllerKind::MPC_FG: return "MPC-FG";
        case ControllerKind::MPC_FB: return "MPC-FB";
        case ControllerKind::SMPC_FB: return "SMPC-FB";
        case ControllerKind::MPC_IDEAL: return "MPC-Ideal";
        case ControllerKind::RBC: return "RBC";
    }
    return "unknown";
}

HourAction plan_smpc_fg(const std::vector<GaussianMixture2>& forecast,
                        const std::vector<double>& c_buy, const std::vector<double>& c_sell,
                        const BatterySpec& spec, BatteryState state, double dt,
                        const SolverOptions& opts, PlannerMemory* memory) {
    const HorizonProblem prob = make_problem(forecast, c_buy, c_sell, spec, state, dt);

    std::vector<DispatchPolicy> warm;
    if (memory) warm = shifted(memory->last_policies, prob.frames.size());
    const HorizonSolution sol = solve(prob, opts, warm.empty() ? nullptr : &warm);
    if (sol.status == SolverStatus::infeasible)
        throw std::runtime_error("SMPC-FG: solver reported infeasible problem");
    warn_not_converged("SMPC-FG", sol.status);
    if (memory) memory->last_policies = sol.policies;

    HourAction act;
    act.type = HourAction::Type::policy;
    act.policy = sol.policies.front();
    return act;
}

HourAction plan_mpc_fg(const std::vector<double>& point_forecast,
                       const std::vector<double>& c_buy, const std::vector<double>& c_sell,
                       const BatterySpec& spec, BatteryState state, double dt,
                       const SolverOptions& opts, PlannerMemory* memory) {
    return setpoint_action(point_forecast, c_buy, c_sell, spec, state, dt, opts, memory,
                           "MPC-FG", /*grid_action=*/true);
}

HourAction plan_mpc_fb(const std::vector<double>& point_forecast,
                       const std::vector<double>& c_buy, const std::vector<double>& c_sell,
                       const BatterySpec& spec, BatteryState state, double dt,
                       const SolverOptions& opts, PlannerMemory* memory) {
    return setpoint_action(point_forecast, c_buy, c_sell, spec, state, dt, opts, memory,
                           "MPC-FB", /*grid_action=*/false);
}

HourAction plan_smpc_fb(const std::vector<GaussianMixture2>& forecast,
                        const std::vector<double>& c_buy, const std::vector<double>& c_sell,
                        const BatterySpec& spec, BatteryState state, double dt,
                        const SolverOptions& opts, PlannerMemory* memory) {
    const HorizonProblem prob = make_problem(forecast, c_buy, c_sell, spec, state, dt);

    std::vector<double> warm;
    if (memory) warm = shifted(memory->last_setpoints, prob.frames.size());
    const SetpointSolution sol =
        solve_setpoints(prob, opts, warm.empty() ? nullptr : &warm);
    if (sol.status == SolverStatus::infeasible)
        throw std::runtime_error("SMPC-FB: solver reported infeasible problem");
    warn_not_converged("SMPC-FB", sol.status);
    if (memory) memory->last_setpoints = sol.setpoints;

    const PowerInterval fi = feasible_interval(spec, state, dt);
    HourAction act;
    act.type = HourAction::Type::setpoint;
    act.setpoint = std::clamp(sol.setpoints[0], fi.lo, fi.hi);
    return act;
}

HourAction plan_mpc_ideal(const std::vector<double>& true_netload,
                          const std::vector<double>& c_buy, const std::vector<double>& c_sell,
                          const BatterySpec& spec, BatteryState state, double dt,
                          const SolverOptions& opts, PlannerMemory* memory) {
    return setpoint_action(true_netload, c_buy, c_sell, spec, state, dt, opts, memory,
                           "MPC-Ideal", /*grid_action=*/false);
}

Realization plan_rbc(const BatterySpec& spec, BatteryState state, double dt,
                     double p_l_realized) {
    const PowerInterval fi = feasible_interval(spec, state, dt);
    Realization r;
    r.p_b = std::clamp(p_l_realized, fi.lo, fi.hi);
    r.p_g = p_l_realized - r.p_b;
    return r;
}

}  // namespace battsched
