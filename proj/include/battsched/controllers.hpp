#pragma once

#include <optional>
#include <string>
#include <vector>

#include "battsched/scheduler.hpp"

namespace battsched {

enum class ControllerKind { SMPC_FG, MPC_FG, MPC_FB, SMPC_FB, MPC_IDEAL, RBC };

// Parses the Table-style names (SMPC-FG, MPC-FG, MPC-FB, SMPC-FB, MPC-Ideal,
// RBC); throws std::invalid_argument listing the valid names otherwise.
ControllerKind controller_from_name(const std::string& name);
const char* to_string(ControllerKind kind);

// What a controller wants executed this hour.
struct HourAction {
    enum class Type { policy, setpoint, rule };
    Type type = Type::rule;
    DispatchPolicy policy;   // Fixed-Grid family
    double setpoint = 0.0;   // kW, Fixed-Battery family
};

// Receding-horizon continuation data; optional, never changes feasibility.
struct PlannerMemory {
    std::vector<DispatchPolicy> last_policies;
    std::vector<double> last_setpoints;
};

// Stochastic Fixed-Grid: optimize battery power intervals plus grid
// setpoints against the mixture forecasts; execute the first hour's policy.
HourAction plan_smpc_fg(const std::vector<GaussianMixture2>& forecast,
                        const std::vector<double>& c_buy, const std::vector<double>& c_sell,
                        const BatterySpec& spec, BatteryState state, double dt,
                        const SolverOptions& opts, PlannerMemory* memory = nullptr);

// Deterministic Fixed-Grid: plan on point forecasts, execute the first grid
// setpoint; the battery compensates deviations over its full feasible range.
HourAction plan_mpc_fg(const std::vector<double>& point_forecast,
                       const std::vector<double>& c_buy, const std::vector<double>& c_sell,
                       const BatterySpec& spec, BatteryState state, double dt,
                       const SolverOptions& opts, PlannerMemory* memory = nullptr);

// Deterministic Fixed-Battery: plan on point forecasts, execute the first
// battery setpoint; the grid absorbs deviations.
HourAction plan_mpc_fb(const std::vector<double>& point_forecast,
                       const std::vector<double>& c_buy, const std::vector<double>& c_sell,
                       const BatterySpec& spec, BatteryState state, double dt,
                       const SolverOptions& opts, PlannerMemory* memory = nullptr);

// Stochastic Fixed-Battery: optimize fixed setpoints against the expected
// buy/sell cost of the forecast distributions.
HourAction plan_smpc_fb(const std::vector<GaussianMixture2>& forecast,
                        const std::vector<double>& c_buy, const std::vector<double>& c_sell,
                        const BatterySpec& spec, BatteryState state, double dt,
                        const SolverOptions& opts, PlannerMemory* memory = nullptr);

// Perfect-information benchmark: the deterministic plan on the realized
// net-load; defines the regret denominator.
HourAction plan_mpc_ideal(const std::vector<double>& true_netload,
                          const std::vector<double>& c_buy, const std::vector<double>& c_sell,
                          const BatterySpec& spec, BatteryState state, double dt,
                          const SolverOptions& opts, PlannerMemory* memory = nullptr);

// Rule-based control: charge PV surplus, discharge on load surplus, no
// forecast and no prices. Returns the realized pair directly.
Realization plan_rbc(const BatterySpec& spec, BatteryState state, double dt,
                     double p_l_realized);

}  // namespace battsched
