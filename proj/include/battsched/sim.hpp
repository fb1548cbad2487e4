#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "battsched/controllers.hpp"
#include "battsched/forecast.hpp"

namespace battsched {

// Lead-hour forecast mixtures as seen when planning at hour k. Implementations
// memoize fits so repeated queries (one per controller) are cheap.
class ForecastProvider {
public:
    virtual ~ForecastProvider() = default;
    virtual std::vector<GaussianMixture2> forecast_at(int k, int horizon) = 0;
};

// Regenerates lead-dependent quantiles from the scenario truth each planning
// hour and fits mixtures to them.
class SyntheticForecastProvider : public ForecastProvider {
public:
    SyntheticForecastProvider(std::vector<double> truth, SyntheticForecastModel model,
                              std::uint64_t seed);
    std::vector<GaussianMixture2> forecast_at(int k, int horizon) override;

private:
    std::vector<double> truth_;
    SyntheticForecastModel model_;
    std::uint64_t seed_;
    std::map<int, std::vector<GaussianMixture2>> cache_;  // by planning hour
    std::mutex mutex_;
};

// Serves fits of a fixed per-target-hour quantile table (e.g. loaded from a
// quantiles CSV); the same mixture is returned regardless of planning hour.
class QuantileTableForecastProvider : public ForecastProvider {
public:
    explicit QuantileTableForecastProvider(std::vector<QuantileForecast> table);
    std::vector<GaussianMixture2> forecast_at(int k, int horizon) override;

private:
    std::vector<QuantileForecast> table_;
    std::map<int, GaussianMixture2> cache_;  // by target hour
    std::mutex mutex_;
};

// A full experiment input: realized net-load, prices, and the forecast source.
struct Scenario {
    std::string name;
    std::vector<double> truth;  // kW, one entry per hour
    std::vector<double> c_buy;  // eur/kWh
    std::vector<double> c_sell;
    std::shared_ptr<ForecastProvider> forecasts;  // required for MPC controllers
    std::optional<double> initial_soe;            // kWh; default mid-range
    double dt = 1.0;                              // hours
};

// Per-hour view consumed by planners.
struct ScenarioFrame {
    int hour = 0;
    GaussianMixture2 forecast;
    double truth = 0.0;
    double c_buy = 0.0;
    double c_sell = 0.0;
};

// The planning window seen at hour k (forecasts refreshed for that hour).
std::vector<ScenarioFrame> frames_at(const Scenario& sc, int k, int horizon);

struct HourTrace {
    double p_l = 0, p_b = 0, p_g = 0, soe = 0;
    double pb_lo = 0, pb_hi = 0, pg_des = 0;
    bool tightened = false;  // policy interval cut back to the physical one
};

struct SimulationReport {
    std::string controller;
    double import_kwh = 0;
    double import_cost_eur = 0;
    double export_kwh = 0;
    double export_revenue_eur = 0;
    double total_cost_eur = 0;  // import cost minus export revenue
    double regret_pct = 0;      // vs MPC-Ideal; filled by tournament
    double rank = 0;            // mean placement; filled by tournament
    int tighten_events = 0;
    std::vector<HourTrace> trace;
};

// Receding-horizon run of one controller over one scenario. Deterministic
// given inputs and seed; throws on controller failure, naming the hour.
SimulationReport run_episode(const Scenario& sc, ControllerKind kind,
                             const BatterySpec& spec, int horizon, std::uint64_t seed,
                             const SolverOptions& opts = {});

struct TournamentResult {
    std::vector<std::string> scenario_names;
    std::vector<ControllerKind> controllers;
    // by_scenario[s][c]: report of controllers[c] on scenario s
    std::vector<std::vector<SimulationReport>> by_scenario;
    std::vector<SimulationReport> aggregate;  // means across scenarios
    std::vector<std::string> notes;           // e.g. per-scenario negative regret
};

TournamentResult tournament(const std::vector<Scenario>& scenarios,
                            const std::vector<ControllerKind>& controllers,
                            const BatterySpec& spec, int horizon, std::uint64_t seed,
                            const SolverOptions& opts = {}, int threads = 0);

}  // namespace battsched
