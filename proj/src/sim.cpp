#include "battsched/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace battsched {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

SyntheticForecastProvider::SyntheticForecastProvider(std::vector<double> truth,
                                                     SyntheticForecastModel model,
                                                     std::uint64_t seed)
    : truth_(std::move(truth)), model_(model), seed_(seed) {
    model_.validate();
}

std::vector<GaussianMixture2> SyntheticForecastProvider::forecast_at(int k, int horizon) {
    if (k < 0 || k + horizon > static_cast<int>(truth_.size()) || horizon < 1)
        throw std::out_of_range("forecast_at: window outside scenario");
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(k);
    if (it != cache_.end() && static_cast<int>(it->second.size()) >= horizon)
        return {it->second.begin(), it->second.begin() + horizon};

    const std::vector<double> window(truth_.begin() + k, truth_.begin() + k + horizon);
    const auto quantiles = synthesize_quantiles(window, model_, mix_seed(seed_, k));
    std::vector<GaussianMixture2> fits;
    fits.reserve(quantiles.size());
    for (const auto& q : quantiles) fits.push_back(fit_mixture(q).mixture);
    cache_[k] = fits;
    return fits;
}

QuantileTableForecastProvider::QuantileTableForecastProvider(
    std::vector<QuantileForecast> table)
    : table_(std::move(table)) {}

std::vector<GaussianMixture2> QuantileTableForecastProvider::forecast_at(int k,
                                                                         int horizon) {
    if (k < 0 || k + horizon > static_cast<int>(table_.size()) || horizon < 1)
        throw std::out_of_range("forecast_at: window outside quantile table");
    std::lock_guard<std::mutex> lock(mutex_);
    std::vector<GaussianMixture2> out;
    out.reserve(horizon);
    for (int h = k; h < k + horizon; ++h) {
        auto it = cache_.find(h);
        if (it == cache_.end())
            it = cache_.emplace(h, fit_mixture(table_[h]).mixture).first;
        out.push_back(it->second);
    }
    return out;
}

std::vector<ScenarioFrame> frames_at(const Scenario& sc, int k, int horizon) {
    if (!sc.forecasts) throw std::invalid_argument("frames_at: scenario has no forecasts");
    const auto fits = sc.forecasts->forecast_at(k, horizon);
    std::vector<ScenarioFrame> frames;
    frames.reserve(horizon);
    for (int h = 0; h < horizon; ++h)
        frames.push_back({k + h, fits[h], sc.truth[k + h], sc.c_buy[k + h],
                          sc.c_sell[k + h]});
    return frames;
}

SimulationReport run_episode(const Scenario& sc, ControllerKind kind,
                             const BatterySpec& spec, int horizon, std::uint64_t seed,
                             const SolverOptions& opts) {
    spec.validate();
    const int T = static_cast<int>(sc.truth.size());
    if (T == 0) throw std::invalid_argument("run_episode: empty scenario");
    if (sc.c_buy.size() != sc.truth.size() || sc.c_sell.size() != sc.truth.size())
        throw std::invalid_argument("run_episode: price/truth length mismatch");
    if (horizon < 1) throw std::invalid_argument("run_episode: horizon must be >= 1");
    if (T < horizon) throw std::invalid_argument("run_episode: scenario shorter than horizon");

    SolverOptions hour_opts = opts;
    hour_opts.seed = static_cast<unsigned>(mix_seed(seed, 0x5eed));

    SimulationReport rep;
    rep.controller = to_string(kind);
    rep.trace.reserve(T);

    BatteryState state{sc.initial_soe.value_or(0.5 * (spec.e_min + spec.e_max))};
    PlannerMemory memory;
    const double dt = sc.dt;

    const bool needs_mixtures =
        kind == ControllerKind::SMPC_FG || kind == ControllerKind::SMPC_FB;
    const bool needs_points =
        kind == ControllerKind::MPC_FG || kind == ControllerKind::MPC_FB;

    for (int t = 0; t < T; ++t) {
        const int k_eff = std::min(horizon, T - t);
        const double p_l = sc.truth[t];
        const PowerInterval fi = feasible_interval(spec, state, dt);

        HourTrace tr;
        tr.p_l = p_l;
        Realization r;
        try {
            if (kind == ControllerKind::RBC) {
                r = plan_rbc(spec, state, dt, p_l);
                tr.pb_lo = tr.pb_hi = r.p_b;
                tr.pg_des = r.p_g;
            } else {
                std::vector<double> buy(sc.c_buy.begin() + t, sc.c_buy.begin() + t + k_eff);
                std::vector<double> sell(sc.c_sell.begin() + t,
                                         sc.c_sell.begin() + t + k_eff);
                HourAction act;
                if (kind == ControllerKind::MPC_IDEAL) {
                    std::vector<double> future(sc.truth.begin() + t,
                                               sc.truth.begin() + t + k_eff);
                    act = plan_mpc_ideal(future, buy, sell, spec, state, dt, hour_opts,
                                         &memory);
                } else if (needs_mixtures || needs_points) {
                    auto mixtures = frames_at(sc, t, k_eff);
                    std::vector<GaussianMixture2> fc;
                    std::vector<double> points;
                    fc.reserve(k_eff);
                    points.reserve(k_eff);
                    for (const auto& fr : mixtures) {
                        fc.push_back(fr.forecast);
                        points.push_back(point_forecast(fr.forecast));
                    }
                    switch (kind) {
                        case ControllerKind::SMPC_FG:
                            act = plan_smpc_fg(fc, buy, sell, spec, state, dt, hour_opts,
                                               &memory);
                            break;
                        case ControllerKind::SMPC_FB:
                            act = plan_smpc_fb(fc, buy, sell, spec, state, dt, hour_opts,
                                               &memory);
                            break;
                        case ControllerKind::MPC_FG:
                            act = plan_mpc_fg(points, buy, sell, spec, state, dt, hour_opts,
                                              &memory);
                            break;
                        default:
                            act = plan_mpc_fb(points, buy, sell, spec, state, dt, hour_opts,
                                              &memory);
                            break;
                    }
                }

                if (act.type == HourAction::Type::policy) {
                    // Physics wins: the executed interval is the planned one
                    // intersected with what the current SoE admits.
                    double lo = std::max(act.policy.pb_lo, fi.lo);
                    double hi = std::min(act.policy.pb_hi, fi.hi);
                    if (lo > hi) {
                        const double pin = std::clamp(act.policy.pb_lo < fi.lo ? fi.lo : fi.hi,
                                                      fi.lo, fi.hi);
                        lo = hi = pin;
                    }
                    if (std::abs(lo - act.policy.pb_lo) > 1e-12 ||
                        std::abs(hi - act.policy.pb_hi) > 1e-12) {
                        tr.tightened = true;
                        ++rep.tighten_events;
                    }
                    const DispatchPolicy executed =
                        DispatchPolicy::from_setpoints(lo, hi, act.policy.pg_des);
                    r = realize(executed, p_l);
                    tr.pb_lo = lo;
                    tr.pb_hi = hi;
                    tr.pg_des = executed.pg_des;
                } else {
                    double p_b = std::clamp(act.setpoint, fi.lo, fi.hi);
                    if (std::abs(p_b - act.setpoint) > 1e-12) {
                        tr.tightened = true;
                        ++rep.tighten_events;
                    }
                    r.p_b = p_b;
                    r.p_g = p_l - p_b;
                    tr.pb_lo = tr.pb_hi = p_b;
                    tr.pg_des = r.p_g;
                }
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("episode " + sc.name + " [" + to_string(kind) +
                                     "] failed at hour " + std::to_string(t) + ": " +
                                     e.what());
        }

        state = step(spec, state, r.p_b, dt);

        tr.p_b = r.p_b;
        tr.p_g = r.p_g;
        tr.soe = state.soe;
        rep.trace.push_back(tr);

        const double imp = std::max(r.p_g, 0.0) * dt;
        const double exp_ = -std::min(r.p_g, 0.0) * dt;
        rep.import_kwh += imp;
        rep.export_kwh += exp_;
        rep.import_cost_eur += sc.c_buy[t] * imp;
        rep.export_revenue_eur += sc.c_sell[t] * exp_;
    }
    rep.total_cost_eur = rep.import_cost_eur - rep.export_revenue_eur;
    return rep;
}

namespace {

// Mean 1-based placement by ascending total cost; ties share the mean of the
// tied placements.
std::vector<double> placements(const std::vector<double>& costs) {
    const size_t n = costs.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return costs[a] < costs[b]; });
    std::vector<double> place(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && std::abs(costs[order[j + 1]] - costs[order[i]]) <= 1e-9) ++j;
        const double shared = 0.5 * static_cast<double>(i + 1 + j + 1);
        for (size_t k = i; k <= j; ++k) place[order[k]] = shared;
        i = j + 1;
    }
    return place;
}

}  // namespace

TournamentResult tournament(const std::vector<Scenario>& scenarios,
                            const std::vector<ControllerKind>& controllers,
                            const BatterySpec& spec, int horizon, std::uint64_t seed,
                            const SolverOptions& opts, int threads) {
    if (scenarios.empty()) throw std::invalid_argument("tournament: no scenarios");
    if (controllers.size() < 1) throw std::invalid_argument("tournament: no controllers");

    TournamentResult res;
    res.controllers = controllers;
    for (const auto& sc : scenarios) res.scenario_names.push_back(sc.name);
    res.by_scenario.assign(scenarios.size(), {});

    if (threads <= 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<int>(threads, static_cast<int>(scenarios.size()));

    std::vector<std::exception_ptr> errors(scenarios.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const size_t s = next.fetch_add(1);
            if (s >= scenarios.size()) return;
            try {
                std::vector<SimulationReport> row;
                row.reserve(controllers.size());
                for (const auto kind : controllers)
                    row.push_back(run_episode(scenarios[s], kind, spec, horizon,
                                              mix_seed(seed, s), opts));
                res.by_scenario[s] = std::move(row);
            } catch (...) {
                errors[s] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    // Per-scenario regret and placements.
    int ideal_idx = -1;
    for (size_t c = 0; c < controllers.size(); ++c)
        if (controllers[c] == ControllerKind::MPC_IDEAL) ideal_idx = static_cast<int>(c);

    std::vector<double> rank_sum(controllers.size(), 0.0);
    for (size_t s = 0; s < scenarios.size(); ++s) {
        auto& row = res.by_scenario[s];
        std::vector<double> costs(controllers.size());
        for (size_t c = 0; c < controllers.size(); ++c) costs[c] = row[c].total_cost_eur;
        const auto place = placements(costs);
        for (size_t c = 0; c < controllers.size(); ++c) {
            row[c].rank = place[c];
            rank_sum[c] += place[c];
            if (ideal_idx >= 0) {
                const double ideal = costs[ideal_idx];
                row[c].regret_pct = ideal != 0.0 ? 100.0 * (costs[c] - ideal) / ideal : 0.0;
                if (static_cast<int>(c) != ideal_idx && costs[c] < ideal - 1e-9)
                    res.notes.push_back("scenario " + scenarios[s].name + ": " +
                                        row[c].controller +
                                        " beat MPC-Ideal (finite-horizon effect)");
            }
        }
    }

    // Aggregate means across scenarios; regret from the aggregate totals.
    res.aggregate.resize(controllers.size());
    const double ns = static_cast<double>(scenarios.size());
    for (size_t c = 0; c < controllers.size(); ++c) {
        SimulationReport& agg = res.aggregate[c];
        agg.controller = to_string(controllers[c]);
        for (size_t s = 0; s < scenarios.size(); ++s) {
            const auto& r = res.by_scenario[s][c];
            agg.import_kwh += r.import_kwh;
            agg.import_cost_eur += r.import_cost_eur;
            agg.export_kwh += r.export_kwh;
            agg.export_revenue_eur += r.export_revenue_eur;
            agg.tighten_events += r.tighten_events;
        }
        agg.import_kwh /= ns;
        agg.import_cost_eur /= ns;
        agg.export_kwh /= ns;
        agg.export_revenue_eur /= ns;
        agg.total_cost_eur = agg.import_cost_eur - agg.export_revenue_eur;
        agg.rank = rank_sum[c] / ns;
    }
    if (ideal_idx >= 0) {
        const double ideal_total = res.aggregate[ideal_idx].total_cost_eur;
        for (auto& agg : res.aggregate)
            agg.regret_pct =
                ideal_total != 0.0
                    ? 100.0 * (agg.total_cost_eur - ideal_total) / ideal_total
                    : 0.0;
    }
    return res;
}

}  // namespace battsched
