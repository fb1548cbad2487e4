#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "battsched/sim.hpp"
#include "battsched/tariff.hpp"
#include "cli_io.hpp"

namespace fs = std::filesystem;
using namespace battsched;

namespace {

// Exit codes: 0 ok, 2 usage, 3 data/config error, 4 solver failure.
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitSolver = 4;

int cmd_generate(const std::string& out, std::uint64_t seed, int days,
                 const std::string& profile, int count) {
    if (count <= 1) {
        io::GenerateOptions opts;
        opts.seed = seed;
        opts.days = days;
        opts.profile = profile;
        io::generate_scenario(out, opts);
        std::printf("wrote scenario bundle %s (%d days, profile %s, seed %llu)\n",
                    out.c_str(), days, profile.c_str(),
                    static_cast<unsigned long long>(seed));
    } else {
        const auto dirs = io::generate_corpus(out, seed, count, days);
        std::printf("wrote %zu scenario bundles under %s (seed %llu)\n", dirs.size(),
                    out.c_str(), static_cast<unsigned long long>(seed));
    }
    return 0;
}

int cmd_run(const std::vector<std::string>& scenario_dirs,
            const std::vector<std::string>& controller_names, int horizon,
            std::uint64_t seed, const std::string& out, bool emit_plots, int pdf_hour,
            int threads, const SolverOptions& sopts) {
    std::vector<ControllerKind> kinds;
    for (const auto& name : controller_names) kinds.push_back(controller_from_name(name));

    std::vector<Scenario> scenarios;
    BatterySpec spec;
    bool have_spec = false;
    for (const auto& dir : scenario_dirs) {
        io::LoadedScenario ls = io::load_scenario(dir);
        if (!have_spec) {
            spec = ls.config.battery;
            have_spec = true;
        } else if (spec.e_min != ls.config.battery.e_min ||
                   spec.e_max != ls.config.battery.e_max ||
                   spec.p_min != ls.config.battery.p_min ||
                   spec.p_max != ls.config.battery.p_max ||
                   spec.eta_ch != ls.config.battery.eta_ch ||
                   spec.eta_dis != ls.config.battery.eta_dis) {
            throw io::DataError("scenario " + dir + " uses a different battery spec");
        }
        scenarios.push_back(std::move(ls.scenario));
    }

    const TournamentResult result =
        tournament(scenarios, kinds, spec, horizon, seed, sopts, threads);

    io::ReportOptions ropts;
    ropts.emit_plots = emit_plots;
    ropts.pdf_hour = pdf_hour;
    io::write_reports(out, result, scenarios, ropts);

    std::printf("%-10s %12s %12s %10s %8s\n", "model", "import_kwh", "total_eur",
                "regret_%", "rank");
    for (const auto& r : result.aggregate)
        std::printf("%-10s %12.2f %12.2f %10.2f %8.2f\n", r.controller.c_str(),
                    r.import_kwh, r.total_cost_eur, r.regret_pct, r.rank);
    for (const auto& note : result.notes)
        std::fprintf(stderr, "[battsched] note: %s\n", note.c_str());
    std::printf("reports written to %s\n", out.c_str());
    return 0;
}

int cmd_fit_forecast(const std::string& quantiles_file, const std::string& out_file) {
    const auto rows = io::read_quantiles_csv(quantiles_file);
    std::ofstream out(out_file);
    if (!out) throw io::DataError("cannot write " + out_file);
    out << "hour,w1,mu1,sigma1,w2,mu2,sigma2,rms_kw,repaired,degenerate\n";
    for (const auto& q : rows) {
        const FitResult fr = fit_mixture(q);
        const auto& c0 = fr.mixture.component(0);
        const auto& c1 = fr.mixture.component(1);
        char buf[256];
        std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%d,%d\n",
                      q.hour, c0.weight, c0.mean, c0.stdev, c1.weight, c1.mean, c1.stdev,
                      fr.rms, q.repaired ? 1 : 0, fr.degenerate ? 1 : 0);
        out << buf;
    }
    std::printf("fitted %zu rows -> %s\n", rows.size(), out_file.c_str());
    return 0;
}

int cmd_tariff(const std::string& wholesale_file, double buy_mean, double sell_mean,
               const std::string& out_file) {
    const io::TimeSeries ws = io::read_wholesale_csv(wholesale_file);
    const TariffSeries t = build_tariff(ws.values, buy_mean, sell_mean);
    io::TariffFile tf;
    tf.timestamps = ws.timestamps;
    tf.wholesale = ws.values;
    tf.c_buy = t.c_buy;
    tf.c_sell = t.c_sell;
    io::write_tariff_csv(out_file, tf);
    std::printf("wrote tariff %s (mean buy %.4f, mean sell %.4f)\n", out_file.c_str(),
                buy_mean, sell_mean);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"battsched: battery dispatch scheduling under net-load uncertainty"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "write synthetic scenario bundle(s)");
    std::string gen_out = "scenario";
    std::uint64_t gen_seed = 1;
    int gen_days = 14;
    int gen_count = 1;
    std::string gen_profile = "mixed";
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--seed", gen_seed, "root random seed");
    gen->add_option("--days", gen_days, "days per scenario")->check(CLI::PositiveNumber);
    gen->add_option("--count", gen_count, "number of bundles (corpus mode)");
    gen->add_option("--profile", gen_profile, "mixed | no-pv | summer-pv");

    // run
    auto* run = app.add_subcommand("run", "simulate controllers on scenario bundle(s)");
    std::vector<std::string> run_scenarios;
    std::vector<std::string> run_controllers = {"MPC-Ideal", "SMPC-FG", "MPC-FG",
                                                "RBC",       "SMPC-FB", "MPC-FB"};
    int run_horizon = 24;
    std::uint64_t run_seed = 1;
    std::string run_out = "out";
    bool run_plots = false;
    int run_pdf_hour = 12;
    int run_threads = 0;
    SolverOptions sopts;
    run->add_option("--scenario", run_scenarios, "scenario bundle directory (repeatable)")
        ->required();
    run->add_option("--controllers", run_controllers,
                    "controller names (SMPC-FG MPC-FG MPC-FB SMPC-FB MPC-Ideal RBC)")
        ->delimiter(',');
    run->add_option("--horizon", run_horizon, "planning horizon K in hours")
        ->check(CLI::PositiveNumber);
    run->add_option("--seed", run_seed, "root random seed");
    run->add_option("--out", run_out, "output directory");
    run->add_flag("--emit-plots", run_plots, "also write plot data files");
    run->add_option("--pdf-hour", run_pdf_hour, "hour for the distribution plot data");
    run->add_option("--threads", run_threads, "worker threads (0 = auto)");
    run->add_option("--max-outer", sopts.max_outer, "solver outer iteration cap");
    run->add_option("--max-inner", sopts.max_inner, "solver inner iteration cap");
    run->add_option("--feas-tol", sopts.feas_tol, "solver feasibility tolerance");
    run->add_option("--stat-tol", sopts.stat_tol, "solver stationarity tolerance");
    run->add_option("--multistart", sopts.multistart, "solver start count");

    // fit-forecast
    auto* fit = app.add_subcommand("fit-forecast", "fit mixtures to a quantile CSV");
    std::string fit_in, fit_out = "fits.csv";
    fit->add_option("--quantiles", fit_in, "quantiles.csv input")->required();
    fit->add_option("--out", fit_out, "output CSV");

    // tariff
    auto* tar = app.add_subcommand("tariff", "build buy/sell tariffs from wholesale prices");
    std::string tar_in, tar_out = "tariff.csv";
    double tar_buy = 0.40, tar_sell = 0.08;
    tar->add_option("--wholesale", tar_in, "wholesale CSV input")->required();
    tar->add_option("--buy-mean", tar_buy, "target mean import price, eur/kWh");
    tar->add_option("--sell-mean", tar_sell, "target mean export price, eur/kWh");
    tar->add_option("--out", tar_out, "output CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, returns 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (gen->parsed())
            return cmd_generate(gen_out, gen_seed, gen_days, gen_profile, gen_count);
        if (run->parsed())
            return cmd_run(run_scenarios, run_controllers, run_horizon, run_seed, run_out,
                           run_plots, run_pdf_hour, run_threads, sopts);
        if (fit->parsed()) return cmd_fit_forecast(fit_in, fit_out);
        if (tar->parsed()) return cmd_tariff(tar_in, tar_buy, tar_sell, tar_out);
    } catch (const io::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return kExitSolver;
    }
    return 0;
}
