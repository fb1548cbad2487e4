#pragma once

// File formats and scenario-bundle handling for the CLI. All disk I/O of the
// project lives here; the core library stays pure.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "battsched/battery.hpp"
#include "battsched/forecast.hpp"
#include "battsched/sim.hpp"
#include "battsched/tariff.hpp"

namespace battsched::io {

// Malformed or inconsistent input data / configuration (CLI exit code 3).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// ISO-8601 hourly timestamps ("2025-07-01T00:00:00").
std::string add_hours(const std::string& iso, long hours);

struct TimeSeries {
    std::vector<std::string> timestamps;
    std::vector<double> values;
};

// netload.csv: timestamp,netload_kw
TimeSeries read_netload_csv(const std::filesystem::path& file);
void write_netload_csv(const std::filesystem::path& file, const TimeSeries& ts);

// tariff.csv: timestamp,price_eur_per_kwh,c_buy_eur_per_kwh,c_sell_eur_per_kwh
struct TariffFile {
    std::vector<std::string> timestamps;
    std::vector<double> wholesale;
    std::vector<double> c_buy;
    std::vector<double> c_sell;
};
TariffFile read_tariff_csv(const std::filesystem::path& file);
void write_tariff_csv(const std::filesystem::path& file, const TariffFile& tf);

// wholesale-only input: timestamp,price_eur_per_kwh
TimeSeries read_wholesale_csv(const std::filesystem::path& file);

// quantiles.csv: timestamp,q01,...,q99
std::vector<QuantileForecast> read_quantiles_csv(const std::filesystem::path& file);
void write_quantiles_csv(const std::filesystem::path& file, const std::string& start,
                         const std::vector<QuantileForecast>& rows);

// scenario.json keys, see README. Bundle = directory with netload.csv,
// tariff.csv, scenario.json and optional quantiles.csv.
struct ScenarioConfig {
    std::string name;
    std::string start = "2025-07-01T00:00:00";
    double dt = 1.0;
    BatterySpec battery;
    double initial_soe = -1.0;  // < 0: mid-range default
    std::string forecast_mode = "synthetic";  // or "quantile_file"
    SyntheticForecastModel forecast;
    std::uint64_t forecast_seed = 0;
};

ScenarioConfig read_scenario_config(const std::filesystem::path& file);
void write_scenario_config(const std::filesystem::path& file, const ScenarioConfig& cfg);

struct LoadedScenario {
    Scenario scenario;
    ScenarioConfig config;
};
LoadedScenario load_scenario(const std::filesystem::path& dir);

// Synthetic scenario generation (household load plus PV with seeded noise).
struct GenerateOptions {
    std::uint64_t seed = 1;
    int days = 14;
    std::string profile = "mixed";  // mixed | no-pv | summer-pv
    std::string name;               // defaults to the directory name
};
void generate_scenario(const std::filesystem::path& dir, const GenerateOptions& opts);

// The fixed experiment corpus: `count` generated bundles under root.
std::vector<std::filesystem::path> generate_corpus(const std::filesystem::path& root,
                                                   std::uint64_t seed, int count, int days);

// report.csv / report.json / per-scenario traces / optional plot data.
struct ReportOptions {
    bool emit_plots = false;
    int pdf_hour = 12;
};
void write_reports(const std::filesystem::path& outdir, const TournamentResult& result,
                   const std::vector<Scenario>& scenarios, const ReportOptions& opts);

}  // namespace battsched::io
