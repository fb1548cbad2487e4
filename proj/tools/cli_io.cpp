#include "cli_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "battsched/mixedrv.hpp"

namespace battsched::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// --- ISO-8601 hourly timestamp arithmetic ----------------------------------

long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

void civil_from_days(long z, int& y, int& m, int& d) {
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y += m <= 2;
}

struct Timestamp {
    int y, mo, d, h, mi, s;
};

Timestamp parse_iso(const std::string& iso) {
    Timestamp t{};
    if (std::sscanf(iso.c_str(), "%d-%d-%dT%d:%d:%d", &t.y, &t.mo, &t.d, &t.h, &t.mi,
                    &t.s) != 6)
        throw DataError("bad ISO-8601 timestamp: '" + iso + "'");
    return t;
}

std::string format_iso(const Timestamp& t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d", t.y, t.mo, t.d, t.h,
                  t.mi, t.s);
    return buf;
}

int day_of_year(const Timestamp& t) {
    return static_cast<int>(days_from_civil(t.y, t.mo, t.d) - days_from_civil(t.y, 1, 1)) + 1;
}

// --- CSV plumbing -----------------------------------------------------------

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const fs::path& file, int line_no) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError(file.string() + ":" + std::to_string(line_no) +
                        ": expected a number, got '" + s + "'");
    }
}

std::ifstream open_input(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open " + file.string());
    return in;
}

std::ofstream open_output(const fs::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    return out;
}

void expect_header(const fs::path& file, const std::string& got,
                   const std::string& want) {
    std::string g = got;
    if (!g.empty() && g.back() == '\r') g.pop_back();
    if (g != want)
        throw DataError(file.string() + ":1: expected header '" + want + "', got '" + g +
                        "'");
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

std::string add_hours(const std::string& iso, long hours) {
    Timestamp t = parse_iso(iso);
    long total = t.h + hours;
    long day_shift = total / 24;
    int hh = static_cast<int>(total % 24);
    if (hh < 0) {
        hh += 24;
        --day_shift;
    }
    long days = days_from_civil(t.y, t.mo, t.d) + day_shift;
    civil_from_days(days, t.y, t.mo, t.d);
    t.h = hh;
    return format_iso(t);
}

TimeSeries read_netload_csv(const fs::path& file) {
    auto in = open_input(file);
    std::string line;
    std::getline(in, line);
    expect_header(file, line, "timestamp,netload_kw");
    TimeSeries ts;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto parts = split_csv_line(line);
        if (parts.size() != 2)
            throw DataError(file.string() + ":" + std::to_string(line_no) +
                            ": expected 2 columns, got " + std::to_string(parts.size()));
        ts.timestamps.push_back(parts[0]);
        ts.values.push_back(parse_double(parts[1], file, line_no));
    }
    if (ts.values.empty()) throw DataError(file.string() + ": no data rows");
    return ts;
}

void write_netload_csv(const fs::path& file, const TimeSeries& ts) {
    auto out = open_output(file);
    out << "timestamp,netload_kw\n";
    for (size_t i = 0; i < ts.values.size(); ++i)
        out << ts.timestamps[i] << ',' << fmt(ts.values[i]) << '\n';
}

TimeSeries read_wholesale_csv(const fs::path& file) {
    auto in = open_input(file);
    std::string line;
    std::getline(in, line);
    expect_header(file, line, "timestamp,price_eur_per_kwh");
    TimeSeries ts;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto parts = split_csv_line(line);
        if (parts.size() != 2)
            throw DataError(file.string() + ":" + std::to_string(line_no) +
                            ": expected 2 columns, got " + std::to_string(parts.size()));
        ts.timestamps.push_back(parts[0]);
        ts.values.push_back(parse_double(parts[1], file, line_no));
    }
    if (ts.values.empty()) throw DataError(file.string() + ": no data rows");
    return ts;
}

TariffFile read_tariff_csv(const fs::path& file) {
    auto in = open_input(file);
    std::string line;
    std::getline(in, line);
    expect_header(file, line,
                  "timestamp,price_eur_per_kwh,c_buy_eur_per_kwh,c_sell_eur_per_kwh");
    TariffFile tf;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto parts = split_csv_line(line);
        if (parts.size() != 4)
            throw DataError(file.string() + ":" + std::to_string(line_no) +
                            ": expected 4 columns, got " + std::to_string(parts.size()));
        tf.timestamps.push_back(parts[0]);
        tf.wholesale.push_back(parse_double(parts[1], file, line_no));
        tf.c_buy.push_back(parse_double(parts[2], file, line_no));
        tf.c_sell.push_back(parse_double(parts[3], file, line_no));
    }
    if (tf.c_buy.empty()) throw DataError(file.string() + ": no data rows");
    return tf;
}

void write_tariff_csv(const fs::path& file, const TariffFile& tf) {
    auto out = open_output(file);
    out << "timestamp,price_eur_per_kwh,c_buy_eur_per_kwh,c_sell_eur_per_kwh\n";
    for (size_t i = 0; i < tf.c_buy.size(); ++i)
        out << tf.timestamps[i] << ',' << fmt(tf.wholesale[i]) << ',' << fmt(tf.c_buy[i])
            << ',' << fmt(tf.c_sell[i]) << '\n';
}

std::vector<QuantileForecast> read_quantiles_csv(const fs::path& file) {
    auto in = open_input(file);
    std::string line;
    std::getline(in, line);
    std::string want = "timestamp";
    for (int i = 1; i <= kNumQuantiles; ++i) {
        char buf[8];
        std::snprintf(buf, sizeof buf, ",q%02d", i);
        want += buf;
    }
    expect_header(file, line, want);

    std::vector<QuantileForecast> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto parts = split_csv_line(line);
        if (parts.size() != 1 + kNumQuantiles)
            throw DataError(file.string() + ":" + std::to_string(line_no) +
                            ": expected " + std::to_string(1 + kNumQuantiles) +
                            " columns, got " + std::to_string(parts.size()));
        std::array<double, kNumQuantiles> vals{};
        for (int i = 0; i < kNumQuantiles; ++i)
            vals[i] = parse_double(parts[i + 1], file, line_no);
        auto q = make_quantile_forecast(static_cast<int>(rows.size()), vals);
        if (q.repaired)
            std::fprintf(stderr, "[battsched] %s:%d: non-monotone quantiles repaired by sort\n",
                         file.string().c_str(), line_no);
        rows.push_back(q);
    }
    if (rows.empty()) throw DataError(file.string() + ": no data rows");
    return rows;
}

void write_quantiles_csv(const fs::path& file, const std::string& start,
                         const std::vector<QuantileForecast>& rows) {
    auto out = open_output(file);
    out << "timestamp";
    for (int i = 1; i <= kNumQuantiles; ++i) {
        char buf[8];
        std::snprintf(buf, sizeof buf, ",q%02d", i);
        out << buf;
    }
    out << '\n';
    for (const auto& q : rows) {
        out << add_hours(start, q.hour);
        for (const double v : q.quantiles) out << ',' << fmt(v);
        out << '\n';
    }
}

ScenarioConfig read_scenario_config(const fs::path& file) {
    auto in = open_input(file);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError(file.string() + ": " + e.what());
    }
    try {
        ScenarioConfig cfg;
        cfg.name = j.at("name").get<std::string>();
        cfg.start = j.at("start").get<std::string>();
        cfg.dt = j.at("dt_hours").get<double>();
        const auto& b = j.at("battery");
        cfg.battery.e_min = b.at("e_min").get<double>();
        cfg.battery.e_max = b.at("e_max").get<double>();
        cfg.battery.p_min = b.at("p_min").get<double>();
        cfg.battery.p_max = b.at("p_max").get<double>();
        cfg.battery.eta_ch = b.at("eta_ch").get<double>();
        cfg.battery.eta_dis = b.at("eta_dis").get<double>();
        cfg.initial_soe = j.value("initial_soe", -1.0);
        const auto& f = j.at("forecast");
        cfg.forecast_mode = f.at("mode").get<std::string>();
        if (cfg.forecast_mode != "synthetic" && cfg.forecast_mode != "quantile_file")
            throw DataError(file.string() + ": forecast.mode must be 'synthetic' or 'quantile_file'");
        cfg.forecast.bias = f.value("bias", 0.0);
        cfg.forecast.sigma_base = f.value("sigma_base", 0.1);
        cfg.forecast.sigma_growth = f.value("sigma_growth", 0.0);
        cfg.forecast.skew_weight = f.value("skew_weight", 0.0);
        cfg.forecast.skew_offset = f.value("skew_offset", 0.0);
        cfg.forecast_seed = f.value("seed", std::uint64_t{0});
        return cfg;
    } catch (const json::exception& e) {
        throw DataError(file.string() + ": " + e.what());
    }
}

void write_scenario_config(const fs::path& file, const ScenarioConfig& cfg) {
    json j;
    j["name"] = cfg.name;
    j["start"] = cfg.start;
    j["dt_hours"] = cfg.dt;
    j["battery"] = {{"e_min", cfg.battery.e_min},   {"e_max", cfg.battery.e_max},
                    {"p_min", cfg.battery.p_min},   {"p_max", cfg.battery.p_max},
                    {"eta_ch", cfg.battery.eta_ch}, {"eta_dis", cfg.battery.eta_dis}};
    if (cfg.initial_soe >= 0.0) j["initial_soe"] = cfg.initial_soe;
    j["forecast"] = {{"mode", cfg.forecast_mode},
                     {"bias", cfg.forecast.bias},
                     {"sigma_base", cfg.forecast.sigma_base},
                     {"sigma_growth", cfg.forecast.sigma_growth},
                     {"skew_weight", cfg.forecast.skew_weight},
                     {"skew_offset", cfg.forecast.skew_offset},
                     {"seed", cfg.forecast_seed}};
    auto out = open_output(file);
    out << j.dump(2) << '\n';
}

LoadedScenario load_scenario(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw DataError("scenario directory not found: " + dir.string());
    LoadedScenario ls;
    ls.config = read_scenario_config(dir / "scenario.json");
    try {
        ls.config.battery.validate();
    } catch (const std::exception& e) {
        throw DataError(dir.string() + ": bad battery config: " + e.what());
    }

    const TimeSeries nl = read_netload_csv(dir / "netload.csv");
    const TariffFile tf = read_tariff_csv(dir / "tariff.csv");
    if (tf.c_buy.size() != nl.values.size())
        throw DataError(dir.string() + ": netload and tariff row counts differ");

    Scenario sc;
    sc.name = ls.config.name;
    sc.truth = nl.values;
    sc.c_buy = tf.c_buy;
    sc.c_sell = tf.c_sell;
    sc.dt = ls.config.dt;
    if (ls.config.initial_soe >= 0.0) sc.initial_soe = ls.config.initial_soe;

    if (ls.config.forecast_mode == "synthetic") {
        sc.forecasts = std::make_shared<SyntheticForecastProvider>(
            sc.truth, ls.config.forecast, ls.config.forecast_seed);
    } else {
        auto rows = read_quantiles_csv(dir / "quantiles.csv");
        if (rows.size() != sc.truth.size())
            throw DataError(dir.string() + ": quantiles and netload row counts differ");
        sc.forecasts = std::make_shared<QuantileTableForecastProvider>(std::move(rows));
    }
    ls.scenario = std::move(sc);
    return ls;
}

// --- Synthetic data generation ----------------------------------------------

namespace {

double gaussian_bump(double x, double center, double width) {
    const double t = (x - center) / width;
    return std::exp(-0.5 * t * t);
}

}  // namespace

void generate_scenario(const fs::path& dir, const GenerateOptions& opts) {
    if (opts.days < 1) throw DataError("generate: days must be >= 1");
    if (opts.profile != "mixed" && opts.profile != "no-pv" && opts.profile != "summer-pv")
        throw DataError("generate: unknown profile '" + opts.profile +
                        "'; valid: mixed, no-pv, summer-pv");
    fs::create_directories(dir);

    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const int T = 24 * opts.days;
    const std::string start =
        opts.profile == "summer-pv" ? "2025-06-21T00:00:00" : "2025-07-15T00:00:00";
    const int start_doy = day_of_year(parse_iso(start));

    const double load_scale = 0.7 + 0.7 * uni(rng);
    double pv_kwp = 2.0 + 2.5 * uni(rng);
    if (opts.profile == "no-pv") pv_kwp = 0.0;
    if (opts.profile == "summer-pv") pv_kwp = 3.0 + 2.0 * uni(rng);

    std::vector<double> truth(T);
    std::vector<double> cloud(opts.days);
    for (int d = 0; d < opts.days; ++d)
        cloud[d] = std::clamp(0.75 + 0.25 * gauss(rng), 0.05, 1.0);

    double ar = 0.0;
    for (int t = 0; t < T; ++t) {
        const int hod = t % 24;
        const int doy = start_doy + t / 24;

        double shape = 0.25 + 0.45 * gaussian_bump(hod, 7.5, 1.6) +
                       0.85 * gaussian_bump(hod, 19.0, 2.2);
        const double season_load = 1.0 + 0.35 * std::cos(2.0 * M_PI * (doy - 15) / 365.0);
        ar = 0.7 * ar + 0.3 * gauss(rng);
        double load = load_scale * shape * season_load * std::max(0.2, 1.0 + 0.45 * ar);
        if (uni(rng) < 0.05) load += 0.5 + 1.5 * uni(rng);  // appliance spike

        double pv = 0.0;
        if (pv_kwp > 0.0) {
            const double season = 0.5 + 0.5 * std::cos(2.0 * M_PI * (doy - 172) / 365.0);
            const double halfwidth = 3.5 + 2.5 * season;
            const double x = std::abs(hod - 13.0);
            if (x < halfwidth) {
                const double sun = std::pow(std::cos(0.5 * M_PI * x / halfwidth), 1.5);
                const double intra = std::max(0.0, 1.0 + 0.15 * gauss(rng));
                pv = pv_kwp * (0.45 + 0.55 * season) * sun * cloud[t / 24] * intra;
            }
        }
        truth[t] = load - pv;
    }

    std::vector<double> wholesale(T);
    for (int t = 0; t < T; ++t) {
        const int hod = t % 24;
        const int doy = start_doy + t / 24;
        const double pv_season = 0.5 + 0.5 * std::cos(2.0 * M_PI * (doy - 172) / 365.0);
        wholesale[t] = 0.085 + 0.035 * gaussian_bump(hod, 8.0, 2.0) +
                       0.045 * gaussian_bump(hod, 19.0, 2.5) -
                       0.065 * pv_season * gaussian_bump(hod, 13.0, 2.5) +
                       0.008 * gauss(rng);
    }
    const TariffSeries tariff = build_tariff(wholesale, 0.40, 0.08);

    ScenarioConfig cfg;
    cfg.name = opts.name.empty() ? dir.filename().string() : opts.name;
    cfg.start = start;
    cfg.dt = 1.0;
    cfg.battery = BatterySpec{0.0, 7.68, -5.12, 5.12, 0.98, 0.98};
    cfg.initial_soe = 0.5 * (cfg.battery.e_min + cfg.battery.e_max);
    cfg.forecast_mode = "synthetic";
    cfg.forecast.bias = 0.0;
    cfg.forecast.sigma_base = (0.22 + 0.18 * uni(rng)) * load_scale;
    cfg.forecast.sigma_growth = 0.010 + 0.015 * uni(rng);
    cfg.forecast.skew_weight = 0.15 + 0.20 * uni(rng);
    cfg.forecast.skew_offset = 0.40 + 0.50 * uni(rng);
    cfg.forecast_seed = rng();

    TimeSeries nl;
    nl.values = truth;
    for (int t = 0; t < T; ++t) nl.timestamps.push_back(add_hours(start, t));
    write_netload_csv(dir / "netload.csv", nl);

    TariffFile tf;
    tf.timestamps = nl.timestamps;
    tf.wholesale = wholesale;
    tf.c_buy = tariff.c_buy;
    tf.c_sell = tariff.c_sell;
    write_tariff_csv(dir / "tariff.csv", tf);

    // Rolling day-ahead quantile file: lead resets at each midnight issue.
    std::vector<QuantileForecast> qrows;
    qrows.reserve(T);
    for (int d = 0; d < opts.days; ++d) {
        const int t0 = 24 * d;
        const std::vector<double> window(truth.begin() + t0, truth.begin() + t0 + 24);
        auto day_rows = synthesize_quantiles(window, cfg.forecast,
                                             cfg.forecast_seed ^ (0x9e37ULL + d));
        for (auto& q : day_rows) {
            q.hour += t0;
            qrows.push_back(q);
        }
    }
    write_quantiles_csv(dir / "quantiles.csv", start, qrows);

    write_scenario_config(dir / "scenario.json", cfg);
}

std::vector<fs::path> generate_corpus(const fs::path& root, std::uint64_t seed, int count,
                                      int days) {
    std::vector<fs::path> dirs;
    for (int i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "scenario_%02d", i);
        GenerateOptions opts;
        opts.seed = seed + 1000ULL * i;
        opts.days = days;
        opts.profile = "mixed";
        opts.name = name;
        const fs::path dir = root / name;
        generate_scenario(dir, opts);
        dirs.push_back(dir);
    }
    return dirs;
}

// --- Reports and plot data ---------------------------------------------------

namespace {

json report_to_json(const SimulationReport& r) {
    return json{{"model", r.controller},
                {"import_kwh", r.import_kwh},
                {"import_cost_eur", r.import_cost_eur},
                {"export_kwh", r.export_kwh},
                {"export_revenue_eur", r.export_revenue_eur},
                {"total_cost_eur", r.total_cost_eur},
                {"regret_pct", r.regret_pct},
                {"rank", r.rank},
                {"tighten_events", r.tighten_events}};
}

void write_report_csv(const fs::path& file, const std::vector<SimulationReport>& rows) {
    auto out = open_output(file);
    out << "model,import_kwh,import_cost_eur,export_kwh,export_revenue_eur,"
           "total_cost_eur,regret_pct,rank,tighten_events\n";
    for (const auto& r : rows) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.4f,%.4f,%d\n",
                      r.controller.c_str(), r.import_kwh, r.import_cost_eur, r.export_kwh,
                      r.export_revenue_eur, r.total_cost_eur, r.regret_pct, r.rank,
                      r.tighten_events);
        out << buf;
    }
}

void write_trace_csv(const fs::path& file, const SimulationReport& r) {
    auto out = open_output(file);
    out << "hour,p_l_kw,p_b_kw,p_g_kw,soe_kwh,pb_lo_kw,pb_hi_kw,pg_des_kw,tightened\n";
    for (size_t t = 0; t < r.trace.size(); ++t) {
        const auto& tr = r.trace[t];
        char buf[256];
        std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%d\n", t,
                      tr.p_l, tr.p_b, tr.p_g, tr.soe, tr.pb_lo, tr.pb_hi, tr.pg_des,
                      tr.tightened ? 1 : 0);
        out << buf;
    }
}

void write_pdf_plot(const fs::path& base, const Scenario& sc, const SimulationReport& r,
                    int hour) {
    if (hour < 0 || hour >= static_cast<int>(r.trace.size()) || !sc.forecasts) return;
    const auto& tr = r.trace[hour];
    const GaussianMixture2 f = sc.forecasts->forecast_at(hour, 1)[0];
    const DispatchPolicy pol =
        DispatchPolicy::from_setpoints(tr.pb_lo, tr.pb_hi, tr.pg_des);
    const auto bp = boundary_probabilities(f, pol);

    const double sigma = std::max(f.component(0).stdev, f.component(1).stdev);
    double zlo = std::min({f.mean() - 5.0 * sigma, pol.pb_lo, pol.pg_des}) - 1.0;
    double zhi = std::max({f.mean() + 5.0 * sigma, pol.pb_hi, pol.pg_des}) + 1.0;

    auto out = open_output(fs::path(base.string() + ".csv"));
    out << "z_kw,f_pl,f_pb,f_pg\n";
    const int N = 481;
    for (int i = 0; i < N; ++i) {
        const double z = zlo + (zhi - zlo) * i / (N - 1);
        const double fpl = f.pdf(z);
        const double fpb =
            (z > pol.pb_lo && z < pol.pb_hi) ? f.pdf(z + pol.pg_des) : 0.0;
        const double fpg = z < pol.pg_des ? f.pdf(z + pol.pb_lo)
                                          : (z > pol.pg_des ? f.pdf(z + pol.pb_hi) : 0.0);
        char buf[160];
        std::snprintf(buf, sizeof buf, "%.6f,%.8f,%.8f,%.8f\n", z, fpl, fpb, fpg);
        out << buf;
    }

    json masses{{"hour", hour},
                {"pb_lo", pol.pb_lo},
                {"pb_hi", pol.pb_hi},
                {"pg_des", pol.pg_des},
                {"p1", bp.p1},
                {"p2", bp.p2},
                {"interior_mass", 1.0 - bp.p1 - bp.p2}};
    auto mout = open_output(fs::path(base.string() + "_masses.json"));
    mout << masses.dump(2) << '\n';
}

}  // namespace

void write_reports(const fs::path& outdir, const TournamentResult& result,
                   const std::vector<Scenario>& scenarios, const ReportOptions& opts) {
    fs::create_directories(outdir);
    write_report_csv(outdir / "report.csv", result.aggregate);

    json j;
    j["aggregate"] = json::array();
    for (const auto& r : result.aggregate) j["aggregate"].push_back(report_to_json(r));
    j["scenarios"] = json::object();
    for (size_t s = 0; s < result.by_scenario.size(); ++s) {
        json row = json::array();
        for (const auto& r : result.by_scenario[s]) row.push_back(report_to_json(r));
        j["scenarios"][result.scenario_names[s]] = std::move(row);
    }
    j["notes"] = result.notes;
    auto out = open_output(outdir / "report.json");
    out << j.dump(2) << '\n';

    for (size_t s = 0; s < result.by_scenario.size(); ++s) {
        const fs::path dir = result.by_scenario.size() > 1
                                 ? outdir / result.scenario_names[s]
                                 : outdir;
        fs::create_directories(dir);
        for (const auto& r : result.by_scenario[s]) {
            write_trace_csv(dir / ("trace_" + r.controller + ".csv"), r);
            if (opts.emit_plots)
                write_pdf_plot(dir / ("plot_pdf_" + r.controller + "_h" +
                                      std::to_string(opts.pdf_hour)),
                               scenarios[s], r, opts.pdf_hour);
        }
    }
}

}  // namespace battsched::io
