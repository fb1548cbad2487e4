#pragma once

#include <string>
#include <vector>

namespace battsched {

// Hourly import/export prices derived from a wholesale series.
struct TariffSeries {
    std::vector<std::string> timestamps;  // ISO-8601, may be empty if unused
    std::vector<double> c_buy;            // eur/kWh
    std::vector<double> c_sell;           // eur/kWh, >= 0 everywhere
};

// c_buy = wholesale + constant offset hitting target_buy_mean exactly;
// c_sell = max(0, wholesale + offset) with the offset bisected so the
// clipped series hits target_sell_mean.
TariffSeries build_tariff(const std::vector<double>& wholesale, double target_buy_mean,
                          double target_sell_mean);

}  // namespace battsched
