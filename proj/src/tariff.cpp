#include "battsched/tariff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace battsched {

TariffSeries build_tariff(const std::vector<double>& wholesale, double target_buy_mean,
                          double target_sell_mean) {
    if (wholesale.empty())
        throw std::invalid_argument("build_tariff: wholesale series is empty");
    for (double w : wholesale)
        if (!std::isfinite(w))
            throw std::invalid_argument("build_tariff: wholesale contains non-finite value");
    if (!(target_sell_mean >= 0.0))
        throw std::invalid_argument("build_tariff: target_sell_mean must be >= 0");

    const double n = static_cast<double>(wholesale.size());
    const double wmean = std::accumulate(wholesale.begin(), wholesale.end(), 0.0) / n;

    TariffSeries t;
    t.c_buy.reserve(wholesale.size());
    t.c_sell.reserve(wholesale.size());

    const double offset_buy = target_buy_mean - wmean;
    for (double w : wholesale) t.c_buy.push_back(w + offset_buy);

    // mean(max(0, w + o)) is continuous and nondecreasing in o.
    auto clipped_mean = [&](double o) {
        double s = 0.0;
        for (double w : wholesale) s += std::max(0.0, w + o);
        return s / n;
    };

    const double wmax = *std::max_element(wholesale.begin(), wholesale.end());
    const double wmin = *std::min_element(wholesale.begin(), wholesale.end());
    double lo = -wmax;                        // clipped mean 0
    double hi = target_sell_mean - wmin;      // every hour >= target
    if (clipped_mean(hi) < target_sell_mean)  // degenerate constant series
        hi = target_sell_mean - wmin + 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (clipped_mean(mid) < target_sell_mean)
            lo = mid;
        else
            hi = mid;
    }
    const double offset_sell = hi;
    if (std::abs(clipped_mean(offset_sell) - target_sell_mean) > 1e-6)
        throw std::invalid_argument("build_tariff: target_sell_mean unreachable");

    for (double w : wholesale) t.c_sell.push_back(std::max(0.0, w + offset_sell));
    return t;
}

}  // namespace battsched
