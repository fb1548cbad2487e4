#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "battsched/gmix.hpp"

namespace battsched {

inline constexpr int kNumQuantiles = 99;  // probabilities 0.01 .. 0.99

// One hour of probabilistic forecast as 99 quantile values.
struct QuantileForecast {
    int hour = 0;                                   // target hour index
    std::array<double, kNumQuantiles> quantiles{};  // kW, nondecreasing
    bool repaired = false;  // ingestion had to sort out-of-order values
};

// Builds the forecast, sorting the values when they decrease by more than
// 1e-9 anywhere and flagging the repair.
QuantileForecast make_quantile_forecast(int hour,
                                        const std::array<double, kNumQuantiles>& values);

struct FitResult {
    GaussianMixture2 mixture;
    double rms = 0.0;  // kW, root-mean-square quantile residual
    bool degenerate = false;
};

// Least-squares fit of a two-component mixture to the 99 quantiles.
// Multi-start bounded quasi-Newton; parameters (w1, mu1, s1, mu2, s2).
FitResult fit_mixture(const QuantileForecast& q);

// Noise model replacing a learned forecaster: per lead hour h the forecast
// distribution is centered near truth[h] + bias with spread
// sigma_base + h * sigma_growth, optionally skewed by a second component.
struct SyntheticForecastModel {
    double bias = 0.0;          // kW
    double sigma_base = 0.1;    // kW, > 0
    double sigma_growth = 0.0;  // kW per lead hour, >= 0
    double skew_weight = 0.0;   // [0,1]
    double skew_offset = 0.0;   // kW

    void validate() const;
};

std::vector<QuantileForecast> synthesize_quantiles(const std::vector<double>& truth,
                                                   const SyntheticForecastModel& model,
                                                   std::uint64_t seed);

// Deterministic point forecast: the mixture mean.
double point_forecast(const GaussianMixture2& m);

}  // namespace battsched
