#include "battsched/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "alsolver.hpp"

namespace battsched {

namespace {

constexpr double kSigmaFloor = 1e-4;  // kW

std::array<double, kNumQuantiles> quantile_probs() {
    std::array<double, kNumQuantiles> p{};
    for (int i = 0; i < kNumQuantiles; ++i) p[i] = (i + 1) / 100.0;
    return p;
}
const std::array<double, kNumQuantiles> kProbs = quantile_probs();

// All 99 quantiles of a mixture in one monotone sweep: each point starts a
// safeguarded Newton from the previous solution.
std::array<double, kNumQuantiles> quantile_sweep(const GaussianMixture2& m) {
    std::array<double, kNumQuantiles> q{};
    q[0] = m.quantile(kProbs[0]);
    for (int i = 1; i < kNumQuantiles; ++i) {
        const double p = kProbs[i];
        double lo = q[i - 1];
        const double zp = normal_quantile(p);
        double hi = lo;
        for (int c = 0; c < 2; ++c)
            hi = std::max(hi, m.component(c).mean + m.component(c).stdev * zp);
        double x = lo;
        for (int it = 0; it < 60; ++it) {
            const double err = m.cdf(x) - p;
            if (std::abs(err) < 1e-12) break;
            if (err > 0.0)
                hi = x;
            else
                lo = x;
            const double deriv = m.pdf(x);
            double next = deriv > 0.0 ? x - err / deriv : 0.5 * (lo + hi);
            if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
            if (next == x) break;
            x = next;
        }
        q[i] = x;
    }
    return q;
}

GaussianMixture2 mixture_from_params(const std::vector<double>& t) {
    return GaussianMixture2({t[0], t[1], t[2]}, {1.0 - t[0], t[3], t[4]});
}

struct FitObjective {
    const std::array<double, kNumQuantiles>& target;

    // Mean squared quantile residual; gradient by implicit differentiation
    // of F(q(p)) = p.
    double operator()(const std::vector<double>& t, std::vector<double>* grad) const {
        const GaussianMixture2 m = mixture_from_params(t);
        const auto q = quantile_sweep(m);
        if (grad) grad->assign(5, 0.0);
        double sse = 0.0;
        for (int i = 0; i < kNumQuantiles; ++i) {
            const double r = q[i] - target[i];
            sse += r * r;
            if (!grad) continue;
            const double z1 = (q[i] - t[1]) / t[2];
            const double z2 = (q[i] - t[3]) / t[4];
            const double n1 = normal_pdf(z1) / t[2];
            const double n2 = normal_pdf(z2) / t[4];
            const double dens = std::max(t[0] * n1 + (1.0 - t[0]) * n2, 1e-300);
            // dF/dtheta at fixed q
            const double dF[5] = {normal_cdf(z1) - normal_cdf(z2), -t[0] * n1,
                                  -t[0] * n1 * z1, -(1.0 - t[0]) * n2,
                                  -(1.0 - t[0]) * n2 * z2};
            const double w = 2.0 / kNumQuantiles * r / dens;
            for (int j = 0; j < 5; ++j) (*grad)[j] -= w * dF[j];
        }
        return sse / kNumQuantiles;
    }
};

}  // namespace

QuantileForecast make_quantile_forecast(int hour,
                                        const std::array<double, kNumQuantiles>& values) {
    QuantileForecast q;
    q.hour = hour;
    q.quantiles = values;
    for (int i = 1; i < kNumQuantiles; ++i) {
        if (q.quantiles[i] < q.quantiles[i - 1] - 1e-9) {
            std::sort(q.quantiles.begin(), q.quantiles.end());
            q.repaired = true;
            break;
        }
    }
    return q;
}

void SyntheticForecastModel::validate() const {
    if (!(sigma_base > 0.0))
        throw std::invalid_argument("SyntheticForecastModel: sigma_base must be > 0");
    if (!(sigma_growth >= 0.0))
        throw std::invalid_argument("SyntheticForecastModel: sigma_growth must be >= 0");
    if (!(skew_weight >= 0.0 && skew_weight <= 1.0))
        throw std::invalid_argument("SyntheticForecastModel: skew_weight must be in [0,1]");
}

FitResult fit_mixture(const QuantileForecast& q) {
    const auto& y = q.quantiles;
    const double range = y.back() - y.front();

    if (range < 1e-9) {
        // Degenerate: all quantiles (numerically) equal.
        const double v = y[49];
        return FitResult{GaussianMixture2({0.5, v, kSigmaFloor}, {0.5, v, kSigmaFloor}),
                         0.0, true};
    }

    const double med = y[49];
    const double iqr = std::max(y[74] - y[24], 1e-6);
    const double sig = std::max(iqr / 1.349, 2.0 * kSigmaFloor);

    const double sigma_hi = std::max(4.0 * range, 2.0 * kSigmaFloor);
    opt::Box box;
    box.lo = {0.02, y.front() - 2.0 * range, kSigmaFloor, y.front() - 2.0 * range, kSigmaFloor};
    box.hi = {0.98, y.back() + 2.0 * range, sigma_hi, y.back() + 2.0 * range, sigma_hi};

    const std::vector<std::vector<double>> starts = {
        {0.50, med - 0.05 * range, sig, med + 0.05 * range, sig},   // near-single normal
        {0.75, y[59], 0.8 * sig, y[9], 1.5 * sig},                  // left tail component
        {0.75, y[39], 0.8 * sig, y[89], 1.5 * sig},                 // right tail component
        {0.50, y[24], sig, y[74], sig},                             // equal-weight wide split
    };

    const FitObjective objective{y};
    const double rms_stop = std::max(1e-4 * range, 1e-9);
    const double pg_tol = 1e-9 * std::max(range * range, 1e-8);

    double best_mse = std::numeric_limits<double>::infinity();
    std::vector<double> best_t;
    for (const auto& t0 : starts) {
        const auto res = opt::minimize_projected(
            [&objective](const std::vector<double>& t, std::vector<double>* g) {
                return objective(t, g);
            },
            t0, box, 120, pg_tol);
        if (res.f < best_mse) {
            best_mse = res.f;
            best_t = res.x;
        }
        if (std::sqrt(best_mse) < rms_stop) break;
    }

    FitResult out{mixture_from_params(best_t), std::sqrt(best_mse), false};
    return out;
}

std::vector<QuantileForecast> synthesize_quantiles(const std::vector<double>& truth,
                                                   const SyntheticForecastModel& model,
                                                   std::uint64_t seed) {
    if (truth.empty())
        throw std::invalid_argument("synthesize_quantiles: truth must be nonempty");
    model.validate();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);

    std::vector<QuantileForecast> out;
    out.reserve(truth.size());
    for (size_t h = 0; h < truth.size(); ++h) {
        const double sigma = model.sigma_base + static_cast<double>(h) * model.sigma_growth;
        // Forecast-center error scales with the claimed spread.
        const double center = truth[h] + model.bias + 0.75 * sigma * unit(rng);
        const GaussianMixture2 m({1.0 - model.skew_weight, center, sigma},
                                 {model.skew_weight, center + model.skew_offset, sigma});
        QuantileForecast q;
        q.hour = static_cast<int>(h);
        q.quantiles = quantile_sweep(m);
        out.push_back(q);
    }
    return out;
}

double point_forecast(const GaussianMixture2& m) { return m.mean(); }

}  // namespace battsched
