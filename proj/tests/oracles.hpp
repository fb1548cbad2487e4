#pragma once

// Independent reference implementations used only by tests. Everything here
// deliberately avoids the library's code paths: integrals by adaptive
// quadrature, expectations by Monte-Carlo on the raw clipping rules, the
// normal distribution by its own series/continued-fraction routine.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "battsched/battery.hpp"
#include "battsched/gmix.hpp"
#include "battsched/mixedrv.hpp"

namespace oracle {

inline double normal_pdf(double x) {
    return 0.3989422804014327 * std::exp(-0.5 * x * x);
}

// Hart-style rational approximation, coded independently of std::erfc.
inline double normal_cdf(double x) {
    if (x < 0.0) return 1.0 - normal_cdf(-x);
    if (x > 40.0) return 1.0;
    // upper tail via the continued fraction for Mills' ratio
    if (x > 6.0) {
        double cf = x;
        for (int k = 12; k >= 1; --k) cf = x + k / cf;
        return 1.0 - normal_pdf(x) / cf;
    }
    // series expansion of the integral
    double term = x, sum = x;
    const double x2 = x * x;
    for (int k = 1; k < 200; ++k) {
        term *= x2 / (2.0 * k + 1.0);
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return 0.5 + normal_pdf(x) * sum;
}

inline double normal_quantile(double p) {
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (normal_cdf(mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Adaptive Simpson quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      double fa, double fm, double fb, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
           simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
    const double m = 0.5 * (a + b);
    return simpson(f, a, b, f(a), f(m), f(b), tol, 60);
}

// Integration window covering all but ~1e-14 of the mixture mass.
inline void support(const battsched::GaussianMixture2& m, double& lo, double& hi) {
    lo = 1e300;
    hi = -1e300;
    for (int i = 0; i < 2; ++i) {
        const auto& c = m.component(i);
        lo = std::min(lo, c.mean - 8.5 * c.stdev);
        hi = std::max(hi, c.mean + 8.5 * c.stdev);
    }
}

inline double sample(const battsched::GaussianMixture2& m, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n(0.0, 1.0);
    const auto& c = u(rng) < m.component(0).weight ? m.component(0) : m.component(1);
    return c.mean + c.stdev * n(rng);
}

struct McStat {
    double mean = 0.0;
    double stderr_ = 0.0;
};

// Monte-Carlo estimate of E[g(P_L)].
inline McStat mc_expect(const battsched::GaussianMixture2& m,
                        const std::function<double(double)>& g, std::int64_t samples,
                        std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double sum = 0.0, sum2 = 0.0;
    for (std::int64_t i = 0; i < samples; ++i) {
        const double v = g(sample(m, rng));
        sum += v;
        sum2 += v * v;
    }
    McStat st;
    st.mean = sum / samples;
    const double var = std::max(0.0, sum2 / samples - st.mean * st.mean);
    st.stderr_ = std::sqrt(var / samples);
    return st;
}

// Deterministic multi-step dispatch cost by exhaustive search at fixed power
// resolution. The final stage is closed greedily over its feasible grid.
struct SearchProblem {
    std::vector<double> netload;  // deterministic
    std::vector<double> c_buy;
    std::vector<double> c_sell;
    battsched::BatterySpec spec;
    double soe0 = 0.0;
    double dt = 1.0;
};

inline double stage_cost(const SearchProblem& sp, int k, double p_b) {
    const double g = sp.netload[k] - p_b;
    return (g > 0 ? sp.c_buy[k] * g : sp.c_sell[k] * g) * sp.dt;
}

inline double soe_after(const SearchProblem& sp, double soe, double p_b) {
    const double drain = p_b < 0 ? p_b * sp.spec.eta_ch : p_b / sp.spec.eta_dis;
    return soe - drain * sp.dt;
}

// The stage cost is piecewise linear in p_b with its only kink at the
// net-load, so the final stage closes exactly over three candidates.
inline double best_last_stage(const SearchProblem& sp, int k, double soe) {
    const battsched::PowerInterval fi =
        battsched::feasible_interval(sp.spec, {soe}, sp.dt);
    const double kink = std::clamp(sp.netload[k], fi.lo, fi.hi);
    return std::min({stage_cost(sp, k, fi.lo), stage_cost(sp, k, kink),
                     stage_cost(sp, k, fi.hi)});
}

// Exhaustive search over all stages but the last at `step` resolution.
inline double grid_search_cost(const SearchProblem& sp, double step = 0.01) {
    const int K = static_cast<int>(sp.netload.size());

    // Suffix lower bounds for pruning: the cheapest any remaining stage can
    // ever be is a full-power export at its sell price.
    std::vector<double> suffix_lb(K + 1, 0.0);
    for (int k = K - 1; k >= 0; --k)
        suffix_lb[k] =
            suffix_lb[k + 1] +
            std::min(0.0, sp.c_sell[k] * (sp.netload[k] - sp.spec.p_max) * sp.dt);

    double best = 1e300;
    std::function<void(int, double, double)> recurse = [&](int k, double soe,
                                                           double cost) {
        if (cost + suffix_lb[k] >= best) return;
        if (k == K - 1) {
            best = std::min(best, cost + best_last_stage(sp, k, soe));
            return;
        }
        const battsched::PowerInterval fi =
            battsched::feasible_interval(sp.spec, {soe}, sp.dt);
        for (double p = std::ceil(fi.lo / step) * step; p <= fi.hi + 1e-12; p += step) {
            const double pb = std::min(p, fi.hi);
            recurse(k + 1, soe_after(sp, soe, pb), cost + stage_cost(sp, k, pb));
        }
        recurse(k + 1, soe_after(sp, soe, fi.lo), cost + stage_cost(sp, k, fi.lo));
        recurse(k + 1, soe_after(sp, soe, fi.hi), cost + stage_cost(sp, k, fi.hi));
    };
    recurse(0, sp.soe0, 0.0);
    return best;
}

}  // namespace oracle
