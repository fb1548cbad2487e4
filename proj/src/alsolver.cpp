#include "alsolver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <limits>

namespace battsched::opt {

namespace {

void project(std::vector<double>& x, const Box& box) {
    for (size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], box.lo[i], box.hi[i]);
}

double projected_gradient_norm(const std::vector<double>& x, const std::vector<double>& g,
                               const Box& box) {
    double norm = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double step = std::clamp(x[i] - g[i], box.lo[i], box.hi[i]) - x[i];
        norm = std::max(norm, std::abs(step));
    }
    return norm;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

InnerResult minimize_projected(const Objective& fg, std::vector<double> x0, const Box& box,
                               int max_iters, double pg_tol, bool record_history) {
    const size_t n = x0.size();
    project(x0, box);

    InnerResult res;
    res.x = std::move(x0);
    std::vector<double> g(n);
    res.f = fg(res.x, &g);
    if (record_history) res.f_history.push_back(res.f);

    // L-BFGS memory
    const int mem = 8;
    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;

    std::vector<double> d(n), x_new(n), g_new(n), alpha_buf(mem);

    int it = 0;
    for (; it < max_iters; ++it) {
        res.pg_norm = projected_gradient_norm(res.x, g, box);
        if (res.pg_norm <= pg_tol) break;

        // Two-loop recursion for d = -H*g.
        d = g;
        const int m = static_cast<int>(s_hist.size());
        for (int i = m - 1; i >= 0; --i) {
            alpha_buf[i] = rho_hist[i] * dot(s_hist[i], d);
            for (size_t j = 0; j < n; ++j) d[j] -= alpha_buf[i] * y_hist[i][j];
        }
        if (m > 0) {
            const double gamma =
                dot(s_hist[m - 1], y_hist[m - 1]) / dot(y_hist[m - 1], y_hist[m - 1]);
            for (auto& v : d) v *= gamma;
        }
        for (int i = 0; i < m; ++i) {
            const double beta = rho_hist[i] * dot(y_hist[i], d);
            for (size_t j = 0; j < n; ++j) d[j] += s_hist[i][j] * (alpha_buf[i] - beta);
        }
        for (auto& v : d) v = -v;

        // Projected backtracking with Armijo on the projected step.
        bool accepted = false;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            if (attempt == 1) {  // quasi-Newton direction failed: steepest descent
                for (size_t j = 0; j < n; ++j) d[j] = -g[j];
            }
            double step = 1.0;
            for (int ls = 0; ls < 50; ++ls) {
                for (size_t j = 0; j < n; ++j) x_new[j] = res.x[j] + step * d[j];
                project(x_new, box);
                double gtd = 0.0;
                for (size_t j = 0; j < n; ++j) gtd += g[j] * (x_new[j] - res.x[j]);
                if (gtd > -1e-18) {  // projection removed all descent
                    step *= 0.5;
                    continue;
                }
                const double f_new = fg(x_new, nullptr);
                if (f_new <= res.f + 1e-4 * gtd) {
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
        }
        if (!accepted) break;  // stalled; x is the best point found

        const double f_new = fg(x_new, &g_new);

        std::vector<double> s(n), y(n);
        for (size_t j = 0; j < n; ++j) {
            s[j] = x_new[j] - res.x[j];
            y[j] = g_new[j] - g[j];
        }
        const double sy = dot(s, y);
        if (sy > 1e-12 * std::sqrt(dot(s, s)) * std::sqrt(dot(y, y))) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > mem) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }

        res.x = x_new;
        res.f = f_new;
        g = g_new;
        if (record_history) res.f_history.push_back(res.f);
    }
    res.pg_norm = projected_gradient_norm(res.x, g, box);
    res.iterations = it;
    return res;
}

AlResult minimize_al(const Objective& fg, const Constraints& cons, int n_cons,
                     std::vector<double> x0, const Box& box, const AlOptions& opts) {
    const size_t n = x0.size();
    std::vector<double> lambda(n_cons, 0.0);
    double rho = opts.rho0;

    std::vector<double> gvals(n_cons), jac(static_cast<size_t>(n_cons) * n);

    auto al_objective = [&](const std::vector<double>& x, std::vector<double>* grad) {
        double f = fg(x, grad);
        cons(x, gvals, grad ? &jac : nullptr);
        for (int i = 0; i < n_cons; ++i) {
            const double t = std::max(0.0, lambda[i] - rho * gvals[i]);
            f += (t * t - lambda[i] * lambda[i]) / (2.0 * rho);
            if (grad && t > 0.0) {
                const double* row = jac.data() + static_cast<size_t>(i) * n;
                for (size_t j = 0; j < n; ++j) (*grad)[j] -= t * row[j];
            }
        }
        return f;
    };

    AlResult res;
    res.x = std::move(x0);
    project(res.x, box);

    auto violation_at = [&](const std::vector<double>& x) {
        cons(x, gvals, nullptr);
        double viol = 0.0;
        for (int i = 0; i < n_cons; ++i) viol = std::max(viol, -gvals[i]);
        return std::max(viol, 0.0);
    };

    // A feasible start is a valid fallback; never return anything worse.
    std::vector<double> best_x;
    double best_f = std::numeric_limits<double>::infinity();
    if (violation_at(res.x) <= opts.feas_tol) {
        best_x = res.x;
        best_f = fg(res.x, nullptr);
    }

    double prev_viol = std::numeric_limits<double>::infinity();
    double prev_f = std::numeric_limits<double>::infinity();
    std::vector<double> prev_x;
    int quiet = 0;
    for (int outer = 0; outer < opts.max_outer; ++outer) {
        res.outer_iterations = outer + 1;
        InnerResult inner = minimize_projected(al_objective, res.x, box, opts.max_inner,
                                               opts.stat_tol, opts.record_history);
        res.x = inner.x;
        res.pg_norm = inner.pg_norm;
        if (opts.record_history) res.history.push_back(std::move(inner.f_history));

        res.max_violation = violation_at(res.x);
        const double f_now = fg(res.x, nullptr);
        const bool feasible = res.max_violation <= opts.feas_tol;

        if (std::getenv("BATTSCHED_AL_TRACE"))
            std::fprintf(stderr, "outer=%d f=%.8f viol=%.3e pg=%.3e rho=%.1e inner=%d\n",
                         outer, f_now, res.max_violation, res.pg_norm, rho,
                         inner.iterations);

        if (feasible) {
            if (f_now < best_f) {
                best_f = f_now;
                best_x = res.x;
            }
            if (res.pg_norm <= opts.stat_tol * 10.0) {
                res.status = AlStatus::converged;
                break;
            }
        }

        // Progress tests: stop once neither x nor f moves meaningfully.
        double dx = 0.0;
        if (!prev_x.empty())
            for (size_t i = 0; i < res.x.size(); ++i)
                dx = std::max(dx, std::abs(res.x[i] - prev_x[i]));
        const bool still =
            !prev_x.empty() && (dx <= 1e-10 || std::abs(f_now - prev_f) <=
                                                   1e-11 * (1.0 + std::abs(f_now)));
        quiet = still ? quiet + 1 : 0;
        if (quiet >= 3) {
            res.status = feasible ? AlStatus::converged : AlStatus::infeasible;
            break;
        }
        prev_x = res.x;
        prev_f = f_now;

        for (int i = 0; i < n_cons; ++i)
            lambda[i] = std::max(0.0, lambda[i] - rho * gvals[i]);
        // Escalate the penalty only while clearly infeasible and stagnating.
        if (res.max_violation > std::max(10.0 * opts.feas_tol, 0.25 * prev_viol))
            rho = std::min(rho * 5.0, opts.rho_max);
        prev_viol = res.max_violation;
    }

    // Prefer the best feasible iterate seen over whatever the last outer left.
    if (!best_x.empty()) {
        const double f_last = fg(res.x, nullptr);
        if (res.max_violation > opts.feas_tol || f_last > best_f) {
            res.x = best_x;
            res.max_violation = violation_at(res.x);
            if (res.status == AlStatus::infeasible) res.status = AlStatus::max_iterations;
        }
    }
    res.f = fg(res.x, nullptr);
    return res;
}

}  // namespace battsched::opt
