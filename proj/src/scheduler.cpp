#include "battsched/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <random>

#include "alsolver.hpp"

namespace battsched {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Marginal SoE drain per kW of battery power (charging stores, discharging draws).
double drain(const BatterySpec& spec, double p) {
    return p < 0.0 ? p * spec.eta_ch : p / spec.eta_dis;
}

double drain_slope(const BatterySpec& spec, double p) {
    return p < 0.0 ? spec.eta_ch : 1.0 / spec.eta_dis;
}

// Signed-integral extension: AL iterates may transiently cross l > h.
double pe_signed(const GaussianMixture2& f, double a, double b, double shift) {
    return a <= b ? f.partial_expectation(a, b, shift)
                  : -f.partial_expectation(b, a, shift);
}

// Everything the objective and constraints need from one step of the
// interval formulation, with derivatives in (l, h, s, b) order.
struct StepEval {
    double p1 = 0, p2 = 0, interior = 0;
    double e_pb = 0;
    double d_e_pb[4] = {0, 0, 0, 0};
    double exp_sell = 0, exp_buy = 0;
    double d_sell[4] = {0, 0, 0, 0};
    double d_buy[4] = {0, 0, 0, 0};
};

StepEval eval_step(const GaussianMixture2& f, double l, double h, double s, double b,
                   bool want_grad) {
    StepEval ev;
    const double d = s + b;
    const double F_ld = f.cdf(l + d);
    const double F_hd = f.cdf(h + d);
    ev.p1 = F_ld;
    ev.p2 = 1.0 - F_hd;
    ev.interior = F_hd - F_ld;

    ev.e_pb = ev.p1 * l + pe_signed(f, l, h, d) + ev.p2 * h;

    ev.exp_sell = f.partial_expectation(-kInf, s, l) + ev.interior * s +
                  f.partial_expectation(s, 0.0, h);
    ev.exp_buy = f.partial_expectation(0.0, b, l) + ev.interior * b +
                 f.partial_expectation(b, kInf, h);

    if (!want_grad) return ev;

    const double pdf_ld = f.pdf(l + d);
    const double pdf_hd = f.pdf(h + d);
    const double fs_l = f.pdf(s + l);
    const double fs_h = f.pdf(s + h);
    const double fb_l = f.pdf(b + l);
    const double fb_h = f.pdf(b + h);
    const double Fs_l = f.cdf(s + l);
    const double Fs_h = f.cdf(s + h);
    const double Fb_l = f.cdf(b + l);
    const double Fb_h = f.cdf(b + h);
    const double F0_l = f.cdf(l);
    const double F0_h = f.cdf(h);
    const double dM = pdf_hd - pdf_ld;  // d interior / d(s or b)

    ev.d_e_pb[0] = ev.p1;
    ev.d_e_pb[1] = ev.p2;
    ev.d_e_pb[2] = -ev.interior;
    ev.d_e_pb[3] = -ev.interior;

    ev.d_sell[0] = s * fs_l - Fs_l - s * pdf_ld;
    ev.d_sell[1] = -s * fs_h - F0_h + Fs_h + s * pdf_hd;
    ev.d_sell[2] = s * fs_l + ev.interior + s * dM - s * fs_h;
    ev.d_sell[3] = s * dM;

    ev.d_buy[0] = b * fb_l - Fb_l + F0_l - b * pdf_ld;
    ev.d_buy[1] = -b * fb_h - 1.0 + Fb_h + b * pdf_hd;
    ev.d_buy[2] = b * dM;
    ev.d_buy[3] = b * fb_l + ev.interior + b * dM - b * fb_h;

    return ev;
}

bool problem_ok(const HorizonProblem& prob) {
    if (prob.frames.empty() || !(prob.dt > 0.0)) return false;
    if (!prob.spec.valid()) return false;
    const double slack = 1e-9;
    if (prob.initial_state.soe < prob.spec.e_min - slack ||
        prob.initial_state.soe > prob.spec.e_max + slack)
        return false;
    for (const auto& fr : prob.frames)
        if (!std::isfinite(fr.c_buy) || !std::isfinite(fr.c_sell)) return false;
    return true;
}

// Generous bound for the desired grid setpoint magnitude.
double grid_bound(const HorizonProblem& prob) {
    double m = 1.0;
    for (const auto& fr : prob.frames) {
        double sigma = std::max(fr.netload.component(0).stdev, fr.netload.component(1).stdev);
        m = std::max(m, std::abs(fr.netload.mean()) + 6.0 * sigma);
    }
    return m + std::max(prob.spec.p_max, -prob.spec.p_min) + 1.0;
}

// ---------------------------------------------------------------------------
// Interval formulation: x = (l, h, d) per step, 5 inequality rows per step.
// The sell/buy split of d is evaluated exactly (sell = min(d,0)), which keeps
// the grid expectations consistent with the battery bookkeeping at every
// iterate; a relaxed independent split can double-count distribution mass
// near degenerate (tiny-sigma) forecasts.

class IntervalNlp {
public:
    explicit IntervalNlp(const HorizonProblem& prob) : prob_(prob), K_((int)prob.frames.size()) {}

    int num_vars() const { return 3 * K_; }
    int num_cons() const { return 5 * K_; }

    opt::Box box() const {
        const double S = grid_bound(prob_);
        opt::Box box;
        box.lo.resize(num_vars());
        box.hi.resize(num_vars());
        for (int k = 0; k < K_; ++k) {
            box.lo[3 * k + 0] = prob_.spec.p_min;
            box.hi[3 * k + 0] = prob_.spec.p_max;
            box.lo[3 * k + 1] = prob_.spec.p_min;
            box.hi[3 * k + 1] = prob_.spec.p_max;
            box.lo[3 * k + 2] = -S;
            box.hi[3 * k + 2] = S;
        }
        return box;
    }

    // Recompute per-step quantities and the expected SoE trajectory.
    void refresh(const std::vector<double>& x, bool want_grad) {
        if (x == cached_x_ && (!want_grad || cached_grad_)) return;
        cached_x_ = x;
        cached_grad_ = want_grad;
        steps_.resize(K_);
        soe_.assign(K_ + 1, prob_.initial_state.soe);
        dsoe_.assign(K_, {0, 0, 0});
        for (int k = 0; k < K_; ++k) {
            const double d = x[3 * k + 2];
            steps_[k] = eval_step(prob_.frames[k].netload, x[3 * k], x[3 * k + 1],
                                  std::min(d, 0.0), std::max(d, 0.0), want_grad);
            soe_[k + 1] = soe_[k] - drain(prob_.spec, steps_[k].e_pb) * prob_.dt;
            if (want_grad) {
                const double gs = drain_slope(prob_.spec, steps_[k].e_pb) * prob_.dt;
                // chain rule: d maps onto the active split coordinate
                const int active = d < 0.0 ? 2 : 3;
                dsoe_[k][0] = -gs * steps_[k].d_e_pb[0];
                dsoe_[k][1] = -gs * steps_[k].d_e_pb[1];
                dsoe_[k][2] = -gs * steps_[k].d_e_pb[active];
            }
        }
    }

    double objective(const std::vector<double>& x, std::vector<double>* grad) {
        refresh(x, grad != nullptr);
        double J = 0.0;
        if (grad) grad->assign(num_vars(), 0.0);
        for (int k = 0; k < K_; ++k) {
            const auto& fr = prob_.frames[k];
            J += prob_.dt * (fr.c_buy * steps_[k].exp_buy + fr.c_sell * steps_[k].exp_sell);
            if (grad) {
                const int active = x[3 * k + 2] < 0.0 ? 2 : 3;
                for (int j = 0; j < 2; ++j)
                    (*grad)[3 * k + j] = prob_.dt * (fr.c_buy * steps_[k].d_buy[j] +
                                                     fr.c_sell * steps_[k].d_sell[j]);
                (*grad)[3 * k + 2] = prob_.dt * (fr.c_buy * steps_[k].d_buy[active] +
                                                 fr.c_sell * steps_[k].d_sell[active]);
            }
        }
        return J;
    }

    void constraints(const std::vector<double>& x, std::vector<double>& g,
                     std::vector<double>* jac) {
        refresh(x, jac != nullptr);
        const int n = num_vars();
        g.assign(num_cons(), 0.0);
        if (jac) jac->assign(static_cast<size_t>(num_cons()) * n, 0.0);
        const auto& sp = prob_.spec;
        const double cdt = sp.eta_ch * prob_.dt;

        for (int k = 0; k < K_; ++k) {
            const int r = 5 * k;
            const double l = x[3 * k], h = x[3 * k + 1];
            g[r + 0] = h - l;
            g[r + 1] = soe_[k + 1] - sp.e_min;
            g[r + 2] = sp.e_max - soe_[k + 1];
            g[r + 3] = l - (soe_[k] - sp.e_max) / cdt;
            g[r + 4] = (soe_[k] - sp.e_min) * sp.eta_dis / prob_.dt - h;
            if (!jac) continue;

            double* J0 = jac->data() + static_cast<size_t>(r + 0) * n;
            double* J1 = jac->data() + static_cast<size_t>(r + 1) * n;
            double* J2 = jac->data() + static_cast<size_t>(r + 2) * n;
            double* J3 = jac->data() + static_cast<size_t>(r + 3) * n;
            double* J4 = jac->data() + static_cast<size_t>(r + 4) * n;

            J0[3 * k + 0] = -1.0;
            J0[3 * k + 1] = 1.0;
            // soe_[k+1] depends on steps 0..k; soe_[k] on steps 0..k-1.
            for (int j = 0; j <= k; ++j)
                for (int c = 0; c < 3; ++c) {
                    J1[3 * j + c] = dsoe_[j][c];
                    J2[3 * j + c] = -dsoe_[j][c];
                }
            for (int j = 0; j < k; ++j)
                for (int c = 0; c < 3; ++c) {
                    J3[3 * j + c] = -dsoe_[j][c] / cdt;
                    J4[3 * j + c] = dsoe_[j][c] * sp.eta_dis / prob_.dt;
                }
            J3[3 * k + 0] += 1.0;
            J4[3 * k + 1] += -1.0;
        }
    }

    const std::vector<double>& soe() const { return soe_; }

private:
    const HorizonProblem& prob_;
    int K_;
    std::vector<double> cached_x_;
    bool cached_grad_ = false;
    std::vector<StepEval> steps_;
    std::vector<double> soe_;
    std::vector<std::array<double, 3>> dsoe_;
};

// ---------------------------------------------------------------------------
// Setpoint formulation: x = p_b per step, 4 inequality rows per step.

class SetpointNlp {
public:
    explicit SetpointNlp(const HorizonProblem& prob) : prob_(prob), K_((int)prob.frames.size()) {}

    int num_vars() const { return K_; }
    int num_cons() const { return 4 * K_; }

    opt::Box box() const {
        opt::Box box;
        box.lo.assign(K_, prob_.spec.p_min);
        box.hi.assign(K_, prob_.spec.p_max);
        return box;
    }

    void refresh(const std::vector<double>& x) {
        if (x == cached_x_) return;
        cached_x_ = x;
        soe_.assign(K_ + 1, prob_.initial_state.soe);
        for (int k = 0; k < K_; ++k)
            soe_[k + 1] = soe_[k] - drain(prob_.spec, x[k]) * prob_.dt;
    }

    double objective(const std::vector<double>& x, std::vector<double>* grad) {
        double J = 0.0;
        if (grad) grad->assign(K_, 0.0);
        for (int k = 0; k < K_; ++k) {
            const auto& fr = prob_.frames[k];
            const auto& f = fr.netload;
            const double buy = f.partial_expectation(0.0, kInf, x[k]);
            const double sell = f.partial_expectation(-kInf, 0.0, x[k]);
            J += prob_.dt * (fr.c_buy * buy + fr.c_sell * sell);
            if (grad) {
                const double F = f.cdf(x[k]);
                (*grad)[k] = prob_.dt * (fr.c_buy * (F - 1.0) - fr.c_sell * F);
            }
        }
        return J;
    }

    void constraints(const std::vector<double>& x, std::vector<double>& g,
                     std::vector<double>* jac) {
        refresh(x);
        const int n = K_;
        g.assign(num_cons(), 0.0);
        if (jac) jac->assign(static_cast<size_t>(num_cons()) * n, 0.0);
        const auto& sp = prob_.spec;
        const double cdt = sp.eta_ch * prob_.dt;
        for (int k = 0; k < K_; ++k) {
            const int r = 4 * k;
            g[r + 0] = soe_[k + 1] - sp.e_min;
            g[r + 1] = sp.e_max - soe_[k + 1];
            g[r + 2] = x[k] - (soe_[k] - sp.e_max) / cdt;
            g[r + 3] = (soe_[k] - sp.e_min) * sp.eta_dis / prob_.dt - x[k];
            if (!jac) continue;
            double* J0 = jac->data() + static_cast<size_t>(r + 0) * n;
            double* J1 = jac->data() + static_cast<size_t>(r + 1) * n;
            double* J2 = jac->data() + static_cast<size_t>(r + 2) * n;
            double* J3 = jac->data() + static_cast<size_t>(r + 3) * n;
            for (int j = 0; j <= k; ++j) {
                const double ds = -drain_slope(sp, x[j]) * prob_.dt;
                J0[j] = ds;
                J1[j] = -ds;
            }
            for (int j = 0; j < k; ++j) {
                const double ds = -drain_slope(sp, x[j]) * prob_.dt;
                J2[j] = -ds / cdt;
                J3[j] = ds * sp.eta_dis / prob_.dt;
            }
            J2[k] += 1.0;
            J3[k] += -1.0;
        }
    }

    const std::vector<double>& soe() const { return soe_; }

private:
    const HorizonProblem& prob_;
    int K_;
    std::vector<double> cached_x_;
    std::vector<double> soe_;
};

// Forward-feasible battery interval sweep assuming the interval endpoints are
// taken in full: used to build feasible initial iterates.
struct SweepResult {
    std::vector<double> lo, hi;  // per step
};

SweepResult feasible_sweep(const HorizonProblem& prob,
                           const std::vector<double>& pg_des) {
    SweepResult sw;
    const int K = (int)prob.frames.size();
    sw.lo.resize(K);
    sw.hi.resize(K);
    BatteryState st = prob.initial_state;
    st.soe = std::clamp(st.soe, prob.spec.e_min, prob.spec.e_max);
    for (int k = 0; k < K; ++k) {
        const PowerInterval fi = feasible_interval(prob.spec, st, prob.dt);
        sw.lo[k] = fi.lo;
        sw.hi[k] = fi.hi;
        DispatchPolicy pol = DispatchPolicy::from_setpoints(fi.lo, fi.hi, pg_des[k]);
        const double e_pb = expected_battery_power(prob.frames[k].netload, pol);
        st = step(prob.spec, st, std::clamp(e_pb, fi.lo, fi.hi), prob.dt);
    }
    return sw;
}

struct Candidate {
    opt::AlResult al;
    bool feasible = false;
};

template <class Nlp>
Candidate run_one(Nlp& nlp, std::vector<double> x0, const SolverOptions& opts) {
    opt::AlOptions al_opts;
    al_opts.max_outer = opts.max_outer;
    al_opts.max_inner = opts.max_inner;
    al_opts.feas_tol = opts.feas_tol;
    al_opts.stat_tol = opts.stat_tol;

    auto fg = [&nlp](const std::vector<double>& x, std::vector<double>* grad) {
        return nlp.objective(x, grad);
    };
    auto cons = [&nlp](const std::vector<double>& x, std::vector<double>& g,
                       std::vector<double>* jac) { nlp.constraints(x, g, jac); };

    Candidate c;
    c.al = opt::minimize_al(fg, cons, nlp.num_cons(), std::move(x0), nlp.box(), al_opts);
    c.feasible = c.al.max_violation <= opts.feas_tol;
    return c;
}

template <class Nlp>
Candidate run_multistart(Nlp& nlp, std::vector<std::vector<double>> starts,
                         const SolverOptions& opts) {
    // Seeded perturbations of the first start beyond the deterministic ones.
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> noise(0.0, 0.5);
    const int extra = std::max(0, opts.multistart - (int)starts.size());
    for (int e = 0; e < extra; ++e) {
        std::vector<double> x = starts[e % starts.size()];
        for (auto& v : x) v += noise(rng);
        starts.push_back(std::move(x));
    }

    Candidate best;
    bool have = false;
    for (auto& x0 : starts) {
        Candidate c = run_one(nlp, std::move(x0), opts);
        if (std::getenv("BATTSCHED_AL_TRACE"))
            std::fprintf(stderr, "start -> f=%.8f viol=%.3e feasible=%d\n", c.al.f,
                         c.al.max_violation, c.feasible ? 1 : 0);
        const bool better =
            !have || (c.feasible && !best.feasible) ||
            (c.feasible == best.feasible && c.al.f < best.al.f);
        if (better) {
            best = std::move(c);
            have = true;
        }
    }
    return best;
}

SolverStatus status_of(const Candidate& c) {
    if (!c.feasible) return SolverStatus::infeasible;
    return c.al.status == opt::AlStatus::converged ? SolverStatus::converged
                                                   : SolverStatus::max_iterations;
}

}  // namespace

const char* to_string(SolverStatus s) {
    switch (s) {
        case SolverStatus::converged: return "converged";
        case SolverStatus::max_iterations: return "max_iterations";
        case SolverStatus::infeasible: return "infeasible";
    }
    return "unknown";
}

double objective(const HorizonProblem& prob, const std::vector<DispatchPolicy>& policies) {
    double J = 0.0;
    for (size_t k = 0; k < policies.size(); ++k) {
        const auto& fr = prob.frames[k];
        const auto g = expected_grid_split(fr.netload, policies[k]);
        J += prob.dt * (fr.c_buy * g.exp_buy + fr.c_sell * g.exp_sell);
    }
    return J;
}

std::vector<double> gradient(const HorizonProblem& prob,
                             const std::vector<DispatchPolicy>& policies) {
    std::vector<double> g(4 * policies.size(), 0.0);
    for (size_t k = 0; k < policies.size(); ++k) {
        const auto& fr = prob.frames[k];
        const StepEval ev = eval_step(fr.netload, policies[k].pb_lo, policies[k].pb_hi,
                                      policies[k].pg_des_sell, policies[k].pg_des_buy, true);
        for (int j = 0; j < 4; ++j)
            g[4 * k + j] = prob.dt * (fr.c_buy * ev.d_buy[j] + fr.c_sell * ev.d_sell[j]);
    }
    return g;
}

HorizonSolution solve(const HorizonProblem& prob, const SolverOptions& opts,
                      const std::vector<DispatchPolicy>* warm) {
    HorizonSolution sol;
    if (!problem_ok(prob)) return sol;  // infeasible, no policies
    const int K = (int)prob.frames.size();

    std::vector<std::vector<double>> starts;

    // (a) zero-width interval at the deterministic setpoint plan
    {
        HorizonProblem det = prob;
        for (auto& fr : det.frames)
            fr.netload = GaussianMixture2::single(fr.netload.mean(), 1e-4);
        SolverOptions det_opts = opts;
        det_opts.multistart = 2;
        const SetpointSolution lp = solve_setpoints(det, det_opts);
        if (!lp.setpoints.empty()) {
            std::vector<double> x(3 * K, 0.0);
            for (int k = 0; k < K; ++k) {
                const double p = lp.setpoints[k];
                x[3 * k + 0] = p;
                x[3 * k + 1] = p;
                x[3 * k + 2] = prob.frames[k].netload.mean() - p;
            }
            starts.push_back(std::move(x));
        }
    }
    // (b) widest SoE-feasible interval, passive grid setpoint
    {
        const SweepResult sw = feasible_sweep(prob, std::vector<double>(K, 0.0));
        std::vector<double> x(3 * K, 0.0);
        for (int k = 0; k < K; ++k) {
            x[3 * k + 0] = sw.lo[k];
            x[3 * k + 1] = sw.hi[k];
        }
        starts.push_back(std::move(x));
    }
    // (c) mean-tracking grid setpoint
    {
        std::vector<double> means(K);
        for (int k = 0; k < K; ++k) means[k] = prob.frames[k].netload.mean();
        const SweepResult sw = feasible_sweep(prob, means);
        std::vector<double> x(3 * K, 0.0);
        for (int k = 0; k < K; ++k) {
            x[3 * k + 0] = sw.lo[k];
            x[3 * k + 1] = sw.hi[k];
            x[3 * k + 2] = means[k];
        }
        starts.push_back(std::move(x));
    }
    if (warm && (int)warm->size() == K) {
        std::vector<double> x(3 * K, 0.0);
        for (int k = 0; k < K; ++k) {
            x[3 * k + 0] = (*warm)[k].pb_lo;
            x[3 * k + 1] = (*warm)[k].pb_hi;
            x[3 * k + 2] = (*warm)[k].pg_des;
        }
        starts.push_back(std::move(x));
    }

    IntervalNlp nlp(prob);
    Candidate best = run_multistart(nlp, std::move(starts), opts);
    sol.status = status_of(best);
    if (sol.status == SolverStatus::infeasible) return sol;

    // Clean constraint-tolerance dust before building policies.
    sol.policies.reserve(K);
    for (int k = 0; k < K; ++k) {
        double l = best.al.x[3 * k + 0];
        double h = best.al.x[3 * k + 1];
        if (l > h) l = h = 0.5 * (l + h);
        sol.policies.push_back(DispatchPolicy::from_setpoints(l, h, best.al.x[3 * k + 2]));
    }
    sol.expected_cost = objective(prob, sol.policies);
    sol.expected_soe.assign(K + 1, prob.initial_state.soe);
    for (int k = 0; k < K; ++k) {
        const double e_pb = expected_battery_power(prob.frames[k].netload, sol.policies[k]);
        sol.expected_soe[k + 1] = sol.expected_soe[k] - drain(prob.spec, e_pb) * prob.dt;
    }
    return sol;
}

SetpointSolution solve_setpoints(const HorizonProblem& prob, const SolverOptions& opts,
                                 const std::vector<double>* warm) {
    SetpointSolution sol;
    if (!problem_ok(prob)) return sol;
    const int K = (int)prob.frames.size();

    std::vector<std::vector<double>> starts;
    // (a) track the expected net-load inside the forward-feasible envelope
    {
        std::vector<double> x(K, 0.0);
        BatteryState st = prob.initial_state;
        st.soe = std::clamp(st.soe, prob.spec.e_min, prob.spec.e_max);
        for (int k = 0; k < K; ++k) {
            const PowerInterval fi = feasible_interval(prob.spec, st, prob.dt);
            x[k] = std::clamp(prob.frames[k].netload.mean(), fi.lo, fi.hi);
            st = step(prob.spec, st, x[k], prob.dt);
        }
        starts.push_back(std::move(x));
    }
    // (b) idle battery
    starts.emplace_back(K, 0.0);
    if (warm && (int)warm->size() == K) starts.push_back(*warm);

    SetpointNlp nlp(prob);
    Candidate best = run_multistart(nlp, std::move(starts), opts);
    sol.status = status_of(best);
    if (sol.status == SolverStatus::infeasible) return sol;

    sol.setpoints = best.al.x;
    sol.expected_cost = best.al.f;
    sol.expected_soe.assign(K + 1, prob.initial_state.soe);
    for (int k = 0; k < K; ++k)
        sol.expected_soe[k + 1] =
            sol.expected_soe[k] - drain(prob.spec, sol.setpoints[k]) * prob.dt;
    return sol;
}

}  // namespace battsched
