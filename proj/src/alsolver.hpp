#pragma once

// Internal optimizer core: box-projected L-BFGS and an augmented-Lagrangian
// wrapper for inequality constraints g(x) >= 0. Small dense problems only.

#include <functional>
#include <vector>

namespace battsched::opt {

struct Box {
    std::vector<double> lo;
    std::vector<double> hi;
};

// Evaluate f(x) and, when grad != nullptr, write df/dx into *grad.
using Objective = std::function<double(const std::vector<double>&, std::vector<double>*)>;

// Evaluate all inequality constraints g_i(x) (feasible iff g_i >= 0) and,
// when jac != nullptr, the dense Jacobian (row-major, m x n).
using Constraints = std::function<void(const std::vector<double>&, std::vector<double>&,
                                       std::vector<double>*)>;

struct InnerResult {
    std::vector<double> x;
    double f = 0.0;
    double pg_norm = 0.0;  // inf-norm of projected gradient at x
    int iterations = 0;
    std::vector<double> f_history;  // accepted objective values, nonincreasing
};

InnerResult minimize_projected(const Objective& fg, std::vector<double> x0,
                               const Box& box, int max_iters, double pg_tol,
                               bool record_history = false);

struct AlOptions {
    int max_outer = 200;
    int max_inner = 300;
    double feas_tol = 1e-6;
    double stat_tol = 1e-5;
    double rho0 = 10.0;
    double rho_max = 1e6;
    bool record_history = false;
};

enum class AlStatus { converged, max_iterations, infeasible };

struct AlResult {
    std::vector<double> x;
    double f = 0.0;             // objective (without penalty terms)
    double max_violation = 0.0; // max_i max(0, -g_i)
    double pg_norm = 0.0;
    AlStatus status = AlStatus::max_iterations;
    int outer_iterations = 0;
    std::vector<std::vector<double>> history;  // per outer phase, if recorded
};

AlResult minimize_al(const Objective& fg, const Constraints& cons, int n_cons,
                     std::vector<double> x0, const Box& box, const AlOptions& opts);

}  // namespace battsched::opt
