#pragma once

#include "dyncs/operator.hpp"

namespace dyncs {

/// One time-step's data: measurements, operator, noise bound, l1 weight.
struct Problem {
    const MeasurementOperator& a;
    Vec y;
    double eps = 0.0;   // l2 noise-norm bound for constrained forms
    double gamma = 0.0; // l1 weight for Lagrangian forms
};

enum class SolverStatus { Converged, MaxIter, Infeasible };

struct SolverResult {
    Vec xhat;
    int iterations = 0;
    double kkt_residual = 0.0;
    double objective = 0.0;
    SolverStatus status = SolverStatus::Converged;
    bool degenerate = false; // flagged when the minimizer is provably non-unique
};

struct SolverOptions {
    double tol = 1e-6;       // KKT tolerance (relative)
    int max_iter = 20000;
    bool polish = true;      // support-LS refinement for constrained solves
    const Vec* warm_start = nullptr;
    const Vec* warm_dual = nullptr;
};

const char* to_string(SolverStatus s);

} // namespace dyncs
