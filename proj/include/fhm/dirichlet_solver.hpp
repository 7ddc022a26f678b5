#pragma once

#include <vector>

#include "fhm/fields.hpp"
#include "fhm/linear_elliptic.hpp"

namespace fhm {

struct SolveOptions {
    double t_step_init = 0.25;
    double t_step_min = 1e-4;
    /// Target for the interior sup-norm of the curvature residual.
    double tol_newton = 1e-8;
    int max_newton = 30;
    double damping_min = 1.0 / (1 << 20);
    LinearSolveOptions linear;

    void validate() const;
};

struct NewtonStage {
    double t = 0.0;
    bool converged = false;
    std::vector<double> residual_history;
    std::vector<double> damping_factors;
    std::vector<int> linear_iterations;
};

struct SolveReport {
    std::vector<NewtonStage> stages;
    double flatness_residual = 0.0;
    double boundary_mismatch = 0.0;
    double wall_time_s = 0.0;
    int newton_iterations = 0;
};

/// Samplewise t F + (1 - t) I.
BoundaryData path_boundary(const BoundaryData& f, double t);

struct NewtonStepResult {
    MetricField next;
    double step_norm;
    double damping;
    int linear_iterations;
};

/// One damped Newton corrector towards a flat metric with the given boundary
/// values: solves L_P h = -R(P) inside with h = target - P on the boundary,
/// then takes the largest s in {1, 1/2, ...} >= damping_min keeping
/// lambda_min(P + s h) >= lambda_min(P) / 2 at every node. Throws
/// NonConvergenceError on damping underflow.
NewtonStepResult newton_step(const MetricField& p, const BoundaryData& target, const SolveOptions& opts,
                             std::shared_ptr<const EllipticWorkspace> workspace = nullptr);

/// Continuation in t along path_boundary from the flat metric I at t = 0 to
/// F at t = 1, with Newton correctors at every stage. The step in t halves on
/// a failed stage and grows by 1.5 after a fast one.
struct SolveResult {
    MetricField metric;
    SolveReport report;
};

SolveResult solve(const BoundaryData& f, const Grid& grid, const SolveOptions& opts = {});

/// sup-norm of P1 - P2.
double stability_gap(const MatrixField& p1, const MatrixField& p2);

}  // namespace fhm
