#include "fhm/dirichlet_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace fhm {

void SolveOptions::validate() const
{
    if (!(t_step_min > 0.0 && t_step_min <= t_step_init && t_step_init <= 1.0))
        throw InputError("solve options: need 0 < t_step_min <= t_step_init <= 1");
    if (!(tol_newton > 0.0) || !(linear.tol_lin > 0.0))
        throw InputError("solve options: tolerances must be positive");
    if (max_newton < 1)
        throw InputError("solve options: max_newton must be at least 1");
    if (!(damping_min > 0.0 && damping_min <= 1.0))
        throw InputError("solve options: damping_min must lie in (0, 1]");
}

BoundaryData path_boundary(const BoundaryData& f, double t)
{
    if (!(t >= 0.0 && t <= 1.0))
        throw InputError("path_boundary: t must lie in [0, 1]");
    BoundaryData out = f;
    for (Circle c : out.circles())
        for (int j = 0; j < out.n_ang; ++j) {
            auto x = out.sample(c, j);
            Mat v = t * Mat(x) + (1.0 - t) * Mat::Identity(f.dim, f.dim);
            x = 0.5 * (v + Mat(v.adjoint()));
        }
    return out;
}

namespace {

double boundary_mismatch(const MatrixField& p, const BoundaryData& target)
{
    const Grid& g = p.grid();
    double worst = 0.0;
    for (auto [circle, ring] : g.boundary_rings())
        for (int j = 0; j < g.n_ang(); ++j)
            worst = std::max(worst, op_norm(Mat(p.at(g.index(ring, j))) - Mat(target.sample(circle, j))));
    return worst;
}

std::vector<double> node_lambda_min(const MatrixField& p)
{
    std::vector<double> out(p.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(p.size()); ++k)
        out[static_cast<std::size_t>(k)] = lambda_min(p.at(static_cast<std::size_t>(k)));
    return out;
}

}  // namespace

NewtonStepResult newton_step(const MetricField& p, const BoundaryData& target, const SolveOptions& opts,
                             std::shared_ptr<const EllipticWorkspace> workspace)
{
    const Grid& g = p.grid();
    target.require_grid(g);
    if (target.dim != p.dim())
        throw InputError("newton_step: fiber dimension mismatch");

    const LinearizedContext ctx(p, std::move(workspace));
    MatrixField f1 = HermitianField(curvature_residual(p, ctx.workspace().stencils()));
    for (auto& v : f1.values())
        v = -v;
    MatrixField f2(g, p.dim());
    for (auto [circle, ring] : g.boundary_rings())
        for (int j = 0; j < g.n_ang(); ++j) {
            const std::size_t node = g.index(ring, j);
            f2.at(node) = Mat(target.sample(circle, j)) - Mat(p.at(node));
        }

    LinearSolveReport rep;
    const HermitianField h =
        solve_dirichlet_L(ctx, HermitianField(std::move(f1)), HermitianField(std::move(f2)), opts.linear, &rep);

    const std::vector<double> lam = node_lambda_min(p);
    double s = 1.0;
    while (s >= opts.damping_min) {
        MatrixField cand = p + s * h;
        bool ok = true;
        for (std::size_t k = 0; k < cand.size() && ok; ++k)
            ok = lambda_min(cand.at(k)) >= 0.5 * lam[k];
        if (ok) {
            if (s == 1.0)
                for (auto [circle, ring] : g.boundary_rings())
                    for (int j = 0; j < g.n_ang(); ++j)
                        cand.at(g.index(ring, j)) = target.sample(circle, j);
            cand.hermitize();
            return {MetricField(std::move(cand)), s * sup_norm(h), s, rep.iterations};
        }
        s *= 0.5;
    }
    throw NonConvergenceError("newton_step: damping underflow, no admissible step keeps the metric positive");
}

SolveResult solve(const BoundaryData& f, const Grid& grid, const SolveOptions& opts)
{
    const auto start = std::chrono::steady_clock::now();
    opts.validate();
    f.validate_positive(1e-12);
    f.require_grid(grid);

    auto ws = make_workspace(grid);
    MetricField p = MetricField::identity(grid, f.dim);
    SolveReport report;

    double t = 0.0;
    double dt = std::clamp(opts.t_step_init, opts.t_step_min, 1.0);
    while (t < 1.0) {
        const double t_next = std::min(1.0, t + dt);
        const BoundaryData target = path_boundary(f, t_next);
        NewtonStage stage;
        stage.t = t_next;

        MetricField q = p;
        int iters = 0;
        for (;; ++iters) {
            const double res = interior_sup_norm(curvature_residual(q, ws->stencils()));
            const double mismatch = boundary_mismatch(q, target);
            stage.residual_history.push_back(res);
            if (res <= opts.tol_newton && mismatch == 0.0) {
                stage.converged = true;
                break;
            }
            if (iters == opts.max_newton || !std::isfinite(res) ||
                res > 1e6 * (stage.residual_history.front() + 1.0))
                break;
            try {
                NewtonStepResult step = newton_step(q, target, opts, ws);
                stage.damping_factors.push_back(step.damping);
                stage.linear_iterations.push_back(step.linear_iterations);
                q = std::move(step.next);
            } catch (const NonConvergenceError&) {
                break;
            }
        }
        report.newton_iterations += iters;
        report.stages.push_back(stage);

        if (stage.converged) {
            p = std::move(q);
            t = t_next;
            if (iters <= 3)
                dt = std::min(1.0, 1.5 * dt);
        } else {
            dt *= 0.5;
            if (dt < opts.t_step_min) {
                throw NonConvergenceError("solve: continuation step fell below t_step_min at t = " +
                                              to_text(t),
                                          stage.residual_history);
            }
        }
    }

    report.flatness_residual = interior_sup_norm(curvature_residual(p, ws->stencils()));
    report.boundary_mismatch = boundary_mismatch(p, f);
    report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::move(p), std::move(report)};
}

double stability_gap(const MatrixField& p1, const MatrixField& p2)
{
    return sup_norm(p1 - p2);
}

}  // namespace fhm
