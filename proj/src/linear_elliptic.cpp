#include "fhm/linear_elliptic.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include "fhm/krylov.hpp"

namespace fhm {

EllipticWorkspace::EllipticWorkspace(const Grid& grid) : stencils_(grid)
{
    std::vector<long> pos(grid.size(), -1);
    for (std::size_t k = 0; k < grid.size(); ++k)
        if (!grid.is_boundary(k)) {
            pos[k] = static_cast<long>(interior_.size());
            interior_.push_back(k);
        }
    const auto n = static_cast<Eigen::Index>(interior_.size());
    diagonal_.assign(interior_.size(), 0.0);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(interior_.size() * 5);
    for (std::size_t p = 0; p < interior_.size(); ++p)
        for (const auto& e : stencils_.row(interior_[p]).view()) {
            if (e.dm == 0.0 || pos[e.node] < 0)
                continue;
            triplets.emplace_back(static_cast<Eigen::Index>(p), pos[e.node], e.dm);
            if (e.node == interior_[p])
                diagonal_[p] = e.dm;
        }
    Eigen::SparseMatrix<double> m(n, n);
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();
    lu_.analyzePattern(m);
    lu_.factorize(m);
    if (lu_.info() != Eigen::Success)
        throw NonConvergenceError("scalar mixed-derivative operator could not be factorized");
}

void EllipticWorkspace::solve_scalar(Eigen::MatrixXd& rhs) const
{
    rhs = lu_.solve(rhs).eval();
}

std::shared_ptr<const EllipticWorkspace> make_workspace(const Grid& grid)
{
    return std::make_shared<const EllipticWorkspace>(grid);
}

LinearizedContext::LinearizedContext(MetricField p, std::shared_ptr<const EllipticWorkspace> workspace)
    : p_(std::move(p)),
      workspace_(workspace ? std::move(workspace) : make_workspace(p_.grid())),
      a_(MatrixField(p_.grid(), p_.dim())),
      a_adj_(p_.grid(), p_.dim())
{
    if (!(workspace_->grid() == p_.grid()))
        throw InputError("linearized context: workspace grid differs from the metric grid");
    a_ = fhm::connection(p_);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(p_.size()); ++k) {
        const auto node = static_cast<std::size_t>(k);
        a_adj_.at(node) = a_.at(node).adjoint();
    }
}

MatrixField LinearizedContext::metric_zetabar() const
{
    return d_zetabar(p_);
}

namespace detail {

void pack_hermitian(const ConstMatMap& x, double* out)
{
    const auto n = x.rows();
    int q = 0;
    for (Eigen::Index k = 0; k < n; ++k)
        out[q++] = x(k, k).real();
    for (Eigen::Index c = 0; c < n; ++c)
        for (Eigen::Index r = c + 1; r < n; ++r) {
            out[q++] = x(r, c).real();
            out[q++] = x(r, c).imag();
        }
}

void unpack_hermitian(const double* in, MatMap x)
{
    const auto n = x.rows();
    int q = 0;
    for (Eigen::Index k = 0; k < n; ++k)
        x(k, k) = cplx(in[q++], 0.0);
    for (Eigen::Index c = 0; c < n; ++c)
        for (Eigen::Index r = c + 1; r < n; ++r) {
            x(r, c) = cplx(in[q], in[q + 1]);
            x(c, r) = cplx(in[q], -in[q + 1]);
            q += 2;
        }
}

void apply_L_interior(const LinearizedContext& ctx, const MatrixField& h, MatrixField& out)
{
    const auto& ws = ctx.workspace();
    const auto& interior = ws.interior();
    const int n = h.dim();
    const MatrixField& a = ctx.connection();
    const MatrixField& a_adj = ctx.connection_adjoint();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(interior.size()); ++p) {
        const std::size_t node = interior[static_cast<std::size_t>(p)];
        const Mat hc = h.at(node);
        Mat hz = Mat::Zero(n, n);
        Mat hm = Mat::Zero(n, n);
        for (const auto& e : ws.stencils().row(node).view()) {
            if (e.node == node)
                continue;
            const Mat he = Mat(h.at(e.node)) - hc;
            if (e.dz != cplx(0.0, 0.0))
                hz += e.dz * he;
            if (e.dm != 0.0)
                hm += e.dm * he;
        }
        const Mat as = a_adj.at(node);
        const Mat m = as * hz;
        out.at(node) = hm - m - m.adjoint() + as * hc * Mat(a.at(node));
    }
}

}  // namespace detail

HermitianField apply_L(const LinearizedContext& ctx, const HermitianField& h)
{
    ctx.metric().require_compatible(h, "apply_L");
    MatrixField out(h.grid(), h.dim());
    detail::apply_L_interior(ctx, h, out);
    for (auto [circle, ring] : h.grid().boundary_rings())
        for (int j = 0; j < h.grid().n_ang(); ++j) {
            const std::size_t node = h.grid().index(ring, j);
            out.at(node) = h.at(node);
        }
    out.hermitize();
    return HermitianField(std::move(out));
}

namespace {

using Vec = Eigen::VectorXd;

class InteriorSystem {
public:
    explicit InteriorSystem(const LinearizedContext& ctx)
        : ctx_(ctx),
          ws_(ctx.workspace()),
          n_(ctx.metric().dim()),
          np_(detail::hermitian_params(n_)),
          scratch_in_(ctx.metric().grid(), n_),
          scratch_out_(ctx.metric().grid(), n_)
    {}

    Eigen::Index size() const { return static_cast<Eigen::Index>(ws_.interior().size()) * np_; }

    void pack(const MatrixField& f, Vec& v) const
    {
        v.resize(size());
        const auto& interior = ws_.interior();
        for (std::size_t p = 0; p < interior.size(); ++p)
            detail::pack_hermitian(f.at(interior[p]), v.data() + p * np_);
    }

    void unpack(const Vec& v, MatrixField& f) const
    {
        const auto& interior = ws_.interior();
        for (std::size_t p = 0; p < interior.size(); ++p)
            detail::unpack_hermitian(v.data() + p * np_, f.at(interior[p]));
    }

    void apply(const Vec& x, Vec& y)
    {
        unpack(x, scratch_in_);
        detail::apply_L_interior(ctx_, scratch_in_, scratch_out_);
        pack(scratch_out_, y);
    }

    void precondition(const Vec& x, Vec& y) const
    {
        const auto rows = static_cast<Eigen::Index>(ws_.interior().size());
        Eigen::MatrixXd block = Eigen::Map<const Eigen::MatrixXd>(x.data(), np_, rows).transpose();
        ws_.solve_scalar(block);
        y.resize(x.size());
        Eigen::Map<Eigen::MatrixXd>(y.data(), np_, rows) = block.transpose();
    }

    void jacobi_sweeps(const Vec& b, Vec& x, int sweeps, double omega)
    {
        Vec ax(x.size());
        for (int s = 0; s < sweeps; ++s) {
            apply(x, ax);
            for (Eigen::Index i = 0; i < x.size(); ++i)
                x(i) += omega * (b(i) - ax(i)) / ws_.diagonal(static_cast<std::size_t>(i / np_));
        }
    }

private:
    const LinearizedContext& ctx_;
    const EllipticWorkspace& ws_;
    int n_;
    int np_;
    MatrixField scratch_in_;
    MatrixField scratch_out_;
};

}  // namespace

HermitianField solve_dirichlet_L(const LinearizedContext& ctx, const HermitianField& f1, const HermitianField& f2,
                                 const LinearSolveOptions& opts, LinearSolveReport* report)
{
    const MetricField& p = ctx.metric();
    p.require_compatible(f1, "solve_dirichlet_L (f1)");
    p.require_compatible(f2, "solve_dirichlet_L (f2)");
    const Grid& g = p.grid();
    const int n = p.dim();

    // Lift the boundary data: g_ext = f2 on the boundary, zero inside.
    MatrixField lift(g, n);
    for (auto [circle, ring] : g.boundary_rings())
        for (int j = 0; j < g.n_ang(); ++j) {
            const std::size_t node = g.index(ring, j);
            lift.at(node) = f2.at(node);
        }
    MatrixField l_lift(g, n);
    detail::apply_L_interior(ctx, lift, l_lift);

    InteriorSystem sys(ctx);
    Vec b;
    sys.pack(f1 - l_lift, b);

    const double tol = opts.tol_lin * (1.0 + interior_sup_norm(f1));
    const double unknowns = static_cast<double>(sys.size());
    const int max_iters =
        opts.max_lin_iters > 0 ? opts.max_lin_iters : static_cast<int>(10.0 * std::sqrt(unknowns)) + 500;

    GmresOptions gopts;
    // A max-norm bound on the parameters bounds the operator norm of the residual by sqrt(2) n times it.
    gopts.abs_tol = tol / (std::sqrt(2.0) * n);
    gopts.max_iters = max_iters;
    gopts.restart = opts.restart;
    Gmres gmres([&sys](const Vec& x, Vec& y) { sys.apply(x, y); },
                [&sys](const Vec& x, Vec& y) { sys.precondition(x, y); }, gopts);

    Vec x = Vec::Zero(sys.size());
    GmresResult res = gmres.solve(b, x);
    LinearSolveReport rep;
    rep.tolerance = tol;
    rep.iterations = res.iterations;
    rep.history = res.history;
    if (!res.converged && res.iterations < max_iters) {
        rep.used_fallback = true;
        sys.jacobi_sweeps(b, x, opts.fallback_sweeps, opts.fallback_omega);
        gopts.max_iters = max_iters - res.iterations;
        Gmres retry([&sys](const Vec& x, Vec& y) { sys.apply(x, y); },
                    [&sys](const Vec& x, Vec& y) { sys.precondition(x, y); }, gopts);
        res = retry.solve(b, x);
        rep.iterations += res.iterations;
        rep.history.insert(rep.history.end(), res.history.begin(), res.history.end());
    }
    rep.residual = res.residual_max * std::sqrt(2.0) * n;
    if (report)
        *report = rep;
    if (!res.converged)
        throw NonConvergenceError("linear Dirichlet solve did not converge: residual " +
                                      to_text(res.residual_max) + " after " +
                                      std::to_string(rep.iterations) + " iterations",
                                  rep.history);

    MatrixField h = lift;
    sys.unpack(x, h);
    return HermitianField(std::move(h));
}

HermitianField solve_dirichlet_L(const LinearizedContext& ctx, const HermitianField& f1,
                                 const LinearSolveOptions& opts, LinearSolveReport* report)
{
    return solve_dirichlet_L(ctx, f1, HermitianField::zero(f1.grid(), f1.dim()), opts, report);
}

BarrierField barrier(const Grid& grid)
{
    BarrierField out{grid, std::vector<double>(grid.size(), 0.0)};
    for (int i = 0; i < grid.n_rad(); ++i) {
        double v = 0.0;
        if (!grid.is_boundary_ring(i)) {
            if (grid.kind() == DomainKind::annulus) {
                const double s = grid.radial(i);
                v = 2.0 * (s - grid.radial_min()) * (grid.radial_max() - s);
            } else {
                const double r = grid.radial(i);
                const double ro = grid.domain().r_outer;
                v = ro * ro - r * r;
            }
        }
        for (int j = 0; j < grid.n_ang(); ++j)
            out.values[grid.index(i, j)] = v;
    }
    return out;
}

C0Certificate c0_certificate(const LinearizedContext& ctx, const HermitianField& h, double tol_cert)
{
    const MetricField& p = ctx.metric();
    p.require_compatible(h, "c0_certificate");
    C0Certificate cert;
    MatrixField lh(h.grid(), h.dim());
    detail::apply_L_interior(ctx, h, lh);
    cert.l_norm = interior_sup_norm(lh);
    cert.p_inv_norm = 1.0 / min_eigenvalue(p);
    const double c = cert.l_norm * cert.p_inv_norm;
    const BarrierField phi = barrier(h.grid());

    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < h.size(); ++k) {
        const Mat s = inv_sqrt_pd(p.at(k));
        const Mat x = s * Mat(h.at(k)) * s;
        Eigen::SelfAdjointEigenSolver<Mat> es(Mat(0.5 * (x + Mat(x.adjoint()))), Eigen::EigenvaluesOnly);
        const RVec ev = es.eigenvalues();
        const double spread = std::max(ev(ev.size() - 1), -ev(0));
        worst = std::max(worst, spread - c * phi.values[k]);
    }
    cert.worst_margin = worst;
    cert.passes = worst <= tol_cert;
    return cert;
}

}  // namespace fhm
