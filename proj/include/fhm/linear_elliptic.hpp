#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include "fhm/fields.hpp"
#include "fhm/operators.hpp"

namespace fhm {

/// Per-grid machinery shared by every linear solve on that grid: stencils,
/// the interior-node numbering and the factorized scalar mixed-derivative
/// operator d^2/dzeta dzetabar with homogeneous Dirichlet rows eliminated.
class EllipticWorkspace {
public:
    explicit EllipticWorkspace(const Grid& grid);

    const Grid& grid() const noexcept { return stencils_.grid(); }
    const StencilTable& stencils() const noexcept { return stencils_; }
    const std::vector<std::size_t>& interior() const noexcept { return interior_; }
    /// Diagonal weight of the mixed derivative at an interior position.
    double diagonal(std::size_t interior_pos) const noexcept { return diagonal_[interior_pos]; }

    /// Applies the inverse scalar operator to each column of `rhs` in place
    /// (rows are interior positions).
    void solve_scalar(Eigen::MatrixXd& rhs) const;

private:
    StencilTable stencils_;
    std::vector<std::size_t> interior_;
    std::vector<double> diagonal_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

std::shared_ptr<const EllipticWorkspace> make_workspace(const Grid& grid);

/// Background metric P with cached A = P^{-1} P_zeta and A^* = P_zetabar P^{-1}.
class LinearizedContext {
public:
    explicit LinearizedContext(MetricField p, std::shared_ptr<const EllipticWorkspace> workspace = nullptr);

    const MetricField& metric() const noexcept { return p_; }
    const ConnectionField& connection() const noexcept { return a_; }
    /// A^* at every node, i.e. P_zetabar P^{-1}.
    const MatrixField& connection_adjoint() const noexcept { return a_adj_; }
    /// P_zetabar = (P_zeta)^*.
    MatrixField metric_zetabar() const;
    const EllipticWorkspace& workspace() const noexcept { return *workspace_; }
    std::shared_ptr<const EllipticWorkspace> shared_workspace() const noexcept { return workspace_; }

private:
    MetricField p_;
    std::shared_ptr<const EllipticWorkspace> workspace_;
    ConnectionField a_;
    MatrixField a_adj_;
};

/// Linearized curvature operator
///   Lh = h_{zeta zetabar} - h_zetabar A - A^* h_zeta + A^* h A
/// at interior nodes. Boundary nodes carry h unchanged.
HermitianField apply_L(const LinearizedContext& ctx, const HermitianField& h);

struct LinearSolveOptions {
    double tol_lin = 1e-10;
    /// <= 0 selects 10 sqrt(unknowns) + 500.
    int max_lin_iters = 0;
    int restart = 60;
    int fallback_sweeps = 200;
    double fallback_omega = 0.6;
};

struct LinearSolveReport {
    int iterations = 0;
    bool used_fallback = false;
    double residual = 0.0;
    double tolerance = 0.0;
    std::vector<double> history;
};

/// Solves Lh = f1 at interior nodes with h = f2 on the boundary. Only the
/// boundary values of f2 are read. Unknowns are the n^2 real parameters of a
/// Hermitian matrix per interior node; the solve is preconditioned GMRES with
/// a damped Jacobi sweep as the stagnation fallback. Throws
/// NonConvergenceError (carrying the residual history) on failure.
HermitianField solve_dirichlet_L(const LinearizedContext& ctx, const HermitianField& f1, const HermitianField& f2,
                                 const LinearSolveOptions& opts = {}, LinearSolveReport* report = nullptr);

/// Zero boundary data.
HermitianField solve_dirichlet_L(const LinearizedContext& ctx, const HermitianField& f1,
                                 const LinearSolveOptions& opts = {}, LinearSolveReport* report = nullptr);

/// Scalar comparison function with Phi = 0 on the boundary and
/// Phi_{zeta zetabar} = -1: 2 (sigma - sigma1)(sigma2 - sigma) on the annulus,
/// r_outer^2 - |w|^2 on the disc.
struct BarrierField {
    Grid grid;
    std::vector<double> values;
};

BarrierField barrier(const Grid& grid);

struct C0Certificate {
    bool passes = false;
    /// max over nodes of lambda_max(P^{-1/2}(+-h - c Phi P)P^{-1/2}), c = ||Lh||_0 ||P^{-1}||_0.
    double worst_margin = 0.0;
    double l_norm = 0.0;
    double p_inv_norm = 0.0;
};

inline constexpr double kTolCert = 1e-8;

/// Checks the comparison bound +-h <= ||Lh||_0 ||P^{-1}||_0 Phi P for h with
/// zero boundary values. A failing certificate is reported, not thrown.
C0Certificate c0_certificate(const LinearizedContext& ctx, const HermitianField& h, double tol_cert = kTolCert);

namespace detail {

/// Number of real parameters of an n x n Hermitian matrix.
inline int hermitian_params(int n) { return n * n; }
/// Packs the Hermitian value at `node` into params [diag re..., (re, im) of the strict lower triangle].
void pack_hermitian(const ConstMatMap& x, double* out);
void unpack_hermitian(const double* in, MatMap x);

/// Raw L kernel on interior nodes (boundary of the result is zero).
void apply_L_interior(const LinearizedContext& ctx, const MatrixField& h, MatrixField& out);

}  // namespace detail

}  // namespace fhm
