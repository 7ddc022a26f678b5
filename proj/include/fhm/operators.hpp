#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "fhm/fields.hpp"

namespace fhm {

/// Finite-difference weights of one node.
///
/// `dz` are the weights of d/dzeta; the weights of d/dzetabar are their
/// complex conjugates. `dm` are the (real) weights of d^2/dzeta dzetabar.
/// Interior rows use centered second-order stencils; boundary rings use
/// one-sided second-order radial stencils.
struct StencilRow {
    static constexpr int kMaxEntries = 8;
    struct Entry {
        std::size_t node;
        cplx dz;
        double dm;
    };
    std::array<Entry, kMaxEntries> entries{};
    int count = 0;

    void add(std::size_t node, cplx dz, double dm);
    std::span<const Entry> view() const { return {entries.data(), static_cast<std::size_t>(count)}; }
};

/// Stencil rows for every node of a grid.
///
/// Log-polar chart: d/dzeta = (d_sigma - i d_theta) / 2 and
/// d^2/dzeta dzetabar = (d_sigma^2 + d_theta^2) / 4.
/// Disc (identity chart, polar grid): d/dw = e^{-i theta}(d_r - (i/r) d_theta) / 2
/// and d^2/dw dwbar = (d_r^2 + (1/r) d_r + (1/r^2) d_theta^2) / 4, with the
/// radial neighbour of the innermost ring taken across the origin.
class StencilTable {
public:
    explicit StencilTable(const Grid& grid);

    const Grid& grid() const noexcept { return grid_; }
    const StencilRow& row(std::size_t node) const noexcept { return rows_[node]; }

private:
    Grid grid_;
    std::vector<StencilRow> rows_;
};

/// A = P^{-1} dP/dzeta, the dzeta-coefficient of the Chern connection.
class ConnectionField : public MatrixField {
public:
    explicit ConnectionField(MatrixField a) : MatrixField(std::move(a)) {}
};

MatrixField d_zeta(const MatrixField& field);
MatrixField d_zetabar(const MatrixField& field);
MatrixField d_mixed(const MatrixField& field);

/// A = P^{-1} dP/dzeta at every node.
ConnectionField connection(const MetricField& p);

/// R(P) = P_{zeta zetabar} - P_{zetabar} P^{-1} P_{zeta} at interior nodes, zero
/// on boundary rings (Dirichlet rows carry no equation there). The Cholesky
/// form used makes the value Hermitian by construction.
HermitianField curvature_residual(const MetricField& p);
HermitianField curvature_residual(const MetricField& p, const StencilTable& stencils);

/// sup-norm of dA/dzetabar; zero exactly when A is discretely holomorphic.
double holomorphy_defect(const ConnectionField& a);

/// sup over interior nodes of the operator norm.
double interior_sup_norm(const MatrixField& field);

}  // namespace fhm
