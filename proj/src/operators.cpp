#include "fhm/operators.hpp"

#include <algorithm>
#include <cmath>

namespace fhm {

void StencilRow::add(std::size_t node, cplx dz, double dm)
{
    for (int k = 0; k < count; ++k)
        if (entries[k].node == node) {
            entries[k].dz += dz;
            entries[k].dm += dm;
            return;
        }
    entries[count++] = {node, dz, dm};
}

namespace {

constexpr cplx kI(0.0, 1.0);

// Radial first- and second-derivative weights as (ring offset, d1, d2) triples.
struct RadialWeight {
    int offset;
    double d1;
    double d2;
};

std::vector<RadialWeight> radial_weights(const Grid& g, int i, double h)
{
    const double a = 1.0 / (2.0 * h);
    const double b = 1.0 / (h * h);
    if (i == 0 && g.kind() == DomainKind::annulus)
        return {{0, -3.0 * a, 2.0 * b}, {1, 4.0 * a, -5.0 * b}, {2, -a, 4.0 * b}, {3, 0.0, -b}};
    if (i == g.n_rad() - 1)
        return {{0, 3.0 * a, 2.0 * b}, {-1, -4.0 * a, -5.0 * b}, {-2, a, 4.0 * b}, {-3, 0.0, -b}};
    return {{0, 0.0, -2.0 * b}, {1, a, b}, {-1, -a, b}};
}

}  // namespace

StencilTable::StencilTable(const Grid& grid) : grid_(grid), rows_(grid.size())
{
    const int nr = grid.n_rad();
    const int na = grid.n_ang();
    const double h = grid.d_rad();
    const double dth = grid.d_ang();
    const double at = 1.0 / (2.0 * dth);
    const double bt = 1.0 / (dth * dth);
    const bool disc = grid.kind() == DomainKind::disc;

    for (int i = 0; i < nr; ++i) {
        const auto rw = radial_weights(grid, i, h);
        const double r = grid.radial(i);
        for (int j = 0; j < na; ++j) {
            StencilRow& row = rows_[grid.index(i, j)];
            // Radial neighbour index; ring -1 of the disc is ring 0 across the origin.
            auto rad_node = [&](int off) {
                const int ii = i + off;
                if (ii < 0)
                    return grid.index(-1 - ii, j + na / 2);
                return grid.index(ii, j);
            };
            const std::size_t jp = grid.index(i, j + 1);
            const std::size_t jm = grid.index(i, j - 1);
            if (!disc) {
                for (const auto& w : rw)
                    row.add(rad_node(w.offset), 0.5 * w.d1, 0.25 * w.d2);
                row.add(jp, -0.5 * kI * at, 0.25 * bt);
                row.add(jm, 0.5 * kI * at, 0.25 * bt);
                row.add(grid.index(i, j), 0.0, -0.5 * bt);
            } else {
                const cplx phase = std::polar(0.5, -grid.angle(j));
                for (const auto& w : rw)
                    row.add(rad_node(w.offset), phase * w.d1, 0.25 * (w.d2 + w.d1 / r));
                row.add(jp, phase * (-kI / r) * at, 0.25 * bt / (r * r));
                row.add(jm, phase * (kI / r) * at, 0.25 * bt / (r * r));
                row.add(grid.index(i, j), 0.0, -0.5 * bt / (r * r));
            }
        }
    }
}

namespace {

enum class Derivative { zeta, zetabar, mixed };

MatrixField apply_stencil(const MatrixField& field, Derivative which)
{
    const StencilTable table(field.grid());
    MatrixField out(field.grid(), field.dim());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(field.size()); ++k) {
        const auto node = static_cast<std::size_t>(k);
        // Stencil weights sum to zero, so differences against the centre
        // annihilate constants exactly.
        const Mat centre = field.at(node);
        Mat acc = Mat::Zero(field.dim(), field.dim());
        for (const auto& e : table.row(node).view()) {
            const cplx w = which == Derivative::zeta      ? e.dz
                           : which == Derivative::zetabar ? std::conj(e.dz)
                                                          : cplx(e.dm, 0.0);
            if (e.node != node && w != cplx(0.0, 0.0))
                acc += w * (Mat(field.at(e.node)) - centre);
        }
        out.at(node) = acc;
    }
    return out;
}

}  // namespace

MatrixField d_zeta(const MatrixField& field)
{
    return apply_stencil(field, Derivative::zeta);
}

MatrixField d_zetabar(const MatrixField& field)
{
    return apply_stencil(field, Derivative::zetabar);
}

MatrixField d_mixed(const MatrixField& field)
{
    return apply_stencil(field, Derivative::mixed);
}

ConnectionField connection(const MetricField& p)
{
    const MatrixField pz = d_zeta(p);
    MatrixField a(p.grid(), p.dim());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(p.size()); ++k) {
        const auto node = static_cast<std::size_t>(k);
        const Mat pn = p.at(node);
        a.at(node) = pn.llt().solve(Mat(pz.at(node)));
    }
    return ConnectionField(std::move(a));
}

HermitianField curvature_residual(const MetricField& p)
{
    return curvature_residual(p, StencilTable(p.grid()));
}

HermitianField curvature_residual(const MetricField& p, const StencilTable& stencils)
{
    const Grid& g = p.grid();
    const int n = p.dim();
    MatrixField out(g, n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(p.size()); ++k) {
        const auto node = static_cast<std::size_t>(k);
        if (g.is_boundary(node))
            continue;
        const Mat pc = p.at(node);
        Mat pz = Mat::Zero(n, n);
        Mat pm = Mat::Zero(n, n);
        for (const auto& e : stencils.row(node).view()) {
            if (e.node == node)
                continue;
            const Mat pe = Mat(p.at(e.node)) - pc;
            pz += e.dz * pe;
            pm += e.dm * pe;
        }
        // P_zetabar P^{-1} P_zeta = Y^* Y with Y = L^{-1} P_zeta, P = L L^*.
        const Eigen::LLT<Mat> llt(pc);
        const Mat y = llt.matrixL().solve(pz);
        out.at(node) = pm - y.adjoint() * y;
    }
    return HermitianField(std::move(out));
}

double holomorphy_defect(const ConnectionField& a)
{
    return sup_norm(d_zetabar(a));
}

double interior_sup_norm(const MatrixField& field)
{
    const Grid& g = field.grid();
    double best = 0.0;
#pragma omp parallel for schedule(static) reduction(max : best)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(field.size()); ++k) {
        const auto node = static_cast<std::size_t>(k);
        if (!g.is_boundary(node))
            best = std::max(best, op_norm(field.at(node)));
    }
    return best;
}

}  // namespace fhm
