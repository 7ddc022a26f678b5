#include "fhm/reference.hpp"

#include <complex>

namespace fhm::reference {

namespace {

struct Partials {
    Mat r1, r2, t1, t2;
};

// Value at ring i (possibly -1, -2, ... on the disc, reflected through the origin).
Mat ring_value(const MatrixField& f, int i, int j)
{
    const Grid& g = f.grid();
    if (i < 0)
        return f.at(g.index(-1 - i, j + g.n_ang() / 2));
    return f.at(g.index(i, j));
}

Partials partials(const MatrixField& f, int i, int j)
{
    const Grid& g = f.grid();
    const double h = g.d_rad();
    const double dt = g.d_ang();
    const int last = g.n_rad() - 1;
    auto u = [&](int ii) { return ring_value(f, ii, j); };
    Partials p;
    if (i == 0 && g.kind() == DomainKind::annulus) {
        p.r1 = (-3.0 * u(0) + 4.0 * u(1) - u(2)) / (2.0 * h);
        p.r2 = (2.0 * u(0) - 5.0 * u(1) + 4.0 * u(2) - u(3)) / (h * h);
    } else if (i == last) {
        p.r1 = (3.0 * u(last) - 4.0 * u(last - 1) + u(last - 2)) / (2.0 * h);
        p.r2 = (2.0 * u(last) - 5.0 * u(last - 1) + 4.0 * u(last - 2) - u(last - 3)) / (h * h);
    } else {
        p.r1 = (u(i + 1) - u(i - 1)) / (2.0 * h);
        p.r2 = (u(i + 1) - 2.0 * u(i) + u(i - 1)) / (h * h);
    }
    const Mat up = f.at(g.index(i, j + 1));
    const Mat um = f.at(g.index(i, j - 1));
    const Mat uc = f.at(g.index(i, j));
    p.t1 = (up - um) / (2.0 * dt);
    p.t2 = (up - 2.0 * uc + um) / (dt * dt);
    return p;
}

Mat dz_at(const MatrixField& f, int i, int j)
{
    const Grid& g = f.grid();
    const Partials p = partials(f, i, j);
    const cplx iu(0.0, 1.0);
    if (g.kind() == DomainKind::annulus)
        return 0.5 * (p.r1 - iu * p.t1);
    const double r = g.radial(i);
    return 0.5 * std::exp(-iu * g.angle(j)) * (p.r1 - (iu / r) * p.t1);
}

Mat dzbar_at(const MatrixField& f, int i, int j)
{
    const Grid& g = f.grid();
    const Partials p = partials(f, i, j);
    const cplx iu(0.0, 1.0);
    if (g.kind() == DomainKind::annulus)
        return 0.5 * (p.r1 + iu * p.t1);
    const double r = g.radial(i);
    return 0.5 * std::exp(iu * g.angle(j)) * (p.r1 + (iu / r) * p.t1);
}

Mat dm_at(const MatrixField& f, int i, int j)
{
    const Grid& g = f.grid();
    const Partials p = partials(f, i, j);
    if (g.kind() == DomainKind::annulus)
        return 0.25 * (p.r2 + p.t2);
    const double r = g.radial(i);
    return 0.25 * (p.r2 + p.r1 / r + p.t2 / (r * r));
}

template <class Kernel>
MatrixField sweep(const MatrixField& f, Kernel kernel)
{
    const Grid& g = f.grid();
    MatrixField out(g, f.dim());
    for (int i = 0; i < g.n_rad(); ++i)
        for (int j = 0; j < g.n_ang(); ++j)
            out.at(g.index(i, j)) = kernel(f, i, j);
    return out;
}

}  // namespace

MatrixField d_zeta(const MatrixField& field)
{
    return sweep(field, dz_at);
}

MatrixField d_zetabar(const MatrixField& field)
{
    return sweep(field, dzbar_at);
}

MatrixField d_mixed(const MatrixField& field)
{
    return sweep(field, dm_at);
}

MatrixField curvature_residual(const MetricField& p)
{
    const Grid& g = p.grid();
    MatrixField out(g, p.dim());
    for (int i = 0; i < g.n_rad(); ++i) {
        if (g.is_boundary_ring(i))
            continue;
        for (int j = 0; j < g.n_ang(); ++j) {
            const Mat pinv = Mat(p.at(g.index(i, j))).inverse();
            out.at(g.index(i, j)) = dm_at(p, i, j) - dzbar_at(p, i, j) * pinv * dz_at(p, i, j);
        }
    }
    return out;
}

MatrixField apply_L(const MetricField& p, const MatrixField& h)
{
    p.require_compatible(h, "reference::apply_L");
    const Grid& g = p.grid();
    MatrixField out = h;
    for (int i = 0; i < g.n_rad(); ++i) {
        if (g.is_boundary_ring(i))
            continue;
        for (int j = 0; j < g.n_ang(); ++j) {
            const std::size_t k = g.index(i, j);
            const Mat a = Mat(p.at(k)).inverse() * dz_at(p, i, j);
            const Mat a_adj = a.adjoint();
            out.at(k) = dm_at(h, i, j) - dzbar_at(h, i, j) * a - a_adj * dz_at(h, i, j) + a_adj * Mat(h.at(k)) * a;
        }
    }
    return out;
}

}  // namespace fhm::reference
