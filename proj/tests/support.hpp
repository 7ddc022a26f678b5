#pragma once

#include <cmath>
#include <functional>

#include "fhm/fields.hpp"

namespace fhm::test {

inline Grid annulus(int n_rad, int n_ang, double r1 = 0.5, double r2 = 1.0)
{
    return Grid(DomainSpec::annulus(r1, r2), n_rad, n_ang);
}

inline Grid disc(int n_rad, int n_ang, double r = 1.0)
{
    return Grid(DomainSpec::disc(r), n_rad, n_ang);
}

/// Samples f(zeta, w) at every node.
inline MatrixField sample(const Grid& g, int dim, const std::function<Mat(cplx zeta, cplx w)>& f)
{
    MatrixField out(g, dim);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const NodeCoordinates c = node_coordinates(g, k);
        out.at(k) = f(c.zeta, c.w);
    }
    return out;
}

inline Mat diag2(double a, double b)
{
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

inline Mat scalar(cplx x)
{
    Mat m(1, 1);
    m(0, 0) = x;
    return m;
}

/// exp(s a) for diagonal a.
inline Mat diag_exp(const Mat& a, double s)
{
    Mat m = Mat::Zero(a.rows(), a.cols());
    for (Eigen::Index k = 0; k < a.rows(); ++k)
        m(k, k) = std::exp(s * a(k, k).real());
    return m;
}

/// sup over interior nodes of ||x - y||.
inline double interior_gap(const MatrixField& x, const MatrixField& y)
{
    const Grid& g = x.grid();
    double worst = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (!g.is_boundary(k))
            worst = std::max(worst, op_norm(Mat(x.at(k)) - Mat(y.at(k))));
    return worst;
}

}  // namespace fhm::test
