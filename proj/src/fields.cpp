#include "fhm/fields.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

namespace fhm {

MatrixField::MatrixField(Grid grid, int dim) : grid_(std::move(grid)), dim_(dim)
{
    if (dim < 1 || dim > kMaxDim)
        throw InputError("field: fiber dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    values_.assign(grid_.size() * stride(), cplx(0.0, 0.0));
}

MatrixField::MatrixField(Grid grid, int dim, std::vector<cplx> values) : MatrixField(std::move(grid), dim)
{
    if (values.size() != values_.size())
        throw InputError("field: expected " + std::to_string(values_.size()) + " complex entries, got " +
                         std::to_string(values.size()));
    values_ = std::move(values);
}

MatrixField MatrixField::constant(const Grid& grid, const Mat& value)
{
    if (value.rows() != value.cols())
        throw InputError("field: constant value must be square");
    MatrixField f(grid, static_cast<int>(value.rows()));
    for (std::size_t k = 0; k < f.size(); ++k)
        f.at(k) = value;
    return f;
}

MatrixField MatrixField::identity(const Grid& grid, int dim)
{
    return constant(grid, Mat::Identity(dim, dim));
}

void MatrixField::require_compatible(const MatrixField& other, const char* what) const
{
    if (!(grid_ == other.grid_) || dim_ != other.dim_)
        throw InputError(std::string(what) + ": grid or fiber dimension mismatch");
}

void MatrixField::hermitize()
{
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(size()); ++k) {
        auto x = at(static_cast<std::size_t>(k));
        const Mat h = 0.5 * (Mat(x) + Mat(x.adjoint()));
        x = h;
    }
}

HermitianField::HermitianField(MatrixField field) : MatrixField(std::move(field))
{
    for (std::size_t k = 0; k < size(); ++k) {
        const Mat x = at(k);
        if (hermiticity_defect(x) > kTolHerm * std::max(op_norm(x), 1e-300))
            throw InputError("field: value at node " + std::to_string(k) + " is not Hermitian");
    }
    hermitize();
}

MetricField::MetricField(MatrixField field) : HermitianField(std::move(field))
{
    for (std::size_t k = 0; k < size(); ++k)
        if (!(lambda_min(at(k)) > 0.0))
            throw InputError("metric: value at node " + std::to_string(k) + " is not positive definite");
}

std::vector<Circle> BoundaryData::circles() const
{
    if (domain.kind == DomainKind::annulus)
        return {Circle::inner, Circle::outer};
    return {Circle::outer};
}

void BoundaryData::validate_shape() const
{
    domain.validate();
    if (dim < 1 || dim > kMaxDim)
        throw InputError("boundary: fiber dimension out of range");
    if (n_ang < 8 || n_ang % 2 != 0)
        throw InputError("boundary: sample count must be even and at least 8");
    const std::size_t expected = static_cast<std::size_t>(n_ang) * dim * dim;
    if (outer.size() != expected)
        throw InputError("boundary: outer circle has wrong sample count");
    if (domain.kind == DomainKind::annulus ? inner.size() != expected : !inner.empty())
        throw InputError("boundary: inner circle has wrong sample count");
    for (Circle c : circles())
        for (int j = 0; j < n_ang; ++j) {
            const Mat x = sample(c, j);
            if (!x.allFinite())
                throw InputError("boundary: non-finite sample");
            if (hermiticity_defect(x) > kTolHerm * std::max(op_norm(x), 1e-300))
                throw InputError("boundary: sample " + std::to_string(j) + " is not Hermitian");
        }
}

void BoundaryData::validate_positive(double rel_floor) const
{
    validate_shape();
    for (Circle c : circles())
        for (int j = 0; j < n_ang; ++j) {
            const Mat x = sample(c, j);
            if (!(lambda_min(x) > rel_floor * op_norm(x)))
                throw InputError(std::string("boundary: sample ") + std::to_string(j) + " on the " +
                                 (c == Circle::inner ? "inner" : "outer") + " circle is not positive definite");
        }
}

void BoundaryData::require_grid(const Grid& grid) const
{
    if (!(grid.domain() == domain))
        throw InputError("boundary: domain differs from the grid domain");
    if (grid.n_ang() != n_ang)
        throw InputError("boundary: " + std::to_string(n_ang) + " samples per circle but the grid has " +
                         std::to_string(grid.n_ang()) + " angular nodes");
}

double op_norm(const Mat& x)
{
    if (x.size() == 0)
        return 0.0;
    Eigen::JacobiSVD<Mat> svd(x);
    return svd.singularValues()(0);
}

double hermiticity_defect(const Mat& x)
{
    return op_norm(x - Mat(x.adjoint()));
}

namespace {

RVec hermitian_eigenvalues(const Mat& x)
{
    const Mat h = 0.5 * (x + Mat(x.adjoint()));
    Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

}  // namespace

double lambda_min(const Mat& x)
{
    return hermitian_eigenvalues(x)(0);
}

double lambda_max(const Mat& x)
{
    const RVec ev = hermitian_eigenvalues(x);
    return ev(ev.size() - 1);
}

Mat sqrt_pd(const Mat& x)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(Mat(0.5 * (x + Mat(x.adjoint()))));
    const RVec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

Mat inv_sqrt_pd(const Mat& x)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(Mat(0.5 * (x + Mat(x.adjoint()))));
    const RVec ev = es.eigenvalues().cwiseSqrt().cwiseInverse();
    return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

double sup_norm(const MatrixField& field)
{
    double best = 0.0;
#pragma omp parallel for schedule(static) reduction(max : best)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(field.size()); ++k)
        best = std::max(best, op_norm(field.at(static_cast<std::size_t>(k))));
    return best;
}

double min_eigenvalue(const MatrixField& field)
{
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < field.size(); ++k) {
        const Mat x = field.at(k);
        if (hermiticity_defect(x) > kTolHerm * std::max(op_norm(x), 1e-300))
            throw InputError("min_eigenvalue: value at node " + std::to_string(k) + " is not Hermitian");
        best = std::min(best, lambda_min(x));
    }
    return best;
}

BoundaryData restrict_boundary(const MatrixField& field)
{
    const Grid& g = field.grid();
    BoundaryData out{g.domain(), field.dim(), g.n_ang(), {}, {}};
    for (auto [circle, ring] : g.boundary_rings()) {
        auto& s = out.samples(circle);
        s.reserve(static_cast<std::size_t>(g.n_ang()) * field.stride());
        for (int j = 0; j < g.n_ang(); ++j) {
            auto x = field.at(g.index(ring, j));
            s.insert(s.end(), x.data(), x.data() + field.stride());
        }
    }
    return out;
}

void embed_boundary(const BoundaryData& data, MatrixField& field)
{
    const Grid& g = field.grid();
    data.require_grid(g);
    if (data.dim != field.dim())
        throw InputError("embed_boundary: fiber dimension mismatch");
    for (auto [circle, ring] : g.boundary_rings())
        for (int j = 0; j < g.n_ang(); ++j)
            field.at(g.index(ring, j)) = data.sample(circle, j);
}

MatrixField pointwise_product(const MatrixField& x, const MatrixField& y)
{
    x.require_compatible(y, "pointwise_product");
    MatrixField out(x.grid(), x.dim());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(x.size()); ++k) {
        const auto n = static_cast<std::size_t>(k);
        out.at(n) = Mat(x.at(n)) * Mat(y.at(n));
    }
    return out;
}

MatrixField pointwise_inverse(const MatrixField& x)
{
    MatrixField out(x.grid(), x.dim());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(x.size()); ++k) {
        const auto n = static_cast<std::size_t>(k);
        out.at(n) = Mat(x.at(n)).partialPivLu().inverse();
    }
    return out;
}

MatrixField operator-(const MatrixField& a, const MatrixField& b)
{
    a.require_compatible(b, "field difference");
    MatrixField out = a;
    auto dst = out.values();
    auto src = b.values();
    for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] -= src[i];
    return out;
}

MatrixField operator+(const MatrixField& a, const MatrixField& b)
{
    a.require_compatible(b, "field sum");
    MatrixField out = a;
    auto dst = out.values();
    auto src = b.values();
    for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] += src[i];
    return out;
}

MatrixField operator*(double s, const MatrixField& a)
{
    MatrixField out = a;
    for (auto& v : out.values())
        v *= s;
    return out;
}

namespace {

/// Cubic Lagrange weights on nodes at offsets -1, 0, 1, 2 from the cell origin.
std::array<double, 4> cubic_weights(double t)
{
    return {-t * (t - 1.0) * (t - 2.0) / 6.0, (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
            -(t + 1.0) * t * (t - 2.0) / 2.0, (t + 1.0) * t * (t - 1.0) / 6.0};
}

double snap(double x)
{
    const double r = std::round(x);
    return std::abs(x - r) < 1e-10 ? r : x;
}

}  // namespace

Mat Interpolator::operator()(cplx point) const
{
    const MatrixField& f = *field_;
    const Grid& g = f.grid();
    const int nr = g.n_rad();
    const int na = g.n_ang();

    double x = 0.0;
    double theta = 0.0;
    if (g.chart() == Chart::log_polar) {
        const double lo = g.radial_min();
        const double hi = g.radial_max();
        const double tol = 1e-12 * (hi - lo);
        if (!(point.real() >= lo - tol && point.real() <= hi + tol))
            throw InputError("interpolate: sigma outside the annulus chart");
        x = std::clamp((point.real() - lo) / g.d_rad(), 0.0, static_cast<double>(nr - 1));
        theta = point.imag();
    } else {
        const double r = std::abs(point);
        if (!(r <= g.domain().r_outer * (1.0 + 1e-12)))
            throw InputError("interpolate: point outside the disc");
        x = std::min(r / g.d_rad() - 0.5, static_cast<double>(nr - 1));
        theta = std::arg(point);
    }
    x = snap(x);
    double y = snap(std::fmod(theta / g.d_ang(), static_cast<double>(na)));
    if (y < 0.0)
        y += na;

    // Radial stencil k-1..k+2; clamped at the outer end (and the inner end of
    // the annulus). On the disc, negative rings continue across the origin.
    int kr = static_cast<int>(std::floor(x));
    kr = std::min(kr, nr - 3);
    if (g.chart() == Chart::log_polar)
        kr = std::max(kr, 1);
    const auto wr = cubic_weights(x - kr);

    const int ka = static_cast<int>(std::floor(y));
    const auto wa = cubic_weights(y - ka);

    Mat out = Mat::Zero(f.dim(), f.dim());
    for (int m = 0; m < 4; ++m) {
        if (wr[m] == 0.0)
            continue;
        int ring = kr - 1 + m;
        int shift = 0;
        if (ring < 0) {
            ring = -1 - ring;
            shift = na / 2;
        }
        Mat row = Mat::Zero(f.dim(), f.dim());
        for (int q = 0; q < 4; ++q)
            if (wa[q] != 0.0)
                row += wa[q] * Mat(f.at(g.index(ring, ka - 1 + q + shift)));
        out += wr[m] * row;
    }
    return out;
}

Mat interpolate(const MatrixField& field, cplx point)
{
    return Interpolator(field)(point);
}

}  // namespace fhm
