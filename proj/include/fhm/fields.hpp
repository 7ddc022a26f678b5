#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fhm/grid.hpp"
#include "fhm/types.hpp"

namespace fhm {

/// Relative Hermiticity tolerance: ||X - X*|| <= tol_herm * ||X||.
inline constexpr double kTolHerm = 1e-10;

/// One complex n x n matrix per grid node, stored node-major, column-major
/// within a node.
class MatrixField {
public:
    MatrixField(Grid grid, int dim);
    MatrixField(Grid grid, int dim, std::vector<cplx> values);

    static MatrixField constant(const Grid& grid, const Mat& value);
    static MatrixField identity(const Grid& grid, int dim);
    static MatrixField zero(const Grid& grid, int dim) { return MatrixField(grid, dim); }

    const Grid& grid() const noexcept { return grid_; }
    int dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return grid_.size(); }
    std::size_t stride() const noexcept { return static_cast<std::size_t>(dim_) * dim_; }

    ConstMatMap at(std::size_t node) const noexcept { return {values_.data() + node * stride(), dim_, dim_}; }
    MatMap at(std::size_t node) noexcept { return {values_.data() + node * stride(), dim_, dim_}; }
    Mat value(std::size_t node) const { return at(node); }

    std::span<const cplx> values() const noexcept { return values_; }
    std::span<cplx> values() noexcept { return values_; }

    /// Throws InputError unless grids and fiber dimensions agree.
    void require_compatible(const MatrixField& other, const char* what) const;

    /// X <- (X + X*) / 2 at every node.
    void hermitize();

    friend bool operator==(const MatrixField&, const MatrixField&) = default;

private:
    Grid grid_;
    int dim_;
    std::vector<cplx> values_;
};

/// Matrix field whose values are Hermitian to kTolHerm. Construction
/// validates, then symmetrizes exactly.
class HermitianField : public MatrixField {
public:
    explicit HermitianField(MatrixField field);
    static HermitianField zero(const Grid& grid, int dim) { return HermitianField(MatrixField(grid, dim)); }

protected:
    struct Trusted {};
    HermitianField(MatrixField field, Trusted) : MatrixField(std::move(field)) {}
};

/// Hermitian positive-definite matrix field (a hermitian metric).
class MetricField : public HermitianField {
public:
    explicit MetricField(MatrixField field);
    static MetricField identity(const Grid& grid, int dim) { return MetricField(MatrixField::identity(grid, dim)); }
};

/// Samples of positive matrices on each boundary circle of a domain.
struct BoundaryData {
    DomainSpec domain;
    int dim = 1;
    int n_ang = 0;
    std::vector<cplx> inner;  ///< empty on the disc
    std::vector<cplx> outer;

    std::vector<Circle> circles() const;
    std::vector<cplx>& samples(Circle c) { return c == Circle::inner ? inner : outer; }
    const std::vector<cplx>& samples(Circle c) const { return c == Circle::inner ? inner : outer; }
    ConstMatMap sample(Circle c, int j) const
    {
        return {samples(c).data() + static_cast<std::size_t>(j) * dim * dim, dim, dim};
    }
    MatMap sample(Circle c, int j)
    {
        return {samples(c).data() + static_cast<std::size_t>(j) * dim * dim, dim, dim};
    }

    /// Layout and Hermiticity checks; positivity is checked separately.
    void validate_shape() const;
    /// Every sample must satisfy lambda_min > rel_floor * ||sample||.
    void validate_positive(double rel_floor = 1e-12) const;
    /// Compatible with a grid's domain and angular resolution.
    void require_grid(const Grid& grid) const;

    friend bool operator==(const BoundaryData&, const BoundaryData&) = default;
};

// Per-matrix helpers.
double op_norm(const Mat& x);
double hermiticity_defect(const Mat& x);
/// Smallest eigenvalue of the Hermitian part.
double lambda_min(const Mat& x);
double lambda_max(const Mat& x);
/// Positive square root of a Hermitian positive matrix.
Mat sqrt_pd(const Mat& x);
Mat inv_sqrt_pd(const Mat& x);

double sup_norm(const MatrixField& field);
/// Minimum over nodes of lambda_min. Throws InputError on a non-Hermitian value.
double min_eigenvalue(const MatrixField& field);
BoundaryData restrict_boundary(const MatrixField& field);
/// Writes boundary samples into the boundary nodes of a field.
void embed_boundary(const BoundaryData& data, MatrixField& field);

/// Pointwise X(node) * Y(node).
MatrixField pointwise_product(const MatrixField& x, const MatrixField& y);
/// Pointwise inverse of an invertible field.
MatrixField pointwise_inverse(const MatrixField& x);
MatrixField operator-(const MatrixField& a, const MatrixField& b);
MatrixField operator+(const MatrixField& a, const MatrixField& b);
MatrixField operator*(double s, const MatrixField& a);

/// Entrywise piecewise-bicubic interpolation at a chart point. Periodic in
/// theta, one-sided at the radial ends. On the disc the point is w and the
/// radial stencil continues across the origin. Throws InputError outside the
/// domain.
Mat interpolate(const MatrixField& field, cplx point);

/// Same interpolation with a reusable evaluator. Exact at nodes and
/// reproduces cubics along each coordinate.
class Interpolator {
public:
    explicit Interpolator(const MatrixField& field) : field_(&field) {}
    Mat operator()(cplx point) const;

private:
    const MatrixField* field_;
};

}  // namespace fhm
