#include <doctest.h>

#include <random>

#include "fhm/fields.hpp"
#include "fhm/verification.hpp"
#include "support.hpp"

using namespace fhm;
using fhm::test::diag2;

namespace {

Mat m2(cplx a, cplx b, cplx c, cplx d)
{
    Mat m(2, 2);
    m << a, b, c, d;
    return m;
}

}  // namespace

TEST_CASE("sup_norm")
{
    const Grid g = test::annulus(8, 8);
    CHECK(sup_norm(MatrixField::zero(g, 2)) == 0.0);
    CHECK(sup_norm(MatrixField::constant(g, diag2(2, 1))) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(sup_norm(MatrixField::constant(g, m2(0, 3, 0, 0))) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("min_eigenvalue")
{
    const Grid g = test::annulus(8, 8);
    CHECK(min_eigenvalue(MatrixField::constant(g, diag2(4, 1))) == doctest::Approx(1.0));
    CHECK(min_eigenvalue(MatrixField::identity(g, 3)) == doctest::Approx(1.0));
    CHECK(min_eigenvalue(MatrixField::constant(g, m2(2, 1, 1, 2))) == doctest::Approx(1.0));
    CHECK_THROWS_AS(min_eigenvalue(MatrixField::constant(g, m2(2, 1, 0, 2))), InputError);
}

TEST_CASE("field construction validates shape and type invariants")
{
    const Grid g = test::annulus(8, 8);
    CHECK_THROWS_AS(MatrixField(g, 0), InputError);
    CHECK_THROWS_AS(MatrixField(g, kMaxDim + 1), InputError);
    CHECK_THROWS_AS(MatrixField(g, 2, std::vector<cplx>(10)), InputError);
    CHECK_THROWS_AS(HermitianField(MatrixField::constant(g, m2(1, 1, 0, 1))), InputError);
    CHECK_NOTHROW(HermitianField(MatrixField::constant(g, diag2(1, -1))));
    CHECK_THROWS_AS(MetricField(MatrixField::constant(g, diag2(1, -1))), InputError);
    CHECK_THROWS_AS(MetricField(MatrixField::constant(g, diag2(1, 0))), InputError);
    CHECK_NOTHROW(MetricField(MatrixField::constant(g, diag2(1, 1e-6))));
}

TEST_CASE("Hermitian construction symmetrizes exactly")
{
    const Grid g = test::annulus(8, 8);
    Mat x = m2(1, cplx(0.5, 0.25), cplx(0.5, -0.25 + 1e-13), 2);
    const HermitianField h(MatrixField::constant(g, x));
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Mat v = h.at(k);
        CHECK(v == Mat(v.adjoint()));
    }
}

TEST_CASE("restrict_boundary")
{
    const Grid a = test::annulus(8, 16);
    const BoundaryData id = restrict_boundary(MetricField::identity(a, 2));
    CHECK(id.inner.size() == 16u * 4u);
    for (Circle c : id.circles())
        for (int j = 0; j < 16; ++j)
            CHECK(Mat(id.sample(c, j)) == Mat(Mat::Identity(2, 2)));

    MatrixField f = MatrixField::identity(a, 2);
    f.at(a.index(7, 0)) = m2(3, 1, 1, 2);
    CHECK(Mat(restrict_boundary(f).sample(Circle::outer, 0)) == m2(3, 1, 1, 2));

    const Grid d = test::disc(8, 16);
    const BoundaryData db = restrict_boundary(MatrixField::identity(d, 1));
    CHECK(db.inner.empty());
    CHECK(db.outer.size() == 16u);
    CHECK(db.circles().size() == 1u);
}

TEST_CASE("embed then restrict is the identity on boundary data")
{
    const Grid g = test::annulus(9, 12);
    BoundaryData b = restrict_boundary(MatrixField::identity(g, 2));
    std::mt19937_64 rng(5);
    for (Circle c : b.circles())
        for (int j = 0; j < 12; ++j) {
            const Mat x = random_hermitian(2, rng());
            b.sample(c, j) = x * x + Mat(Mat::Identity(2, 2));
        }
    MatrixField f = MatrixField::zero(g, 2);
    embed_boundary(b, f);
    CHECK(restrict_boundary(f) == b);
}

TEST_CASE("boundary data validation")
{
    const Grid g = test::annulus(8, 8);
    BoundaryData b = restrict_boundary(MetricField::identity(g, 2));
    CHECK_NOTHROW(b.validate_shape());
    CHECK_NOTHROW(b.validate_positive());
    b.sample(Circle::inner, 3) = diag2(1, -1);
    CHECK_NOTHROW(b.validate_shape());
    CHECK_THROWS_AS(b.validate_positive(), InputError);
    b.sample(Circle::inner, 3) = m2(1, 1, 0, 1);
    CHECK_THROWS_AS(b.validate_shape(), InputError);
    BoundaryData short_b = restrict_boundary(MetricField::identity(g, 2));
    short_b.outer.pop_back();
    CHECK_THROWS_AS(short_b.validate_shape(), InputError);
    CHECK_THROWS_AS(restrict_boundary(MetricField::identity(test::annulus(8, 10), 2)).require_grid(g), InputError);
}

TEST_CASE("sup_norm is submultiplicative under pointwise products")
{
    const Grid g = test::annulus(8, 12);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        MatrixField x(g, 3), y(g, 3);
        for (std::size_t k = 0; k < g.size(); ++k) {
            x.at(k) = random_hermitian(3, seed * 1000 + k);
            y.at(k) = random_hermitian(3, seed * 1000 + k + 500) * cplx(0.3, 0.7);
        }
        CHECK(sup_norm(pointwise_product(x, y)) <= sup_norm(x) * sup_norm(y) * (1 + 1e-14));
    }
}

TEST_CASE("sup_norm of the inverse is the reciprocal of the smallest eigenvalue")
{
    const Grid g = test::annulus(8, 12);
    const MatrixField p = test::sample(g, 2, [](cplx z, cplx) {
        const double s = z.real();
        return Mat(m2(2 + s, 0.3 * std::exp(cplx(0, z.imag())), 0.3 * std::exp(cplx(0, -z.imag())), 1 - 0.5 * s));
    });
    const MetricField pm(p);
    CHECK(sup_norm(pointwise_inverse(pm)) == doctest::Approx(1.0 / min_eigenvalue(pm)).epsilon(1e-12));
}

TEST_CASE("interpolation reproduces nodes, constants and linears")
{
    const Grid g = test::annulus(10, 16);
    const MatrixField f = test::sample(g, 2, [](cplx z, cplx w) {
        return Mat(m2(z.real() * z.real(), w, std::conj(w), std::cos(3 * z.imag())));
    });
    for (std::size_t k = 0; k < g.size(); k += 7)
        CHECK(Mat(interpolate(f, node_coordinates(g, k).zeta)) == Mat(f.at(k)));

    const MatrixField c = MatrixField::constant(g, m2(1, 2, 3, 4));
    CHECK(op_norm(interpolate(c, {-0.3, 1.234}) - m2(1, 2, 3, 4)) < 1e-14);

    const MatrixField lin = test::sample(g, 1, [](cplx z, cplx) { return test::scalar(3.0 * z.real() + 1.0); });
    const double s_mid = 0.5 * (g.radial(3) + g.radial(4));
    const cplx mean = 0.5 * (lin.at(g.index(3, 5))(0, 0) + lin.at(g.index(4, 5))(0, 0));
    CHECK(std::abs(interpolate(lin, {s_mid, g.angle(5)})(0, 0) - mean) < 1e-14);

    CHECK_THROWS_AS(interpolate(c, {0.1, 0.0}), InputError);
    CHECK_THROWS_AS(interpolate(c, {-1.0, 0.0}), InputError);
}

TEST_CASE("interpolation is periodic in theta")
{
    const Grid g = test::annulus(10, 16);
    const MatrixField f = test::sample(g, 1, [](cplx z, cplx) { return test::scalar(std::sin(z.imag()) + z.real()); });
    const cplx p(-0.4, 0.77);
    CHECK(std::abs(interpolate(f, p)(0, 0) - interpolate(f, p + cplx(0, 2 * std::numbers::pi))(0, 0)) < 1e-12);
    CHECK(std::abs(interpolate(f, p)(0, 0) - interpolate(f, p - cplx(0, 2 * std::numbers::pi))(0, 0)) < 1e-12);
}

TEST_CASE("disc interpolation converges across the origin")
{
    auto err = [](int n) {
        const Grid g = test::disc(n, 2 * n);
        const MatrixField f = test::sample(g, 1, [](cplx, cplx w) { return test::scalar(std::exp(w.real() - 0.5 * w.imag())); });
        double worst = 0.0;
        for (cplx p : {cplx(0.0, 0.0), cplx(0.01, -0.003), cplx(-0.2, 0.1), cplx(0.5, 0.5)})
            worst = std::max(worst, std::abs(interpolate(f, p)(0, 0) - std::exp(p.real() - 0.5 * p.imag())));
        return worst;
    };
    const double e1 = err(16), e2 = err(32);
    CHECK(e2 < 1e-4);
    CHECK(e1 / e2 > 6.0);
}

TEST_CASE("field arithmetic checks compatibility")
{
    const MatrixField a = MatrixField::identity(test::annulus(8, 8), 2);
    const MatrixField b = MatrixField::identity(test::annulus(8, 10), 2);
    const MatrixField c = MatrixField::identity(test::annulus(8, 8), 3);
    CHECK_THROWS_AS(a + b, InputError);
    CHECK_THROWS_AS(a - c, InputError);
    CHECK(sup_norm(a + a - 2.0 * a) == 0.0);
}
