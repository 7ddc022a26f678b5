#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fhm/dirichlet_solver.hpp"
#include "fhm/factorization.hpp"
#include "fhm/verification.hpp"
#include "support.hpp"

using namespace fhm;
using fhm::test::diag2;
using std::numbers::pi;

namespace {

Mat diag_phase(double a, double b)
{
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = std::polar(1.0, a);
    m(1, 1) = std::polar(1.0, b);
    return m;
}

/// |w|^{2 a} for diagonal a, as a metric on g.
MetricField power_metric(const Grid& g, const Mat& a)
{
    return MetricField(test::sample(g, static_cast<int>(a.rows()),
                                    [&](cplx z, cplx) { return test::diag_exp(a, 2.0 * z.real()); }));
}

}  // namespace

TEST_CASE("identity metric has the identity frame")
{
    const Grid g = test::annulus(8, 16);
    const std::vector<cplx> path{{-0.5, 0.0}, {-0.3, 0.4}, {-0.1, 2.0}};
    const FramePath fp = integrate_frame(MetricField::identity(g, 2), path, Mat::Identity(2, 2));
    REQUIRE(fp.frames.size() == path.size());
    for (const Mat& h : fp.frames)
        CHECK(h == Mat(Mat::Identity(2, 2)));
}

TEST_CASE("constant metric factors through its square root")
{
    Mat c(2, 2);
    c << 2.0, cplx(0.3, 0.4), cplx(0.3, -0.4), 1.5;
    const Grid g = test::disc(12, 24);
    const LocalFactorization lf = local_factorization(MetricField(MatrixField::constant(g, c)));
    CHECK(lf.base_node == g.index(0, 0));
    CHECK(sup_norm(lf.frame - MatrixField::constant(g, sqrt_pd(c))) < 1e-12);
    CHECK(lf.frame_defect < 1e-12);
}

TEST_CASE("radial path for an exponential metric")
{
    Mat a(2, 2);
    a << 0.4, cplx(0.1, 0.2), cplx(0.1, -0.2), -0.3;
    const Grid g = test::annulus(64, 64);
    const MetricField p(test::sample(g, 2, [&](cplx z, cplx) { return hermitian_exp(a, 2.0 * z.real()); }));
    std::vector<cplx> path;
    for (int i = 0; i < g.n_rad(); ++i)
        path.emplace_back(g.radial(i), 0.0);
    const FramePath fp = integrate_frame(p, path, hermitian_exp(a, path.front()));
    double worst = 0.0;
    for (std::size_t q = 0; q < path.size(); ++q)
        worst = std::max(worst, op_norm(fp.frames[q] - hermitian_exp(a, path[q])));
    CHECK(worst < 1e-8);
}

TEST_CASE("scalar monodromy phase")
{
    const Grid g = test::annulus(32, 256);
    const MetricField p = power_metric(g, test::scalar(0.3));
    const Monodromy m = monodromy(p, 0.5 * std::log(0.5));
    CHECK(std::abs(std::arg(m.unitary(0, 0)) - 0.6 * pi) < 1e-8);
    CHECK(m.defect <= 1e-8);
    CHECK(g.radial(m.base_ring) == doctest::Approx(0.5 * std::log(0.5)).epsilon(0.05));
}

TEST_CASE("unitary_log examples")
{
    CHECK(unitary_log(Mat::Identity(2, 2)) == Mat(Mat::Zero(2, 2)));
    const Mat l = unitary_log(diag_phase(pi / 2, -pi / 2));
    CHECK(op_norm(l - diag2(pi / 2, -pi / 2)) < 1e-14);

    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const Mat s = random_hermitian(3, seed);
        const Mat scaled = (2.5 / op_norm(s)) * s;
        const Mat u = hermitian_exp(scaled, cplx(0.0, 1.0));
        const Mat back = unitary_log(u);
        CHECK(op_norm(back - scaled) <= 1e-10);
        CHECK(op_norm(hermitian_exp(back, cplx(0.0, 1.0)) - u) <= 1e-10);
    }
}

TEST_CASE("unitary_log rejects ambiguous and non-unitary input")
{
    CHECK_THROWS_AS(unitary_log(diag_phase(pi, 0.0)), BranchAmbiguityError);
    CHECK_THROWS_AS(unitary_log(diag_phase(-pi + 1e-8, 0.0)), BranchAmbiguityError);
    CHECK_NOTHROW(unitary_log(diag_phase(pi - 1e-3, 0.0)));
    try {
        unitary_log(diag_phase(pi - 1e-7, 0.2));
        FAIL("expected BranchAmbiguityError");
    } catch (const BranchAmbiguityError& e) {
        CHECK(e.defect() == doctest::Approx(1e-7).epsilon(1e-3));
    }
    CHECK_THROWS_AS(unitary_log(diag2(1.0, 1.01)), InputError);
    CHECK_THROWS_AS(unitary_log(Mat::Identity(2, 3)), InputError);
}

TEST_CASE("hermitian_exp")
{
    CHECK(op_norm(hermitian_exp(diag2(1.0, -2.0), 0.5) - diag2(std::exp(0.5), std::exp(-1.0))) < 1e-15);
    const Mat s = random_hermitian(2, 9);
    CHECK(op_norm(hermitian_exp(s, 1.0) * hermitian_exp(s, -1.0) - Mat(Mat::Identity(2, 2))) < 1e-13);
    const Mat u = hermitian_exp(s, cplx(0.0, 1.0));
    CHECK(op_norm(u.adjoint() * u - Mat(Mat::Identity(2, 2))) < 1e-14);
}

TEST_CASE("power metric factors with a = 0.3 I")
{
    const Grid g = test::annulus(32, 128);
    const FactorizationResult f = factorize_annulus(power_metric(g, diag2(0.3, 0.3)));
    CHECK(op_norm(f.a - 0.3 * Mat(Mat::Identity(2, 2))) < 1e-8);
    CHECK(f.periodicity_defect < 1e-8);
    CHECK(f.monodromy_unitarity_defect < 1e-8);
    CHECK(sup_norm(reconstruct(f, g) - power_metric(g, diag2(0.3, 0.3))) < 1e-8);
}

TEST_CASE("constant metric factors with a = 0")
{
    Mat c(2, 2);
    c << 2.0, cplx(0.3, 0.4), cplx(0.3, -0.4), 1.5;
    const Grid g = test::annulus(16, 32);
    const FactorizationResult f = factorize_annulus(MetricField(MatrixField::constant(g, c)));
    CHECK(op_norm(f.a) < 1e-12);
    CHECK(sup_norm(f.k - MatrixField::constant(g, sqrt_pd(c))) < 1e-12);
}

TEST_CASE("reconstruct example")
{
    const Grid g = test::annulus(8, 8, 0.7, 1.0);
    FactorizationResult f{MatrixField::identity(g, 1), test::scalar(0.0)};
    CHECK(reconstruct(f, g) == MetricField::identity(g, 1));
    f.a = test::scalar(0.3);
    const MetricField p = reconstruct(f, g);
    CHECK(p.at(g.index(0, 3))(0, 0).real() == doctest::Approx(std::pow(0.7, 0.6)).epsilon(1e-14));
    CHECK(p.at(g.index(0, 3))(0, 0).real() == doctest::Approx(0.8074).epsilon(1e-4));
    CHECK(p.at(g.index(7, 0))(0, 0).real() == doctest::Approx(1.0));
    CHECK_THROWS_AS(reconstruct(f, test::annulus(8, 16, 0.7, 1.0)), InputError);
    f.a = diag2(0.3, 0.3);
    CHECK_THROWS_AS(reconstruct(f, g), InputError);
}

TEST_CASE("synthetic factorization round trip")
{
    const Mat a_true = diag2(0.25, -0.1);
    const SyntheticFlat syn = synthetic_flat({2, 1, 0.15, a_true, 7}, test::annulus(64, 128));
    const Grid& g = syn.metric.grid();
    const FactorizationResult f = factorize_annulus(syn.metric);
    Eigen::SelfAdjointEigenSolver<Mat> es(f.a);
    CHECK(es.eigenvalues()(0) == doctest::Approx(-0.1).epsilon(1e-5));
    CHECK(es.eigenvalues()(1) == doctest::Approx(0.25).epsilon(1e-5));
    CHECK(f.periodicity_defect <= kTolFact);
    CHECK(f.frame_defect <= kTolFact);
    CHECK(hermiticity_defect(f.a) == 0.0);
    CHECK(sup_norm(reconstruct(f, g) - syn.metric) <= kTolFact * sup_norm(syn.metric));
    CHECK(f.base_node == g.index(g.n_rad() / 2, 0));
}

TEST_CASE("factorization is independent of the base point")
{
    const SyntheticFlat syn = synthetic_flat({2, 1, 0.15, diag2(0.25, -0.1), 11}, test::annulus(64, 128));
    const Grid& g = syn.metric.grid();
    FactorOptions other;
    other.base_ring = 10;
    other.base_ang = 37;
    const FactorizationResult f0 = factorize_annulus(syn.metric);
    const FactorizationResult f1 = factorize_annulus(syn.metric, other);
    CHECK(f1.base_node == g.index(10, 37));
    const double scale = sup_norm(syn.metric);
    CHECK(sup_norm(reconstruct(f0, g) - reconstruct(f1, g)) <= 2.0 * kTolFact * scale);
    Eigen::SelfAdjointEigenSolver<Mat> e0(f0.a), e1(f1.a);
    CHECK((e0.eigenvalues() - e1.eigenvalues()).cwiseAbs().maxCoeff() <= 2.0 * kTolFact);
}

TEST_CASE("a non-flat perturbation is detected by path dependence")
{
    const SyntheticFlat syn = synthetic_flat({2, 1, 0.15, diag2(0.25, -0.1), 7}, test::annulus(64, 128));
    const Grid& g = syn.metric.grid();
    const double s1 = g.radial_min(), s2 = g.radial_max();
    MatrixField bumped(g, 2);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double s = g.radial(g.i_rad(k));
        const double th = g.angle(g.i_ang(k));
        const double wobble = 1.0 + 0.01 * 4.0 * (s - s1) * (s2 - s) / ((s2 - s1) * (s2 - s1)) * std::cos(th);
        Mat m = Mat(syn.metric.at(k));
        m(0, 0) *= wobble;
        bumped.at(k) = m;
    }
    const MetricField p(std::move(bumped));
    const FactorizationResult flat = factorize_annulus(syn.metric);
    const FactorizationResult curved = factorize_annulus(p);
    CHECK(curved.flatness_measure > 100.0 * flat.flatness_measure);
    CHECK(curved.periodicity_defect > kTolFact);
    CHECK(curved.periodicity_defect > 100.0 * flat.periodicity_defect);
    // The loop monodromy itself stays unitary: along one closed ring H^* H
    // and P solve the same transport equation whatever the curvature.
    CHECK(curved.monodromy_unitarity_defect <= kTolUnitary);

    FactorOptions strict;
    strict.frame.check_flatness = true;
    strict.frame.tol_flat_input = 1e-4;
    CHECK_THROWS_AS(factorize_annulus(p, strict), InputError);
}

TEST_CASE("disc local factorization of exp(Re w)")
{
    const Grid g = test::disc(64, 128);
    const MetricField p(test::sample(g, 1, [](cplx, cplx w) { return test::scalar(std::exp(w.real())); }));
    const LocalFactorization lf = local_factorization(p);
    double worst = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
        worst = std::max(worst, std::abs(lf.frame.at(k)(0, 0) - std::exp(0.5 * node_coordinates(g, k).w)));
    CHECK(worst < 5e-6);
    CHECK(lf.frame_defect < 5e-6);

    MatrixField f(g, 1);
    for (auto [c, ring] : g.boundary_rings())
        for (int j = 0; j < g.n_ang(); ++j)
            f.at(g.index(ring, j))(0, 0) = std::exp(std::cos(g.angle(j)));
    const MetricField oracle = scalar_oracle(restrict_boundary(f), g);
    CHECK(local_factorization(oracle).frame_defect < 1e-3);

    const Grid coarse = test::disc(32, 64);
    MatrixField fc(coarse, 1);
    for (int j = 0; j < coarse.n_ang(); ++j)
        fc.at(coarse.index(coarse.n_rad() - 1, j))(0, 0) = std::exp(std::cos(coarse.angle(j)));
    const BoundaryData data = restrict_boundary(fc);
    const LocalFactorization solved = local_factorization(solve(data, coarse).metric);
    const MetricField reference = scalar_oracle(data, coarse);
    double gap = 0.0;
    for (std::size_t k = 0; k < coarse.size(); ++k)
        gap = std::max(gap, std::abs(std::norm(solved.frame.at(k)(0, 0)) - reference.at(k)(0, 0).real()));
    CHECK(gap < 5e-3);
}

TEST_CASE("factorization input validation")
{
    CHECK_THROWS_AS(factorize_annulus(MetricField::identity(test::disc(8, 16), 1)), InputError);
    CHECK_THROWS_AS(local_factorization(MetricField::identity(test::annulus(8, 16), 1)), InputError);
    FactorOptions bad;
    bad.base_ring = 99;
    CHECK_THROWS_AS(factorize_annulus(MetricField::identity(test::annulus(8, 16), 1), bad), InputError);
    const std::vector<cplx> empty;
    CHECK_THROWS_AS(integrate_frame(MetricField::identity(test::annulus(8, 16), 1), empty, test::scalar(1.0)),
                    InputError);
}
