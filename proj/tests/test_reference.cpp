#include <doctest.h>

#include <omp.h>

#include "fhm/linear_elliptic.hpp"
#include "fhm/reference.hpp"
#include "fhm/verification.hpp"
#include "support.hpp"

using namespace fhm;

namespace {

double rel_gap(const MatrixField& fast, const MatrixField& slow)
{
    return sup_norm(fast - slow) / std::max(1.0, sup_norm(slow));
}

std::vector<MetricField> metrics()
{
    std::vector<MetricField> out;
    out.push_back(synthetic_flat({2, 1, 0.15, test::diag2(0.25, -0.1), 3}, test::annulus(20, 36)).metric);
    out.push_back(synthetic_flat({3, 2, 0.02, {}, 4}, test::annulus(17, 24, 0.3, 2.0)).metric);
    const Grid d = test::disc(15, 28, 1.5);
    out.push_back(MetricField(test::sample(d, 2, [](cplx, cplx w) {
        Mat m(2, 2);
        m << std::exp(w.real()), 0.3 * w, 0.3 * std::conj(w), 1.0 + std::norm(w);
        return m;
    })));
    return out;
}

}  // namespace

TEST_CASE("parallel derivatives match the serial reference")
{
    for (const MetricField& p : metrics()) {
        const MatrixField x = p + random_psd_field(p.grid(), p.dim(), 5, false);
        CHECK(rel_gap(d_zeta(x), reference::d_zeta(x)) < 1e-12);
        CHECK(rel_gap(d_zetabar(x), reference::d_zetabar(x)) < 1e-12);
        CHECK(rel_gap(d_mixed(x), reference::d_mixed(x)) < 1e-12);
    }
}

TEST_CASE("parallel curvature residual matches the serial reference")
{
    for (const MetricField& p : metrics())
        CHECK(rel_gap(curvature_residual(p), reference::curvature_residual(p)) < 1e-11);
}

TEST_CASE("parallel L matches the serial reference")
{
    for (const MetricField& p : metrics()) {
        const HermitianField h = random_psd_field(p.grid(), p.dim(), 8, false);
        CHECK(rel_gap(apply_L(LinearizedContext(p), h), reference::apply_L(p, h)) < 1e-11);
    }
}

TEST_CASE("kernels do not depend on the thread count")
{
    const MetricField p = metrics().front();
    const HermitianField h = random_psd_field(p.grid(), p.dim(), 2);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const MatrixField r1 = curvature_residual(p);
    const MatrixField l1 = apply_L(LinearizedContext(p), h);
    omp_set_num_threads(4);
    const MatrixField r4 = curvature_residual(p);
    const MatrixField l4 = apply_L(LinearizedContext(p), h);
    omp_set_num_threads(saved);
    CHECK(r1 == r4);
    CHECK(l1 == l4);
}
