#include "fhm/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "fhm/factorization.hpp"
#include "fhm/operators.hpp"

namespace fhm {

ScalarField s_field(const MetricField& p, const HermitianField& h)
{
    p.require_compatible(h, "s_field");
    ScalarField out{p.grid(), std::vector<double>(p.size())};
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(p.size()); ++k) {
        const auto node = static_cast<std::size_t>(k);
        const Mat s = inv_sqrt_pd(p.at(node));
        out.values[node] = lambda_max(s * Mat(h.at(node)) * s);
    }
    return out;
}

MaxPrincipleReport max_principle_check(const LinearizedContext& ctx, const HermitianField& h, double tol_mp,
                                       double tol_psd)
{
    const MetricField& p = ctx.metric();
    p.require_compatible(h, "max_principle_check");
    const Grid& g = p.grid();

    MatrixField lh(g, h.dim());
    detail::apply_L_interior(ctx, h, lh);
    double min_ev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < g.size(); ++k)
        if (!g.is_boundary(k))
            min_ev = std::min(min_ev, lambda_min(lh.at(k)));

    const ScalarField s = s_field(p, h);
    MaxPrincipleReport rep;
    rep.min_lh_eigenvalue = min_ev;
    rep.applicable = min_ev >= -tol_psd;
    rep.max_all = -std::numeric_limits<double>::infinity();
    rep.max_boundary = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < g.size(); ++k) {
        rep.max_all = std::max(rep.max_all, s.values[k]);
        if (g.is_boundary(k))
            rep.max_boundary = std::max(rep.max_boundary, s.values[k]);
    }
    rep.gap = rep.max_all - rep.max_boundary;
    rep.holds = rep.gap <= tol_mp;
    return rep;
}

MaxPrincipleReport max_principle_check(const MetricField& p, const HermitianField& h, double tol_mp, double tol_psd)
{
    return max_principle_check(LinearizedContext(p), h, tol_mp, tol_psd);
}

namespace {

/// Forward DFT over the angular index, X_k = sum_j x_j e^{-2 pi i k j / n}.
class AngularDft {
public:
    explicit AngularDft(int n) : n_(n), roots_(static_cast<std::size_t>(n))
    {
        for (int j = 0; j < n; ++j)
            roots_[static_cast<std::size_t>(j)] = std::polar(1.0, -2.0 * std::numbers::pi * j / n);
    }

    std::vector<cplx> forward(const std::vector<double>& x) const
    {
        std::vector<cplx> out(static_cast<std::size_t>(n_));
        for (int k = 0; k < n_; ++k) {
            cplx acc = 0.0;
            for (int j = 0; j < n_; ++j)
                acc += x[static_cast<std::size_t>(j)] * roots_[static_cast<std::size_t>((k * j) % n_)];
            out[static_cast<std::size_t>(k)] = acc;
        }
        return out;
    }

    /// Real part of the inverse transform.
    std::vector<double> inverse_real(const std::vector<cplx>& x) const
    {
        std::vector<double> out(static_cast<std::size_t>(n_));
        for (int j = 0; j < n_; ++j) {
            cplx acc = 0.0;
            for (int k = 0; k < n_; ++k)
                acc += x[static_cast<std::size_t>(k)] * std::conj(roots_[static_cast<std::size_t>((k * j) % n_)]);
            out[static_cast<std::size_t>(j)] = acc.real() / n_;
        }
        return out;
    }

private:
    int n_;
    std::vector<cplx> roots_;
};

/// Solves lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i].
std::vector<cplx> thomas(std::vector<double> lower, std::vector<double> diag, std::vector<double> upper,
                         std::vector<cplx> rhs)
{
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = lower[i] / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    std::vector<cplx> x(n);
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
    return x;
}

}  // namespace

MetricField scalar_oracle(const BoundaryData& f, const Grid& grid)
{
    f.validate_shape();
    f.validate_positive(0.0);
    f.require_grid(grid);
    if (f.dim != 1)
        throw InputError("scalar_oracle: boundary data must be scalar");
    const int nr = grid.n_rad();
    const int na = grid.n_ang();
    const double h = grid.d_rad();
    const double dth = grid.d_ang();
    const AngularDft dft(na);

    auto log_samples = [&](Circle c) {
        std::vector<double> out(static_cast<std::size_t>(na));
        for (int j = 0; j < na; ++j)
            out[static_cast<std::size_t>(j)] = std::log(f.sample(c, j)(0, 0).real());
        return out;
    };
    const std::vector<cplx> outer_hat = dft.forward(log_samples(Circle::outer));
    std::vector<cplx> inner_hat;
    if (grid.kind() == DomainKind::annulus)
        inner_hat = dft.forward(log_samples(Circle::inner));

    // Modes per ring.
    std::vector<std::vector<cplx>> modes(static_cast<std::size_t>(nr), std::vector<cplx>(static_cast<std::size_t>(na)));
    for (int k = 0; k < na; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        const double mu = (2.0 - 2.0 * std::cos(k * dth)) / (dth * dth);
        if (grid.kind() == DomainKind::annulus) {
            const auto m = static_cast<std::size_t>(nr - 2);
            std::vector<double> lo(m, 1.0 / (h * h)), up(m, 1.0 / (h * h)), di(m, -2.0 / (h * h) - mu);
            std::vector<cplx> rhs(m, 0.0);
            rhs[0] -= lo[0] * inner_hat[ks];
            rhs[m - 1] -= up[m - 1] * outer_hat[ks];
            lo[0] = 0.0;
            up[m - 1] = 0.0;
            const std::vector<cplx> x = thomas(lo, di, up, rhs);
            modes[0][ks] = inner_hat[ks];
            for (std::size_t i = 0; i < m; ++i)
                modes[i + 1][ks] = x[i];
            modes[static_cast<std::size_t>(nr - 1)][ks] = outer_hat[ks];
        } else {
            const auto m = static_cast<std::size_t>(nr - 1);
            std::vector<double> lo(m), up(m), di(m);
            for (std::size_t i = 0; i < m; ++i) {
                const double r = grid.radial(static_cast<int>(i));
                lo[i] = 1.0 / (h * h) - 1.0 / (2.0 * r * h);
                up[i] = 1.0 / (h * h) + 1.0 / (2.0 * r * h);
                di[i] = -2.0 / (h * h) - mu / (r * r);
            }
            // r_0 = h/2: the neighbour across the origin has weight exactly zero.
            lo[0] = 0.0;
            std::vector<cplx> rhs(m, 0.0);
            rhs[m - 1] -= up[m - 1] * outer_hat[ks];
            up[m - 1] = 0.0;
            const std::vector<cplx> x = thomas(lo, di, up, rhs);
            for (std::size_t i = 0; i < m; ++i)
                modes[i][ks] = x[i];
            modes[m][ks] = outer_hat[ks];
        }
    }

    MatrixField out(grid, 1);
    for (int i = 0; i < nr; ++i) {
        const std::vector<double> u = dft.inverse_real(modes[static_cast<std::size_t>(i)]);
        for (int j = 0; j < na; ++j)
            out.at(grid.index(i, j))(0, 0) = std::exp(u[static_cast<std::size_t>(j)]);
    }
    // Boundary values are copied exactly rather than round-tripped through the transform.
    for (auto [circle, ring] : grid.boundary_rings())
        for (int j = 0; j < na; ++j)
            out.at(grid.index(ring, j))(0, 0) = f.sample(circle, j)(0, 0).real();
    return MetricField(std::move(out));
}

Mat SyntheticTruth::g(cplx w) const
{
    const int m = degree();
    Mat out = Mat::Zero(a_true.rows(), a_true.cols());
    for (int k = -m; k <= m; ++k)
        out += coefficients[static_cast<std::size_t>(k + m)] * std::pow(w, k);
    return out;
}

Mat SyntheticTruth::dg(cplx w) const
{
    const int m = degree();
    Mat out = Mat::Zero(a_true.rows(), a_true.cols());
    for (int k = -m; k <= m; ++k)
        if (k != 0)
            out += coefficients[static_cast<std::size_t>(k + m)] * (static_cast<double>(k) * std::pow(w, k - 1));
    return out;
}

Mat SyntheticTruth::metric(cplx w) const
{
    const Mat gw = g(w);
    const Mat p = gw.adjoint() * hermitian_exp(a_true, std::log(std::norm(w))) * gw;
    return 0.5 * (p + Mat(p.adjoint()));
}

Mat SyntheticTruth::connection(cplx w) const
{
    const Mat gw = g(w);
    return gw.partialPivLu().solve(Mat(a_true * gw + w * dg(w)));
}

namespace {

cplx complex_gaussian(std::mt19937_64& rng)
{
    std::normal_distribution<double> nd(0.0, 1.0);
    const double re = nd(rng);
    const double im = nd(rng);
    return cplx(re, im) / std::numbers::sqrt2;
}

double min_singular(const Mat& x)
{
    Eigen::JacobiSVD<Mat> svd(x);
    return svd.singularValues()(svd.singularValues().size() - 1);
}

}  // namespace

SyntheticTruth draw_generator(const SyntheticSpec& spec, const DomainSpec& domain)
{
    domain.validate();
    if (domain.kind != DomainKind::annulus)
        throw InputError("synthetic: the generator lives on an annulus");
    if (spec.dim < 1 || spec.dim > kMaxDim)
        throw InputError("synthetic: dim must lie in [1, " + std::to_string(kMaxDim) + "]");
    if (spec.degree < 0)
        throw InputError("synthetic: degree must be non-negative");
    if (!(spec.scale >= 0.0) || !std::isfinite(spec.scale))
        throw InputError("synthetic: scale must be finite and non-negative");
    Mat a = spec.a_true.size() == 0 ? Mat(Mat::Zero(spec.dim, spec.dim)) : spec.a_true;
    if (a.rows() != spec.dim || a.cols() != spec.dim)
        throw InputError("synthetic: a_true has the wrong size");
    if (hermiticity_defect(a) > kTolHerm * std::max(1.0, op_norm(a)))
        throw InputError("synthetic: a_true must be self-adjoint");
    a = 0.5 * (a + Mat(a.adjoint()));

    std::mt19937_64 rng(spec.seed);
    const double ls1 = std::log(*domain.r_inner);
    const double ls2 = std::log(domain.r_outer);
    constexpr int kRadialProbes = 33;
    constexpr int kAngularProbes = 128;
    for (int draw = 1; draw <= kMaxGeneratorDraws; ++draw) {
        SyntheticTruth t{domain, {}, a, draw};
        for (int k = -spec.degree; k <= spec.degree; ++k) {
            Mat c(spec.dim, spec.dim);
            if (k == 0) {
                c = Mat::Identity(spec.dim, spec.dim);
            } else {
                for (int col = 0; col < spec.dim; ++col)
                    for (int row = 0; row < spec.dim; ++row)
                        c(row, col) = spec.scale * complex_gaussian(rng);
            }
            t.coefficients.push_back(c);
        }
        double smallest = std::numeric_limits<double>::infinity();
        for (int i = 0; i < kRadialProbes; ++i) {
            const double s = ls1 + (ls2 - ls1) * i / (kRadialProbes - 1);
            for (int j = 0; j < kAngularProbes; ++j)
                smallest = std::min(smallest,
                                    min_singular(t.g(std::exp(cplx(s, 2.0 * std::numbers::pi * j / kAngularProbes)))));
        }
        if (smallest >= kMinGeneratorSingular)
            return t;
    }
    throw NonConvergenceError("synthetic: no invertible generator after " + std::to_string(kMaxGeneratorDraws) +
                              " draws");
}

SyntheticFlat evaluate_synthetic(const SyntheticTruth& truth, const Grid& grid)
{
    if (grid.kind() != DomainKind::annulus || !(grid.domain() == truth.domain))
        throw InputError("synthetic: grid domain differs from the generator's annulus");
    MatrixField p(grid, static_cast<int>(truth.a_true.rows()));
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(grid.size()); ++k) {
        const auto node = static_cast<std::size_t>(k);
        p.at(node) = truth.metric(node_coordinates(grid, node).w);
    }
    MetricField metric(std::move(p));
    BoundaryData f = restrict_boundary(metric);
    return {std::move(metric), std::move(f), truth};
}

SyntheticFlat synthetic_flat(const SyntheticSpec& spec, const Grid& grid)
{
    if (spec.a_true.size() != 0) {
        Eigen::SelfAdjointEigenSolver<Mat> es(Mat(0.5 * (spec.a_true + Mat(spec.a_true.adjoint()))),
                                              Eigen::EigenvaluesOnly);
        const RVec ev = es.eigenvalues();
        if (!(ev(0) > -0.5 && ev(ev.size() - 1) < 0.5))
            throw InputError("synthetic: spectrum of a_true must lie in (-1/2, 1/2)");
    }
    return evaluate_synthetic(draw_generator(spec, grid.domain()), grid);
}

GaugeIdentityReport gauge_identity_check(const MetricField& p, const HermitianField& h, const Sector& sector)
{
    p.require_compatible(h, "gauge_identity_check");
    const Grid& g = p.grid();
    const int nr = g.n_rad();
    const int na = g.n_ang();
    const int n = p.dim();

    std::vector<char> in_region(g.size(), 0);
    MatrixField frame(g, n);
    if (g.kind() == DomainKind::disc) {
        frame = local_factorization(p).frame;
        std::fill(in_region.begin(), in_region.end(), 1);
    } else {
        if (sector.ang_count < 3 || sector.ang_count >= na)
            throw InputError("gauge_identity_check: sector must span 3 to n_ang - 1 angular nodes");
        const FrameIntegrator fi(p);
        const int ring = nr / 2;
        const int j0 = g.wrap_ang(sector.ang_begin);
        Mat hs = sqrt_pd(p.at(g.index(ring, j0)));
        for (int q = 0; q < sector.ang_count; ++q) {
            const double th = g.angle(j0 + q);
            if (q > 0)
                hs = fi.advance({g.radial(ring), th - g.d_ang()}, {g.radial(ring), th}, hs);
            frame.at(g.index(ring, j0 + q)) = hs;
            in_region[g.index(ring, j0 + q)] = 1;
            Mat hr = hs;
            for (int i = ring + 1; i < nr; ++i) {
                hr = fi.advance({g.radial(i - 1), th}, {g.radial(i), th}, hr);
                frame.at(g.index(i, j0 + q)) = hr;
                in_region[g.index(i, j0 + q)] = 1;
            }
            hr = hs;
            for (int i = ring - 1; i >= 0; --i) {
                hr = fi.advance({g.radial(i + 1), th}, {g.radial(i), th}, hr);
                frame.at(g.index(i, j0 + q)) = hr;
                in_region[g.index(i, j0 + q)] = 1;
            }
        }
    }

    MatrixField gauge(g, n);
    MatrixField conj_h(g, n);
    for (std::size_t k = 0; k < g.size(); ++k)
        if (in_region[k]) {
            gauge.at(k) = Mat(frame.at(k)).partialPivLu().inverse();
            const Mat gk = gauge.at(k);
            conj_h.at(k) = gk.adjoint() * Mat(h.at(k)) * gk;
        }
    const MatrixField lhs = d_mixed(conj_h);
    const HermitianField lh = apply_L(LinearizedContext(p), h);

    const StencilTable stencils(g);
    GaugeIdentityReport rep;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!in_region[k] || g.is_boundary(k))
            continue;
        bool inside = true;
        for (const auto& e : stencils.row(k).view())
            inside = inside && in_region[e.node];
        if (!inside)
            continue;
        const Mat gk = gauge.at(k);
        const Mat rhs = gk.adjoint() * Mat(lh.at(k)) * gk;
        rep.defect = std::max(rep.defect, op_norm(Mat(lhs.at(k)) - rhs));
        rep.scale = std::max(rep.scale, op_norm(rhs));
        ++rep.nodes_checked;
    }
    return rep;
}

HermitianField random_psd_field(const Grid& grid, int dim, std::uint64_t seed, bool vanish_on_boundary)
{
    if (dim < 1 || dim > kMaxDim)
        throw InputError("random_psd_field: invalid dim");
    std::mt19937_64 rng(seed);
    Mat x(dim, dim);
    for (int c = 0; c < dim; ++c)
        for (int r = 0; r < dim; ++r)
            x(r, c) = complex_gaussian(rng);
    const Mat y = x.adjoint() * x;
    const double phase = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);

    const BarrierField phi = barrier(grid);
    const double phi_max = *std::max_element(phi.values.begin(), phi.values.end());
    MatrixField out(grid, dim);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double radial = vanish_on_boundary ? phi.values[k] / phi_max : 0.5 + 0.5 * phi.values[k] / phi_max;
        const double angular = (1.25 + std::cos(grid.angle(grid.i_ang(k)) + phase)) / 2.25;
        out.at(k) = (radial * angular) * y;
    }
    const double s = sup_norm(out);
    if (s > 0.0)
        out = (1.0 / s) * out;
    out.hermitize();
    return HermitianField(std::move(out));
}

Mat random_hermitian(int dim, std::uint64_t seed)
{
    if (dim < 1 || dim > kMaxDim)
        throw InputError("random_hermitian: invalid dim");
    std::mt19937_64 rng(seed);
    Mat x(dim, dim);
    for (int c = 0; c < dim; ++c)
        for (int r = 0; r < dim; ++r)
            x(r, c) = complex_gaussian(rng);
    return 0.5 * (x + Mat(x.adjoint()));
}

}  // namespace fhm
