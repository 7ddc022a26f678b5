#include "fhm/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "fhm/operators.hpp"

namespace fhm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Fourth-order d/dzeta. Interior radial stencils are centered (continuing
/// across the origin on the disc); the two outermost rings use one-sided
/// five-point stencils.
MatrixField high_order_dzeta(const MatrixField& p)
{
    const Grid& g = p.grid();
    const int nr = g.n_rad();
    const int na = g.n_ang();
    const int n = p.dim();
    const double h = g.d_rad();
    const double dth = g.d_ang();
    const bool disc = g.kind() == DomainKind::disc;

    auto ring_value = [&](int i, int j) -> Mat {
        if (i < 0)
            return p.at(g.index(-1 - i, j + na / 2));
        return p.at(g.index(i, j));
    };

    MatrixField out(g, n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(p.size()); ++k) {
        const auto node = static_cast<std::size_t>(k);
        const int i = g.i_rad(node);
        const int j = g.i_ang(node);
        Mat dr;
        const bool low_edge = !disc && i < 2;
        const bool high_edge = i > nr - 3;
        if (low_edge || high_edge) {
            // One-sided: s = +1 walks inward from the inner edge, s = -1 from the outer edge.
            const int s = low_edge ? 1 : -1;
            const int e = low_edge ? 0 : nr - 1;
            const int off = low_edge ? i : nr - 1 - i;
            auto u = [&](int m) { return ring_value(e + s * m, j); };
            if (off == 0)
                dr = (-25.0 * u(0) + 48.0 * u(1) - 36.0 * u(2) + 16.0 * u(3) - 3.0 * u(4)) / (12.0 * h);
            else
                dr = (-3.0 * u(0) - 10.0 * u(1) + 18.0 * u(2) - 6.0 * u(3) + u(4)) / (12.0 * h);
            dr *= static_cast<double>(s);
        } else {
            dr = (ring_value(i - 2, j) - 8.0 * ring_value(i - 1, j) + 8.0 * ring_value(i + 1, j) -
                  ring_value(i + 2, j)) /
                 (12.0 * h);
        }
        const Mat dt = (Mat(p.at(g.index(i, j - 2))) - 8.0 * Mat(p.at(g.index(i, j - 1))) +
                        8.0 * Mat(p.at(g.index(i, j + 1))) - Mat(p.at(g.index(i, j + 2)))) /
                       (12.0 * dth);
        const cplx iu(0.0, 1.0);
        if (!disc) {
            out.at(node) = 0.5 * (dr - iu * dt);
        } else {
            const double r = g.radial(i);
            out.at(node) = std::polar(0.5, -g.angle(j)) * (dr - (iu / r) * dt);
        }
    }
    return out;
}

double condition_number(const Mat& h)
{
    Eigen::JacobiSVD<Mat> svd(h);
    const auto& s = svd.singularValues();
    return s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
}

cplx chart_point(const Grid& g, int i, double theta)
{
    if (g.chart() == Chart::log_polar)
        return {g.radial(i), theta};
    return std::polar(g.radial(i), theta);
}

double relative_frame_defect(const MatrixField& frame, const MetricField& p)
{
    double worst = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const Mat h = frame.at(k);
        worst = std::max(worst, op_norm(h.adjoint() * h - Mat(p.at(k))));
    }
    return worst / sup_norm(p);
}

}  // namespace

FrameIntegrator::FrameIntegrator(const MetricField& p, FrameOptions options)
    : p_(&p), options_(options), a_(p.grid(), p.dim()), interp_(a_)
{
    if (options_.substeps < 1)
        throw InputError("frame integration: substeps must be positive");
    const MatrixField pz = high_order_dzeta(p);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(p.size()); ++k) {
        const auto node = static_cast<std::size_t>(k);
        a_.at(node) = Mat(p.at(node)).llt().solve(Mat(pz.at(node)));
    }
    const HermitianField r = curvature_residual(p);
    double worst = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k)
        if (!p.grid().is_boundary(k))
            worst = std::max(worst, op_norm(Mat(p.at(k)).llt().solve(Mat(r.at(k)))));
    flatness_ = worst;
    if (options_.check_flatness && flatness_ > options_.tol_flat_input)
        throw InputError("frame integration: metric is not flat (sup |P^-1 R| = " + to_text(flatness_) +
                         ")");
}

Mat FrameIntegrator::advance(cplx from, cplx to, Mat h) const
{
    const int m = options_.substeps;
    const cplx step = (to - from) / static_cast<double>(m);
    Mat a0 = interp_(from);
    for (int s = 0; s < m; ++s) {
        const cplx z0 = from + static_cast<double>(s) * step;
        const Mat a_mid = interp_(z0 + 0.5 * step);
        const Mat a1 = s + 1 == m ? interp_(to) : interp_(z0 + step);
        const Mat k1 = h * a0 * step;
        const Mat k2 = (h + 0.5 * k1) * a_mid * step;
        const Mat k3 = (h + 0.5 * k2) * a_mid * step;
        const Mat k4 = (h + k3) * a1 * step;
        h += (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        a0 = a1;
    }
    if (!h.allFinite() || condition_number(h) > options_.max_condition)
        throw NonConvergenceError("frame integration: frame became singular");
    return h;
}

FramePath FrameIntegrator::integrate(std::span<const cplx> path, const Mat& h0) const
{
    if (h0.rows() != p_->dim() || h0.cols() != p_->dim())
        throw InputError("frame integration: initial frame has the wrong size");
    if (path.empty())
        throw InputError("frame integration: empty path");
    if (condition_number(h0) > options_.max_condition)
        throw InputError("frame integration: initial frame is not invertible");
    FramePath out;
    out.points.assign(path.begin(), path.end());
    out.frames.push_back(h0);
    out.connection.push_back(interp_(path[0]));
    for (std::size_t k = 1; k < path.size(); ++k) {
        out.frames.push_back(advance(path[k - 1], path[k], out.frames.back()));
        out.connection.push_back(interp_(path[k]));
    }
    return out;
}

FramePath integrate_frame(const MetricField& p, std::span<const cplx> path, const Mat& h0, const FrameOptions& options)
{
    const FrameIntegrator fi(p, options);
    return fi.integrate(path, h0);
}

LocalFactorization local_factorization(const MetricField& p, const FrameOptions& options)
{
    const Grid& g = p.grid();
    if (g.kind() != DomainKind::disc)
        throw InputError("local_factorization: requires a disc grid");
    const FrameIntegrator fi(p, options);
    LocalFactorization out{MatrixField(g, p.dim()), g.index(0, 0), 0.0};

    Mat h = sqrt_pd(p.at(out.base_node));
    for (int i = 0; i < g.n_rad(); ++i) {
        if (i > 0)
            h = fi.advance(chart_point(g, i - 1, 0.0), chart_point(g, i, 0.0), h);
        out.frame.at(g.index(i, 0)) = h;
        Mat hr = h;
        for (int j = 1; j < g.n_ang(); ++j) {
            hr = fi.advance(chart_point(g, i, g.angle(j - 1)), chart_point(g, i, g.angle(j)), hr);
            out.frame.at(g.index(i, j)) = hr;
        }
    }
    out.frame_defect = relative_frame_defect(out.frame, p);
    return out;
}

namespace {

Mat polar_unitary(const Mat& u)
{
    Eigen::JacobiSVD<Mat> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

struct Sweep {
    std::vector<Mat> frames;  ///< frames at theta0 + q dtheta, q = 0..n_ang
    Monodromy mono;
};

Sweep angular_sweep(const FrameIntegrator& fi, int ring, int base_ang)
{
    const Grid& g = fi.metric().grid();
    Sweep out;
    out.mono.base_ring = ring;
    const double th0 = g.angle(base_ang);
    Mat h = sqrt_pd(fi.metric().at(g.index(ring, base_ang)));
    out.frames.push_back(h);
    for (int q = 1; q <= g.n_ang(); ++q) {
        h = fi.advance(cplx(g.radial(ring), th0 + g.d_ang() * (q - 1)), cplx(g.radial(ring), th0 + g.d_ang() * q),
                       h);
        out.frames.push_back(h);
    }
    const Mat& h0 = out.frames.front();
    out.mono.raw = out.frames.back() * h0.partialPivLu().inverse();
    out.mono.defect = op_norm(out.mono.raw.adjoint() * out.mono.raw - Mat::Identity(h0.rows(), h0.cols()));
    out.mono.unitary = polar_unitary(out.mono.raw);
    return out;
}

int nearest_ring(const Grid& g, double sigma)
{
    const double x = (sigma - g.radial_min()) / g.d_rad();
    return std::clamp(static_cast<int>(std::lround(x)), 0, g.n_rad() - 1);
}

}  // namespace

Monodromy monodromy(const MetricField& p, double base_sigma, int base_ang, double tol_unitary,
                    const FrameOptions& options)
{
    const Grid& g = p.grid();
    if (g.kind() != DomainKind::annulus)
        throw InputError("monodromy: requires an annulus grid");
    if (!(base_sigma >= g.radial_min() - 1e-12 && base_sigma <= g.radial_max() + 1e-12))
        throw InputError("monodromy: base sigma outside the annulus");
    const FrameIntegrator fi(p, options);
    Sweep sw = angular_sweep(fi, nearest_ring(g, base_sigma), g.wrap_ang(base_ang));
    if (!(sw.mono.defect <= tol_unitary))
        throw MonodromyError("monodromy is not unitary: defect " + to_text(sw.mono.defect), sw.mono.defect);
    return sw.mono;
}

Mat unitary_log(const Mat& u, double branch_guard, double tol_unitary)
{
    const auto n = u.rows();
    if (u.cols() != n)
        throw InputError("unitary_log: matrix must be square");
    const double defect = op_norm(u.adjoint() * u - Mat::Identity(n, n));
    if (!(defect <= tol_unitary))
        throw InputError("unitary_log: matrix is not unitary (defect " + to_text(defect) + ")");
    // A normal matrix has diagonal Schur form, so the Schur vectors are an
    // orthonormal eigenbasis even for repeated eigenvalues.
    Eigen::ComplexSchur<Mat> schur(u);
    const Mat& t = schur.matrixT();
    const Mat& q = schur.matrixU();
    RVec phases(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double ph = std::arg(t(k, k));
        if (std::numbers::pi - std::abs(ph) < branch_guard)
            throw BranchAmbiguityError("unitary_log: eigenphase " + to_text(ph) +
                                           " lies on the branch cut of the principal logarithm",
                                       std::numbers::pi - std::abs(ph));
        phases(k) = ph;
    }
    const Mat s = q * phases.cast<cplx>().asDiagonal() * q.adjoint();
    return 0.5 * (s + Mat(s.adjoint()));
}

Mat hermitian_exp(const Mat& s, cplx c)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(Mat(0.5 * (s + Mat(s.adjoint()))));
    const auto& ev = es.eigenvalues();
    Eigen::Matrix<cplx, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1> d(ev.size());
    for (Eigen::Index k = 0; k < ev.size(); ++k)
        d(k) = std::exp(c * ev(k));
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

FactorizationResult factorize_annulus(const MetricField& p, const FactorOptions& options)
{
    const Grid& g = p.grid();
    if (g.kind() != DomainKind::annulus)
        throw InputError("factorize_annulus: requires an annulus grid");
    const int nr = g.n_rad();
    const int na = g.n_ang();
    const int ring = options.base_ring < 0 ? nr / 2 : options.base_ring;
    if (ring >= nr)
        throw InputError("factorize_annulus: base ring out of range");
    const int j0 = g.wrap_ang(options.base_ang);

    const FrameIntegrator fi(p, options.frame);
    const Sweep sw = angular_sweep(fi, ring, j0);

    FactorizationResult out{MatrixField(g, p.dim()), Mat(), g.index(ring, j0), sw.mono.defect, 0.0, 0.0,
                            fi.flatness_measure()};
    if (!(sw.mono.defect <= options.tol_unitary))
        throw MonodromyError("factorize_annulus: monodromy is not unitary, defect " + to_text(sw.mono.defect),
                             sw.mono.defect);
    const Mat& u = sw.mono.unitary;
    const Mat log_u = unitary_log(u, options.branch_guard, options.tol_unitary);
    out.a = log_u / kTwoPi;
    out.a = 0.5 * (out.a + Mat(out.a.adjoint()));

    // Frames on the sheet theta in [0, 2 pi): nodes reached past 2 pi are
    // pulled back with H(zeta) = U^{-1} H(zeta + 2 pi i).
    MatrixField h(g, p.dim());
    const Mat u_inv = u.adjoint();
    for (int q = 0; q < na; ++q) {
        const int j = j0 + q;
        h.at(g.index(ring, j)) = j >= na ? Mat(u_inv * sw.frames[q]) : sw.frames[q];
    }
#pragma omp parallel for schedule(static)
    for (int j = 0; j < na; ++j) {
        const double th = g.angle(j);
        Mat up = h.at(g.index(ring, j));
        for (int i = ring + 1; i < nr; ++i) {
            up = fi.advance({g.radial(i - 1), th}, {g.radial(i), th}, up);
            h.at(g.index(i, j)) = up;
        }
        Mat down = h.at(g.index(ring, j));
        for (int i = ring - 1; i >= 0; --i) {
            down = fi.advance({g.radial(i + 1), th}, {g.radial(i), th}, down);
            h.at(g.index(i, j)) = down;
        }
    }

    for (std::size_t k = 0; k < g.size(); ++k) {
        const cplx zeta(g.radial(g.i_rad(k)), g.angle(g.i_ang(k)));
        out.k.at(k) = hermitian_exp(log_u, -zeta / kTwoPi) * Mat(h.at(k));
    }

    // Continue each ring across theta = 2 pi and compare with theta = 0.
    const double k_sup = sup_norm(out.k);
    double periodic = 0.0;
    for (int i = 0; i < nr; ++i) {
        const Mat h_wrap = fi.advance({g.radial(i), g.angle(na - 1)}, {g.radial(i), kTwoPi}, h.at(g.index(i, na - 1)));
        const Mat k_wrap = hermitian_exp(log_u, -cplx(g.radial(i), kTwoPi) / kTwoPi) * h_wrap;
        periodic = std::max(periodic, op_norm(k_wrap - Mat(out.k.at(g.index(i, 0)))));
    }
    out.periodicity_defect = periodic / k_sup;
    out.frame_defect = relative_frame_defect(h, p);
    return out;
}

MetricField reconstruct(const FactorizationResult& fact, const Grid& grid)
{
    if (!(fact.k.grid() == grid))
        throw InputError("reconstruct: factorization grid differs from the requested grid");
    if (grid.kind() != DomainKind::annulus)
        throw InputError("reconstruct: requires an annulus grid");
    const int n = fact.k.dim();
    if (fact.a.rows() != n || fact.a.cols() != n)
        throw InputError("reconstruct: exponent has the wrong size");
    MatrixField out(grid, n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(grid.size()); ++k) {
        const auto node = static_cast<std::size_t>(k);
        const double sigma = grid.radial(grid.i_rad(node));
        const Mat kk = fact.k.at(node);
        out.at(node) = kk.adjoint() * hermitian_exp(fact.a, 2.0 * sigma) * kk;
    }
    out.hermitize();
    return MetricField(std::move(out));
}

}  // namespace fhm
