#pragma once

#include <cstdint>
#include <vector>

#include "fhm/fields.hpp"
#include "fhm/linear_elliptic.hpp"

namespace fhm {

/// One real number per grid node.
struct ScalarField {
    Grid grid;
    std::vector<double> values;
};

/// lambda_max(P^{-1/2} h P^{-1/2}) at every node: the largest value of <hv, v>
/// over P-unit vectors v.
ScalarField s_field(const MetricField& p, const HermitianField& h);

inline constexpr double kTolMp = 1e-8;

struct MaxPrincipleReport {
    /// False when Lh has a negative eigenvalue below -tol_psd at an interior node.
    bool applicable = false;
    bool holds = false;
    double max_all = 0.0;
    double max_boundary = 0.0;
    /// max_all - max_boundary.
    double gap = 0.0;
    /// Smallest eigenvalue of Lh over interior nodes.
    double min_lh_eigenvalue = 0.0;
};

/// Compares the maximum of S_{P,h} over the grid with its maximum over the
/// boundary nodes. Report-style: nothing is thrown for a failed check.
MaxPrincipleReport max_principle_check(const LinearizedContext& ctx, const HermitianField& h, double tol_mp = kTolMp,
                                       double tol_psd = 1e-8);
MaxPrincipleReport max_principle_check(const MetricField& p, const HermitianField& h, double tol_mp = kTolMp,
                                       double tol_psd = 1e-8);

/// exp(u) where u solves the scalar 5-point problem u_{zeta zetabar} = 0 with
/// u = log F on the boundary. Solved mode by mode: a discrete Fourier
/// transform in theta and a tridiagonal solve in the radial direction.
MetricField scalar_oracle(const BoundaryData& f, const Grid& grid);

/// Laurent generator G(w) = sum_{k=-m}^{m} C_k w^k with C_0 = I and the other
/// coefficients complex Gaussian times `scale`.
struct SyntheticSpec {
    int dim = 2;
    int degree = 1;
    double scale = 0.15;
    Mat a_true;  ///< empty selects zero
    std::uint64_t seed = 0;
};

/// Ground truth of a synthetic flat metric P = G^* exp(a log|w|^2) G.
struct SyntheticTruth {
    DomainSpec domain;
    std::vector<Mat> coefficients;  ///< C_{-m}, ..., C_m
    Mat a_true;
    int draws = 1;  ///< generator draws used

    int degree() const { return static_cast<int>(coefficients.size() / 2); }
    Mat g(cplx w) const;
    Mat dg(cplx w) const;
    Mat metric(cplx w) const;
    /// P^{-1} P_zeta in the log-polar chart: G^{-1} a G + G^{-1} w G'(w).
    Mat connection(cplx w) const;
};

struct SyntheticFlat {
    MetricField metric;
    BoundaryData boundary;
    SyntheticTruth truth;
};

inline constexpr int kMaxGeneratorDraws = 100;
inline constexpr double kMinGeneratorSingular = 0.1;

/// Draws G until its smallest singular value on the closed annulus is at
/// least kMinGeneratorSingular. a_true must be self-adjoint; its spectrum is
/// not checked here. Throws NonConvergenceError after kMaxGeneratorDraws.
SyntheticTruth draw_generator(const SyntheticSpec& spec, const DomainSpec& domain);

/// Analytic evaluation of the truth on an annulus grid.
SyntheticFlat evaluate_synthetic(const SyntheticTruth& truth, const Grid& grid);

/// draw_generator + evaluate_synthetic, with spec(a_true) required to lie in (-1/2, 1/2).
SyntheticFlat synthetic_flat(const SyntheticSpec& spec, const Grid& grid);

/// Angular sector [ang_begin, ang_begin + ang_count) of an annulus grid.
struct Sector {
    int ang_begin = 0;
    int ang_count = 0;
};

struct GaugeIdentityReport {
    double defect = 0.0;  ///< sup ||(G^* h G)_{zeta zetabar} - G^* (Lh) G||
    double scale = 0.0;   ///< sup ||G^* (Lh) G|| over the same nodes
    std::size_t nodes_checked = 0;
};

/// Checks (G^* h G)_{zeta zetabar} = G^* (Lh) G with G = H^{-1}, H the
/// holomorphic frame with P = H^* H. On the annulus H is built on the sector
/// (which must be a proper subset of the circle); on the disc the sector is
/// ignored and H covers the whole grid. Nodes whose stencil leaves the region
/// are skipped.
GaugeIdentityReport gauge_identity_check(const MetricField& p, const HermitianField& h, const Sector& sector = {});

/// Seeded smooth psd field c X^* X b(node), one complex Gaussian X per field,
/// c normalizing to unit sup norm. The bump b is positive inside and, when
/// `vanish_on_boundary` is set, zero on the boundary rings.
HermitianField random_psd_field(const Grid& grid, int dim, std::uint64_t seed, bool vanish_on_boundary = true);

/// Seeded Hermitian matrix with independent complex Gaussian entries.
Mat random_hermitian(int dim, std::uint64_t seed);

}  // namespace fhm
