#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fhm/fields.hpp"

namespace fhm {

inline constexpr double kTolUnitary = 1e-6;
inline constexpr double kTolFact = 1e-5;
inline constexpr double kBranchGuard = 1e-6;

struct FrameOptions {
    /// RK4 steps per path segment.
    int substeps = 4;
    /// Inputs with sup ||P^{-1} R(P)|| above this are rejected as non-flat.
    double tol_flat_input = 1e-1;
    bool check_flatness = true;
    /// Frames with a larger condition number abort the integration.
    double max_condition = 1e12;
};

/// Frame values along a polyline in the working chart.
struct FramePath {
    std::vector<cplx> points;
    std::vector<Mat> connection;  ///< interpolated A at each point
    std::vector<Mat> frames;      ///< H at each point
};

/// Integrates the holomorphic frame equation dH/dzeta = H A, A = P^{-1} P_zeta,
/// along straight chart segments with classical RK4. A is computed once with
/// fourth-order differences and sampled by bicubic interpolation, so H^* H
/// tracks P along any path when P is flat.
class FrameIntegrator {
public:
    FrameIntegrator(const MetricField& p, FrameOptions options = {});

    const MetricField& metric() const noexcept { return *p_; }
    const MatrixField& connection() const noexcept { return a_; }
    /// sup over interior nodes of ||P^{-1} R(P)||.
    double flatness_measure() const noexcept { return flatness_; }

    /// Frame at `to` given the frame `h` at `from`.
    Mat advance(cplx from, cplx to, Mat h) const;
    FramePath integrate(std::span<const cplx> path, const Mat& h0) const;

private:
    const MetricField* p_;
    FrameOptions options_;
    MatrixField a_;
    Interpolator interp_;
    double flatness_ = 0.0;
};

FramePath integrate_frame(const MetricField& p, std::span<const cplx> path, const Mat& h0,
                          const FrameOptions& options = {});

/// P = H^* H on the disc with H holomorphic and H(base) = P(base)^{1/2} at the
/// innermost node on theta = 0. Paths run radially along theta = 0, then
/// around each ring.
struct LocalFactorization {
    MatrixField frame;
    std::size_t base_node = 0;
    /// max over nodes of ||H^* H - P|| / sup ||P||.
    double frame_defect = 0.0;
};

LocalFactorization local_factorization(const MetricField& p, const FrameOptions& options = {});

struct Monodromy {
    Mat unitary;  ///< polar factor of the raw monodromy
    Mat raw;      ///< H(theta0 + 2 pi) H(theta0)^{-1}
    double defect = 0.0;  ///< ||raw^* raw - I||
    int base_ring = 0;
};

/// Monodromy of the frame once around the annulus at the ring nearest to
/// base_sigma, starting at angular node base_ang. Throws MonodromyError when
/// the defect exceeds tol_unitary.
Monodromy monodromy(const MetricField& p, double base_sigma, int base_ang = 0, double tol_unitary = kTolUnitary,
                    const FrameOptions& options = {});

/// Self-adjoint log of a unitary with eigenphases in (-pi, pi]. Throws
/// BranchAmbiguityError when an eigenphase lies within branch_guard of pi,
/// InputError when U is not unitary to tol_unitary.
Mat unitary_log(const Mat& u, double branch_guard = kBranchGuard, double tol_unitary = kTolUnitary);

/// exp(c S) for Hermitian S and complex c.
Mat hermitian_exp(const Mat& s, cplx c);

struct FactorOptions {
    /// Ring used for the monodromy sweep; negative selects the middle ring.
    int base_ring = -1;
    int base_ang = 0;
    double tol_unitary = kTolUnitary;
    double branch_guard = kBranchGuard;
    FrameOptions frame{.substeps = 4, .tol_flat_input = 1e-1, .check_flatness = false, .max_condition = 1e12};
};

/// P = K^* exp(a log|w|^2) K on the annulus, K single-valued.
struct FactorizationResult {
    MatrixField k;
    Mat a;
    std::size_t base_node = 0;
    double monodromy_unitarity_defect = 0.0;
    /// max over rings of ||K(sigma, 2 pi) - K(sigma, 0)|| / sup ||K||.
    double periodicity_defect = 0.0;
    /// max over nodes of ||H^* H - P|| / sup ||P||.
    double frame_defect = 0.0;
    /// sup ||P^{-1} R(P)|| of the input.
    double flatness_measure = 0.0;
};

FactorizationResult factorize_annulus(const MetricField& p, const FactorOptions& options = {});

/// K^* exp(a (zeta + zetabar)) K at every node (log|w|^2 = zeta + zetabar).
MetricField reconstruct(const FactorizationResult& fact, const Grid& grid);

}  // namespace fhm
