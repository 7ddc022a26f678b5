#pragma once

#include "fhm/fields.hpp"

/// Serial, table-free versions of the hot kernels, written directly from the
/// difference formulas. They define the expected output of the parallel
/// kernels in tests and serve as the baseline in benchmarks.
namespace fhm::reference {

MatrixField d_zeta(const MatrixField& field);
MatrixField d_zetabar(const MatrixField& field);
MatrixField d_mixed(const MatrixField& field);

/// P_{zeta zetabar} - P_zetabar P^{-1} P_zeta inside, zero on the boundary.
MatrixField curvature_residual(const MetricField& p);

/// h_{zeta zetabar} - h_zetabar A - A^* h_zeta + A^* h A inside, h on the boundary.
MatrixField apply_L(const MetricField& p, const MatrixField& h);

}  // namespace fhm::reference
