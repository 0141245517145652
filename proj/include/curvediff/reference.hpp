#pragma once

// Dense routines from an independent library (Eigen), used to check the
// kernel-based factorizations, plus an extended-precision route for
// metrics too ill-conditioned for double.

#include <vector>

#include "curvediff/curve.hpp"
#include "curvediff/matrix.hpp"

namespace curvediff::reference {

/// Ascending eigenvalues of a symmetric matrix.
std::vector<double> symmetric_eigenvalues(const Matrix& a);

/// Inverse via partial-pivot LU. Throws std::runtime_error if singular.
Matrix inverse(const Matrix& a);

/// log|det a| via partial-pivot LU.
double log_abs_det(const Matrix& a);

/// Smallest eigenvalue of the scalar block of g^m, assembled and
/// diagonalized (cyclic Jacobi) in 113-bit binary floating point where the
/// compiler provides it, long double otherwise.
double metric_min_eigenvalue_extended(const DiscreteCurve& c, MetricOrder m, MuRule rule = MuRule::OrderParity);

}  // namespace curvediff::reference
