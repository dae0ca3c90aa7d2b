#pragma once

// Small dense linear algebra for n <= 3: symmetric eigendecomposition by
// cyclic Jacobi rotations, spectral powers, and operator norms.

#include <Eigen/Dense>

namespace czvar {

inline constexpr int kMaxComponents = 3;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxComponents, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxComponents, kMaxComponents>;

struct SymEigen {
    Vec values;   // ascending
    Mat vectors;  // orthonormal columns, vectors.col(i) belongs to values(i)
};

/// Eigendecomposition of the symmetric part of `a` by cyclic Jacobi sweeps.
/// Deterministic: the rotation order is fixed and no pivoting depends on
/// floating-point ties beyond the threshold test.
SymEigen jacobi_eigen(const Mat& a);

/// U·diag(λ_i^s)·Uᵀ. s = 0 returns the identity exactly. Throws InvalidWeight
/// if any eigenvalue is not positive.
Mat spectral_power(const SymEigen& e, double s);

/// Largest singular value, via the eigenvalues of aᵀa.
double operator_norm(const Mat& a);

/// Orthonormal basis (columns) of the span of the columns of `gram`'s range,
/// where gram = Σ g gᵀ; eigenvalues below rel_tol·max are treated as zero.
Mat range_basis(const Mat& gram, double rel_tol = 1e-12);

}  // namespace czvar
