#pragma once

// Dense complex linear algebra shared by every other module.
//
// Conventions used throughout the library:
//  * CMatrix stores entries row-major.
//  * Operators are vectorized by stacking columns, so vec(A X B) = (B^T kron A) vec(X).
//  * Rank and null-space decisions use a tolerance relative to the spectral norm
//    (default 1e-9); eigenvalue clusters are separated by an absolute gap of 1e-7.

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace oqrw {

using Complex = std::complex<double>;
using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

inline constexpr double kRankTol = 1e-9;
inline constexpr double kClusterGap = 1e-7;
inline constexpr Eigen::Index kMaxEigenDim = 4096;

/// Gram-Schmidt extension of an orthonormal `basis` by `candidates`.
///
/// Each candidate is projected off the current basis (twice, for stability);
/// residuals with norm below `tol` are dropped, the rest are normalized and
/// appended. The returned list starts with `basis` unchanged.
std::vector<CVector> orthonormal_extend(std::span<const CVector> basis,
                                        std::span<const CVector> candidates,
                                        double tol = kRankTol);

struct EigenPairs {
    std::vector<Complex> values;  // with algebraic multiplicity
    std::vector<CVector> vectors;  // unit right eigenvectors, same order
    double max_residual = 0.0;    // max ||m v - lambda v||
    bool defective = false;       // eigenvector matrix numerically singular
};

/// Eigen-decomposition of a general square matrix (Schur based).
/// Throws NumericError if the solver fails or a residual exceeds 1e-9 * ||m||.
EigenPairs eig_general(const CMatrix& m);

/// Eigenvalues only; cheaper than eig_general.
std::vector<Complex> eigenvalues(const CMatrix& m);

struct HermitianEigen {
    std::vector<double> values;  // ascending
    std::vector<CVector> vectors;  // orthonormal
};

/// Throws DimensionError when ||m - m*|| > 1e-10 * ||m||.
HermitianEigen eig_hermitian(const CMatrix& m);

/// Orthonormal basis of { v : ||m v|| <= tol * ||m|| }.
std::vector<CVector> null_space(const CMatrix& m, double tol = kRankTol);

/// Sum of singular values.
double trace_norm(const CMatrix& m);

/// Largest singular value.
double operator_norm(const CMatrix& m);

std::vector<double> singular_values(const CMatrix& m);

/// Unitary factor W of the polar decomposition m = W |m| (square m).
CMatrix polar_unitary(const CMatrix& m);

/// Column-stacking vectorization and its inverse.
CVector vec(const CMatrix& m);
CMatrix unvec(const CVector& v, Eigen::Index rows, Eigen::Index cols);

/// Groups sorted values into runs whose consecutive gaps are <= gap.
/// Returns index ranges [begin, end) into the input.
std::vector<std::pair<std::size_t, std::size_t>> cluster_sorted(std::span<const double> sorted,
                                                                double gap = kClusterGap);

/// ||m - m*||_max
double hermiticity_defect(const CMatrix& m);

CMatrix hermitian_part(const CMatrix& m);

}  // namespace oqrw
