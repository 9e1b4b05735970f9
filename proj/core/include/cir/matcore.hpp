#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace cir {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Eigenvalues or zeros, with multiplicity. Real inputs give conjugate-closed sets.
using Spectrum = std::vector<std::complex<double>>;

// Singular-value cutoff used when the caller passes tol = 0:
// max(rows, cols) * machine epsilon * sigma_max.
double default_rank_tolerance(const Matrix& M);

// Moore-Penrose pseudoinverse through an SVD. Singular values at or below
// tol are treated as zero; tol = 0 selects default_rank_tolerance(M).
// Throws InvalidInputError on non-finite entries or negative tol.
Matrix pinv(const Matrix& M, double tol = 0.0);

// Number of singular values strictly above tol (tol = 0 as for pinv).
int numerical_rank(const Matrix& M, double tol = 0.0);

struct DiscreteMatrices {
    Matrix A;
    Matrix B;
};

// Exact zero-order-hold sampling of x' = Ac x + Bc u. Uses the exponential of
// the augmented block [[Ac, Bc], [0, 0]] * dt.
DiscreteMatrices zoh_discretize(const Matrix& Ac, const Matrix& Bc, double dt);

// Eigenvalues of a square real matrix, ordered by sort_spectrum.
Spectrum eigenvalues(const Matrix& A);

// Finite invariant zeros of the square system (A, B, C): generalized
// eigenvalues z of the Rosenbrock pencil [[A - zI, B], [C, 0]]. Eigenvalues
// with magnitude above kInfiniteZeroMagnitude count as infinite and are dropped.
// Throws UnsupportedShapeError when C.rows() != B.cols().
Spectrum invariant_zeros(const Matrix& A, const Matrix& B, const Matrix& C);

inline constexpr double kInfiniteZeroMagnitude = 1e8;

// [B, AB, ..., A^{n-1}B] and [C; CA; ...; CA^{n-1}].
Matrix controllability_matrix(const Matrix& A, const Matrix& B);
Matrix observability_matrix(const Matrix& A, const Matrix& C);
int ctrb_rank(const Matrix& A, const Matrix& B);
int obsv_rank(const Matrix& A, const Matrix& C);

// Deterministic order: ascending real part, then ascending imaginary part.
// Entries within 1e-12 of the real axis are snapped to it.
Spectrum sort_spectrum(Spectrum values);

// Throws InvalidInputError naming `what` if any entry is NaN or infinite.
void require_finite(const Matrix& M, const char* what);

} // namespace cir
