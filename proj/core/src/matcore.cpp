#include "cir/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "cir/errors.hpp"

namespace cir {

namespace {

using Svd = Eigen::JacobiSVD<Matrix>;

double resolve_tolerance(const Matrix& M, const Eigen::VectorXd& sigma, double tol) {
    if (tol < 0.0 || !std::isfinite(tol)) {
        throw InvalidInputError("rank tolerance must be finite and non-negative");
    }
    if (tol > 0.0) {
        return tol;
    }
    const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
    return static_cast<double>(std::max(M.rows(), M.cols())) *
           std::numeric_limits<double>::epsilon() * sigma_max;
}

} // namespace

void require_finite(const Matrix& M, const char* what) {
    if (!M.allFinite()) {
        throw InvalidInputError(std::string(what) + " has non-finite entries");
    }
}

double default_rank_tolerance(const Matrix& M) {
    require_finite(M, "matrix");
    if (M.size() == 0) {
        return 0.0;
    }
    Svd svd(M);
    return resolve_tolerance(M, svd.singularValues(), 0.0);
}

Matrix pinv(const Matrix& M, double tol) {
    require_finite(M, "pinv argument");
    if (M.size() == 0) {
        return Matrix::Zero(M.cols(), M.rows());
    }
    Svd svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();
    const double cutoff = resolve_tolerance(M, sigma, tol);

    Eigen::VectorXd inv_sigma = Eigen::VectorXd::Zero(sigma.size());
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (sigma(i) > cutoff) {
            inv_sigma(i) = 1.0 / sigma(i);
        }
    }
    return svd.matrixV() * inv_sigma.asDiagonal() * svd.matrixU().transpose();
}

int numerical_rank(const Matrix& M, double tol) {
    require_finite(M, "rank argument");
    if (M.size() == 0) {
        return 0;
    }
    Svd svd(M);
    const Eigen::VectorXd& sigma = svd.singularValues();
    const double cutoff = resolve_tolerance(M, sigma, tol);
    return static_cast<int>((sigma.array() > cutoff).count());
}

DiscreteMatrices zoh_discretize(const Matrix& Ac, const Matrix& Bc, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidInputError("zoh_discretize: dt must be positive");
    }
    require_finite(Ac, "continuous A");
    require_finite(Bc, "continuous B");
    const Eigen::Index n = Ac.rows();
    const Eigen::Index p = Bc.cols();
    if (Ac.cols() != n || Bc.rows() != n) {
        throw InvalidInputError("zoh_discretize: Ac must be n x n and Bc n x p");
    }

    Matrix augmented = Matrix::Zero(n + p, n + p);
    augmented.topLeftCorner(n, n) = Ac * dt;
    augmented.topRightCorner(n, p) = Bc * dt;
    const Matrix phi = augmented.exp();

    return {phi.topLeftCorner(n, n), phi.topRightCorner(n, p)};
}

Spectrum sort_spectrum(Spectrum values) {
    for (auto& z : values) {
        if (std::abs(z.imag()) < 1e-12) {
            z = {z.real(), 0.0};
        }
    }
    std::sort(values.begin(), values.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) {
            return a.real() < b.real();
        }
        return a.imag() < b.imag();
    });
    return values;
}

Spectrum eigenvalues(const Matrix& A) {
    require_finite(A, "eigenvalue argument");
    if (A.rows() != A.cols()) {
        throw InvalidInputError("eigenvalues: matrix must be square");
    }
    if (A.size() == 0) {
        return {};
    }
    Eigen::EigenSolver<Matrix> solver(A, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw NumericalFailureError("eigenvalues: QR iteration did not converge");
    }
    const auto& ev = solver.eigenvalues();
    return sort_spectrum(Spectrum(ev.data(), ev.data() + ev.size()));
}

Spectrum invariant_zeros(const Matrix& A, const Matrix& B, const Matrix& C) {
    require_finite(A, "A");
    require_finite(B, "B");
    require_finite(C, "C");
    const Eigen::Index n = A.rows();
    const Eigen::Index p = B.cols();
    if (A.cols() != n || B.rows() != n || C.cols() != n) {
        throw InvalidInputError("invariant_zeros: inconsistent dimensions");
    }
    if (C.rows() != p) {
        throw UnsupportedShapeError(
            "invariant_zeros: only square systems (outputs == inputs) are supported");
    }

    // Pencil (S, E) with S = [[A, B], [C, 0]] and E = diag(I_n, 0).
    Matrix S = Matrix::Zero(n + p, n + p);
    S.topLeftCorner(n, n) = A;
    S.topRightCorner(n, p) = B;
    S.bottomLeftCorner(p, n) = C;
    Matrix E = Matrix::Zero(n + p, n + p);
    E.topLeftCorner(n, n).setIdentity();

    Eigen::GeneralizedEigenSolver<Matrix> solver(S, E, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw NumericalFailureError("invariant_zeros: QZ iteration did not converge");
    }

    Spectrum zeros;
    const auto& alphas = solver.alphas();
    const auto& betas = solver.betas();
    for (Eigen::Index i = 0; i < alphas.size(); ++i) {
        const double beta = betas(i);
        if (std::abs(alphas(i)) >= kInfiniteZeroMagnitude * std::abs(beta)) {
            continue;
        }
        zeros.push_back(alphas(i) / beta);
    }
    return sort_spectrum(std::move(zeros));
}

Matrix controllability_matrix(const Matrix& A, const Matrix& B) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || B.rows() != n) {
        throw InvalidInputError("controllability: A must be n x n and B n x p");
    }
    const Eigen::Index p = B.cols();
    Matrix out(n, n * p);
    Matrix block = B;
    for (Eigen::Index i = 0; i < n; ++i) {
        out.middleCols(i * p, p) = block;
        block = A * block;
    }
    return out;
}

Matrix observability_matrix(const Matrix& A, const Matrix& C) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || C.cols() != n) {
        throw InvalidInputError("observability: A must be n x n and C l x n");
    }
    const Eigen::Index l = C.rows();
    Matrix out(n * l, n);
    Matrix block = C;
    for (Eigen::Index i = 0; i < n; ++i) {
        out.middleRows(i * l, l) = block;
        block = block * A;
    }
    return out;
}

int ctrb_rank(const Matrix& A, const Matrix& B) {
    return numerical_rank(controllability_matrix(A, B));
}

int obsv_rank(const Matrix& A, const Matrix& C) {
    return numerical_rank(observability_matrix(A, C));
}

} // namespace cir
