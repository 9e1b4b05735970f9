#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cir/matcore.hpp"

namespace cir {

// Discrete LTI plant x_{k+1} = A x_k + B u_k, y_k = C x_k with no feedthrough.
// Immutable after construction; B's pseudoinverse is computed once here.
class StateSpaceModel {
public:
    // dt = 0 means "already discrete with unit step".
    StateSpaceModel(Matrix A, Matrix B, Matrix C, double dt = 0.0);

    // ZOH-discretizes (Ac, Bc) at dt > 0; C is shared by both descriptions.
    static StateSpaceModel from_continuous(const Matrix& Ac, const Matrix& Bc, Matrix C,
                                           double dt);

    const Matrix& A() const { return A_; }
    const Matrix& B() const { return B_; }
    const Matrix& C() const { return C_; }
    const Matrix& B_pinv() const { return B_pinv_; }
    double dt() const { return dt_; }

    int states() const { return static_cast<int>(A_.rows()); }
    int inputs() const { return static_cast<int>(B_.cols()); }
    int outputs() const { return static_cast<int>(C_.rows()); }
    bool is_square() const { return inputs() == outputs(); }

    Matrix CB() const { return C_ * B_; }

    // Stable FNV-1a digest of dimensions and entries; used to tag traces.
    std::uint64_t hash() const;

private:
    Matrix A_;
    Matrix B_;
    Matrix C_;
    Matrix B_pinv_;
    double dt_;
};

struct FeasibilityReport {
    int rank_B = 0;
    int rank_CB = 0;
    int ctrb_rank = 0;
    int obsv_rank = 0;
    bool is_square = false;
    // l == p and rank(CB) == l.
    bool is_trackable = false;
    Spectrum eigenvalues;
    // Present only for square systems with rank(CB) = p.
    std::optional<Spectrum> zeros;
    // All zeros strictly inside the unit circle (margin kMinPhaseMargin); square only.
    std::optional<bool> min_phase;
    std::vector<std::string> warnings;
};

inline constexpr double kMinPhaseMargin = 1e-9;

FeasibilityReport check_feasibility(const StateSpaceModel& model);

Spectrum invariant_zeros(const StateSpaceModel& model);

struct ReferenceStep {
    Vector x_next;
    Vector y_next;
};

// Noise-free propagation of the reference system driven by u_ref.
ReferenceStep reference_step(const StateSpaceModel& model, const Vector& x_ref,
                             const Vector& u_ref);

} // namespace cir
