#pragma once

#include "cir/estimator.hpp"

namespace cir {

// Output of one unbiased-minimum-variance gain evaluation.
struct UmvGain {
    Matrix L;       // n x l, satisfies L (CB) = B
    Matrix P_post;  // P_prior - F R̃⁻¹ Fᵀ
    Matrix R_tilde; // C P_prior Cᵀ + R
};

// Gain of the unbiased minimum-variance input reconstructor. P_prior must
// already be the one-step-ahead covariance A P Aᵀ + Q.
//
//   R̃ = C P Cᵀ + R,  F = P Cᵀ,  V = CB
//   Π = (Vᵀ R̃⁻¹ V)⁻¹ Vᵀ R̃⁻¹
//   L = B Π + F R̃⁻¹ (I - V Π)
//
// Throws InfeasibleError when Vᵀ R̃⁻¹ V is numerically singular (smallest
// singular value below kUmvFeasibilityRatio * largest), i.e. rank(CB) < p,
// and NumericalFailureError when R̃ is not positive definite.
UmvGain umv_gain(const Matrix& P_prior, const StateSpaceModel& model, const NoiseSpec& noise);

inline constexpr double kUmvFeasibilityRatio = 1e-10;

struct UmvState {
    Vector x_hat;     // x̂_{k|k}
    Matrix P;         // P_{k|k}
    Matrix last_gain; // L_{k+1}; empty until the first step
    Matrix V;         // CB

    static UmvState initial(const StateSpaceModel& model);
    static UmvState initial(const StateSpaceModel& model, Vector x_hat0, Matrix P0);
};

struct UmvStepResult {
    UmvState state;
    Vector u_hat; // reconstructed u_k
};

// One reconstruction step given the next measurement y_{k+1}:
// predict x̂ <- A x̂ (no input term), advance P, evaluate the gain, correct
// the state with L ν and reconstruct û_k = B† L ν where ν = y_{k+1} - C A x̂.
UmvStepResult umv_step(const UmvState& state, const StateSpaceModel& model,
                       const NoiseSpec& noise, const Vector& y_next);

} // namespace cir
