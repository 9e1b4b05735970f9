#pragma once

#include <cstdint>

#include "cir/model.hpp"

namespace cir {

// Process / measurement noise covariances plus the seed for noise draws.
struct NoiseSpec {
    Matrix Q;  // n x n, symmetric PSD
    Matrix R;  // l x l, symmetric PD for filtering
    std::uint64_t seed = 0;

    static NoiseSpec isotropic(int states, int outputs, double q, double r,
                               std::uint64_t seed = 0);
    static NoiseSpec zero(int states, int outputs, std::uint64_t seed = 0);

    // Shape, finiteness and symmetry (1e-9) checks. Definiteness is not
    // checked here; the solvers report it when it matters.
    void validate(const StateSpaceModel& model) const;
};

struct KalmanState {
    Vector x_hat;               // x̂_{k|k} after update, x̂_{k|k-1} after predict
    Matrix P;                   // matching covariance
    Matrix last_gain;           // K_k, n x l (zero before the first update)
    Matrix last_innovation_cov; // S_k, l x l

    // Defaults x̂₀ = 0, P₀ = I.
    static KalmanState initial(const StateSpaceModel& model);
    static KalmanState initial(const StateSpaceModel& model, Vector x_hat0, Matrix P0);
};

// Time update: x̂ <- A x̂ + B u, P <- A P Aᵀ + Q.
KalmanState kf_predict(const KalmanState& state, const StateSpaceModel& model,
                       const NoiseSpec& noise, const Vector& u_applied);

// Measurement update on a predicted pair. S = C P Cᵀ + R is factored by
// Cholesky; a non-positive-definite S or cond(S) > kMaxInnovationCondition
// raises NumericalFailureError. P is re-symmetrized after the update.
KalmanState kf_update(const KalmanState& state, const StateSpaceModel& model,
                      const NoiseSpec& noise, const Vector& y_meas);

inline constexpr double kMaxInnovationCondition = 1e12;

// (M + Mᵀ) / 2
Matrix symmetrize(const Matrix& M);

} // namespace cir
