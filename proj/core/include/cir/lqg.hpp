#pragma once

#include <memory>

#include "cir/controller.hpp"

namespace cir {

struct LqrResult {
    Matrix K; // p x n, u = -K x
    Matrix P; // stabilizing Riccati solution
    int iterations = 0;
};

// Iterates P <- Q + Aᵀ P A - Aᵀ P B (R + Bᵀ P B)⁻¹ Bᵀ P A from P = Q until the
// largest entry change falls below tol * max(1, |P|max). Throws
// NumericalFailureError after max_iterations.
LqrResult dlqr(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
               double tol = 1e-10, int max_iterations = 10000);

struct LqgWeights {
    Matrix state_weight; // n x n, default identity
    Matrix input_weight; // p x p, default identity
    // Solve the steady-state target system in the least-squares sense instead
    // of requiring it to be nonsingular.
    bool least_squares_target = false;
};

struct SteadyTarget {
    Vector x;
    Vector u;
};

// LQR state feedback around a steady-state target, with a Kalman estimate:
//   [[A - I, B], [C, 0]] [x_ss; u_ss] = [0; y_ref,k]
//   u_k = u_ss - K (x̂_{k|k} - x_ss)
class LqgController final : public Controller {
public:
    LqgController(StateSpaceModel model, NoiseSpec noise, LqgWeights weights,
                  CirOptions options = {});

    std::string name() const override { return "lqg"; }
    int input_dim() const override { return model_.inputs(); }
    int output_dim() const override { return model_.outputs(); }

    Vector step(const Vector& y_meas, const Vector& ref_now, const Vector& ref_next) override;
    const Vector& predicted_output() const override { return y_pred_; }

    SteadyTarget target(const Vector& y_ref) const;
    const Matrix& gain() const { return lqr_.K; }
    const KalmanState& estimate() const { return kalman_; }

private:
    StateSpaceModel model_;
    NoiseSpec noise_;
    LqrResult lqr_;
    Matrix target_solver_; // maps [0; y_ref] to [x_ss; u_ss]
    KalmanState kalman_;
    Vector u_prev_;
    Vector y_pred_;
    bool has_estimate_ = false;
};

std::unique_ptr<Controller> lqg_baseline(const StateSpaceModel& model, const NoiseSpec& noise,
                                         const LqgWeights& weights,
                                         const CirOptions& options = {});

} // namespace cir
