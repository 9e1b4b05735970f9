#include "cir/reconstructor.hpp"

#include <sstream>

#include "cir/errors.hpp"

namespace cir {

UmvGain umv_gain(const Matrix& P_prior, const StateSpaceModel& model, const NoiseSpec& noise) {
    const int n = model.states();
    const int l = model.outputs();
    if (P_prior.rows() != n || P_prior.cols() != n || noise.R.rows() != l ||
        noise.R.cols() != l) {
        throw InvalidInputError("umv_gain: dimension mismatch");
    }
    const Matrix& B = model.B();
    const Matrix& C = model.C();
    const Matrix V = model.CB();

    UmvGain gain;
    gain.R_tilde = symmetrize(C * P_prior * C.transpose() + noise.R);
    Eigen::LLT<Matrix> chol(gain.R_tilde);
    if (chol.info() != Eigen::Success) {
        throw NumericalFailureError("umv_gain: C P Cᵀ + R is not positive definite");
    }

    const Matrix F = P_prior * C.transpose();
    const Matrix Rinv_V = chol.solve(V);                    // R̃⁻¹ V
    const Matrix W = symmetrize(V.transpose() * Rinv_V);    // Vᵀ R̃⁻¹ V

    Eigen::JacobiSVD<Matrix> svd(W);
    const auto& sigma = svd.singularValues();
    const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
    const double sigma_min = sigma.size() > 0 ? sigma(sigma.size() - 1) : 0.0;
    if (!(sigma_max > 0.0) || sigma_min < kUmvFeasibilityRatio * sigma_max) {
        std::ostringstream msg;
        msg << "umv_gain: Vᵀ R̃⁻¹ V is singular (rank(CB) = " << numerical_rank(V) << " < p = "
            << model.inputs() << "); use an input transform for systems with l < p";
        throw InfeasibleError(msg.str());
    }

    // Π = W⁻¹ (R̃⁻¹ V)ᵀ
    const Matrix Pi = W.ldlt().solve(Rinv_V.transpose());
    const Matrix I_l = Matrix::Identity(l, l);
    gain.L = B * Pi + chol.solve(F.transpose()).transpose() * (I_l - V * Pi);
    gain.P_post = symmetrize(P_prior - F * chol.solve(F.transpose()));
    return gain;
}

UmvState UmvState::initial(const StateSpaceModel& model) {
    return initial(model, Vector::Zero(model.states()),
                   Matrix::Identity(model.states(), model.states()));
}

UmvState UmvState::initial(const StateSpaceModel& model, Vector x_hat0, Matrix P0) {
    const int n = model.states();
    if (x_hat0.size() != n || P0.rows() != n || P0.cols() != n) {
        throw InvalidInputError("umv: initial estimate / covariance dimension mismatch");
    }
    UmvState state;
    state.x_hat = std::move(x_hat0);
    state.P = std::move(P0);
    state.V = model.CB();
    return state;
}

UmvStepResult umv_step(const UmvState& state, const StateSpaceModel& model,
                       const NoiseSpec& noise, const Vector& y_next) {
    if (state.x_hat.size() != model.states() || y_next.size() != model.outputs() ||
        noise.Q.rows() != model.states()) {
        throw InvalidInputError("umv_step: dimension mismatch");
    }
    const Vector x_pred = model.A() * state.x_hat;
    const Matrix P_prior = model.A() * state.P * model.A().transpose() + noise.Q;
    UmvGain gain = umv_gain(P_prior, model, noise);

    const Vector innovation = y_next - model.C() * x_pred;
    const Vector correction = gain.L * innovation;

    UmvStepResult result;
    result.state.x_hat = x_pred + correction;
    result.state.P = std::move(gain.P_post);
    result.state.last_gain = std::move(gain.L);
    result.state.V = state.V.size() ? state.V : model.CB();
    result.u_hat = model.B_pinv() * correction;
    return result;
}

} // namespace cir
