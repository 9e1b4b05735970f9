#include "cir/estimator.hpp"

#include <cmath>
#include <sstream>

#include "cir/errors.hpp"

namespace cir {

namespace {

void require_symmetric(const Matrix& M, const char* what) {
    const double scale = 1.0 + M.cwiseAbs().maxCoeff();
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
        throw InvalidInputError(std::string(what) + " must be symmetric");
    }
}

} // namespace

Matrix symmetrize(const Matrix& M) {
    return 0.5 * (M + M.transpose());
}

NoiseSpec NoiseSpec::isotropic(int states, int outputs, double q, double r, std::uint64_t seed) {
    return {q * Matrix::Identity(states, states), r * Matrix::Identity(outputs, outputs), seed};
}

NoiseSpec NoiseSpec::zero(int states, int outputs, std::uint64_t seed) {
    return {Matrix::Zero(states, states), Matrix::Zero(outputs, outputs), seed};
}

void NoiseSpec::validate(const StateSpaceModel& model) const {
    if (Q.rows() != model.states() || Q.cols() != model.states()) {
        throw InvalidInputError("noise: Q must be n x n");
    }
    if (R.rows() != model.outputs() || R.cols() != model.outputs()) {
        throw InvalidInputError("noise: R must be l x l");
    }
    require_finite(Q, "Q");
    require_finite(R, "R");
    require_symmetric(Q, "Q");
    require_symmetric(R, "R");
}

KalmanState KalmanState::initial(const StateSpaceModel& model) {
    return initial(model, Vector::Zero(model.states()),
                   Matrix::Identity(model.states(), model.states()));
}

KalmanState KalmanState::initial(const StateSpaceModel& model, Vector x_hat0, Matrix P0) {
    const int n = model.states();
    if (x_hat0.size() != n || P0.rows() != n || P0.cols() != n) {
        throw InvalidInputError("kalman: initial estimate / covariance dimension mismatch");
    }
    require_finite(x_hat0, "initial estimate");
    require_finite(P0, "initial covariance");
    KalmanState state;
    state.x_hat = std::move(x_hat0);
    state.P = std::move(P0);
    state.last_gain = Matrix::Zero(n, model.outputs());
    state.last_innovation_cov = Matrix::Zero(model.outputs(), model.outputs());
    return state;
}

KalmanState kf_predict(const KalmanState& state, const StateSpaceModel& model,
                       const NoiseSpec& noise, const Vector& u_applied) {
    if (state.x_hat.size() != model.states() || u_applied.size() != model.inputs() ||
        noise.Q.rows() != model.states()) {
        throw InvalidInputError("kf_predict: dimension mismatch");
    }
    KalmanState next = state;
    next.x_hat = model.A() * state.x_hat + model.B() * u_applied;
    next.P = model.A() * state.P * model.A().transpose() + noise.Q;
    return next;
}

KalmanState kf_update(const KalmanState& state, const StateSpaceModel& model,
                      const NoiseSpec& noise, const Vector& y_meas) {
    const Matrix& C = model.C();
    if (y_meas.size() != model.outputs() || noise.R.rows() != model.outputs() ||
        state.x_hat.size() != model.states()) {
        throw InvalidInputError("kf_update: dimension mismatch");
    }

    const Matrix S = symmetrize(C * state.P * C.transpose() + noise.R);
    Eigen::SelfAdjointEigenSolver<Matrix> spectrum(S, Eigen::EigenvaluesOnly);
    const double s_min = spectrum.eigenvalues().minCoeff();
    const double s_max = spectrum.eigenvalues().maxCoeff();
    if (!(s_min > 0.0) || s_max > kMaxInnovationCondition * s_min) {
        std::ostringstream msg;
        msg << "kf_update: innovation covariance is singular or ill-conditioned "
            << "(eigenvalues in [" << s_min << ", " << s_max << "])";
        throw NumericalFailureError(msg.str());
    }
    Eigen::LLT<Matrix> chol(S);
    if (chol.info() != Eigen::Success) {
        throw NumericalFailureError("kf_update: innovation covariance is not positive definite");
    }

    // K = P Cᵀ S⁻¹  <=>  Kᵀ = S⁻¹ C P  (P, S symmetric)
    const Matrix K = chol.solve(C * state.P).transpose();
    const Vector innovation = y_meas - C * state.x_hat;

    KalmanState next;
    next.x_hat = state.x_hat + K * innovation;
    const Matrix I = Matrix::Identity(model.states(), model.states());
    next.P = symmetrize((I - K * C) * state.P);
    next.last_gain = K;
    next.last_innovation_cov = S;
    return next;
}

} // namespace cir
