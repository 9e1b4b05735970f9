#include "cir/controller.hpp"

#include "cir/errors.hpp"

namespace cir {

CirState CirState::initial(const StateSpaceModel& model, const CirOptions& options) {
    const int n = model.states();
    Vector x0 = options.x_hat0.size() ? options.x_hat0 : Vector::Zero(n);
    Matrix P0 = options.P0.size() ? options.P0 : Matrix::Identity(n, n);

    CirState state;
    state.kalman = KalmanState::initial(model, std::move(x0), P0);
    state.umv_cov = std::move(P0);
    state.u_prev = Vector::Zero(model.inputs());
    state.y_pred = Vector::Zero(model.outputs());
    state.last_gain = Matrix::Zero(n, model.outputs());
    return state;
}

CirStepResult cir_step(const CirState& state, const StateSpaceModel& model,
                       const NoiseSpec& noise, const Vector& y_meas, const Vector& y_ref_next) {
    if (y_meas.size() != model.outputs() || y_ref_next.size() != model.outputs()) {
        throw InvalidInputError("cir_step: measurement / reference dimension mismatch");
    }

    CirStepResult result;
    CirState& next = result.state;

    KalmanState prior = state.has_estimate
                            ? kf_predict(state.kalman, model, noise, state.u_prev)
                            : state.kalman;
    next.kalman = kf_update(prior, model, noise, y_meas);
    next.has_estimate = true;

    const Vector x_pred = model.A() * next.kalman.x_hat;
    next.y_pred = model.C() * x_pred;

    const Matrix P_prior = model.A() * state.umv_cov * model.A().transpose() + noise.Q;
    UmvGain gain = umv_gain(P_prior, model, noise);

    result.u_apply = model.B_pinv() * (gain.L * (y_ref_next - next.y_pred));

    next.umv_cov = std::move(gain.P_post);
    next.last_gain = std::move(gain.L);
    next.u_prev = result.u_apply;
    return result;
}

CirController::CirController(StateSpaceModel model, NoiseSpec noise, CirOptions options)
    : model_(std::move(model)), noise_(std::move(noise)) {
    noise_.validate(model_);
    state_ = CirState::initial(model_, options);
}

Vector CirController::step(const Vector& y_meas, const Vector& /*ref_now*/,
                           const Vector& ref_next) {
    CirStepResult result = cir_step(state_, model_, noise_, y_meas, ref_next);
    state_ = std::move(result.state);
    return result.u_apply;
}

} // namespace cir
