#include "cir/lqg.hpp"

#include <algorithm>
#include <sstream>

#include "cir/errors.hpp"

namespace cir {

LqrResult dlqr(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R, double tol,
               int max_iterations) {
    const Eigen::Index n = A.rows();
    const Eigen::Index p = B.cols();
    if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != p ||
        R.cols() != p) {
        throw InvalidInputError("dlqr: dimension mismatch");
    }

    LqrResult result;
    Matrix P = Q;
    for (int it = 1; it <= max_iterations; ++it) {
        const Matrix BtP = B.transpose() * P;
        Eigen::LLT<Matrix> chol(symmetrize(R + BtP * B));
        if (chol.info() != Eigen::Success) {
            throw NumericalFailureError("dlqr: R + Bᵀ P B is not positive definite");
        }
        const Matrix K = chol.solve(BtP * A);
        Matrix next = symmetrize(Q + A.transpose() * P * A - A.transpose() * BtP.transpose() * K);
        if (!next.allFinite()) {
            break;
        }
        const double change = (next - P).cwiseAbs().maxCoeff();
        const double scale = std::max(1.0, next.cwiseAbs().maxCoeff());
        P = std::move(next);
        if (change <= tol * scale) {
            const Matrix BtPf = B.transpose() * P;
            result.K = symmetrize(R + BtPf * B).llt().solve(BtPf * A);
            result.P = P;
            result.iterations = it;
            return result;
        }
    }
    std::ostringstream msg;
    msg << "dlqr: Riccati recursion did not converge in " << max_iterations << " iterations";
    throw NumericalFailureError(msg.str());
}

LqgController::LqgController(StateSpaceModel model, NoiseSpec noise, LqgWeights weights,
                             CirOptions options)
    : model_(std::move(model)), noise_(std::move(noise)) {
    noise_.validate(model_);
    const int n = model_.states();
    const int p = model_.inputs();
    const int l = model_.outputs();

    const Matrix Qw = weights.state_weight.size() ? weights.state_weight : Matrix::Identity(n, n);
    const Matrix Rw = weights.input_weight.size() ? weights.input_weight : Matrix::Identity(p, p);
    lqr_ = dlqr(model_.A(), model_.B(), Qw, Rw);

    Matrix target(n + l, n + p);
    target.topLeftCorner(n, n) = model_.A() - Matrix::Identity(n, n);
    target.topRightCorner(n, p) = model_.B();
    target.bottomLeftCorner(l, n) = model_.C();
    target.bottomRightCorner(l, p).setZero();

    if (weights.least_squares_target) {
        target_solver_ = pinv(target);
    } else {
        const int rank = numerical_rank(target);
        if (l != p || rank < n + p) {
            std::ostringstream msg;
            msg << "lqg: steady-state target system [[A - I, B], [C, 0]] is singular (rank " << rank
                << " of " << (n + l) << " x " << (n + p)
                << "); enable least_squares_target to use its least-squares solution";
            throw InfeasibleError(msg.str());
        }
        target_solver_ = target.fullPivLu().inverse();
    }

    CirState init = CirState::initial(model_, options);
    kalman_ = std::move(init.kalman);
    u_prev_ = Vector::Zero(p);
    y_pred_ = Vector::Zero(l);
}

SteadyTarget LqgController::target(const Vector& y_ref) const {
    const int n = model_.states();
    const int p = model_.inputs();
    if (y_ref.size() != model_.outputs()) {
        throw InvalidInputError("lqg: reference dimension mismatch");
    }
    Vector rhs = Vector::Zero(n + model_.outputs());
    rhs.tail(model_.outputs()) = y_ref;
    const Vector sol = target_solver_ * rhs;
    return {sol.head(n), sol.tail(p)};
}

Vector LqgController::step(const Vector& y_meas, const Vector& ref_now,
                           const Vector& /*ref_next*/) {
    KalmanState prior = has_estimate_ ? kf_predict(kalman_, model_, noise_, u_prev_) : kalman_;
    kalman_ = kf_update(prior, model_, noise_, y_meas);
    has_estimate_ = true;

    const SteadyTarget ss = target(ref_now);
    Vector u = ss.u - lqr_.K * (kalman_.x_hat - ss.x);
    y_pred_ = model_.C() * (model_.A() * kalman_.x_hat + model_.B() * u);
    u_prev_ = u;
    return u;
}

std::unique_ptr<Controller> lqg_baseline(const StateSpaceModel& model, const NoiseSpec& noise,
                                         const LqgWeights& weights, const CirOptions& options) {
    return std::make_unique<LqgController>(model, noise, weights, options);
}

} // namespace cir
