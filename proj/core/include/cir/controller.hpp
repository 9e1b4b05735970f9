#pragma once

#include <memory>
#include <string>

#include "cir/reconstructor.hpp"

namespace cir {

// A discrete feedback law driven once per sample. At step k the controller
// sees the current measurement y_k together with the reference at k and the
// one-step preview at k + 1, and returns the input u_k to apply.
class Controller {
public:
    virtual ~Controller() = default;

    virtual std::string name() const = 0;
    virtual int input_dim() const = 0;
    virtual int output_dim() const = 0;

    virtual Vector step(const Vector& y_meas, const Vector& ref_now, const Vector& ref_next) = 0;

    // The controller's prediction of y_{k+1} formed during the last step.
    virtual const Vector& predicted_output() const = 0;
};

struct CirOptions {
    Vector x_hat0; // default zero
    Matrix P0;     // default identity; seeds both covariance recursions
};

struct CirState {
    // Holds the prior for the next measurement update. The initial value is
    // read as (x̂_{0|-1}, P_{0|-1}); later values are (x̂_{k|k}, P_{k|k}).
    KalmanState kalman;
    Matrix umv_cov;
    Vector u_prev;
    Vector y_pred;
    Matrix last_gain;
    bool has_estimate = false;

    static CirState initial(const StateSpaceModel& model, const CirOptions& options = {});
};

struct CirStepResult {
    CirState state;
    Vector u_apply;
};

// One command-following step:
//  1. Kalman predict with u_prev (skipped on the first call), update with y_k.
//  2. y_pred = C A x̂_{k|k}.
//  3. Advance the UMV covariance and compute L_{k+1}.
//  4. u_k = B† L_{k+1} (y_ref,k+1 - y_pred).
CirStepResult cir_step(const CirState& state, const StateSpaceModel& model,
                       const NoiseSpec& noise, const Vector& y_meas, const Vector& y_ref_next);

class CirController final : public Controller {
public:
    CirController(StateSpaceModel model, NoiseSpec noise, CirOptions options = {});

    std::string name() const override { return "cir"; }
    int input_dim() const override { return model_.inputs(); }
    int output_dim() const override { return model_.outputs(); }

    Vector step(const Vector& y_meas, const Vector& ref_now, const Vector& ref_next) override;
    const Vector& predicted_output() const override { return state_.y_pred; }

    const CirState& state() const { return state_; }
    const StateSpaceModel& model() const { return model_; }

private:
    StateSpaceModel model_;
    NoiseSpec noise_;
    CirState state_;
};

} // namespace cir
