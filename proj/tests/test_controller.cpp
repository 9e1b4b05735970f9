#include "doctest.h"

#include "cir/controller.hpp"
#include "cir/errors.hpp"
#include "cir/sim.hpp"
#include "cir/squaring.hpp"
#include "cir/systems.hpp"
#include "support/oracles.hpp"

using namespace cir;
using namespace cir::testing;

namespace {

ReferenceSignal channel_refs(ReferenceKind a, ReferenceKind b) {
    ChannelReference first{a, 1.0, 100.0};
    ChannelReference second{b, 1.0, 100.0};
    return ReferenceSignal::generated({first, second});
}

double max_abs_error_after(const SimulationTrace& trace, int transient) {
    const Matrix err = trace.tracking_error();
    return err.bottomRows(err.rows() - transient).cwiseAbs().maxCoeff();
}

} // namespace

TEST_CASE("cir_step: reference equal to the prediction gives zero input") {
    const auto sd = systems::spring_damper(0.05);
    const auto noise = NoiseSpec::isotropic(4, 2, 1e-4, 1e-4);
    CirOptions options;
    options.x_hat0 = Vector::Constant(4, 0.4);
    const auto state = CirState::initial(sd, options);
    const Vector y = Vector::Constant(2, 0.3);

    const auto probe = cir_step(state, sd, noise, y, Vector::Zero(2));
    const auto replay = cir_step(state, sd, noise, y, probe.state.y_pred);
    CHECK(replay.u_apply.cwiseAbs().maxCoeff() < 1e-12);
    CHECK((replay.state.y_pred - probe.state.y_pred).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cir_step: components follow the documented sequence") {
    const auto sd = systems::spring_damper(0.05);
    const auto noise = NoiseSpec::isotropic(4, 2, 1e-3, 1e-2);
    auto state = CirState::initial(sd);
    std::mt19937_64 rng(8);

    // Two steps so the second exercises the Kalman predict with u_prev.
    for (int k = 0; k < 2; ++k) {
        const Vector y = random_vector(rng, 2);
        const Vector r = random_vector(rng, 2);
        const auto result = cir_step(state, sd, noise, y, r);

        KalmanState prior = k == 0 ? state.kalman : kf_predict(state.kalman, sd, noise, state.u_prev);
        const auto kal = kf_update(prior, sd, noise, y);
        const Vector y_pred = sd.C() * sd.A() * kal.x_hat;
        const Mat P_prior = sd.A() * state.umv_cov * sd.A().transpose() + noise.Q;
        const auto gain = umv_gain(P_prior, sd, noise);
        const Vector u = pinv(sd.B()) * gain.L * (r - y_pred);

        CHECK((result.state.kalman.x_hat - kal.x_hat).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((result.state.y_pred - y_pred).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((result.u_apply - u).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((result.state.umv_cov - gain.P_post).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(result.state.u_prev == result.u_apply);
        state = result.state;
    }
}

TEST_CASE("CIR tracks exactly without noise") {
    const auto sd = systems::spring_damper(0.05);
    const auto tuning = NoiseSpec::isotropic(4, 2, 1e-4, 1e-4);
    const auto silent = NoiseSpec::zero(4, 2);

    for (const auto& [a, b] : {std::pair{ReferenceKind::Step, ReferenceKind::Step},
                               std::pair{ReferenceKind::Sawtooth, ReferenceKind::Sine}}) {
        CirController controller(sd, tuning);
        const auto trace = run_closed_loop(sd, silent, controller, channel_refs(a, b), 400,
                                           Vector::Zero(4), 1);
        CHECK(max_abs_error_after(trace, 20) <= 1e-6);
    }

    SUBCASE("unknown initial state converges after the transient") {
        // Estimation error decays through the Kalman filter; tracking follows.
        const auto rc = systems::rc_circuit(0.1);
        CirController controller(rc, NoiseSpec::isotropic(2, 2, 1e-4, 1e-4));
        const auto trace = run_closed_loop(rc, NoiseSpec::zero(2, 2), controller,
                                           channel_refs(ReferenceKind::Step, ReferenceKind::Sine),
                                           200, Vector::Constant(2, 0.5), 1);
        CHECK(max_abs_error_after(trace, 20) <= 1e-6);
    }
}

TEST_CASE("gain identity holds at every closed-loop step") {
    const auto sd = systems::spring_damper(0.05);
    const auto noise = NoiseSpec::isotropic(4, 2, 1e-4, 1e-4);
    const NoiseSampler sampler(noise);
    CirController controller(sd, noise);
    const auto ref = channel_refs(ReferenceKind::Sawtooth, ReferenceKind::Sine);
    Rng rng(4);
    Vector x = Vector::Zero(4);
    Vector y = sd.C() * x + sampler.measurement(rng);
    for (int k = 0; k < 500; ++k) {
        const Vector u = controller.step(y, ref.at(k), ref.at(k + 1));
        const Matrix& L = controller.state().last_gain;
        CHECK((L * sd.CB() - sd.B()).norm() <= 1e-8 * (1.0 + sd.B().norm()));
        CHECK((sd.B_pinv() * L * sd.CB() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-8);
        const auto next = plant_step(sd, sampler, x, u, rng);
        x = next.x_next;
        y = next.y_next;
    }
}

TEST_CASE("applied inputs match the batch left inverse") {
    std::mt19937_64 rng(17);
    const int horizon = 8;
    const int settle = 150;
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 2 + trial % 4;
        const int m = 1 + trial % 2;
        const auto s = random_min_phase_system(rng, n, m);
        const StateSpaceModel model(s.A, s.B, s.C);
        const Matrix samples = random_matrix(rng, settle + horizon + 1, m);
        const auto reference = ReferenceSignal::sampled(samples);

        CirController controller(model, NoiseSpec::isotropic(n, m, 1e-4, 1e-4));
        const auto trace = run_closed_loop(model, NoiseSpec::zero(n, m), controller, reference,
                                           settle + horizon, random_vector(rng, n), 1);

        const auto batch = batch_matrices(model, horizon);
        std::vector<Vector> targets;
        for (int k = settle + 1; k <= settle + horizon; ++k) {
            targets.push_back(samples.row(k).transpose());
        }
        const Vector x_start = trace.x_true[settle];
        const Vector U = pinv(batch.M) * (stack(targets) - batch.Gamma * x_start);
        std::vector<Vector> applied(trace.u_applied.begin() + settle,
                                    trace.u_applied.begin() + settle + horizon);
        CHECK((stack(applied) - U).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("controller consumes no reference beyond one-step preview") {
    const auto sd = systems::spring_damper(0.05);
    const auto noise = NoiseSpec::isotropic(4, 2, 1e-4, 1e-4);
    Matrix base = Matrix::Zero(121, 2);
    for (int k = 0; k <= 120; ++k) {
        base(k, 0) = std::sin(0.1 * k);
        base(k, 1) = 0.2 * (k % 17);
    }
    Matrix altered = base;
    altered.bottomRows(60).setConstant(5.0); // rows 61..120 differ

    CirController a(sd, noise);
    CirController b(sd, noise);
    const auto ta = run_closed_loop(sd, noise, a, ReferenceSignal::sampled(base), 120,
                                    Vector::Zero(4), 9);
    const auto tb = run_closed_loop(sd, noise, b, ReferenceSignal::sampled(altered), 120,
                                    Vector::Zero(4), 9);
    // u_k depends on references up to k + 1, so inputs through k = 59 agree.
    for (int k = 0; k < 60; ++k) {
        CHECK(ta.u_applied[k] == tb.u_applied[k]);
    }
    CHECK(ta.u_applied[60] != tb.u_applied[60]);
}

TEST_CASE("cir_step errors") {
    const auto sd = systems::spring_damper(0.05);
    const auto noise = NoiseSpec::isotropic(4, 2, 1e-4, 1e-4);
    const auto state = CirState::initial(sd);
    CHECK_THROWS_AS(cir_step(state, sd, noise, Vector::Zero(3), Vector::Zero(2)), InvalidInputError);

    const auto wide = systems::wide_demo();
    const auto wide_state = CirState::initial(wide);
    CHECK_THROWS_AS(cir_step(wide_state, wide, NoiseSpec::isotropic(4, 1, 1e-2, 1e-2),
                             Vector::Zero(1), Vector::Zero(1)),
                    InfeasibleError);
}
