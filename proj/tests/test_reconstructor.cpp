#include "doctest.h"

#include "cir/errors.hpp"
#include "cir/reconstructor.hpp"
#include "cir/sim.hpp"
#include "cir/systems.hpp"
#include "support/oracles.hpp"

using namespace cir;
using namespace cir::testing;

namespace {

// ir5-ir9 written with explicit inverses.
struct GainOracle {
    Mat L;
    Mat P_post;
};

GainOracle umv_oracle(const Mat& P, const Mat& B, const Mat& C, const Mat& R) {
    const Mat V = C * B;
    const Mat Rt_inv = (C * P * C.transpose() + R).inverse();
    const Mat F = P * C.transpose();
    const Mat Pi = (V.transpose() * Rt_inv * V).inverse() * V.transpose() * Rt_inv;
    const Mat I = Mat::Identity(C.rows(), C.rows());
    return {B * Pi + F * Rt_inv * (I - V * Pi), P - F * Rt_inv * F.transpose()};
}

double gain_residual(const Matrix& L, const StateSpaceModel& m) {
    return (L * m.CB() - m.B()).norm() / (1.0 + m.B().norm());
}

} // namespace

TEST_CASE("umv_gain") {
    SUBCASE("scalar square case") {
        const StateSpaceModel m(Matrix::Constant(1, 1, 0.9), Matrix::Constant(1, 1, 1.0),
                                Matrix::Constant(1, 1, 2.0));
        const auto gain = umv_gain(Matrix::Constant(1, 1, 3.7), m, NoiseSpec::isotropic(1, 1, 0.1, 0.4));
        CHECK(gain.L(0, 0) == doctest::Approx(0.5));
        CHECK((gain.L * m.CB())(0, 0) == doctest::Approx(1.0));
        CHECK(gain.R_tilde(0, 0) == doctest::Approx(4.0 * 3.7 + 0.4));
    }

    SUBCASE("tall demo: L V = B with a one-dimensional input") {
        const auto tall = systems::tall_demo();
        const auto noise = NoiseSpec::isotropic(4, 2, 0.01, 0.01);
        const Matrix P = tall.A() * tall.A().transpose() + noise.Q;
        const auto gain = umv_gain(P, tall, noise);
        CHECK(gain_residual(gain.L, tall) <= 1e-8);
        const auto oracle = umv_oracle(P, tall.B(), tall.C(), noise.R);
        CHECK((gain.L - oracle.L).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((gain.P_post - oracle.P_post).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("rank-deficient CB is infeasible") {
        const auto wide = systems::wide_demo();
        const auto noise = NoiseSpec::isotropic(4, 1, 0.01, 0.01);
        CHECK_THROWS_AS(umv_gain(Matrix::Identity(4, 4), wide, noise), InfeasibleError);

        const StateSpaceModel blind(Matrix::Identity(2, 2), Matrix::Zero(2, 1), Matrix::Ones(1, 2));
        CHECK_THROWS_AS(umv_gain(Matrix::Identity(2, 2), blind, NoiseSpec::isotropic(2, 1, 0, 1)),
                        InfeasibleError);
    }

    SUBCASE("singular R̃") {
        const StateSpaceModel m(Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 1.0),
                                Matrix::Constant(1, 1, 1.0));
        CHECK_THROWS_AS(umv_gain(Matrix::Zero(1, 1), m, NoiseSpec::zero(1, 1)), NumericalFailureError);
    }
}

TEST_CASE("umv_step") {
    SUBCASE("scalar reconstruction arithmetic") {
        const StateSpaceModel m(Matrix::Constant(1, 1, 0.9), Matrix::Constant(1, 1, 1.0),
                                Matrix::Constant(1, 1, 2.0));
        const auto noise = NoiseSpec::isotropic(1, 1, 0.1, 0.4);
        auto state = UmvState::initial(m, Vector::Zero(1), Matrix::Identity(1, 1));
        // x̂ = 0, so the innovation equals y_next.
        const auto result = umv_step(state, m, noise, Vector::Constant(1, 2.0));
        CHECK(result.u_hat(0) == doctest::Approx(1.0));
    }

    SUBCASE("zero innovation") {
        const auto sd = systems::spring_damper(0.05);
        const auto noise = NoiseSpec::isotropic(4, 2, 1e-4, 1e-4);
        auto state = UmvState::initial(sd, Vector::Constant(4, 0.2), Matrix::Identity(4, 4));
        const Vector predicted = sd.A() * state.x_hat;
        const auto result = umv_step(state, sd, noise, sd.C() * predicted);
        CHECK(result.u_hat.cwiseAbs().maxCoeff() < 1e-12);
        CHECK((result.state.x_hat - predicted).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("noise-free left inversion recovers the applied input") {
        std::mt19937_64 rng(31);
        for (int trial = 0; trial < 5; ++trial) {
            const auto s = random_min_phase_system(rng, 4, 2, 0.9, 0.15);
            const StateSpaceModel m(s.A, s.B, s.C);
            const auto noise = NoiseSpec::isotropic(4, 2, 1e-4, 1e-4);
            auto state = UmvState::initial(m);
            Vector x = random_vector(rng, 4);
            for (int k = 0; k < 60; ++k) {
                const Vector u = Vector::Constant(2, std::sin(0.2 * k)) + random_vector(rng, 2, 0.1);
                x = m.A() * x + m.B() * u;
                const auto result = umv_step(state, m, noise, m.C() * x);
                state = result.state;
                if (k >= 10) {
                    CHECK((result.u_hat - u).cwiseAbs().maxCoeff() < 1e-6);
                }
            }
        }
    }

    SUBCASE("gain identities and covariance recursion along a run") {
        const auto sd = systems::spring_damper(0.05);
        const auto noise = NoiseSpec::isotropic(4, 2, 1e-4, 1e-4);
        auto state = UmvState::initial(sd);
        Mat P_oracle = Mat::Identity(4, 4);
        for (int k = 0; k < 200; ++k) {
            const auto result = umv_step(state, sd, noise, Vector::Constant(2, std::sin(0.3 * k)));
            state = result.state;
            const Mat P_prior = sd.A() * P_oracle * sd.A().transpose() + noise.Q;
            const auto oracle = umv_oracle(P_prior, sd.B(), sd.C(), noise.R);
            // Unsymmetrized, round-off in this recursion grows geometrically.
            P_oracle = 0.5 * (oracle.P_post + oracle.P_post.transpose());

            CHECK(gain_residual(state.last_gain, sd) <= 1e-8);
            const Matrix BLCB = sd.B_pinv() * state.last_gain * sd.CB();
            CHECK((BLCB - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-8);
            CHECK((state.P - P_oracle).cwiseAbs().maxCoeff() <= 1e-12);
            CHECK((state.P - state.P.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
        }
    }
}

TEST_CASE("reconstructed input is unbiased over Monte Carlo runs") {
    std::mt19937_64 sys_rng(41);
    const auto s = random_min_phase_system(sys_rng, 3, 1, 0.9, 0.6);
    const StateSpaceModel m(s.A, s.B, s.C);
    const auto noise = NoiseSpec::isotropic(3, 1, 1e-3, 1e-3);
    const NoiseSampler sampler(noise);
    const int runs = 500;
    const int probe = 40;
    auto u_ref = [](int k) { return Vector::Constant(1, 0.5 + std::sin(0.15 * k)); };

    std::vector<double> errors;
    for (int run = 0; run < runs; ++run) {
        Rng rng(5000 + run);
        Vector x = Vector::Zero(3);
        auto state = UmvState::initial(m, Vector::Zero(3), Matrix::Identity(3, 3) * 1e-3);
        for (int k = 0; k <= probe; ++k) {
            const auto next = plant_step(m, sampler, x, u_ref(k), rng);
            x = next.x_next;
            const auto result = umv_step(state, m, noise, next.y_next);
            state = result.state;
            if (k == probe) {
                errors.push_back(result.u_hat(0) - u_ref(k)(0));
            }
        }
    }
    double mean = 0.0;
    for (double e : errors) mean += e;
    mean /= runs;
    double var = 0.0;
    for (double e : errors) var += (e - mean) * (e - mean);
    const double stderr_ = std::sqrt(var / (runs - 1)) / std::sqrt(static_cast<double>(runs));
    CHECK(std::abs(mean) <= 4.0 * stderr_);
}
