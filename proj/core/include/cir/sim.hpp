#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "cir/controller.hpp"
#include "cir/reference.hpp"

namespace cir {

using Rng = std::mt19937_64;

// Draws zero-mean Gaussian vectors with covariances Q and R. Square roots are
// taken once via a symmetric eigendecomposition, so PSD (singular) inputs are
// fine. A zero covariance consumes no draws.
class NoiseSampler {
public:
    explicit NoiseSampler(const NoiseSpec& noise);

    Vector process(Rng& rng) const;
    Vector measurement(Rng& rng) const;

private:
    Vector draw(const Matrix& root, Rng& rng) const;

    Matrix process_root_;
    Matrix measurement_root_;
};

struct PlantStep {
    Vector x_next;
    Vector y_next;
};

// x_{k+1} = A x + B u + w,  y_{k+1} = C x_{k+1} + v
PlantStep plant_step(const StateSpaceModel& model, const NoiseSampler& sampler, const Vector& x,
                     const Vector& u, Rng& rng);

// Per-sample record k = 0 .. T. No controller call happens at k = T, so the
// last row's u_applied and y_pred are zero.
struct SimulationTrace {
    std::vector<Vector> x_true;
    std::vector<Vector> y_meas;
    std::vector<Vector> y_ref;
    std::vector<Vector> u_applied;
    std::vector<Vector> y_pred;

    std::uint64_t seed = 0;
    std::uint64_t model_hash = 0;
    std::string controller;
    double dt = 0.0;

    int steps() const { return static_cast<int>(y_meas.size()) - 1; }

    // (T + 1) x l matrix of y_ref,k - y_k.
    Matrix tracking_error() const;
};

// Mean over k = 1 .. T of the squared tracking error, per channel. Sample 0
// precedes any control action and is excluded (for T = 0 it is the only one).
Vector mean_squared_error(const Matrix& errors);

// Closed loop over T steps from x0. The plant is driven with noise drawn from
// `plant_noise` using an RNG seeded by `seed`. Controller failures are
// rethrown with the step index prepended to the message.
SimulationTrace run_closed_loop(const StateSpaceModel& plant, const NoiseSpec& plant_noise,
                                Controller& controller, const ReferenceSignal& reference,
                                int steps, const Vector& x0, std::uint64_t seed);

struct Scenario {
    StateSpaceModel plant;
    NoiseSpec plant_noise;
    std::function<std::unique_ptr<Controller>()> make_controller;
    ReferenceSignal reference;
    int steps = 0;
    Vector x0; // empty means zero
};

SimulationTrace run_scenario(const Scenario& scenario, std::uint64_t seed);

struct MonteCarloSummary {
    int runs = 0;
    Matrix mean_error;     // (T + 1) x l
    Matrix std_error;      // (T + 1) x l, sample standard deviation (0 when runs = 1)
    Vector mse_per_channel;
    Matrix run_mse;        // runs x l
};

// Run i uses seed base_seed + i. Runs are spread over `threads` workers
// (0: CIR_THREADS from the environment, else hardware concurrency); the
// reduction happens in run order, so results do not depend on the thread count.
MonteCarloSummary monte_carlo(const Scenario& scenario, int runs, std::uint64_t base_seed,
                              int threads = 0);

int default_thread_count();

// CSV: k,t,y_ref_1..l,y_1..l,u_1..p,err_1..l[,y_ref_raw_1..l]
void write_trace_csv(std::ostream& out, const SimulationTrace& trace,
                     const Matrix& raw_reference = Matrix());
// CSV: k,t,mean_err_1..l,std_err_1..l
void write_monte_carlo_csv(std::ostream& out, const MonteCarloSummary& summary, double dt);
// One `mse,<channel>,<value>` line per output channel (1-based).
void write_mse_lines(std::ostream& out, const Vector& mse);

} // namespace cir
