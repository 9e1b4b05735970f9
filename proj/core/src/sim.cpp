#include "cir/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>

#include "cir/errors.hpp"

namespace cir {

namespace {

Matrix covariance_root(const Matrix& cov) {
    if (cov.size() == 0 || cov.cwiseAbs().maxCoeff() == 0.0) {
        return Matrix();
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (cov + cov.transpose()));
    const Vector roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * roots.asDiagonal();
}

template <typename Error>
[[noreturn]] void rethrow_at_step(const Error& e, int k) {
    throw Error("step " + std::to_string(k) + ": " + e.what());
}

double time_of(int k, double dt) {
    return dt > 0.0 ? k * dt : static_cast<double>(k);
}

void write_number(std::ostream& out, double value) {
    out << ',' << value;
}

} // namespace

NoiseSampler::NoiseSampler(const NoiseSpec& noise)
    : process_root_(covariance_root(noise.Q)), measurement_root_(covariance_root(noise.R)) {}

Vector NoiseSampler::draw(const Matrix& root, Rng& rng) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(root.cols());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        z(i) = normal(rng);
    }
    return root * z;
}

Vector NoiseSampler::process(Rng& rng) const {
    return process_root_.size() ? draw(process_root_, rng) : Vector();
}

Vector NoiseSampler::measurement(Rng& rng) const {
    return measurement_root_.size() ? draw(measurement_root_, rng) : Vector();
}

PlantStep plant_step(const StateSpaceModel& model, const NoiseSampler& sampler, const Vector& x,
                     const Vector& u, Rng& rng) {
    if (x.size() != model.states() || u.size() != model.inputs()) {
        throw InvalidInputError("plant_step: state or input dimension mismatch");
    }
    PlantStep step;
    step.x_next = model.A() * x + model.B() * u;
    if (Vector w = sampler.process(rng); w.size()) {
        step.x_next += w;
    }
    step.y_next = model.C() * step.x_next;
    if (Vector v = sampler.measurement(rng); v.size()) {
        step.y_next += v;
    }
    return step;
}

Matrix SimulationTrace::tracking_error() const {
    const auto rows = static_cast<Eigen::Index>(y_meas.size());
    const Eigen::Index l = rows ? y_meas.front().size() : 0;
    Matrix err(rows, l);
    for (Eigen::Index k = 0; k < rows; ++k) {
        err.row(k) = (y_ref[k] - y_meas[k]).transpose();
    }
    return err;
}

Vector mean_squared_error(const Matrix& errors) {
    if (errors.rows() == 0) {
        return Vector::Zero(errors.cols());
    }
    if (errors.rows() == 1) {
        return errors.row(0).cwiseAbs2().transpose();
    }
    const auto tail = errors.bottomRows(errors.rows() - 1);
    return tail.cwiseAbs2().colwise().mean().transpose();
}

SimulationTrace run_closed_loop(const StateSpaceModel& plant, const NoiseSpec& plant_noise,
                                Controller& controller, const ReferenceSignal& reference,
                                int steps, const Vector& x0, std::uint64_t seed) {
    const int n = plant.states();
    const int p = plant.inputs();
    const int l = plant.outputs();
    if (steps < 0) {
        throw InvalidInputError("run_closed_loop: steps must be >= 0");
    }
    if (controller.input_dim() != p || controller.output_dim() != l) {
        throw InvalidInputError("run_closed_loop: controller does not match the plant shape");
    }
    if (reference.channels() != l) {
        throw InvalidInputError("run_closed_loop: reference channels must equal plant outputs");
    }
    if (reference.last_index() < steps) {
        throw InvalidInputError("run_closed_loop: reference must be defined for k = 0 .. T");
    }
    plant_noise.validate(plant);

    SimulationTrace trace;
    trace.seed = seed;
    trace.model_hash = plant.hash();
    trace.controller = controller.name();
    trace.dt = plant.dt();
    for (auto* seq : {&trace.x_true, &trace.y_meas, &trace.y_ref, &trace.u_applied,
                      &trace.y_pred}) {
        seq->reserve(static_cast<std::size_t>(steps) + 1);
    }

    Rng rng(seed);
    const NoiseSampler sampler(plant_noise);

    Vector x = x0.size() ? x0 : Vector::Zero(n);
    if (x.size() != n) {
        throw InvalidInputError("run_closed_loop: x0 has the wrong dimension");
    }
    Vector y = plant.C() * x;
    if (Vector v = sampler.measurement(rng); v.size()) {
        y += v;
    }

    for (int k = 0; k <= steps; ++k) {
        Vector ref_now = reference.at(k);
        trace.x_true.push_back(x);
        trace.y_meas.push_back(y);
        trace.y_ref.push_back(ref_now);

        if (k == steps) {
            trace.u_applied.push_back(Vector::Zero(p));
            trace.y_pred.push_back(Vector::Zero(l));
            break;
        }

        Vector u;
        try {
            u = controller.step(y, ref_now, reference.at(k + 1));
        } catch (const InfeasibleError& e) {
            rethrow_at_step(e, k);
        } catch (const NumericalFailureError& e) {
            rethrow_at_step(e, k);
        } catch (const UnsupportedShapeError& e) {
            rethrow_at_step(e, k);
        } catch (const InvalidInputError& e) {
            rethrow_at_step(e, k);
        }
        if (!u.allFinite()) {
            throw NumericalFailureError("step " + std::to_string(k) +
                                        ": control input is not finite");
        }
        trace.u_applied.push_back(u);
        trace.y_pred.push_back(controller.predicted_output());

        PlantStep next = plant_step(plant, sampler, x, u, rng);
        x = std::move(next.x_next);
        y = std::move(next.y_next);
    }
    return trace;
}

SimulationTrace run_scenario(const Scenario& scenario, std::uint64_t seed) {
    std::unique_ptr<Controller> controller = scenario.make_controller();
    return run_closed_loop(scenario.plant, scenario.plant_noise, *controller, scenario.reference,
                           scenario.steps, scenario.x0, seed);
}

int default_thread_count() {
    if (const char* env = std::getenv("CIR_THREADS")) {
        const int requested = std::atoi(env);
        if (requested > 0) {
            return requested;
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

MonteCarloSummary monte_carlo(const Scenario& scenario, int runs, std::uint64_t base_seed,
                              int threads) {
    if (runs < 1) {
        throw InvalidInputError("monte_carlo: runs must be >= 1");
    }
    if (!scenario.make_controller) {
        throw InvalidInputError("monte_carlo: scenario has no controller factory");
    }
    const int workers = std::clamp(threads > 0 ? threads : default_thread_count(), 1, runs);

    std::vector<Matrix> errors(static_cast<std::size_t>(runs));
    std::atomic<int> next_run{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (int i = next_run++; i < runs; i = next_run++) {
            try {
                errors[static_cast<std::size_t>(i)] =
                    run_scenario(scenario, base_seed + static_cast<std::uint64_t>(i))
                        .tracking_error();
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next_run = runs;
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t) {
            pool.emplace_back(worker);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    const Eigen::Index rows = errors.front().rows();
    const Eigen::Index l = errors.front().cols();
    MonteCarloSummary summary;
    summary.runs = runs;
    summary.mean_error = Matrix::Zero(rows, l);
    summary.run_mse.resize(runs, l);
    for (int i = 0; i < runs; ++i) {
        summary.mean_error += errors[static_cast<std::size_t>(i)];
        summary.run_mse.row(i) = mean_squared_error(errors[static_cast<std::size_t>(i)]).transpose();
    }
    summary.mean_error /= runs;

    summary.std_error = Matrix::Zero(rows, l);
    if (runs > 1) {
        for (const Matrix& e : errors) {
            summary.std_error += (e - summary.mean_error).cwiseAbs2();
        }
        summary.std_error = (summary.std_error / (runs - 1)).cwiseSqrt();
    }
    summary.mse_per_channel = summary.run_mse.colwise().mean().transpose();
    return summary;
}

void write_trace_csv(std::ostream& out, const SimulationTrace& trace,
                     const Matrix& raw_reference) {
    if (trace.y_meas.empty()) {
        return;
    }
    const Eigen::Index l = trace.y_meas.front().size();
    const Eigen::Index p = trace.u_applied.front().size();
    const bool with_raw = raw_reference.size() > 0;
    if (with_raw && (raw_reference.rows() < static_cast<Eigen::Index>(trace.y_meas.size()) ||
                     raw_reference.cols() != l)) {
        throw InvalidInputError("write_trace_csv: raw reference does not cover the trace");
    }

    out << "k,t";
    for (Eigen::Index i = 1; i <= l; ++i) out << ",y_ref_" << i;
    for (Eigen::Index i = 1; i <= l; ++i) out << ",y_" << i;
    for (Eigen::Index i = 1; i <= p; ++i) out << ",u_" << i;
    for (Eigen::Index i = 1; i <= l; ++i) out << ",err_" << i;
    if (with_raw) {
        for (Eigen::Index i = 1; i <= l; ++i) out << ",y_ref_raw_" << i;
    }
    out << '\n';

    const auto old_precision = out.precision(12);
    for (std::size_t k = 0; k < trace.y_meas.size(); ++k) {
        out << k;
        write_number(out, time_of(static_cast<int>(k), trace.dt));
        for (Eigen::Index i = 0; i < l; ++i) write_number(out, trace.y_ref[k](i));
        for (Eigen::Index i = 0; i < l; ++i) write_number(out, trace.y_meas[k](i));
        for (Eigen::Index i = 0; i < p; ++i) write_number(out, trace.u_applied[k](i));
        for (Eigen::Index i = 0; i < l; ++i) write_number(out, trace.y_ref[k](i) - trace.y_meas[k](i));
        if (with_raw) {
            for (Eigen::Index i = 0; i < l; ++i) {
                write_number(out, raw_reference(static_cast<Eigen::Index>(k), i));
            }
        }
        out << '\n';
    }
    out.precision(old_precision);
}

void write_monte_carlo_csv(std::ostream& out, const MonteCarloSummary& summary, double dt) {
    const Eigen::Index l = summary.mean_error.cols();
    out << "k,t";
    for (Eigen::Index i = 1; i <= l; ++i) out << ",mean_err_" << i;
    for (Eigen::Index i = 1; i <= l; ++i) out << ",std_err_" << i;
    out << '\n';

    const auto old_precision = out.precision(12);
    for (Eigen::Index k = 0; k < summary.mean_error.rows(); ++k) {
        out << k;
        write_number(out, time_of(static_cast<int>(k), dt));
        for (Eigen::Index i = 0; i < l; ++i) write_number(out, summary.mean_error(k, i));
        for (Eigen::Index i = 0; i < l; ++i) write_number(out, summary.std_error(k, i));
        out << '\n';
    }
    out.precision(old_precision);
}

void write_mse_lines(std::ostream& out, const Vector& mse) {
    const auto old_precision = out.precision(12);
    for (Eigen::Index i = 0; i < mse.size(); ++i) {
        out << "mse," << (i + 1) << ',' << mse(i) << '\n';
    }
    out.precision(old_precision);
}

} // namespace cir
