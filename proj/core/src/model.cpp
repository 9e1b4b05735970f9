#include "cir/model.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <sstream>

#include "cir/errors.hpp"

namespace cir {

StateSpaceModel::StateSpaceModel(Matrix A, Matrix B, Matrix C, double dt)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)), dt_(dt) {
    if (A_.rows() == 0 || B_.cols() == 0 || C_.rows() == 0) {
        throw InvalidInputError("state-space model: n, p and l must be positive");
    }
    if (A_.rows() != A_.cols()) {
        throw InvalidInputError("state-space model: A must be square");
    }
    if (B_.rows() != A_.rows()) {
        throw InvalidInputError("state-space model: B must have n rows");
    }
    if (C_.cols() != A_.rows()) {
        throw InvalidInputError("state-space model: C must have n columns");
    }
    require_finite(A_, "A");
    require_finite(B_, "B");
    require_finite(C_, "C");
    if (!(dt_ >= 0.0) || !std::isfinite(dt_)) {
        throw InvalidInputError("state-space model: dt must be finite and >= 0");
    }
    B_pinv_ = pinv(B_);
}

StateSpaceModel StateSpaceModel::from_continuous(const Matrix& Ac, const Matrix& Bc, Matrix C,
                                                 double dt) {
    auto [Ad, Bd] = zoh_discretize(Ac, Bc, dt);
    return StateSpaceModel(std::move(Ad), std::move(Bd), std::move(C), dt);
}

std::uint64_t StateSpaceModel::hash() const {
    std::uint64_t h = 14695981039346656037ull;
    auto mix_bytes = [&h](const void* data, std::size_t size) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ull;
        }
    };
    auto mix_matrix = [&](const Matrix& M) {
        const std::int64_t dims[2] = {M.rows(), M.cols()};
        mix_bytes(dims, sizeof(dims));
        mix_bytes(M.data(), sizeof(double) * static_cast<std::size_t>(M.size()));
    };
    mix_matrix(A_);
    mix_matrix(B_);
    mix_matrix(C_);
    mix_bytes(&dt_, sizeof(dt_));
    return h;
}

Spectrum invariant_zeros(const StateSpaceModel& model) {
    return invariant_zeros(model.A(), model.B(), model.C());
}

FeasibilityReport check_feasibility(const StateSpaceModel& model) {
    FeasibilityReport report;
    const int p = model.inputs();
    const int l = model.outputs();

    report.rank_B = numerical_rank(model.B());
    report.rank_CB = numerical_rank(model.CB());
    report.ctrb_rank = ctrb_rank(model.A(), model.B());
    report.obsv_rank = obsv_rank(model.A(), model.C());
    report.is_square = (l == p);
    report.is_trackable = report.is_square && report.rank_CB == l;
    report.eigenvalues = eigenvalues(model.A());

    if (report.rank_B < p) {
        std::ostringstream msg;
        msg << "rank(B) = " << report.rank_B << " < p = " << p
            << ": one or more inputs are redundant";
        report.warnings.push_back(msg.str());
    }
    if (report.ctrb_rank < model.states()) {
        report.warnings.push_back("(A, B) is not controllable");
    }
    if (report.obsv_rank < model.states()) {
        report.warnings.push_back("(A, C) is not observable");
    }

    if (report.is_square && report.rank_CB < p) {
        report.warnings.push_back(
            "rank(CB) < p: Rosenbrock pencil is degenerate, zeros not computed");
    }
    if (report.is_trackable) {
        report.zeros = invariant_zeros(model);
        bool inside = true;
        for (const auto& z : *report.zeros) {
            if (std::abs(z) >= 1.0 - kMinPhaseMargin) {
                inside = false;
            }
        }
        report.min_phase = inside;
        if (!inside) {
            report.warnings.push_back(
                "non-minimum-phase zeros: bounded control inputs are not guaranteed");
        }
    }
    return report;
}

ReferenceStep reference_step(const StateSpaceModel& model, const Vector& x_ref,
                             const Vector& u_ref) {
    if (x_ref.size() != model.states() || u_ref.size() != model.inputs()) {
        throw InvalidInputError("reference_step: state or input dimension mismatch");
    }
    ReferenceStep step;
    step.x_next = model.A() * x_ref + model.B() * u_ref;
    step.y_next = model.C() * step.x_next;
    return step;
}

} // namespace cir
