#pragma once

#include <memory>
#include <span>
#include <vector>

#include "cir/controller.hpp"

namespace cir {

// Squaring transform for systems with fewer outputs than inputs (l < p):
// the plant is driven through u = N ũ with N = (CB)†, so the modified model
// (A, B N, C) has l inputs and l outputs.
struct InputTransform {
    Matrix N; // p x l
    StateSpaceModel model_tilde;
};

// Requires l <= p and rank(CB) = l (InfeasibleError otherwise);
// l > p raises UnsupportedShapeError.
InputTransform make_input_transform(const StateSpaceModel& model);

Vector lift_input(const InputTransform& transform, const Vector& u_tilde);

// Stacked output/input relation over a horizon of r samples:
//   [y_1; ...; y_r] = Gamma x_0 + M [u_0; ...; u_{r-1}]
// Gamma row-block i is C A^i, M block (i, j) is C A^{i-j} B for j <= i.
struct BatchMatrices {
    int horizon = 0;
    Matrix Gamma; // (r l) x n
    Matrix M;     // (r l) x (r p)
};

BatchMatrices batch_matrices(const StateSpaceModel& model, int horizon);

// Orthogonal projection M (Mᵀ M)† Mᵀ Y onto range(M).
Vector project_reference(const Vector& Y_ref, const Matrix& M);

// Batch matrices describing the same reachable output sequences,
// {Γ x0 + M U}, but built from a realization whose Markov parameters decay.
// With unstable A the entries of the plain M grow like ρ(A)^r and the
// projection loses all accuracy; state feedback u = -K x + v (K from dlqr)
// maps input sequences one to one and leaves the reachable set unchanged.
BatchMatrices reachable_batch(const StateSpaceModel& model, int horizon);

// Restricts C to the listed output rows (zero-based, distinct). The result
// must satisfy rank(C_keep B) = p and have exactly p outputs; otherwise
// InfeasibleError / InvalidInputError.
StateSpaceModel drop_outputs(const StateSpaceModel& model, std::span<const int> keep);

// Stack a sequence of equally sized vectors into one column, and back.
Vector stack(std::span<const Vector> blocks);
std::vector<Vector> unstack(const Vector& stacked, int block_size);

// Runs CIR on the squared model and applies N ũ to the original plant.
class LiftedCirController final : public Controller {
public:
    LiftedCirController(InputTransform transform, NoiseSpec noise, CirOptions options = {});

    std::string name() const override { return "cir-lifted"; }
    int input_dim() const override { return static_cast<int>(transform_.N.rows()); }
    int output_dim() const override { return inner_.output_dim(); }

    Vector step(const Vector& y_meas, const Vector& ref_now, const Vector& ref_next) override;
    const Vector& predicted_output() const override { return inner_.predicted_output(); }

    const InputTransform& transform() const { return transform_; }
    const CirController& inner() const { return inner_; }

private:
    InputTransform transform_;
    CirController inner_;
};

} // namespace cir
