#include "cir/squaring.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>

#include "cir/errors.hpp"
#include "cir/lqg.hpp"

namespace cir {

InputTransform make_input_transform(const StateSpaceModel& model) {
    const int l = model.outputs();
    const int p = model.inputs();
    if (l > p) {
        throw UnsupportedShapeError(
            "make_input_transform: needs l <= p; use projection or output dropping for l > p");
    }
    const Matrix V = model.CB();
    const int rank = numerical_rank(V);
    if (rank < l) {
        std::ostringstream msg;
        msg << "make_input_transform: rank(CB) = " << rank << " < l = " << l;
        throw InfeasibleError(msg.str());
    }
    Matrix N = pinv(V);
    Matrix B_tilde = model.B() * N;
    return {std::move(N), StateSpaceModel(model.A(), std::move(B_tilde), model.C(), model.dt())};
}

Vector lift_input(const InputTransform& transform, const Vector& u_tilde) {
    if (u_tilde.size() != transform.N.cols()) {
        throw InvalidInputError("lift_input: expected an input of dimension l");
    }
    return transform.N * u_tilde;
}

BatchMatrices batch_matrices(const StateSpaceModel& model, int horizon) {
    if (horizon < 1) {
        throw InvalidInputError("batch_matrices: horizon must be >= 1");
    }
    const int n = model.states();
    const int p = model.inputs();
    const int l = model.outputs();
    const Matrix& A = model.A();

    // markov[i] = C A^i B, powers[i] = C A^{i+1}
    std::vector<Matrix> markov;
    markov.reserve(horizon);
    BatchMatrices out;
    out.horizon = horizon;
    out.Gamma.resize(static_cast<Eigen::Index>(horizon) * l, n);
    out.M = Matrix::Zero(static_cast<Eigen::Index>(horizon) * l,
                         static_cast<Eigen::Index>(horizon) * p);

    Matrix CAi = model.C(); // C A^i
    for (int i = 0; i < horizon; ++i) {
        markov.push_back(CAi * model.B());
        CAi = CAi * A;
        out.Gamma.middleRows(static_cast<Eigen::Index>(i) * l, l) = CAi;
    }
    for (int i = 0; i < horizon; ++i) {
        for (int j = 0; j <= i; ++j) {
            out.M.block(static_cast<Eigen::Index>(i) * l, static_cast<Eigen::Index>(j) * p, l,
                        p) = markov[i - j];
        }
    }
    return out;
}

Vector project_reference(const Vector& Y_ref, const Matrix& M) {
    if (Y_ref.size() != M.rows()) {
        throw InvalidInputError("project_reference: Y_ref length must equal rows(M)");
    }
    // Same operator as M (Mᵀ M)† Mᵀ, evaluated through an orthonormal basis of
    // range(M): the Gram matrix squares the condition number of M.
    Vector scale = M.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < scale.size(); ++j) {
        scale(j) = scale(j) > 0.0 ? 1.0 / scale(j) : 0.0;
    }
    const Matrix balanced = M * scale.asDiagonal();
    Eigen::ColPivHouseholderQR<Matrix> qr(balanced);
    qr.setThreshold(static_cast<double>(std::max(M.rows(), M.cols())) *
                    std::numeric_limits<double>::epsilon());
    const Eigen::Index rank = qr.rank();
    const Matrix Q = qr.householderQ() * Matrix::Identity(M.rows(), rank);
    return Q * (Q.transpose() * Y_ref);
}

BatchMatrices reachable_batch(const StateSpaceModel& model, int horizon) {
    double radius = 0.0;
    for (const auto& z : eigenvalues(model.A())) {
        radius = std::max(radius, std::abs(z));
    }
    if (radius < 1.0) {
        return batch_matrices(model, horizon);
    }
    const auto lqr = dlqr(model.A(), model.B(), Matrix::Identity(model.states(), model.states()),
                          Matrix::Identity(model.inputs(), model.inputs()));
    const StateSpaceModel closed(model.A() - model.B() * lqr.K, model.B(), model.C(), model.dt());
    return batch_matrices(closed, horizon);
}

StateSpaceModel drop_outputs(const StateSpaceModel& model, std::span<const int> keep) {
    const int l = model.outputs();
    const int p = model.inputs();
    std::set<int> seen;
    for (int idx : keep) {
        if (idx < 0 || idx >= l) {
            throw InvalidInputError("drop_outputs: output index out of range");
        }
        if (!seen.insert(idx).second) {
            throw InvalidInputError("drop_outputs: duplicate output index");
        }
    }
    if (static_cast<int>(keep.size()) != p) {
        std::ostringstream msg;
        msg << "drop_outputs: must keep exactly p = " << p << " outputs (got " << keep.size()
            << ")";
        throw InvalidInputError(msg.str());
    }

    Matrix C_keep(static_cast<Eigen::Index>(keep.size()), model.states());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        C_keep.row(static_cast<Eigen::Index>(i)) = model.C().row(keep[i]);
    }
    const int rank = numerical_rank(C_keep * model.B());
    if (rank < p) {
        std::ostringstream msg;
        msg << "drop_outputs: rank(C_keep B) = " << rank << " < p = " << p;
        throw InfeasibleError(msg.str());
    }
    return StateSpaceModel(model.A(), model.B(), std::move(C_keep), model.dt());
}

Vector stack(std::span<const Vector> blocks) {
    if (blocks.empty()) {
        return {};
    }
    const Eigen::Index size = blocks.front().size();
    Vector out(size * static_cast<Eigen::Index>(blocks.size()));
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (blocks[i].size() != size) {
            throw InvalidInputError("stack: blocks must share one size");
        }
        out.segment(static_cast<Eigen::Index>(i) * size, size) = blocks[i];
    }
    return out;
}

std::vector<Vector> unstack(const Vector& stacked, int block_size) {
    if (block_size <= 0 || stacked.size() % block_size != 0) {
        throw InvalidInputError("unstack: length is not a multiple of the block size");
    }
    std::vector<Vector> out;
    for (Eigen::Index i = 0; i < stacked.size(); i += block_size) {
        out.emplace_back(stacked.segment(i, block_size));
    }
    return out;
}

LiftedCirController::LiftedCirController(InputTransform transform, NoiseSpec noise,
                                         CirOptions options)
    : transform_(std::move(transform)),
      inner_(transform_.model_tilde, std::move(noise), std::move(options)) {}

Vector LiftedCirController::step(const Vector& y_meas, const Vector& ref_now,
                                 const Vector& ref_next) {
    return lift_input(transform_, inner_.step(y_meas, ref_now, ref_next));
}

} // namespace cir
