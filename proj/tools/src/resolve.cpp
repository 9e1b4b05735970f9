#include "cir/cli/config.hpp"

#include "cir/squaring.hpp"

#include <memory>

namespace cir::cli {

namespace {

Matrix reference_matrix(const ReferenceSignal& reference, int steps) {
    return reference.window(0, steps);
}

Matrix select_columns(const Matrix& m, const std::vector<int>& keep) {
    Matrix out(m.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
        out.col(static_cast<Eigen::Index>(i)) = m.col(keep[i]);
    }
    return out;
}

Matrix select_square(const Matrix& m, const std::vector<int>& keep) {
    Matrix out(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
        for (std::size_t j = 0; j < keep.size(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(keep[i], keep[j]);
        }
    }
    return out;
}

// Projects y_ref,1 .. y_ref,T onto Γ x0 + range(M_T); row 0 is kept as is.
Matrix projected_reference(const StateSpaceModel& model, const Matrix& raw, const Vector& x0) {
    const int steps = static_cast<int>(raw.rows()) - 1;
    if (steps < 1) {
        return raw;
    }
    const auto batch = reachable_batch(model, steps);
    const Eigen::Index l = raw.cols();
    Vector Y(steps * l);
    for (int k = 1; k <= steps; ++k) {
        Y.segment((k - 1) * l, l) = raw.row(k).transpose();
    }
    const Vector offset = batch.Gamma * x0;
    const Vector projected = offset + project_reference(Y - offset, batch.M);
    Matrix out = raw;
    for (int k = 1; k <= steps; ++k) {
        out.row(k) = projected.segment((k - 1) * l, l).transpose();
    }
    return out;
}

} // namespace

ResolvedExperiment resolve(const ExperimentConfig& config) {
    const StateSpaceModel& model = config.model;
    const int n = model.states();
    Vector x0 = config.x0.size() ? config.x0 : Vector::Zero(n);
    NoiseSpec noise = config.noise;
    ReferenceSignal reference = config.reference;
    std::optional<StateSpaceModel> plant;
    std::optional<StateSpaceModel> design;
    std::optional<InputTransform> transform;
    Matrix raw;

    switch (config.mode) {
    case NonSquareMode::None:
        if (!model.is_square()) {
            throw UnsupportedShapeError(
                "model has " + std::to_string(model.outputs()) + " outputs and " +
                std::to_string(model.inputs()) +
                " inputs; select a non-square mode (input-transform, project or drop-outputs)");
        }
        plant = model;
        design = model;
        break;
    case NonSquareMode::InputTransform:
        if (config.controller != ControllerKind::Cir) {
            throw ConfigError("/controller/type: input-transform is only available for cir");
        }
        transform = make_input_transform(model);
        plant = model;
        design = transform->model_tilde;
        break;
    case NonSquareMode::Project:
        if (model.outputs() <= model.inputs()) {
            throw ConfigError("/nonsquare/mode: project needs more outputs than inputs");
        }
        raw = reference_matrix(reference, config.steps);
        reference = ReferenceSignal::sampled(projected_reference(model, raw, x0));
        plant = model;
        design = model;
        break;
    case NonSquareMode::DropOutputs: {
        plant = drop_outputs(model, config.keep);
        design = plant;
        noise.R = select_square(noise.R, config.keep);
        if (reference.channels() != plant->outputs()) {
            reference = ReferenceSignal::sampled(
                select_columns(reference_matrix(reference, config.steps), config.keep));
        }
        break;
    }
    }

    const NoiseSpec plant_noise =
        config.inject_noise ? noise : NoiseSpec::zero(plant->states(), plant->outputs(), noise.seed);

    std::function<std::unique_ptr<Controller>()> factory;
    const CirOptions options = config.estimator;
    if (transform) {
        factory = [t = *transform, noise, options] {
            return std::make_unique<LiftedCirController>(t, noise, options);
        };
    } else if (config.controller == ControllerKind::Lqg) {
        factory = [m = *design, noise, options, weights = config.lqg] {
            return std::make_unique<LqgController>(m, noise, weights, options);
        };
    } else {
        factory = [m = *design, noise, options] {
            return std::make_unique<CirController>(m, noise, options);
        };
    }
    // Build one controller up front so construction errors surface before any run.
    factory();

    Scenario scenario{*plant, plant_noise, std::move(factory), std::move(reference),
                      config.steps, x0};
    return ResolvedExperiment{*plant, *design, std::move(scenario), std::move(raw)};
}

} // namespace cir::cli
