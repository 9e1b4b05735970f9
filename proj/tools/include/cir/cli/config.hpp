#pragma once

#include "cir/controller.hpp"
#include "cir/errors.hpp"
#include "cir/lqg.hpp"
#include "cir/model.hpp"
#include "cir/reference.hpp"
#include "cir/sim.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cir::cli {

// Malformed configuration; the message names the offending field as a JSON
// pointer (e.g. "/noise/Q") or the parse position.
class ConfigError : public InvalidInputError {
public:
    using InvalidInputError::InvalidInputError;
};

enum class ControllerKind { Cir, Lqg };
enum class NonSquareMode { None, InputTransform, Project, DropOutputs };

NonSquareMode parse_nonsquare_mode(const std::string& name);
std::string to_string(NonSquareMode mode);

struct ExperimentConfig {
    StateSpaceModel model;      // discretized when the source was continuous
    NoiseSpec noise;            // filter tuning; also the plant noise when inject_noise
    bool inject_noise = true;
    ControllerKind controller = ControllerKind::Cir;
    CirOptions estimator;
    LqgWeights lqg;
    ReferenceSignal reference;
    int steps = 0;
    int runs = 1;
    Vector x0;                  // empty means zero
    NonSquareMode mode = NonSquareMode::None;
    std::vector<int> keep;      // 0-based, drop-outputs only
    std::optional<std::filesystem::path> trace_path;
    std::optional<std::filesystem::path> summary_path;
};

// Relative model paths resolve against `base_dir`.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

// A config turned into something runnable. For drop-outputs the plant is the
// reduced model; for project the reference is replaced by its projection
// onto the reachable output sequences and the original kept in raw_reference.
struct ResolvedExperiment {
    StateSpaceModel plant;
    StateSpaceModel design_model; // square model the controller is built on
    Scenario scenario;
    Matrix raw_reference;         // (T + 1) x l, project mode only
};

ResolvedExperiment resolve(const ExperimentConfig& config);

} // namespace cir::cli
