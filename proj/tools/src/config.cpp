#include "cir/cli/config.hpp"

#include "cir/squaring.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

namespace cir::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

std::string child(const std::string& where, const std::string& key) {
    return where + "/" + key;
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
        fail(where.empty() ? "/" : where, "expected an object");
    }
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* name : allowed) {
            known = known || key == name;
        }
        if (!known) {
            fail(child(where, key), "unknown field");
        }
    }
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) {
        fail(where, "expected a number");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        fail(where, "expected a finite number");
    }
    return x;
}

int integer(const json& v, const std::string& where, int min_value) {
    if (!v.is_number_integer()) {
        fail(where, "expected an integer");
    }
    const auto x = v.get<long long>();
    if (x < min_value || x > std::numeric_limits<int>::max()) {
        fail(where, "expected an integer >= " + std::to_string(min_value));
    }
    return static_cast<int>(x);
}

bool boolean(const json& v, const std::string& where) {
    if (!v.is_boolean()) {
        fail(where, "expected true or false");
    }
    return v.get<bool>();
}

std::string text(const json& v, const std::string& where) {
    if (!v.is_string()) {
        fail(where, "expected a string");
    }
    return v.get<std::string>();
}

Vector vector_of(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) {
        fail(where, "expected a non-empty array of numbers");
    }
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = number(v[i], child(where, std::to_string(i)));
    }
    return out;
}

// Array of row arrays.
Matrix matrix_of(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) {
        fail(where, "expected a matrix as a non-empty array of rows");
    }
    const auto rows = static_cast<Eigen::Index>(v.size());
    Eigen::Index cols = -1;
    Matrix out;
    for (Eigen::Index i = 0; i < rows; ++i) {
        const std::string row_where = child(where, std::to_string(i));
        const Vector row = vector_of(v[static_cast<std::size_t>(i)], row_where);
        if (cols < 0) {
            cols = row.size();
            out.resize(rows, cols);
        } else if (row.size() != cols) {
            fail(row_where, "row length " + std::to_string(row.size()) + " differs from " +
                                std::to_string(cols));
        }
        out.row(i) = row.transpose();
    }
    return out;
}

// Scalar (times identity), diagonal, or full matrix.
Matrix square_of(const json& v, Eigen::Index size, const std::string& where) {
    if (v.is_number()) {
        return number(v, where) * Matrix::Identity(size, size);
    }
    if (v.is_array() && !v.empty() && v[0].is_number()) {
        const Vector d = vector_of(v, where);
        if (d.size() != size) {
            fail(where, "expected " + std::to_string(size) + " diagonal entries");
        }
        return d.asDiagonal();
    }
    const Matrix m = matrix_of(v, where);
    if (m.rows() != size || m.cols() != size) {
        fail(where, "expected a " + std::to_string(size) + "x" + std::to_string(size) + " matrix");
    }
    return m;
}

json read_json(const std::filesystem::path& path, const std::string& where) {
    std::ifstream in(path);
    if (!in) {
        fail(where, "cannot open '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        fail(path.string(), e.what());
    }
}

StateSpaceModel parse_model(const json& root, const std::filesystem::path& base_dir) {
    const std::string where = "/model";
    if (!root.contains("model")) {
        fail(where, "missing");
    }
    json spec = root["model"];
    check_keys(spec, where, {"A", "B", "C", "continuous", "dt", "path"});
    if (spec.contains("path")) {
        std::filesystem::path file = text(spec["path"], child(where, "path"));
        if (file.is_relative()) {
            file = base_dir / file;
        }
        json loaded = read_json(file, child(where, "path"));
        check_keys(loaded, file.string(), {"A", "B", "C", "continuous", "dt"});
        for (const auto& [key, value] : spec.items()) {
            if (key != "path") {
                loaded[key] = value;
            }
        }
        spec = std::move(loaded);
    }
    for (const char* key : {"A", "B", "C"}) {
        if (!spec.contains(key)) {
            fail(child(where, key), "missing");
        }
    }
    const Matrix A = matrix_of(spec["A"], child(where, "A"));
    const Matrix B = matrix_of(spec["B"], child(where, "B"));
    const Matrix C = matrix_of(spec["C"], child(where, "C"));
    const bool continuous = spec.contains("continuous") &&
                            boolean(spec["continuous"], child(where, "continuous"));
    const double dt = spec.contains("dt") ? number(spec["dt"], child(where, "dt")) : 0.0;
    try {
        if (continuous) {
            if (dt <= 0.0) {
                fail(child(where, "dt"), "a continuous model needs dt > 0");
            }
            return StateSpaceModel::from_continuous(A, B, C, dt);
        }
        return StateSpaceModel(A, B, C, dt);
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidInputError& e) {
        fail(where, e.what());
    }
}

ChannelReference parse_channel(const json& v, const std::string& where) {
    check_keys(v, where, {"kind", "amplitude", "period", "offset", "phase", "start"});
    ChannelReference c;
    if (!v.contains("kind")) {
        fail(child(where, "kind"), "missing");
    }
    try {
        c.kind = parse_reference_kind(text(v["kind"], child(where, "kind")));
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidInputError& e) {
        fail(child(where, "kind"), e.what());
    }
    if (v.contains("amplitude")) c.amplitude = number(v["amplitude"], child(where, "amplitude"));
    if (v.contains("period")) c.period = number(v["period"], child(where, "period"));
    if (v.contains("offset")) c.offset = number(v["offset"], child(where, "offset"));
    if (v.contains("phase")) c.phase = number(v["phase"], child(where, "phase"));
    if (v.contains("start")) c.start = integer(v["start"], child(where, "start"), 0);
    if (c.period <= 0.0) {
        fail(child(where, "period"), "must be positive");
    }
    return c;
}

ReferenceSignal parse_reference(const json& root) {
    const std::string where = "/reference";
    if (!root.contains("reference")) {
        fail(where, "missing");
    }
    const json& spec = root["reference"];
    check_keys(spec, where, {"channels", "samples"});
    if (spec.contains("channels") == spec.contains("samples")) {
        fail(where, "give exactly one of 'channels' or 'samples'");
    }
    if (spec.contains("samples")) {
        return ReferenceSignal::sampled(matrix_of(spec["samples"], child(where, "samples")));
    }
    const json& list = spec["channels"];
    const std::string list_where = child(where, "channels");
    if (!list.is_array() || list.empty()) {
        fail(list_where, "expected a non-empty array");
    }
    std::vector<ChannelReference> channels;
    for (std::size_t i = 0; i < list.size(); ++i) {
        channels.push_back(parse_channel(list[i], child(list_where, std::to_string(i))));
    }
    return ReferenceSignal::generated(std::move(channels));
}

void check_dims(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const std::string& where) {
    if (m.rows() != rows || m.cols() != cols) {
        std::ostringstream msg;
        msg << "expected " << rows << "x" << cols << ", got " << m.rows() << "x" << m.cols();
        fail(where, msg.str());
    }
}

} // namespace

NonSquareMode parse_nonsquare_mode(const std::string& name) {
    if (name == "none") return NonSquareMode::None;
    if (name == "input-transform") return NonSquareMode::InputTransform;
    if (name == "project") return NonSquareMode::Project;
    if (name == "drop-outputs") return NonSquareMode::DropOutputs;
    throw ConfigError("unknown non-square mode '" + name +
                      "' (expected none, input-transform, project or drop-outputs)");
}

std::string to_string(NonSquareMode mode) {
    switch (mode) {
    case NonSquareMode::None: return "none";
    case NonSquareMode::InputTransform: return "input-transform";
    case NonSquareMode::Project: return "project";
    case NonSquareMode::DropOutputs: return "drop-outputs";
    }
    return "none";
}

ExperimentConfig parse_config(const std::string& source, const std::filesystem::path& base_dir) {
    json root;
    try {
        root = json::parse(source);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    check_keys(root, "", {"model", "noise", "controller", "reference", "steps", "runs", "x0",
                          "nonsquare", "output"});

    StateSpaceModel model = parse_model(root, base_dir);
    const auto n = static_cast<Eigen::Index>(model.states());
    const auto l = static_cast<Eigen::Index>(model.outputs());

    NoiseSpec noise = NoiseSpec::zero(model.states(), model.outputs());
    bool inject = true;
    if (root.contains("noise")) {
        const json& spec = root["noise"];
        check_keys(spec, "/noise", {"Q", "R", "seed", "inject"});
        if (spec.contains("Q")) noise.Q = square_of(spec["Q"], n, "/noise/Q");
        if (spec.contains("R")) noise.R = square_of(spec["R"], l, "/noise/R");
        if (spec.contains("seed")) noise.seed = static_cast<std::uint64_t>(integer(spec["seed"], "/noise/seed", 0));
        if (spec.contains("inject")) inject = boolean(spec["inject"], "/noise/inject");
    }
    try {
        noise.validate(model);
    } catch (const InvalidInputError& e) {
        fail("/noise", e.what());
    }

    ControllerKind controller = ControllerKind::Cir;
    CirOptions estimator;
    LqgWeights lqg;
    if (root.contains("controller")) {
        const json& spec = root["controller"];
        check_keys(spec, "/controller", {"type", "x0_hat", "P0", "lqg"});
        if (spec.contains("type")) {
            const std::string type = text(spec["type"], "/controller/type");
            if (type == "cir") {
                controller = ControllerKind::Cir;
            } else if (type == "lqg") {
                controller = ControllerKind::Lqg;
            } else {
                fail("/controller/type", "expected 'cir' or 'lqg', got '" + type + "'");
            }
        }
        if (spec.contains("x0_hat")) {
            estimator.x_hat0 = vector_of(spec["x0_hat"], "/controller/x0_hat");
            if (estimator.x_hat0.size() != n) {
                fail("/controller/x0_hat", "expected " + std::to_string(n) + " entries");
            }
        }
        if (spec.contains("P0")) estimator.P0 = square_of(spec["P0"], n, "/controller/P0");
        if (spec.contains("lqg")) {
            const json& w = spec["lqg"];
            check_keys(w, "/controller/lqg", {"state_weight", "input_weight", "least_squares_target"});
            if (w.contains("state_weight")) {
                lqg.state_weight = square_of(w["state_weight"], n, "/controller/lqg/state_weight");
            }
            if (w.contains("input_weight")) {
                lqg.input_weight = square_of(w["input_weight"], model.inputs(),
                                             "/controller/lqg/input_weight");
            }
            if (w.contains("least_squares_target")) {
                lqg.least_squares_target =
                    boolean(w["least_squares_target"], "/controller/lqg/least_squares_target");
            }
        }
    }

    if (!root.contains("steps")) {
        fail("/steps", "missing");
    }
    const int steps = integer(root["steps"], "/steps", 0);
    const int runs = root.contains("runs") ? integer(root["runs"], "/runs", 1) : 1;

    Vector x0;
    if (root.contains("x0")) {
        x0 = vector_of(root["x0"], "/x0");
        if (x0.size() != n) {
            fail("/x0", "expected " + std::to_string(n) + " entries");
        }
    }

    NonSquareMode mode = NonSquareMode::None;
    std::vector<int> keep;
    if (root.contains("nonsquare")) {
        const json& spec = root["nonsquare"];
        check_keys(spec, "/nonsquare", {"mode", "keep"});
        if (spec.contains("mode")) {
            try {
                mode = parse_nonsquare_mode(text(spec["mode"], "/nonsquare/mode"));
            } catch (const ConfigError& e) {
                fail("/nonsquare/mode", e.what());
            }
        }
        if (spec.contains("keep")) {
            const json& list = spec["keep"];
            if (!list.is_array() || list.empty()) {
                fail("/nonsquare/keep", "expected a non-empty array of 1-based output indices");
            }
            for (std::size_t i = 0; i < list.size(); ++i) {
                const std::string w = "/nonsquare/keep/" + std::to_string(i);
                const int index = integer(list[i], w, 1);
                if (index > l) {
                    fail(w, "output index " + std::to_string(index) + " exceeds l = " +
                                std::to_string(l));
                }
                keep.push_back(index - 1);
            }
        }
        if (mode == NonSquareMode::DropOutputs && keep.empty()) {
            fail("/nonsquare/keep", "drop-outputs needs the outputs to keep");
        }
        if (mode != NonSquareMode::DropOutputs && !keep.empty()) {
            fail("/nonsquare/keep", "only used by drop-outputs");
        }
    }

    std::optional<std::filesystem::path> trace_path;
    std::optional<std::filesystem::path> summary_path;
    if (root.contains("output")) {
        const json& spec = root["output"];
        check_keys(spec, "/output", {"trace", "summary"});
        if (spec.contains("trace")) trace_path = text(spec["trace"], "/output/trace");
        if (spec.contains("summary")) summary_path = text(spec["summary"], "/output/summary");
    }

    ReferenceSignal reference = parse_reference(root);
    const Eigen::Index expected_channels =
        mode == NonSquareMode::DropOutputs ? static_cast<Eigen::Index>(keep.size()) : l;
    if (reference.channels() != expected_channels && reference.channels() != l) {
        fail("/reference", "expected " + std::to_string(expected_channels) + " channels, got " +
                               std::to_string(reference.channels()));
    }
    if (reference.is_sampled() && reference.last_index() < steps) {
        fail("/reference/samples", "needs steps + 1 = " + std::to_string(steps + 1) + " rows");
    }
    if (estimator.P0.size() != 0) {
        check_dims(estimator.P0, n, n, "/controller/P0");
    }

    return ExperimentConfig{std::move(model), std::move(noise), inject, controller,
                            std::move(estimator), std::move(lqg), std::move(reference),
                            steps, runs, std::move(x0), mode, std::move(keep),
                            std::move(trace_path), std::move(summary_path)};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path.string() + ": cannot open config file");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_config(buffer.str(), path.parent_path());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

} // namespace cir::cli
