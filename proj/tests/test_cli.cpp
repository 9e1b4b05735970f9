#include "doctest.h"

#include "cir/cli/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace cir;
using namespace cir::cli;

namespace {

const std::filesystem::path kConfigs = CIR_CONFIG_DIR;

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "cir");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "cir_cli_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::filesystem::path write_config(const std::string& name, const std::string& body) {
    const auto path = scratch(name);
    std::ofstream(path) << body;
    return path;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string first_line(const std::string& text) {
    return text.substr(0, text.find('\n'));
}

const char* kScalar = R"({
  "model": {"A": [[0.5]], "B": [[1.0]], "C": [[1.0]]},
  "noise": {"Q": 1e-4, "R": 1e-4, "seed": 3},
  "reference": {"channels": [{"kind": "step"}]},
  "steps": 20
})";

} // namespace

TEST_CASE("config parsing") {
    const auto config = parse_config(kScalar, ".");
    CHECK(config.model.states() == 1);
    CHECK(config.noise.seed == 3);
    CHECK(config.steps == 20);
    CHECK(config.runs == 1);
    CHECK(config.mode == NonSquareMode::None);

    SUBCASE("diagonal and matrix covariance forms") {
        const auto c = parse_config(R"({
          "model": {"A": [[0.5, 0], [0, 0.2]], "B": [[1, 0], [0, 1]], "C": [[1, 0], [0, 1]]},
          "noise": {"Q": [1, 2], "R": [[1, 0.5], [0.5, 1]]},
          "reference": {"samples": [[0, 0], [1, 1]]},
          "steps": 1})", ".");
        CHECK(c.noise.Q(1, 1) == 2.0);
        CHECK(c.noise.R(0, 1) == 0.5);
        CHECK(c.reference.is_sampled());
    }
    SUBCASE("continuous model is discretized at load") {
        const auto c = load_config(kConfigs / "example2-rc.json");
        CHECK(c.model.dt() == doctest::Approx(0.1));
        CHECK(std::abs(c.model.A()(0, 0)) < 1.0); // continuous entry is -2000
    }
    SUBCASE("drop-outputs indices are 1-based") {
        const auto c = load_config(kConfigs / "sec8-drop.json");
        REQUIRE(c.keep.size() == 1);
        CHECK(c.keep[0] == 0);
    }
}

TEST_CASE("config errors name the field") {
    auto message = [](const std::string& text) {
        try {
            parse_config(text, ".");
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(message("{ \"model\": ").find("line") != std::string::npos);
    CHECK(message(R"({"model": {"A": [[1]], "B": [[1]], "C": [[1]]}, "reference":
                     {"channels": [{"kind": "step"}]}})")
              .find("/steps") != std::string::npos);
    CHECK(message(R"({"model": {"A": [[1, 2], [3]], "B": [[1]], "C": [[1]]}, "steps": 1,
                     "reference": {"channels": [{"kind": "step"}]}})")
              .find("/model/A/1") != std::string::npos);
    CHECK(message(R"({"model": {"A": [[1]], "B": [[1]], "C": [[1]]}, "steps": 1, "bogus": 1,
                     "reference": {"channels": [{"kind": "step"}]}})")
              .find("/bogus") != std::string::npos);
    CHECK(message(R"({"model": {"A": [[1]], "B": [[1]], "C": [[1]]}, "steps": 1,
                     "reference": {"channels": [{"kind": "square"}]}})")
              .find("/reference/channels/0/kind") != std::string::npos);
    CHECK(message(R"({"model": {"A": [[1]], "B": [[1]], "C": [[1]]}, "steps": 1,
                     "noise": {"Q": [1, 2]},
                     "reference": {"channels": [{"kind": "step"}]}})")
              .find("/noise/Q") != std::string::npos);
    CHECK(message(R"({"model": {"A": [[1]], "B": [[1]], "C": [[1]]}, "steps": 1,
                     "nonsquare": {"mode": "drop-outputs", "keep": [2]},
                     "reference": {"channels": [{"kind": "step"}]}})")
              .find("/nonsquare/keep/0") != std::string::npos);
}

TEST_CASE("check command") {
    SUBCASE("demo system spectra") {
        const auto r = invoke({"check", "--config", (kConfigs / "sec8-drop.json").string()});
        CHECK(r.code == kExitOk);
        CHECK(r.out.find("0.25+1.12109i") != std::string::npos);
        CHECK(r.out.find("0.25+0.433768i") != std::string::npos);
        CHECK(r.out.find("invariant zeros: 0.1, 0.35-0.698212i, 0.35+0.698212i") != std::string::npos);
    }
    SUBCASE("spring-damper config is trackable") {
        const auto r = invoke({"check", "--config", (kConfigs / "example1.json").string()});
        CHECK(r.code == kExitOk);
        CHECK(r.out.find("trackable: yes") != std::string::npos);
        CHECK(r.err.find("non-minimum-phase") != std::string::npos);
    }
    SUBCASE("zero input matrix is not trackable") {
        const auto path = write_config("zero_b.json", R"({
          "model": {"A": [[0.5]], "B": [[0.0]], "C": [[1.0]]},
          "reference": {"channels": [{"kind": "step"}]}, "steps": 5})");
        const auto r = invoke({"check", "--config", path.string()});
        CHECK(r.code == kExitInfeasible);
        CHECK(r.out.find("trackable: no") != std::string::npos);
    }
    SUBCASE("malformed config") {
        const auto path = write_config("broken.json", "{ not json");
        const auto r = invoke({"check", "--config", path.string()});
        CHECK(r.code == kExitConfig);
        CHECK(r.err.find("config error") != std::string::npos);
        CHECK(invoke({"check", "--config", "/nonexistent/cfg.json"}).code == kExitConfig);
        CHECK(invoke({"frobnicate"}).code == kExitConfig);
    }
    SUBCASE("non-square model without a mode is infeasible") {
        auto sec8 = read_file(kConfigs / "sec8-project.json");
        const auto pos = sec8.find("\"project\"");
        REQUIRE(pos != std::string::npos);
        sec8.replace(pos, 9, "\"none\"");
        const auto path = write_config("sec8-none.json", sec8);
        CHECK(invoke({"run", "--config", path.string(), "--out", scratch("none.csv").string()}).code
              == kExitInfeasible);
    }
}

TEST_CASE("run command") {
    SUBCASE("spring-damper trace shape") {
        const auto out = scratch("example1.csv");
        const auto r = invoke({"run", "--config", (kConfigs / "example1.json").string(), "--out",
                               out.string()});
        CHECK(r.code == kExitOk);
        CHECK(r.out.find("mse,1,") != std::string::npos);
        const auto csv = read_file(out);
        CHECK(first_line(csv) == "k,t,y_ref_1,y_ref_2,y_1,y_2,u_1,u_2,err_1,err_2");
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 402);
    }
    SUBCASE("project mode emits the raw reference") {
        const auto out = scratch("project.csv");
        const auto r = invoke({"run", "--config", (kConfigs / "sec8-project.json").string(),
                               "--out", out.string()});
        CHECK(r.code == kExitOk);
        CHECK(first_line(read_file(out)) ==
              "k,t,y_ref_1,y_ref_2,y_1,y_2,u_1,err_1,err_2,y_ref_raw_1,y_ref_raw_2");
    }
    SUBCASE("lifted inputs have the plant's width") {
        const auto out = scratch("lift.csv");
        CHECK(invoke({"run", "--config", (kConfigs / "sec8-lift.json").string(), "--out",
                      out.string()}).code == kExitOk);
        CHECK(first_line(read_file(out)) == "k,t,y_ref_1,y_1,u_1,u_2,err_1");
    }
    SUBCASE("seed override changes the trace") {
        const auto a = scratch("seed_a.csv");
        const auto b = scratch("seed_b.csv");
        const auto cfg = (kConfigs / "example2-rc.json").string();
        invoke({"run", "--config", cfg, "--out", a.string(), "--seed", "1"});
        invoke({"run", "--config", cfg, "--out", b.string(), "--seed", "2"});
        CHECK(read_file(a) != read_file(b));
    }
    SUBCASE("csv to stdout when no path is configured") {
        const auto path = write_config("scalar.json", kScalar);
        const auto r = invoke({"run", "--config", path.string()});
        CHECK(r.code == kExitOk);
        CHECK(first_line(r.out) == "k,t,y_ref_1,y_1,u_1,err_1");
        CHECK(r.err.find("mse,1,") != std::string::npos);
    }
    SUBCASE("numerical failure exit code") {
        const auto path = write_config("collapse.json", R"({
          "model": {"A": [[0.5]], "B": [[1.0]], "C": [[1.0]]},
          "noise": {"Q": 0, "R": 0},
          "reference": {"channels": [{"kind": "step"}]}, "steps": 20})");
        const auto r = invoke({"run", "--config", path.string(), "--out", scratch("c.csv").string()});
        CHECK(r.code == kExitNumerical);
        CHECK(r.err.find("step ") != std::string::npos);
    }
}

TEST_CASE("montecarlo command") {
    const auto cfg = (kConfigs / "example1.json").string();
    SUBCASE("summary has T + 1 rows") {
        const auto out = scratch("mc100.csv");
        CHECK(invoke({"montecarlo", "--config", cfg, "--out", out.string()}).code == kExitOk);
        const auto csv = read_file(out);
        CHECK(first_line(csv) == "k,t,mean_err_1,mean_err_2,std_err_1,std_err_2");
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 402);
    }
    SUBCASE("single run has zero spread") {
        const auto out = scratch("mc1.csv");
        CHECK(invoke({"montecarlo", "--config", cfg, "--out", out.string(), "--runs", "1"}).code
              == kExitOk);
        std::istringstream in(read_file(out));
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            const auto last = line.rfind(',');
            const auto prev = line.rfind(',', last - 1);
            CHECK(std::stod(line.substr(prev + 1, last - prev - 1)) == 0.0);
            CHECK(std::stod(line.substr(last + 1)) == 0.0);
        }
    }
    SUBCASE("same config twice is byte-identical") {
        const auto a = scratch("mc_a.csv");
        const auto b = scratch("mc_b.csv");
        invoke({"montecarlo", "--config", cfg, "--out", a.string(), "--runs", "10"});
        invoke({"montecarlo", "--config", cfg, "--out", b.string(), "--runs", "10"});
        CHECK(read_file(a) == read_file(b));
    }
    CHECK(invoke({"montecarlo", "--config", cfg, "--runs", "0"}).code == kExitConfig);
}
