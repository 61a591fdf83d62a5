#include "oracles.hpp"

#include "mcreg/cli.hpp"
#include "mcreg/gem.hpp"
#include "mcreg/io.hpp"
#include "mcreg/report.hpp"

#include <doctest.h>

#include <sstream>

using namespace mcreg;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "mcreg");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

// Schema and truth files for a small two-variable model.
struct Setup {
    fs::path dir, schema, truth;
};

Setup setup(const std::string& name) {
    Setup s;
    s.dir = oracle::scratch(name);
    s.schema = s.dir / "schema.json";
    s.truth = s.dir / "truth.json";
    write_text(s.schema, R"({"variables":[{"name":"a","kind":"ordinal","levels":["x","y","z"]},)"
                         R"({"name":"b","kind":"continuous","range":[0,1]}]})");
    write_text(s.truth, R"({"g":2,"tau":10,"theta":5,"alpha":[[1.0,0.5],[0.3,0.3],[0.0,0.0],[0.2,-0.2]],)"
                        R"("beta":[[0.5,1.5],[0.2,0.2],[0.0,0.0],[0.1,0.0]],"phi":[0.2,0.1],"nu":[0.4,0.0,0.0,0.1]})");
    return s;
}

std::string simulate(const Setup& s, int n, const std::string& sub = "sim") {
    const fs::path out = s.dir / sub;
    const Run r = run({"simulate", "--schema", s.schema.string(), "--truth", s.truth.string(), "--n", std::to_string(n),
                       "--seed", "3", "--out-dir", out.string()});
    REQUIRE(r.code == 0);
    return (out / "data.csv").string();
}

}  // namespace

TEST_CASE("simulate with n = 0 writes a header-only table") {
    const Setup s = setup("cli-empty");
    const std::string data = simulate(s, 0);
    const std::string text = read_text(data);
    CHECK(text == "a,b,y\n");
    CHECK(fs::exists(s.dir / "sim" / "truth.json"));
}

TEST_CASE("fit output is byte-identical across reruns and directories") {
    const Setup s = setup("cli-rerun");
    const std::string data = simulate(s, 800);
    const std::vector<std::string> common{"fit", "--data", data, "--schema", s.schema.string(), "--tau", "10",
                                          "--seed", "5", "--max-iters", "30"};
    auto a = common, b = common;
    a.insert(a.end(), {"--out-dir", (s.dir / "a").string()});
    b.insert(b.end(), {"--out-dir", (s.dir / "b").string()});
    REQUIRE(run(a).code == 0);
    REQUIRE(run(b).code == 0);
    CHECK(read_text(s.dir / "a" / "fit.json") == read_text(s.dir / "b" / "fit.json"));
    CHECK(read_text(s.dir / "a" / "model.json") == read_text(s.dir / "b" / "model.json"));

    // The embedded configuration reproduces the run.
    const Run c = run({"fit", "--config", (s.dir / "a" / "fit.json").string(), "--out-dir", (s.dir / "c").string()});
    REQUIRE(c.code == 0);
    CHECK(read_text(s.dir / "a" / "fit.json") == read_text(s.dir / "c" / "fit.json"));
    const auto j = nlohmann::json::parse(read_text(s.dir / "a" / "fit.json"));
    CHECK(j.at("version") == kLibraryVersion);
    CHECK(j.at("run_config").at("seed") == 5);
    CHECK_FALSE(j.at("run_config").contains("out_dir"));
}

TEST_CASE("unpenalized fit matches the library call") {
    const Setup s = setup("cli-lambda0");
    const std::string data = simulate(s, 1000);
    const Run r = run({"fit", "--data", data, "--schema", s.schema.string(), "--tau", "10", "--lambda", "0",
                       "--estep", "quadrature", "--tol", "1e-6", "--out-dir", (s.dir / "f").string()});
    REQUIRE(r.code == 0);
    const Dataset d = load_dataset(data, load_schema(s.schema), 10.0);
    FitConfig cfg;
    cfg.estep = EStepMode::quadrature;
    cfg.tol = 1e-6;
    const FitReport ref = fit_gem(d, 2, 10.0, PenaltySet{}, cfg);
    const ParamSet got = read_model(s.dir / "f" / "model.json");
    CHECK((got.beta() - ref.params.beta()).norm() < 1e-12);
    CHECK(std::abs(observed_loglik(d, got) - ref.loglik) < 1e-8 * std::abs(ref.loglik));
}

TEST_CASE("exit codes and error reports") {
    const Setup s = setup("cli-errors");
    CHECK(run({"fit", "--no-such-flag"}).code == cli::parse_error);
    CHECK(run({}).code == cli::parse_error);
    CHECK(run({"fit", "--criterion", "xyz"}).code == cli::parse_error);

    const fs::path out = s.dir / "e";
    fs::create_directories(out);
    const Run missing = run({"fit", "--data", (s.dir / "nope.csv").string(), "--schema", s.schema.string(), "--tau",
                             "10", "--out-dir", out.string()});
    CHECK(missing.code == cli::io_error);
    const auto err = nlohmann::json::parse(missing.err);
    CHECK(err.at("error").at("exit_code") == 4);
    CHECK(fs::exists(out / "error.json"));

    write_text(s.dir / "bad.csv", "a,b,y\nx,0.5,1.0\nw,0.5,2.0\n");
    CHECK(run({"fit", "--data", (s.dir / "bad.csv").string(), "--schema", s.schema.string(), "--tau", "10",
               "--out-dir", out.string()})
              .code == cli::parse_error);
    CHECK(run({"fit", "--data", (s.dir / "bad.csv").string(), "--schema", s.schema.string(), "--out-dir",
               out.string()})
              .code == cli::parse_error);  // no tau and no model
}

TEST_CASE("diagnose writes its four tables") {
    const Setup s = setup("cli-diagnose");
    const std::string data = simulate(s, 500);
    const fs::path out = s.dir / "d";
    const Run r = run({"diagnose", "--data", data, "--schema", s.schema.string(), "--model",
                       (s.dir / "sim" / "truth.json").string(), "--out-dir", out.string()});
    REQUIRE(r.code == 0);
    for (const char* f : {"density.csv", "qq.csv", "loglog.csv", "mean_excess.csv", "run_config.json"})
        CHECK(fs::exists(out / f));
    const RawTable qq = read_csv(out / "qq.csv");
    CHECK(qq.rows.size() == 200);
}

TEST_CASE("benchmark command covers every comparator") {
    const Setup s = setup("cli-bench");
    const std::string data = simulate(s, 600);
    const fs::path out = s.dir / "b";
    const Run r = run({"benchmark", "--data", data, "--tau", "10", "--g-list", "2", "--estep", "quadrature",
                       "--out-dir", out.string()});
    REQUIRE(r.code == 0);
    const RawTable t = read_csv(out / "benchmarks.csv");
    CHECK(t.rows.size() == 4 + 1 + 1 + 1);  // GA, WEI, GG, GP, NPMLE, one mixture, composite
}
