#pragma once

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>

namespace mcreg::cli {

enum ExitCode : int { ok = 0, parse_error = 2, fit_failure = 3, io_error = 4 };

/// Every flag value of one invocation. Serialized into each output so a run
/// can be repeated with `--config <file>`.
struct RunConfig {
    std::string command;
    std::string data, schema, truth, model, pilot;
    std::string out_dir = ".";  // not serialized: outputs must not depend on where they are written
    double tau = 0.0;  // 0 means "take it from the model file"
    int g = 2;
    long long n = 1000;
    std::string penalty = "lasso";
    double scad_a = 3.7;
    bool adaptive = true;
    std::string criterion = "pbic";
    int folds = 5;
    std::string lambda_grid = "geom:1e-5,2,17";
    double lambda = 0.0;
    double lambda_mixing = -1.0, lambda_body = -1.0, lambda_tail = -1.0;  // negative: use lambda
    std::uint64_t seed = 1;
    int threads = 1;
    std::string estep = "stochastic";
    int draws = 1;
    int max_iters = 200;
    double tol = 1e-2;
    double delta0 = 1e-5, delta_growth = 0.3, xi = 1.0;
    int B = 200;
    double level = 0.95;
    std::string g_list = "2,3,5";
    bool tail_robustness = false;
};

nlohmann::json to_json(const RunConfig& c);
RunConfig from_json(const nlohmann::json& j);

/// Runs one command line; returns an ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mcreg::cli
