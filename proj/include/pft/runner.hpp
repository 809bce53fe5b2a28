#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pft/lattice.hpp"

namespace pft {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

/// Nominal convergence orders are compared with this resolution: a measured
/// order p passes a nominal order q when p >= q - kOrderResolution.
inline constexpr double kOrderResolution = 0.05;

struct ParamSpec {
    std::string key;
    json fallback;
    std::string doc;
};

struct ExperimentConfig {
    std::string experiment;
    LatticeSpec lattice;
    std::uint64_t seed = 0;
    std::string output_dir;
    json params;  ///< validated, defaults filled in
    json echo;    ///< normalised configuration as run
};

struct Check {
    std::string name;
    double value = 0.0;
    std::string relation;  ///< "<=", ">=", "==", ">"
    double threshold = 0.0;
    bool pass = false;
};

struct ExperimentOutput {
    std::vector<std::pair<std::string, std::string>> files;
    std::vector<Check> checks;
    json metrics = json::object();

    void add_file(std::string name, std::string text) { files.emplace_back(std::move(name), std::move(text)); }
    bool check(const std::string& name, double value, const std::string& relation, double threshold);
    bool all_pass() const;
};

struct RunOptions {
    int threads = 1;
};

using ExperimentFn = std::function<void(const ExperimentConfig&, const RunOptions&, ExperimentOutput&)>;

struct ExperimentInfo {
    std::string name;
    std::string description;
    std::vector<ParamSpec> params;
    json default_lattice;
    ExperimentFn run;
};

/// Stable ordering.
const std::vector<ExperimentInfo>& experiments();
const ExperimentInfo& find_experiment(const std::string& name);

/// Full default configuration of an experiment (lattice, seed, params).
json default_config(const std::string& name);

/// Strict validation: unknown keys and wrong types raise ConfigError naming
/// the key path, e.g. "lattice.n_sites".
ExperimentConfig parse_config(const json& j, const std::string& experiment);

struct RunResult {
    int exit_code = 0;  ///< 0 pass, 1 experiment error, 2 invariant failure, 3 config error
    json manifest;
    std::string output_dir;
};

/// Runs one experiment and writes its artifacts plus manifest.json.
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt);

/// Thread count from an explicit value, else PFTSIM_THREADS, else 1.
int resolve_threads(int requested);

/// Least-squares slope of log(err) against log(h).
double fit_order(const std::vector<double>& h, const std::vector<double>& err);

/// Runs f(i) for i in [0, n) on up to `threads` workers. Results must be
/// written to per-index slots; the first exception is rethrown.
void parallel_for(int n, int threads, const std::function<void(int)>& f);

}  // namespace pft
