#include "pft/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <mutex>
#include <thread>

#include "pft/errors.hpp"
#include "pft/io.hpp"

namespace pft {

bool ExperimentOutput::check(const std::string& name, double value, const std::string& rel, double threshold) {
    bool pass = false;
    if (rel == "<=") pass = value <= threshold;
    else if (rel == ">=") pass = value >= threshold;
    else if (rel == "==") pass = value == threshold;
    else if (rel == ">") pass = value > threshold;
    else throw ExperimentError("unknown relation " + rel);
    checks.push_back({name, value, rel, threshold, pass});
    return pass;
}

bool ExperimentOutput::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

const ExperimentInfo& find_experiment(const std::string& name) {
    for (const auto& e : experiments())
        if (e.name == name) return e;
    throw ConfigError("experiment: unknown experiment '" + name + "'");
}

json default_config(const std::string& name) {
    const ExperimentInfo& info = find_experiment(name);
    json params = json::object();
    for (const auto& p : info.params) params[p.key] = p.fallback;
    return json{{"experiment", name}, {"lattice", info.default_lattice}, {"seed", 20240601}, {"params", params}};
}

namespace {

enum class Kind { Integer, Number, String, Bool, NumberArray };

Kind kind_of(const json& v) {
    if (v.is_boolean()) return Kind::Bool;
    if (v.is_number_integer()) return Kind::Integer;
    if (v.is_number()) return Kind::Number;
    if (v.is_string()) return Kind::String;
    if (v.is_array()) return Kind::NumberArray;
    throw ExperimentError("unsupported parameter default type");
}

void expect(bool ok, const std::string& path, const std::string& what) {
    if (!ok) throw ConfigError(path + ": " + what);
}

void check_type(const json& v, Kind k, const std::string& path) {
    switch (k) {
        case Kind::Integer: expect(v.is_number_integer(), path, "expected an integer"); break;
        case Kind::Number: expect(v.is_number(), path, "expected a number"); break;
        case Kind::String: expect(v.is_string(), path, "expected a string"); break;
        case Kind::Bool: expect(v.is_boolean(), path, "expected a boolean"); break;
        case Kind::NumberArray:
            expect(v.is_array(), path, "expected an array of numbers");
            for (std::size_t i = 0; i < v.size(); ++i)
                expect(v[i].is_number(), path + "[" + std::to_string(i) + "]", "expected a number");
            break;
    }
}

}  // namespace

ExperimentConfig parse_config(const json& j, const std::string& experiment) {
    const ExperimentInfo& info = find_experiment(experiment);
    expect(j.is_object(), "<root>", "configuration must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        expect(k == "experiment" || k == "lattice" || k == "params" || k == "seed" || k == "output_dir", k,
               "unknown key");
    }
    ExperimentConfig cfg;
    cfg.experiment = experiment;
    if (j.contains("experiment")) {
        check_type(j["experiment"], Kind::String, "experiment");
        expect(j["experiment"].get<std::string>() == experiment, "experiment",
               "config is for '" + j["experiment"].get<std::string>() + "', not '" + experiment + "'");
    }
    expect(j.contains("lattice"), "lattice", "missing required key");
    const json& lat = j["lattice"];
    expect(lat.is_object(), "lattice", "expected an object");
    for (auto it = lat.begin(); it != lat.end(); ++it) {
        const std::string& k = it.key();
        expect(k == "n_sites" || k == "spacing" || k == "mass" || k == "boundary", "lattice." + k, "unknown key");
    }
    for (const char* k : {"n_sites", "spacing", "mass", "boundary"})
        expect(lat.contains(k), std::string("lattice.") + k, "missing required key");
    check_type(lat["n_sites"], Kind::Integer, "lattice.n_sites");
    check_type(lat["spacing"], Kind::Number, "lattice.spacing");
    check_type(lat["mass"], Kind::Number, "lattice.mass");
    check_type(lat["boundary"], Kind::String, "lattice.boundary");
    cfg.lattice.n_sites = lat["n_sites"].get<int>();
    cfg.lattice.spacing = lat["spacing"].get<double>();
    cfg.lattice.mass = lat["mass"].get<double>();
    try {
        cfg.lattice.boundary = boundary_from_string(lat["boundary"].get<std::string>());
        cfg.lattice.validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("lattice: ") + e.what());
    }
    if (j.contains("seed")) {
        expect(j["seed"].is_number_unsigned() || (j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0),
               "seed", "expected a nonnegative integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    } else {
        cfg.seed = default_config(experiment)["seed"].get<std::uint64_t>();
    }
    if (j.contains("output_dir")) {
        check_type(j["output_dir"], Kind::String, "output_dir");
        cfg.output_dir = j["output_dir"].get<std::string>();
    }
    json given = j.contains("params") ? j["params"] : json::object();
    expect(given.is_object(), "params", "expected an object");
    for (auto it = given.begin(); it != given.end(); ++it) {
        bool known = false;
        for (const auto& p : info.params) known = known || p.key == it.key();
        expect(known, "params." + it.key(), "unknown key");
    }
    cfg.params = json::object();
    for (const auto& p : info.params) {
        if (given.contains(p.key)) {
            check_type(given[p.key], kind_of(p.fallback), "params." + p.key);
            cfg.params[p.key] = given[p.key];
        } else {
            cfg.params[p.key] = p.fallback;
        }
    }
    cfg.echo = json{{"experiment", experiment},
                    {"lattice",
                     {{"n_sites", cfg.lattice.n_sites},
                      {"spacing", cfg.lattice.spacing},
                      {"mass", cfg.lattice.mass},
                      {"boundary", to_string(cfg.lattice.boundary)}}},
                    {"seed", cfg.seed},
                    {"params", cfg.params}};
    return cfg;
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("PFTSIM_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
        throw ConfigError("PFTSIM_THREADS: expected a positive integer");
    }
    return 1;
}

double fit_order(const std::vector<double>& h, const std::vector<double>& err) {
    if (h.size() != err.size() || h.size() < 2) throw DegenerateInput("order fit needs two or more points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double x = std::log(h[i]), y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void parallel_for(int n, int threads, const std::function<void(int)>& f) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first;
    std::mutex mu;
    auto worker = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!first) first = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
    const ExperimentInfo& info = find_experiment(cfg.experiment);
    RunResult r;
    r.output_dir = cfg.output_dir.empty() ? "out/" + cfg.experiment : cfg.output_dir;
    const auto start = std::chrono::steady_clock::now();
    ExperimentOutput out;
    std::string error;
    bool config_error = false;
    try {
        info.run(cfg, opt, out);
    } catch (const ConfigError& e) {
        error = e.what();
        config_error = true;
    } catch (const std::exception& e) {
        error = std::string("ExperimentError: ") + e.what();
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json checks = json::array();
    for (const auto& c : out.checks)
        checks.push_back({{"name", c.name},
                          {"value", c.value},
                          {"relation", c.relation},
                          {"threshold", c.threshold},
                          {"pass", c.pass}});
    json artifacts = json::array();
    for (const auto& f : out.files) artifacts.push_back(f.first);
    r.exit_code = config_error ? 3 : !error.empty() ? 1 : (out.all_pass() ? 0 : 2);
    r.manifest = json{{"tool", "pftsim"},
                      {"version", kToolVersion},
                      {"experiment", cfg.experiment},
                      {"config", cfg.echo},
                      {"threads", opt.threads},
                      {"status", !error.empty() ? "error" : (out.all_pass() ? "pass" : "fail")},
                      {"checks", checks},
                      {"metrics", out.metrics},
                      {"artifacts", artifacts},
                      {"wall_time_s", wall}};
    if (!error.empty()) r.manifest["error"] = error;
    for (const auto& f : out.files) write_file(r.output_dir, f.first, f.second);
    write_file(r.output_dir, "manifest.json", r.manifest.dump(2) + "\n");
    return r;
}

}  // namespace pft
