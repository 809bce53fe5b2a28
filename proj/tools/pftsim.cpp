#include <algorithm>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "pft/errors.hpp"
#include "pft/runner.hpp"

namespace {

constexpr int kUsageError = 64;

pft::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw pft::ConfigError("config: cannot open '" + path + "'");
    try {
        return pft::json::parse(in);
    } catch (const pft::json::parse_error& e) {
        throw pft::ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
}

void print_status(const pft::RunResult& r) {
    std::cerr << r.manifest["experiment"].get<std::string>() << ": " << r.manifest["status"].get<std::string>()
              << " (" << r.output_dir << ")\n";
    for (const auto& c : r.manifest["checks"])
        if (!c["pass"].get<bool>())
            std::cerr << "  failed " << c["name"].get<std::string>() << ": " << c["value"].dump() << " "
                      << c["relation"].get<std::string>() << " " << c["threshold"].dump() << "\n";
    if (r.manifest.contains("error")) std::cerr << "  " << r.manifest["error"].get<std::string>() << "\n";
}

int cmd_run(const std::string& name, const std::string& config, const std::string& out, int threads) {
    pft::json j = read_json_file(config);
    pft::ExperimentConfig cfg = pft::parse_config(j, name);
    if (!out.empty()) cfg.output_dir = out;
    pft::RunResult r = pft::run_experiment(cfg, {pft::resolve_threads(threads)});
    print_status(r);
    return r.exit_code;
}

int cmd_check(const std::string& out, int threads) {
    const int nt = pft::resolve_threads(threads);
    pft::json summary = pft::json::array();
    int code = 0;
    for (const auto& info : pft::experiments()) {
        pft::ExperimentConfig cfg = pft::parse_config(pft::default_config(info.name), info.name);
        cfg.output_dir = out + "/" + info.name;
        pft::RunResult r = pft::run_experiment(cfg, {nt});
        print_status(r);
        pft::json failed = pft::json::array();
        for (const auto& c : r.manifest["checks"])
            if (!c["pass"].get<bool>()) failed.push_back(c["name"]);
        summary.push_back({{"experiment", info.name},
                           {"status", r.manifest["status"]},
                           {"exit_code", r.exit_code},
                           {"failed_checks", failed},
                           {"output_dir", r.output_dir}});
        if (r.exit_code == 2 || (r.exit_code != 0 && code == 0)) code = r.exit_code;
    }
    pft::json doc{{"tool", "pftsim"},
                  {"version", pft::kToolVersion},
                  {"status", code == 0 ? "pass" : "fail"},
                  {"experiments", summary}};
    std::cout << doc.dump(2) << "\n";
    return code;
}

int cmd_list(bool as_json) {
    if (as_json) {
        pft::json arr = pft::json::array();
        for (const auto& info : pft::experiments()) {
            pft::json params = pft::json::array();
            for (const auto& p : info.params)
                params.push_back({{"key", p.key}, {"default", p.fallback}, {"doc", p.doc}});
            arr.push_back({{"name", info.name},
                           {"description", info.description},
                           {"params", params},
                           {"default_config", pft::default_config(info.name)}});
        }
        std::cout << arr.dump(2) << "\n";
        return 0;
    }
    std::size_t width = 0;
    for (const auto& info : pft::experiments()) width = std::max(width, info.name.size());
    for (const auto& info : pft::experiments())
        std::cout << info.name << std::string(width + 2 - info.name.size(), ' ') << info.description << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lattice parametrized field theory simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", pft::kToolVersion);

    std::string name, config, out;
    int threads = 0;
    auto* run = app.add_subcommand("run", "run one experiment");
    run->add_option("experiment", name, "experiment name")->required();
    run->add_option("--config", config, "JSON configuration file")->required();
    run->add_option("--out", out, "output directory (overrides output_dir)");
    run->add_option("--threads", threads, "worker threads (default: PFTSIM_THREADS, else 1)")
        ->check(CLI::PositiveNumber);

    std::string check_out = "out/check";
    int check_threads = 0;
    auto* check = app.add_subcommand("check", "run every experiment with its default configuration");
    check->add_option("--out", check_out, "output root");
    check->add_option("--threads", check_threads, "worker threads")->check(CLI::PositiveNumber);

    bool as_json = false;
    auto* list = app.add_subcommand("list-experiments", "list experiments");
    list->add_flag("--json", as_json, "machine-readable listing");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageError;
    }

    try {
        if (*run) return cmd_run(name, config, out, threads);
        if (*check) return cmd_check(check_out, check_threads);
        return cmd_list(as_json);
    } catch (const pft::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "ExperimentError: " << e.what() << "\n";
        return 1;
    }
}
