// Scenario runner: spinlens --config run.json [--out DIR] [--seed N] [--threads N] [--validate-only]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "run_config.hpp"
#include "scenarios.hpp"
#include "spinlens/error.hpp"
#include "spinlens/parallel.hpp"

namespace {

enum Exit { ok = 0, other = 1, invalid_spec = 2, capability = 3, numerical = 4, degenerate = 5 };

int report(const char* tag, const std::exception& e, int code)
{
    std::fprintf(stderr, "error[%s]: %s\n", tag, e.what());
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    namespace fs = std::filesystem;
    using namespace spinlens;

    CLI::App app{"Spin-wave focusing scenarios"};
    std::string config_path, out_dir;
    long long seed = -1;
    int threads = 0;
    bool validate_only = false;
    app.add_option("--config", config_path, "JSON run configuration (or a previous manifest.json)")->required();
    app.add_option("--out", out_dir, "output directory (overrides the config)");
    app.add_option("--seed", seed, "master seed (overrides the config)")->check(CLI::NonNegativeNumber);
    app.add_option("--threads", threads, "worker threads (default: SPINLENS_THREADS or 1)")->check(CLI::PositiveNumber);
    app.add_flag("--validate-only", validate_only, "check the config and print the lint report");
    CLI11_PARSE(app, argc, argv);

    cli::RunConfig config;
    try {
        config = cli::load_config(config_path);
        if (seed >= 0) {
            config.master_seed = static_cast<std::uint64_t>(seed);
            config.raw["master_seed"] = config.master_seed;
        }
    } catch (const InvalidSpec& e) {
        return report("invalid-spec", e, invalid_spec);
    }
    const auto warnings = cli::lint(config);
    for (const auto& w : warnings)
        std::fprintf(stderr, "warning: %s\n", w.c_str());
    if (validate_only) {
        std::printf("config ok: scenario %s, %zu warning(s)\n", config.scenario.c_str(), warnings.size());
        return ok;
    }

    if (threads > 0)
        set_thread_count(threads);
    if (out_dir.empty())
        out_dir = config.output.empty() ? "spinlens_out" : config.output;
    config.raw.erase("output");

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        std::fprintf(stderr, "error[io]: cannot create %s: %s\n", out_dir.c_str(), ec.message().c_str());
        return other;
    }

    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
    cli::Manifest manifest(out_dir, config, warnings, thread_count());
    int code = ok;
    std::string message;
    try {
        manifest.save();
        cli::run_scenario(config, manifest);
        manifest.finish(true, "", elapsed());
        std::printf("%s complete in %.1f s, outputs in %s\n", config.scenario.c_str(), elapsed(), out_dir.c_str());
        return ok;
    } catch (const InvalidSpec& e) {
        message = e.what();
        code = report("invalid-spec", e, invalid_spec);
    } catch (const CapabilityError& e) {
        message = e.what();
        code = report("capability", e, capability);
    } catch (const NumericalError& e) {
        message = e.what();
        code = report("numerical", e, numerical);
    } catch (const DegenerateInput& e) {
        message = e.what();
        code = report("degenerate-input", e, degenerate);
    } catch (const std::exception& e) {
        message = e.what();
        code = report("runtime", e, other);
    }
    try {
        manifest.finish(false, message, elapsed());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error[io]: %s\n", e.what());
    }
    return code;
}
