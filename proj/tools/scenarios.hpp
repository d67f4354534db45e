#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "run_config.hpp"

namespace spinlens::cli {

/// Run record kept next to the outputs. Saved with status "running" before the
/// scenario starts and rewritten when it ends ("complete" or "failed").
class Manifest {
public:
    Manifest(std::filesystem::path dir, const RunConfig& config, const std::vector<std::string>& warnings, int threads);

    void derived(const std::string& key, nlohmann::json value);
    /// Registers an output file (relative to the run directory) and returns its full path.
    std::filesystem::path file(const std::string& name, const std::string& description);
    void save() const;
    void finish(bool ok, const std::string& error, double wall_seconds);

    [[nodiscard]] const nlohmann::json& document() const { return doc_; }

private:
    std::filesystem::path dir_;
    nlohmann::json doc_;
};

/// Executes the configured scenario, writing its data files through `manifest`.
void run_scenario(const RunConfig& config, Manifest& manifest);

} // namespace spinlens::cli
