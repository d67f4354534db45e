#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinlens/disorder.hpp"
#include "spinlens/error.hpp"
#include "spinlens/lattice.hpp"
#include "spinlens/lens.hpp"
#include "spinlens/manybody.hpp"

namespace spinlens::cli {

/// Malformed configuration. `line`/`column` are 1-based and zero when not known.
class ConfigError : public InvalidSpec {
public:
    ConfigError(const std::string& what, std::size_t line = 0, std::size_t column = 0);
    std::size_t line = 0;
    std::size_t column = 0;
};

const std::vector<std::string>& scenario_names();

struct LatticeConfig {
    int dimension = 1;
    Label extents{1, 1, 1};
    double spacing = 1.0;
    CouplingModel model = NearestNeighbor{};
};

struct PacketConfig {
    double sigma0 = 0.0;
    std::optional<Vec3> center;  // label units; lattice centre when absent
    Vec3 k0{};
};

/// Lens-search settings; see lens::OptimizeSpec.
struct OptimizeConfig {
    lens::LensKind kind = lens::LensKind::Thick;
    int order = 2;
    lens::PhaseProfile profile = lens::PhaseProfile::Parabolic;
    double strength_lo = 0.0;
    double strength_hi = 0.0;
    int points_per_decade = 8;
    int time_samples = 200;
    double time_lo = 0.5;
    double time_hi = 1.5;
    int sweeps = 2;
};

struct EvolutionConfig {
    double t_end = 0.0;
    int samples = 200;
    double tol = 1e-10;
    bool wigner = false;  // also write Wigner functions of 1D snapshots (cost ~ N^3)
};

struct CascadeConfig {
    int order = 2;
    lens::PhaseProfile profile = lens::PhaseProfile::Parabolic;
};

struct LensChoice {
    lens::LensKind kind = lens::LensKind::Thick;
    int order = 2;
    lens::PhaseProfile profile = lens::PhaseProfile::Parabolic;
};

struct ScalingConfig {
    std::vector<double> sigma0;
    std::vector<LensChoice> lenses;
    double length_per_sigma = 10.0;
    int min_length = 160;
};

struct LongrangeConfig {
    std::vector<double> alphas;
    bool include_nearest_neighbor = true;
    int cutoff_range = 20;
    int dispersion_samples = 256;
};

struct NonlinearConfig {
    manybody::InteractionSpec interaction;
    int excitations = 2;
};

struct DisorderConfig {
    std::size_t holes = 0;
    double delta = 0.0;
    std::size_t realizations = 1;
    double radius = 3.0;
    std::vector<double> broadening_k;  // plane-wave momenta (1/a) for the displacement diagnostic
};

struct BreakdownConfig {
    std::vector<double> sigma0;
    std::vector<double> deltas;
    std::size_t realizations = 100;
    double length_per_sigma = 10.0;
    double threshold = 2.0;
};

struct RydbergConfig {
    std::vector<double> xi;
    double r_max = 3.0;
    int samples = 301;
    std::string table;  // optional coefficient CSV
    double n = 60;
    double rabi_mhz = 10.0;
    double detuning_mhz = -20.0;
    double lifetime_us = 0.0;
    double focal_time = 0.0;  // in 1/J, converts to microseconds when given
};

struct RunConfig {
    std::string scenario;
    std::uint64_t master_seed = 0;
    std::string output;
    nlohmann::json raw;  // the effective configuration (seed override applied)

    std::optional<LatticeConfig> lattice;
    std::optional<PacketConfig> packet;
    std::optional<lens::LensDesign> lens;
    std::optional<OptimizeConfig> optimize;
    std::optional<EvolutionConfig> evolution;
    std::optional<CascadeConfig> cascade;
    std::optional<ScalingConfig> scaling;
    std::optional<LongrangeConfig> longrange;
    std::optional<NonlinearConfig> nonlinear;
    std::optional<DisorderConfig> disorder;
    std::optional<BreakdownConfig> breakdown;
    std::optional<RydbergConfig> rydberg;
};

/// Parses JSON text. A manifest written by a previous run is accepted too; its
/// recorded configuration is used. Throws ConfigError with line/column on syntax errors
/// and with the offending key path on schema errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Physics lint. Returns human-readable warnings; an empty list means a clean config.
std::vector<std::string> lint(const RunConfig& config);

/// 64-bit FNV-1a of the bytes.
std::uint64_t fnv1a(const std::string& bytes);

std::shared_ptr<const SiteTable> make_table(const LatticeConfig& lattice);
Vec3 packet_center(const RunConfig& config, const SiteTable& table);

} // namespace spinlens::cli
