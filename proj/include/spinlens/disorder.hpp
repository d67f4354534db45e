#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <memory>
#include <random>
#include <variant>
#include <vector>

#include "spinlens/lattice.hpp"
#include "spinlens/lens.hpp"
#include "spinlens/singlex.hpp"

namespace spinlens::disorder {

/// One complete focusing run: Gaussian packet, lens, evolution for a fixed time.
struct FocusProtocol {
    std::shared_ptr<const SiteTable> table;  // clean lattice
    CouplingModel model = NearestNeighbor{};
    lens::LensDesign lens;
    double sigma0 = 1.0;        // length
    Vec3 packet_center{};       // label units
    Vec3 focus{};               // label units, where P_foc and sigma_f are measured
    double focal_time = 0.0;    // 1/J
    double radius = 3.0;        // P_foc radius in lattice spacings
    double tol = 1e-10;
};

struct Holes {
    std::size_t count = 0;
};
struct Displacement {
    double delta = 0.0;  // standard deviation per Cartesian component (length)
};
using DisorderKind = std::variant<Holes, Displacement>;

struct EnsembleJob {
    FocusProtocol protocol;
    DisorderKind disorder = Holes{};
    std::size_t realizations = 1;
    std::uint64_t master_seed = 0;
};

struct RealizationRecord {
    std::size_t realization = 0;
    double p_foc = 0.0;
    double sigma_f = 0.0;      // packet width about the focus (length)
    double norm_error = 0.0;   // |1 - ||psi||^2| after evolution
};

struct Moments {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation (n - 1)
    double sem = 0.0;     // standard error of the mean
    double min = 0.0;
    double max = 0.0;
};

struct EnsembleStats {
    std::vector<RealizationRecord> records;  // sorted by realization index
    Moments p_foc;
    Moments sigma_f;
};

/// Deterministic generator for realization `index` of a run seeded with `master_seed`.
std::mt19937_64 realization_rng(std::uint64_t master_seed, std::uint64_t index);

/// Draws `count` holes uniformly without replacement among active sites, never `exclude`.
std::vector<std::size_t> draw_holes(const SiteTable& table, std::size_t count, std::size_t exclude, std::mt19937_64& rng);
/// N(0, delta^2) per Cartesian component on the lattice axes; zeros elsewhere.
std::vector<Vec3> draw_displacements(const SiteTable& table, double delta, std::mt19937_64& rng);

/// Site index closest to a label-space point.
std::size_t nearest_site(const SiteTable& table, const Vec3& label);

/// Runs the protocol on an explicitly given (possibly disordered) lattice.
RealizationRecord run_protocol(const FocusProtocol& protocol, std::shared_ptr<const SiteTable> table);

/// Runs all realizations (concurrently when threads > 1); the result is independent of scheduling.
EnsembleStats run_ensemble(const EnsembleJob& job);

Moments moments(const std::vector<double>& values);

struct Broadening {
    double uncertainty = 0.0;    // sqrt(<k|D^2|k> - <k|D|k>^2)
    double second_moment = 0.0;  // sqrt(<k|D^2|k>)
};

/// Energy spread of the plane wave |k> under D = H - H0, both expressed on the
/// full site set; |k> lives on sites active in both and uses undisplaced positions.
Broadening plane_wave_broadening(const HamiltonianTerms& disordered, const HamiltonianTerms& clean, const Vec3& k);

/// First-order change of the single-excitation matrix when the sites of `clean`
/// move by `displacements`: each bond changes by J'(r0) r0_hat . (d_i - d_j) and each
/// diagonal by the matching derivative of the coupling shift. Compact indexing of `clean`.
SparseReal first_order_perturbation(const HamiltonianTerms& clean, std::span<const Vec3> displacements);

/// Broadening of |k> under a perturbation matrix in the compact indexing of `clean`.
Broadening plane_wave_broadening(const SparseReal& perturbation, const HamiltonianTerms& clean, const Vec3& k);

struct BreakdownRow {
    double sigma0 = 0.0;
    double delta = 0.0;
    double ratio_mean = 0.0;  // <sigma_f^delta / sigma_f^0>
    double ratio_sem = 0.0;
    double p_foc_mean = 0.0;
};

struct Crossover {
    double sigma0 = 0.0;
    double focal_time = 0.0;
    double delta_c = 0.0;   // NaN when the ratio never exceeds the threshold
    double product = 0.0;   // delta_c * focal_time
    bool found = false;
    /// Set when the ratio already exceeds the threshold at the smallest positive delta.
    double upper_bound = std::numeric_limits<double>::quiet_NaN();
};

struct BreakdownResult {
    std::vector<BreakdownRow> rows;
    std::vector<Crossover> crossovers;
};

/// Positional-disorder scan for several protocols (one per sigma0) over an ascending
/// delta grid. The crossover is where the ratio first exceeds `threshold`,
/// interpolated linearly in log(delta) between grid points. A crossing below the
/// smallest positive delta is reported as not found, with that delta as upper bound.
BreakdownResult breakdown_scan(const std::vector<FocusProtocol>& protocols, const std::vector<double>& deltas,
                               std::size_t realizations, std::uint64_t master_seed, double threshold = 2.0);

void write_ensemble_csv(const std::filesystem::path& path, const EnsembleStats& stats);
void write_breakdown_csv(const std::filesystem::path& path, const BreakdownResult& result);

} // namespace spinlens::disorder
