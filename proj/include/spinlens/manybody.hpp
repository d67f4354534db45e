#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "spinlens/lattice.hpp"
#include "spinlens/singlex.hpp"

namespace spinlens::manybody {

/// Hard-core configurations of `excitations` particles on `sites` sites,
/// as strictly increasing site tuples in lexicographic order.
class FockBasis {
public:
    FockBasis(std::size_t sites, int excitations);

    [[nodiscard]] std::size_t size() const { return size_; }
    [[nodiscard]] std::size_t sites() const { return sites_; }
    [[nodiscard]] int excitations() const { return nu_; }
    /// Occupied sites of basis state `index` (length = excitations()).
    [[nodiscard]] std::span<const int> occupation(std::size_t index) const;
    /// Lexicographic rank of a strictly increasing tuple; throws on malformed input.
    [[nodiscard]] std::size_t index_of(std::span<const int> tuple) const;

private:
    [[nodiscard]] std::size_t binom(std::size_t n, std::size_t k) const;

    std::size_t sites_ = 0;
    int nu_ = 0;
    std::size_t size_ = 0;
    std::vector<int> tuples_;
    std::vector<std::size_t> binom_;  // (sites+1) x 4 table
};

/// Basis over the active sites of `terms` (compact indexing).
FockBasis enumerate_basis(std::size_t sites, int excitations);

struct InteractionSpec {
    double jz = 0.0;           // J_z, energy
    double power = 6.0;        // J_z^(m) = J_z / m^power
    int cutoff_range = 20;     // label distance
    bool literal_sigma_z = false;
};

/// Hamiltonian in the fixed-excitation sector:
///   off-diagonal  -J_nm moves one excitation n -> m onto an empty site,
///   diagonal      sum_occ eps_n + sum_pairs 4 J_z / r^power.
/// With literal_sigma_z the pair interaction is J_z/r^p sigma_z sigma_z verbatim, which adds
/// -2 sum_occ b_n (b_n = sum_{m != n} J_z/r_nm^p) and the constant sum_pairs J_z/r^p.
SparseReal build_mb_hamiltonian(const HamiltonianTerms& terms, const FockBasis& basis, const InteractionSpec& interaction);

struct ManyBodyState {
    std::shared_ptr<const FockBasis> basis;
    Eigen::VectorXcd amplitudes;
    double time = 0.0;
};

/// Hard-core projection of (S+)^nu |G> with S+ = sum psi_n sigma+_n, renormalised.
ManyBodyState symmetric_initial_state(const SpinWaveState& psi, std::shared_ptr<const FockBasis> basis);

/// exp(-i H dt) applied with the Chebyshev propagator.
ManyBodyState evolve_mb(const SparseReal& h, const ManyBodyState& state, double dt, double tol = 1e-10);

/// p_n = sum over basis states containing n of |amplitude|^2 (compact site order).
std::vector<double> density_profile(const ManyBodyState& state);

/// Probability that a pair of excitations sits at label distance d (rounded), d = 0..max.
/// Each basis state contributes its weight once per pair, divided by the number of pairs.
std::vector<double> pair_distance_histogram(const ManyBodyState& state, const HamiltonianTerms& terms);

void write_density_csv(const std::filesystem::path& path, const std::vector<double>& times,
                       const std::vector<std::vector<double>>& profiles, const HamiltonianTerms& terms, int excitations);

} // namespace spinlens::manybody
