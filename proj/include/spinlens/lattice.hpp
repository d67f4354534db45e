#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Sparse>

#include "spinlens/rydberg.hpp"

namespace spinlens {

using Vec3 = std::array<double, 3>;
using Label = std::array<int, 3>;

/// Geometry of a finite hypercubic array with open boundaries.
///
/// Sites are stored row-major over the labels (last axis fastest). Undisplaced
/// positions are spacing * label; holes keep their position but are inactive.
class SiteTable {
public:
    SiteTable() = default;

    [[nodiscard]] int dimension() const { return dimension_; }
    [[nodiscard]] const Label& extents() const { return extents_; }
    [[nodiscard]] double spacing() const { return spacing_; }
    [[nodiscard]] std::size_t size() const { return positions_.size(); }
    [[nodiscard]] std::size_t active_count() const;

    [[nodiscard]] const Vec3& position(std::size_t i) const { return positions_[i]; }
    [[nodiscard]] const Label& label(std::size_t i) const { return labels_[i]; }
    [[nodiscard]] bool active(std::size_t i) const { return active_[i] != 0; }
    [[nodiscard]] std::span<const Vec3> positions() const { return positions_; }

    /// Undisplaced coordinate spacing * label.
    [[nodiscard]] Vec3 lattice_point(std::size_t i) const;
    /// Row-major index of a label, or -1 when the label lies outside the array.
    [[nodiscard]] long index_of(const Label& label) const;
    /// Geometric centre of the array in label units (may be half-integer).
    [[nodiscard]] Vec3 center_label() const;

    friend SiteTable build_lattice(int dimension, const Label& extents, double spacing);
    friend SiteTable punch_holes(const SiteTable& table, std::span<const std::size_t> holes);
    friend SiteTable displace_sites(const SiteTable& table, std::span<const Vec3> displacements);

private:
    int dimension_ = 1;
    Label extents_{1, 1, 1};
    double spacing_ = 1.0;
    std::vector<Vec3> positions_;
    std::vector<Label> labels_;
    std::vector<std::uint8_t> active_;
};

/// Builds a 1D/2D/3D lattice; unused axes of `extents` must be 1.
SiteTable build_lattice(int dimension, const Label& extents, double spacing = 1.0);
SiteTable punch_holes(const SiteTable& table, std::span<const std::size_t> holes);
SiteTable displace_sites(const SiteTable& table, std::span<const Vec3> displacements);

struct NearestNeighbor {
    double hopping = 1.0;
};

struct PowerLaw {
    double j0 = 1.0;
    double alpha = 6.0;
    int cutoff_range = 20;  // in lattice spacings (label distance)
};

struct RydbergDressed {
    rydberg::DressingParams dressing;
    int cutoff_range = 20;
};

using CouplingModel = std::variant<NearestNeighbor, PowerLaw, RydbergDressed>;

void validate(const CouplingModel& model);
std::string describe(const CouplingModel& model);

using SparseReal = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Single-excitation Hamiltonian restricted to active sites:
///     (H psi)_n = eps_n psi_n - sum_m J_nm psi_m
/// Compact index c runs over active sites in site order; `site(c)` maps back.
struct HamiltonianTerms {
    std::shared_ptr<const SiteTable> table;
    std::vector<std::size_t> active_sites;
    std::vector<long> compact_index;  // site -> compact index, -1 at holes
    SparseReal hopping;               // J_nm, symmetric, zero diagonal
    Eigen::VectorXd diagonal;         // eps_n = lens + coupling_shift
    Eigen::VectorXd coupling_shift;   // diagonal generated by the coupling model itself
    CouplingModel model;
    std::string lens;

    [[nodiscard]] std::size_t dim() const { return active_sites.size(); }
    [[nodiscard]] std::size_t site(std::size_t c) const { return active_sites[c]; }

    /// diag(eps) - J as a sparse matrix.
    [[nodiscard]] SparseReal matrix() const;
    /// Same couplings with a different lens potential (compact indexing).
    [[nodiscard]] HamiltonianTerms with_lens(const Eigen::VectorXd& lens_eps, std::string lens_name) const;
    /// Lens potential given per site (holes ignored).
    [[nodiscard]] HamiltonianTerms with_lens_sites(std::span<const double> lens_eps, std::string lens_name) const;
};

/// Assembles hopping and diagonal terms. `lens_diagonal` is indexed by site
/// (holes ignored). For RydbergDressed the diagonal also receives
/// sum_{j != i} [V_sg(r_ij) - V_sg(inf)] over active partners.
HamiltonianTerms build_couplings(const SiteTable& table, const CouplingModel& model,
                                 std::span<const double> lens_diagonal);

HamiltonianTerms build_couplings(std::shared_ptr<const SiteTable> table, const CouplingModel& model,
                                 std::span<const double> lens_diagonal);

double distance(const Vec3& a, const Vec3& b);

} // namespace spinlens
