#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spinlens/lattice.hpp"

namespace spinlens {

/// One delocalised excitation: complex amplitude per active site (site order).
///
/// Width convention: a packet psi ~ exp(-|x - x_c|^2 / (2 sigma0^2)) has
/// width sigma0, where width is sqrt((2/D) sum p_n |x_n - x_mean|^2) in D
/// dimensions. In 1D that is sqrt(2) times the rms spread of p_n; in 2D it is
/// the radial rms. This is the sigma entering the harmonic-oscillator
/// focusing formulas and the lattice Wigner function exp[-(x/s)^2 - (s k)^2].
struct SpinWaveState {
    std::shared_ptr<const SiteTable> table;
    Eigen::VectorXcd amplitudes;
    double time = 0.0;

    [[nodiscard]] double norm_squared() const { return amplitudes.squaredNorm(); }
};

/// Builds a normalised Gaussian packet. `center` is in label units, `k0` in
/// 1/a. Warnings (e.g. lattice too coarse for sigma0) are appended to
/// `warnings` when given.
SpinWaveState gaussian_packet(std::shared_ptr<const SiteTable> table, double sigma0, const Vec3& center,
                              const Vec3& k0 = {0.0, 0.0, 0.0}, std::vector<std::string>* warnings = nullptr);

/// Relative discretisation error of the Gaussian norm on an infinite 1D lattice.
double gaussian_discretisation_error(double sigma0_over_a);

/// (H psi)_n = eps_n psi_n - sum_m J_nm psi_m
Eigen::VectorXcd apply_h(const HamiltonianTerms& h, const Eigen::VectorXcd& psi);

/// exp(-i H dt) psi via the Chebyshev propagator. `tol` in [1e-14, 1e-6].
SpinWaveState evolve(const HamiltonianTerms& h, const SpinWaveState& psi, double dt, double tol = 1e-10);

/// Evolves through sorted absolute times (>= psi.time), calling `observe` at each.
void evolve_sampled(const HamiltonianTerms& h, SpinWaveState& psi, std::span<const double> times, double tol,
                    const std::function<void(const SpinWaveState&)>& observe);

/// psi_n <- exp(-i phi_n) psi_n, phi indexed by site. A profile phi_n = phi0 (n - n_f)^2
/// gives the local momentum kick -2 phi0 (n - n_f) / a.
SpinWaveState phase_imprint(const SpinWaveState& psi, std::span<const double> phi);

/// p_n per site (zero at holes).
std::vector<double> excitation_probability(const SpinWaveState& psi);

Vec3 centroid(const SpinWaveState& psi);
/// sqrt(sum p_n |x_n - x_mean|^2), the plain rms spread.
double rms_spread(const SpinWaveState& psi);
/// Packet width (see SpinWaveState); `about` replaces the centroid when given.
double packet_width(const SpinWaveState& psi);
double packet_width_about(const SpinWaveState& psi, const Vec3& about);
/// Per-axis widths sqrt(2 var_d).
Vec3 axis_widths(const SpinWaveState& psi);
/// Probability within `radius` (length units) of `center` (label units).
double focus_probability(const SpinWaveState& psi, const Vec3& center, double radius);

/// <k|(H)|k>-style expectation <psi|H|psi>.
double energy(const HamiltonianTerms& h, const SpinWaveState& psi);

/// max_n ||<a|b>| - 1| style comparison modulo global phase: returns 1 - |<a|b>|.
double phase_insensitive_distance(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);
/// max_n |a_n - e^{i theta} b_n| with theta aligning the overlap.
double max_amplitude_error(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

struct WignerGrid {
    std::vector<double> x;        // site positions x_n (length units)
    std::vector<double> k;        // momenta in (-pi/a, pi/a)
    Eigen::MatrixXd values;       // values(i_x, i_k)
    double max_imaginary = 0.0;   // largest discarded imaginary part
    double dk = 0.0;
};

/// Lattice Wigner function of a 1D state with `resolution` momentum points
/// (rounded up to a multiple of 4, at least 4x the site count).
WignerGrid wigner_lattice(const SpinWaveState& psi, int resolution = 0);

void write_snapshot_csv(const std::filesystem::path& path, const SpinWaveState& psi);
void write_wigner_csv(const std::filesystem::path& path, const WignerGrid& grid);

} // namespace spinlens
