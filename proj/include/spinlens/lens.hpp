#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spinlens/lattice.hpp"
#include "spinlens/singlex.hpp"

namespace spinlens::lens {

/// Potential switched on for the whole evolution:
///     eps_n = sum_q coeffs[q-1] * d_n^(2q)
/// with d_n the Euclidean label distance to `focus` (label units).
struct ThickPolynomial {
    std::vector<double> coeffs;  // v2, v4, v6, ... in J / site^(2q)
    Vec3 focus{};
};

enum class PhaseProfile { Parabolic, Corrected };

/// Instantaneous phase imprint psi_n -> exp(-i phi_n) psi_n, followed by free hopping.
/// Parabolic: phi_n = phi0 d^2 + sum_q higher[q] d^(2q+4).
/// Corrected: stationary-time profile (see corrected_phase).
struct ThinPulse {
    double phi0 = 0.0;
    Vec3 focus{};
    PhaseProfile profile = PhaseProfile::Parabolic;
    std::vector<double> higher;  // phi4, phi6, ... (parabolic profile only)
};

struct FocalRegion {
    Vec3 focus{};
    std::vector<double> coeffs;
};

/// Several potential wells; each site belongs to its nearest focus (ties go to
/// the lower region index), which for two foci is the perpendicular bisector.
struct Multifocal {
    std::vector<FocalRegion> regions;
};

using LensDesign = std::variant<ThickPolynomial, ThinPulse, Multifocal>;

void validate(const LensDesign& design, int dimension);
std::string describe(const LensDesign& design);

/// Region index of a label under a multifocal design.
std::size_t region_of(const Multifocal& design, const Vec3& label);

/// eps_n per site at the undisplaced labels. A thin pulse has no potential (zeros).
std::vector<double> potential_profile(const LensDesign& design, const SiteTable& table);

/// phi_n per site for a thin pulse.
std::vector<double> thin_phase_profile(const ThinPulse& design, const SiteTable& table);

/// Stationary-time phase at label distance d >= 0. Its kick -phi'(d) sends the
/// part of the packet at d to the focus at t_f = 1/(2 J phi0):
///     sin(k(d)) = -phi0 d  for phi0 d <= 1,
/// and the phase continues with the boundary slope pi/2 beyond d = 1/phi0.
/// Small d: phi ~ phi0 d^2 / 2.
double corrected_phase(double d, double phi0);
/// The closed form as printed: -x asin(phi0 x) - sqrt(phi0^2 - x^2); NaN where not real.
double printed_corrected_phase(double x, double phi0);

struct ContinuumPrediction {
    double omega = 0.0;        // 2 sqrt(v0 J)
    double mass = 0.0;         // 1 / (2 J a^2)
    double length = 0.0;       // a (J / v0)^(1/4)
    double focal_time = 0.0;   // pi / (2 omega)
    double focal_width = 0.0;  // length^2 / sigma0
};

/// Harmonic-oscillator limit of the thick lens.
ContinuumPrediction continuum_thick(double v0, double hopping, double spacing, double sigma0);
/// sigma(t)^2 = sigma0^2 [cos^2(omega t) + (length / sigma0)^4 sin^2(omega t)]
double continuum_thick_width(const ContinuumPrediction& p, double sigma0, double t);

struct ThinPrediction {
    double focal_time = 0.0;
    double focal_width = 0.0;
};

/// The thin-lens closed forms as printed:
///     J t_f = 2 s^4 phi0 / (4 phi0^2 s^4 + 1),  sigma_f = sigma0 / sqrt(4 phi0^2 s^4 + 1),  s = sigma0 / a.
ThinPrediction continuum_thin(double phi0, double sigma0, double spacing, double hopping);
/// Exact free-particle result for psi ~ exp(-x^2/(2 sigma0^2) - i phi0 (x/a)^2) with
/// effective mass 1/(2 J a^2): J t = phi0 s^4 / (1 + 4 phi0^2 s^4), same sigma_f.
ThinPrediction chirped_gaussian_focus(double phi0, double sigma0, double spacing, double hopping);

struct Thresholds {
    double sigma_bo = 0.0;       // 2 a sqrt(J / v0), NaN without v0
    double v_bo = 0.0;           // 4 J (a / sigma0)^2
    double phi_bo = 0.0;         // a / sigma0
    double v_opt_scale = 0.0;    // J (a / sigma0)^(8/3), unit prefactor
    double phi_opt_scale = 0.0;  // (a / sigma0)^(4/3), unit prefactor
    double k_c_thick = 0.0;      // [2304 v0 / (pi^2 J)]^(1/8) / a, NaN without v0
    double k_c_thin = 0.0;       // (24 phi0)^(1/4) / a, NaN without phi0
    bool prefactor_empirical = true;
};

/// Pass v0 or phi0 <= 0 when not applicable.
Thresholds thresholds(double sigma0, double v0, double phi0, double hopping = 1.0, double spacing = 1.0);

struct DispersionPoint {
    double energy = 0.0;
    double group_velocity = 0.0;
    double error_bound = 0.0;  // truncation bound of the lattice sums
};

/// eps(k) = 2J [1 - cos(ka)], v = 2 J a sin(ka)
DispersionPoint dispersion_nn(double k, double hopping = 1.0, double spacing = 1.0);
/// eps_alpha(k) = 2 J0 sum_n [1 - cos(nka)] / n^alpha. Throws for alpha <= 1.
DispersionPoint dispersion_power_law(double alpha, double k, double j0 = 1.0, double spacing = 1.0);
/// eps_alpha''(0) = 2 J0 a^2 zeta(alpha - 2), alpha > 3.
double power_law_curvature(double alpha, double j0 = 1.0, double spacing = 1.0);

// ---------------------------------------------------------------------------
// Focusing runs and lens optimisation

struct FocusTrace {
    std::vector<double> times;
    std::vector<double> widths;
    double best_time = 0.0;
    double best_width = 0.0;
    SpinWaveState best_state;
};

/// Evolves `psi0` (at time 0) under `h`, samples the packet width on `samples`
/// uniform times in [t_lo, t_hi] and refines the minimum by golden section.
/// Width is packet_width about the centroid, or about `about` (label units) when given.
FocusTrace focus_scan(const HamiltonianTerms& h, const SpinWaveState& psi0, double t_lo, double t_hi, int samples,
                      double tol, const std::optional<Vec3>& about = std::nullopt, bool refine = true);

enum class LensKind { Thick, Thin };

struct OptimizeSpec {
    LensKind kind = LensKind::Thick;
    int order = 2;  // Q: 2, 4, 6 or 8
    PhaseProfile profile = PhaseProfile::Parabolic;
    std::shared_ptr<const SiteTable> table;
    CouplingModel model = NearestNeighbor{};
    SpinWaveState initial;  // state before the lens acts
    double sigma0 = 0.0;    // sets the strength scale
    Vec3 focus{};
    double strength_lo = 0.0;  // <= 0: 0.1 x scaling estimate
    double strength_hi = 0.0;  // <= 0: 10 x scaling estimate
    int points_per_decade = 8;
    int time_samples = 200;
    double time_lo = 0.5;  // window as fractions of the focal-time estimate
    double time_hi = 1.5;
    int sweeps = 2;        // coordinate-descent sweeps for Q > 2
    double tol = 1e-10;
};

struct ScanRow {
    std::vector<double> coeffs;
    double time = 0.0;
    double width = 0.0;
};

struct OptimizeResult {
    std::vector<double> coeffs;  // v2.. (thick) or phi0, phi4.. (thin)
    double time = 0.0;
    double width = 0.0;
    bool on_boundary = false;
    std::vector<std::string> notes;
    std::vector<ScanRow> scan;
    SpinWaveState focused;
};

/// Focal-time estimate for the leading coefficient.
double focal_time_estimate(LensKind kind, PhaseProfile profile, double strength, double sigma0, double hopping = 1.0);

/// Full evolution for one set of coefficients; returns the minimum over the time window.
FocusTrace focus_with(const OptimizeSpec& spec, const std::vector<double>& coeffs);

/// Grid + golden-section search over the leading strength, then coordinate descent
/// over higher orders. A minimum on the grid edge is reported in `on_boundary`.
OptimizeResult optimize_lens(const OptimizeSpec& spec);

void write_scan_csv(const std::filesystem::path& path, const OptimizeResult& result, LensKind kind);

// ---------------------------------------------------------------------------
// Semiclassical wave-packet model

struct TrajectoryPoint {
    double t = 0.0;
    double x = 0.0;  // length
    double k = 0.0;  // 1/length
};

struct SemiclassicalResult {
    std::vector<TrajectoryPoint> trajectory;
    double energy_drift = 0.0;    // max |E(t) - E(0)| / scale
    bool double_well = false;     // |x0| > sigma_BO: trapped by Bloch oscillations
    bool crosses_origin = false;
    double period = 0.0;          // from successive turning points, NaN when not found
    double bloch_amplitude = 0.0;  // 2J / V'(x0) in sites
    double bloch_frequency = 0.0;  // V'(x0) / 2
    double sigma_bo = 0.0;
};

/// x' = 2 J a sin(ka), k' = -2 v0 x / a^2, from rest at x0, integrated to t_end
/// with an adaptive Dormand-Prince scheme.
SemiclassicalResult semiclassical_model(double v0, double hopping, double spacing, double x0, double t_end,
                                        int samples = 2000);

/// Effective potential for unit mass matching the lattice trajectory from rest at x0:
///     V(x) = [(4 J v0 - 2 v0^2 x0^2) x^2 + v0^2 x^4] / 2   (x in units of a).
double effective_bloch_potential(double x, double x0, double v0, double hopping = 1.0);
/// The same potential with the printed (opposite) overall sign.
double printed_bloch_potential(double x, double x0, double v0, double hopping = 1.0);

} // namespace spinlens::lens
