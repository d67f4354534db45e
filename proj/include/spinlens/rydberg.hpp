#pragma once

#include <array>
#include <complex>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace spinlens::rydberg {

/// Laser-dressing parameters. Frequencies are angular and carry their sign
/// (the detuning is negative in the usual red-detuned setup); c12 is the
/// direct van der Waals coefficient of the |r,s> pair, xi = w12 / c12.
struct DressingParams {
    double rabi = 0.0;       // Omega
    double detuning = 0.0;   // Delta
    double c12 = 1.0;        // energy * length^6
    double xi = 0.0;

    /// r_tilde = (|Delta| / c12)^{1/6} r
    [[nodiscard]] double dimensionless_distance(double r) const;
    /// Omega / |Delta|; the dressing picture needs this well below one.
    [[nodiscard]] double validity_ratio() const;
    void validate() const;
};

struct SoftCore {
    double v = 0.0;   // V tilde
    double w = 0.0;   // W tilde
};

/// Dimensionless soft-core potentials of the dressed pair.
SoftCore effective_potentials(double r_tilde, double xi);

/// Derivatives d/dr_tilde of (V tilde, W tilde).
SoftCore effective_potentials_derivative(double r_tilde, double xi);

/// Location of the exchange maximum, r_tilde^6 = sqrt(1 - xi^2).
double exchange_maximum(double xi);

struct DressedCoupling {
    double v_sg = 0.0;
    double w_sg = 0.0;
};

/// V_sg = Omega^2/(4 Delta) V~(r~), W_sg = Omega^2/(2 Delta) W~(r~).
DressedCoupling dressed_couplings(const DressingParams& params, double r);

/// Radial derivatives of the dressed couplings with respect to r.
DressedCoupling dressed_couplings_derivative(const DressingParams& params, double r);

/// Large-distance limit of V_sg (the single-atom light shift, Omega^2/(4 Delta)).
double asymptotic_v_sg(const DressingParams& params);

/// Dressing parameters for which the nearest-neighbour hopping |W_sg(a)|/2 equals
/// `hopping` and the spacing `a` sits on the exchange maximum. Detuning is negative.
DressingParams params_for_unit_hopping(double xi, double spacing, double hopping = 1.0,
                                       double rabi_over_detuning = 0.5);

struct ChannelC6 {
    std::array<double, 4> c6{};
};

struct VdwCoefficients {
    double isotropic = 0.0;    // a
    double anisotropic = 0.0;  // b
};

VdwCoefficients vdw_iso_aniso(const ChannelC6& channels);

/// Angular mixing matrix in the basis {|-1/2,-1/2>, |-1/2,1/2>, |1/2,-1/2>, |1/2,1/2>}.
Eigen::Matrix4cd d0_matrix(double theta, double phi);

/// One row of an ingested coefficient table (principal quantum number and vdW data).
struct CoefficientRow {
    int n = 0;
    double c11 = 0.0;
    double c12 = 0.0;
    double w12 = 0.0;
    [[nodiscard]] double xi() const { return w12 / c12; }
};

/// Reads a CSV with header columns n,c11,c12,w12 (extra columns ignored).
std::vector<CoefficientRow> read_coefficient_table(const std::filesystem::path& path);

/// Linear interpolation of xi(n) over a table sorted by n. Throws outside the table range.
double interpolate_xi(const std::vector<CoefficientRow>& table, double n);

/// Writes (r_tilde, V~, W~) samples.
void write_potential_curve(const std::filesystem::path& path, double xi, double r_max,
                           int samples);

} // namespace spinlens::rydberg
