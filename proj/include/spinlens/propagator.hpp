#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace spinlens {

using SparseReal = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct SpectralBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// Gershgorin enclosure of the spectrum of a real symmetric matrix.
/// Throws NumericalError when an entry is not finite.
SpectralBounds gershgorin_bounds(const SparseReal& h);

/// J_0(x) ... J_n(x) by Miller's backward recurrence, normalised with
/// J_0 + 2 sum J_2k = 1. Accurate to ~1e-15 absolute for x >= 0.
std::vector<double> bessel_j_sequence(double x, int n);

/// y = H x for a row-major real matrix and complex vector.
void apply(const SparseReal& h, const Eigen::VectorXcd& x, Eigen::VectorXcd& y);

/// exp(-i H t) by Chebyshev expansion of the time-evolution operator.
///
/// The series is truncated once the Bessel weights fall below
/// `tol * 1e-4` (never below 1e-18) beyond the order a*t, which keeps the
/// truncation error far below `tol` per unit time and the norm drift at
/// round-off level. Cost per step is ~ a*t + O((a*t)^{1/3}) mat-vecs where
/// a is the spectral half-width.
class ChebyshevPropagator {
public:
    ChebyshevPropagator(const SparseReal& h, double tol);

    /// psi <- exp(-i H dt) psi
    void step(Eigen::VectorXcd& psi, double dt) const;

    /// Steps through the sorted `times` (relative to the current state) and
    /// calls `observe(t, psi)` at each one.
    void sample(Eigen::VectorXcd& psi, std::span<const double> times,
                const std::function<void(double, const Eigen::VectorXcd&)>& observe) const;

    [[nodiscard]] const SpectralBounds& bounds() const { return bounds_; }
    [[nodiscard]] long matvec_count() const { return matvecs_; }

private:
    const SparseReal& h_;
    double tol_;
    SpectralBounds bounds_;
    double center_ = 0.0;
    double half_width_ = 1.0;
    mutable long matvecs_ = 0;
};

/// Checks tol in [1e-14, 1e-6].
void check_tolerance(double tol);

} // namespace spinlens
