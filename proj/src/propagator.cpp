#include "spinlens/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "spinlens/error.hpp"

namespace spinlens {

void check_tolerance(double tol)
{
    if (!(tol >= 1e-14 && tol <= 1e-6))
        throw InvalidSpec("propagator tolerance must lie in [1e-14, 1e-6], got " + std::to_string(tol));
}

SpectralBounds gershgorin_bounds(const SparseReal& h)
{
    if (h.rows() == 0)
        return {0.0, 0.0};
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Eigen::Index r = 0; r < h.outerSize(); ++r) {
        double diag = 0.0, radius = 0.0;
        for (SparseReal::InnerIterator it(h, r); it; ++it) {
            if (!std::isfinite(it.value()))
                throw NumericalError("spectral bound estimation failed: non-finite matrix entry in row " +
                                     std::to_string(r));
            if (it.col() == r)
                diag += it.value();
            else
                radius += std::abs(it.value());
        }
        lo = std::min(lo, diag - radius);
        hi = std::max(hi, diag + radius);
    }
    if (!std::isfinite(lo) || !std::isfinite(hi))
        throw NumericalError("spectral bound estimation failed: non-finite bounds");
    return {lo, hi};
}

std::vector<double> bessel_j_sequence(double x, int n)
{
    std::vector<double> out(static_cast<std::size_t>(n) + 1, 0.0);
    if (x == 0.0) {
        out[0] = 1.0;
        return out;
    }
    // Start the downward recurrence well above both n and x.
    const int start = 2 * ((std::max(n, static_cast<int>(x)) + 15 +
                            static_cast<int>(std::sqrt(40.0 * std::max(n, static_cast<int>(x))))) / 2);
    double jp1 = 0.0, j = 1e-300, norm = 0.0;
    std::vector<double> tmp(static_cast<std::size_t>(start) + 1, 0.0);
    tmp[static_cast<std::size_t>(start)] = j;
    for (int k = start; k > 0; --k) {
        const double jm1 = 2.0 * k / x * j - jp1;
        jp1 = j;
        j = jm1;
        tmp[static_cast<std::size_t>(k - 1)] = j;
        if (std::abs(j) > 1e250) {
            for (int m = k - 1; m <= start; ++m)
                tmp[static_cast<std::size_t>(m)] *= 1e-250;
            j *= 1e-250;
            jp1 *= 1e-250;
        }
    }
    norm = tmp[0];
    for (int k = 2; k <= start; k += 2)
        norm += 2.0 * tmp[static_cast<std::size_t>(k)];
    for (int k = 0; k <= n; ++k)
        out[static_cast<std::size_t>(k)] = tmp[static_cast<std::size_t>(k)] / norm;
    return out;
}

void apply(const SparseReal& h, const Eigen::VectorXcd& x, Eigen::VectorXcd& y)
{
    y.resize(h.rows());
    const auto* outer = h.outerIndexPtr();
    const auto* inner = h.innerIndexPtr();
    const auto* vals = h.valuePtr();
    for (Eigen::Index r = 0; r < h.rows(); ++r) {
        std::complex<double> acc = 0.0;
        for (auto p = outer[r]; p < outer[r + 1]; ++p)
            acc += vals[p] * x[inner[p]];
        y[r] = acc;
    }
}

ChebyshevPropagator::ChebyshevPropagator(const SparseReal& h, double tol)
    : h_(h), tol_(tol), bounds_(gershgorin_bounds(h))
{
    check_tolerance(tol);
    center_ = 0.5 * (bounds_.upper + bounds_.lower);
    // Pad so the rescaled operator stays strictly inside [-1, 1].
    half_width_ = 0.5 * (bounds_.upper - bounds_.lower) * (1.0 + 1e-9) + 1e-12;
}

void ChebyshevPropagator::step(Eigen::VectorXcd& psi, double dt) const
{
    if (dt == 0.0)
        return;
    if (psi.size() != h_.rows())
        throw InvalidSpec("propagator: state dimension does not match the Hamiltonian");

    const double x = half_width_ * std::abs(dt);
    const double cutoff = std::max(tol_ * 1e-4, 1e-18);
    int order = static_cast<int>(x + 10.0 * std::cbrt(x) + 20.0);
    auto coeffs = bessel_j_sequence(x, order);
    while (std::abs(coeffs.back()) > cutoff || std::abs(coeffs[coeffs.size() - 2]) > cutoff) {
        order = order + order / 2 + 10;
        coeffs = bessel_j_sequence(x, order);
    }
    int terms = order;
    while (terms > 1 && terms > x && std::abs(coeffs[static_cast<std::size_t>(terms)]) < cutoff)
        --terms;
    ++terms;

    // exp(-i H dt) = exp(-i c dt) [J0 T0 + 2 sum (-i sgn)^k Jk(a|dt|) Tk(H~)]
    const std::complex<double> minus_i = std::complex<double>(0.0, dt > 0 ? -1.0 : 1.0);
    const double inv_a = 1.0 / half_width_;

    Eigen::VectorXcd t_prev = psi;
    Eigen::VectorXcd t_cur(psi.size()), t_next(psi.size()), hv(psi.size());
    Eigen::VectorXcd result = coeffs[0] * psi;

    apply(h_, t_prev, hv);
    ++matvecs_;
    t_cur = (hv - center_ * t_prev) * inv_a;
    std::complex<double> phase = minus_i;
    result += 2.0 * coeffs[1] * phase * t_cur;

    for (int k = 2; k < terms; ++k) {
        apply(h_, t_cur, hv);
        ++matvecs_;
        t_next = 2.0 * inv_a * (hv - center_ * t_cur) - t_prev;
        phase *= minus_i;
        result += 2.0 * coeffs[static_cast<std::size_t>(k)] * phase * t_next;
        std::swap(t_prev, t_cur);
        std::swap(t_cur, t_next);
    }
    psi = std::exp(std::complex<double>(0.0, -center_ * dt)) * result;
}

void ChebyshevPropagator::sample(Eigen::VectorXcd& psi, std::span<const double> times,
                                 const std::function<void(double, const Eigen::VectorXcd&)>& observe) const
{
    double now = 0.0;
    for (double t : times) {
        if (t < now)
            throw InvalidSpec("propagator: sample times must be non-decreasing");
        step(psi, t - now);
        now = t;
        observe(t, psi);
    }
}

} // namespace spinlens
