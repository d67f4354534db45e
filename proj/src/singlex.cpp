#include "spinlens/singlex.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "spinlens/csv.hpp"
#include "spinlens/error.hpp"
#include "spinlens/propagator.hpp"

namespace spinlens {

namespace {

using cd = std::complex<double>;

void check_match(const HamiltonianTerms& h, const SpinWaveState& psi)
{
    if (static_cast<std::size_t>(psi.amplitudes.size()) != h.dim())
        throw InvalidSpec("state has " + std::to_string(psi.amplitudes.size()) +
                          " amplitudes but the Hamiltonian acts on " + std::to_string(h.dim()) + " sites");
}

double squared_distance(const Vec3& a, const Vec3& b)
{
    return (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]);
}

Vec3 scaled(const Vec3& v, double s) { return {v[0] * s, v[1] * s, v[2] * s}; }

} // namespace

double gaussian_discretisation_error(double sigma0_over_a)
{
    // Poisson summation: sum_n exp(-(n-c)^2/s^2) = sqrt(pi) s [1 + 2 sum_m exp(-pi^2 m^2 s^2) cos(2 pi m c)]
    const double s = sigma0_over_a;
    return 2.0 * std::exp(-std::numbers::pi * std::numbers::pi * s * s);
}

SpinWaveState gaussian_packet(std::shared_ptr<const SiteTable> table, double sigma0, const Vec3& center,
                              const Vec3& k0, std::vector<std::string>* warnings)
{
    if (!(sigma0 > 0.0))
        throw InvalidSpec("gaussian_packet: sigma0 must be positive");
    const SiteTable& t = *table;
    for (int d = 0; d < 3; ++d)
        if (center[d] < -0.5 || center[d] > t.extents()[d] - 0.5)
            throw InvalidSpec("gaussian_packet: center lies outside the lattice");

    const Vec3 xc = scaled(center, t.spacing());
    SpinWaveState psi;
    psi.table = table;
    psi.amplitudes.resize(static_cast<Eigen::Index>(t.active_count()));
    Eigen::Index c = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!t.active(i))
            continue;
        const Vec3& x = t.position(i);
        const double r2 = squared_distance(x, xc);
        const double phase = k0[0] * (x[0] - xc[0]) + k0[1] * (x[1] - xc[1]) + k0[2] * (x[2] - xc[2]);
        psi.amplitudes[c++] = std::exp(-r2 / (2.0 * sigma0 * sigma0)) * std::polar(1.0, phase);
    }
    const double norm = psi.amplitudes.norm();
    if (norm == 0.0 || !std::isfinite(norm))
        throw NumericalError("gaussian_packet: packet has zero norm on the active sites");

    if (warnings) {
        const double disc = gaussian_discretisation_error(sigma0 / t.spacing());
        if (disc > 1e-6)
            warnings->push_back("gaussian_packet: sigma0 = " + format_double(sigma0) +
                                " is too small for the lattice; norm discretisation error ~" + format_double(disc));
        // Compare the discrete norm with the continuum value to flag boundary truncation.
        const double a = t.spacing();
        const double continuum =
            std::pow(std::sqrt(std::numbers::pi) * sigma0 / a, static_cast<double>(t.dimension()));
        const double loss = 1.0 - norm * norm / continuum;
        if (loss > 1e-6 && disc <= 1e-6)
            warnings->push_back("gaussian_packet: packet truncated by the lattice boundary (norm loss " +
                                format_double(loss) + ")");
    }
    psi.amplitudes /= norm;
    return psi;
}

Eigen::VectorXcd apply_h(const HamiltonianTerms& h, const Eigen::VectorXcd& psi)
{
    if (static_cast<std::size_t>(psi.size()) != h.dim())
        throw InvalidSpec("apply_h: dimension mismatch");
    Eigen::VectorXcd hop;
    apply(h.hopping, psi, hop);
    return h.diagonal.cast<cd>().cwiseProduct(psi) - hop;
}

SpinWaveState evolve(const HamiltonianTerms& h, const SpinWaveState& psi, double dt, double tol)
{
    check_match(h, psi);
    check_tolerance(tol);
    SpinWaveState out = psi;
    if (dt != 0.0) {
        const SparseReal m = h.matrix();
        ChebyshevPropagator prop(m, tol);
        prop.step(out.amplitudes, dt);
    }
    out.time += dt;
    return out;
}

void evolve_sampled(const HamiltonianTerms& h, SpinWaveState& psi, std::span<const double> times, double tol,
                    const std::function<void(const SpinWaveState&)>& observe)
{
    check_match(h, psi);
    const SparseReal m = h.matrix();
    ChebyshevPropagator prop(m, tol);
    for (double t : times) {
        if (t < psi.time)
            throw InvalidSpec("evolve_sampled: times must be non-decreasing and not before the state time");
        prop.step(psi.amplitudes, t - psi.time);
        psi.time = t;
        observe(psi);
    }
}

SpinWaveState phase_imprint(const SpinWaveState& psi, std::span<const double> phi)
{
    const SiteTable& t = *psi.table;
    if (phi.size() != t.size())
        throw InvalidSpec("phase_imprint: expected one phase per site");
    SpinWaveState out = psi;
    Eigen::Index c = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!t.active(i))
            continue;
        if (!std::isfinite(phi[i]))
            throw InvalidSpec("phase_imprint: non-finite phase at site " + std::to_string(i));
        out.amplitudes[c] *= std::polar(1.0, -phi[i]);
        ++c;
    }
    return out;
}

std::vector<double> excitation_probability(const SpinWaveState& psi)
{
    const SiteTable& t = *psi.table;
    std::vector<double> p(t.size(), 0.0);
    Eigen::Index c = 0;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t.active(i))
            p[i] = std::norm(psi.amplitudes[c++]);
    return p;
}

Vec3 centroid(const SpinWaveState& psi)
{
    const SiteTable& t = *psi.table;
    Vec3 m{};
    Eigen::Index c = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!t.active(i))
            continue;
        const double p = std::norm(psi.amplitudes[c++]);
        for (int d = 0; d < 3; ++d)
            m[d] += p * t.position(i)[d];
    }
    return m;
}

namespace {

Vec3 axis_variances(const SpinWaveState& psi, const Vec3& about)
{
    const SiteTable& t = *psi.table;
    Vec3 v{};
    Eigen::Index c = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!t.active(i))
            continue;
        const double p = std::norm(psi.amplitudes[c++]);
        for (int d = 0; d < 3; ++d) {
            const double dx = t.position(i)[d] - about[d];
            v[d] += p * dx * dx;
        }
    }
    return v;
}

} // namespace

double rms_spread(const SpinWaveState& psi)
{
    const Vec3 v = axis_variances(psi, centroid(psi));
    return std::sqrt(v[0] + v[1] + v[2]);
}

double packet_width(const SpinWaveState& psi)
{
    const Vec3 v = axis_variances(psi, centroid(psi));
    return std::sqrt(2.0 / psi.table->dimension() * (v[0] + v[1] + v[2]));
}

double packet_width_about(const SpinWaveState& psi, const Vec3& about)
{
    const Vec3 v = axis_variances(psi, scaled(about, psi.table->spacing()));
    return std::sqrt(2.0 / psi.table->dimension() * (v[0] + v[1] + v[2]));
}

Vec3 axis_widths(const SpinWaveState& psi)
{
    const Vec3 v = axis_variances(psi, centroid(psi));
    return {std::sqrt(2.0 * v[0]), std::sqrt(2.0 * v[1]), std::sqrt(2.0 * v[2])};
}

double focus_probability(const SpinWaveState& psi, const Vec3& center, double radius)
{
    const SiteTable& t = *psi.table;
    const Vec3 xc = scaled(center, t.spacing());
    const double r2 = radius * radius * (1.0 + 1e-12);
    double total = 0.0;
    Eigen::Index c = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!t.active(i))
            continue;
        const double p = std::norm(psi.amplitudes[c++]);
        if (squared_distance(t.position(i), xc) <= r2)
            total += p;
    }
    return total;
}

double energy(const HamiltonianTerms& h, const SpinWaveState& psi)
{
    return psi.amplitudes.dot(apply_h(h, psi.amplitudes)).real();
}

double phase_insensitive_distance(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b)
{
    return 1.0 - std::abs(a.dot(b)) / (a.norm() * b.norm());
}

double max_amplitude_error(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b)
{
    const cd overlap = b.dot(a);  // <b|a>
    const cd align = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : cd(1.0);
    return (a - align * b).cwiseAbs().maxCoeff();
}

WignerGrid wigner_lattice(const SpinWaveState& psi, int resolution)
{
    const SiteTable& t = *psi.table;
    if (t.dimension() != 1)
        throw InvalidSpec("wigner_lattice: only 1D states are supported");
    const double a = t.spacing();
    const int n_sites = static_cast<int>(t.size());
    int m = std::max(resolution, 4 * n_sites);
    m = (m + 3) / 4 * 4;

    // <k|psi> = sqrt(a/2pi) sum_n exp(-i k x_n) psi_n on k_j = (j - m/2) dk, dk = 2pi/(m a).
    const double dk = 2.0 * std::numbers::pi / (m * a);
    std::vector<double> xs;
    std::vector<cd> amp;
    Eigen::Index c = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!t.active(i))
            continue;
        xs.push_back(t.lattice_point(i)[0]);
        amp.push_back(psi.amplitudes[c++]);
    }
    std::vector<cd> spectrum(static_cast<std::size_t>(m));
    const double pref = std::sqrt(a / (2.0 * std::numbers::pi));
    for (int j = 0; j < m; ++j) {
        const double k = (j - m / 2) * dk;
        cd acc = 0.0;
        for (std::size_t n = 0; n < xs.size(); ++n)
            acc += std::polar(1.0, -k * xs[n]) * amp[n];
        spectrum[static_cast<std::size_t>(j)] = pref * acc;
    }
    auto spec_at = [&](int j) { return spectrum[static_cast<std::size_t>(((j % m) + m) % m)]; };

    WignerGrid grid;
    grid.dk = dk;
    for (int j = 0; j < m; ++j)
        grid.k.push_back((j - m / 2) * dk);
    for (std::size_t i = 0; i < t.size(); ++i)
        grid.x.push_back(t.lattice_point(i)[0]);
    grid.values.resize(static_cast<Eigen::Index>(grid.x.size()), m);

    // Trapezoid over q in [-pi/2a, pi/2a] with step dk: q_l = (l - m/4) dk, l = 0..m/2.
    const int q_half = m / 4;
    for (std::size_t ix = 0; ix < grid.x.size(); ++ix) {
        const double xn = grid.x[ix];
        for (int j = 0; j < m; ++j) {
            cd acc = 0.0;
            for (int l = -q_half; l <= q_half; ++l) {
                const double w = (l == -q_half || l == q_half) ? 0.5 : 1.0;
                const double q = l * dk;
                acc += w * spec_at(j - l) * std::conj(spec_at(j + l)) * std::polar(1.0, -2.0 * q * xn);
            }
            const cd value = a / std::numbers::pi * acc * dk;
            grid.values(static_cast<Eigen::Index>(ix), j) = value.real();
            grid.max_imaginary = std::max(grid.max_imaginary, std::abs(value.imag()));
        }
    }
    return grid;
}

void write_snapshot_csv(const std::filesystem::path& path, const SpinWaveState& psi)
{
    const SiteTable& t = *psi.table;
    std::vector<std::string> header;
    const char* axes[] = {"x", "y", "z"};
    for (int d = 0; d < t.dimension(); ++d)
        header.push_back(std::string("label_") + axes[d] + "[1]");
    for (int d = 0; d < t.dimension(); ++d)
        header.push_back(std::string(axes[d]) + "[a]");
    header.insert(header.end(), {"re_psi[1]", "im_psi[1]", "p_n[1]"});
    CsvWriter csv(path, header);
    Eigen::Index c = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        for (int d = 0; d < t.dimension(); ++d)
            csv << t.label(i)[d];
        for (int d = 0; d < t.dimension(); ++d)
            csv << t.position(i)[d] / t.spacing();
        const cd v = t.active(i) ? psi.amplitudes[c++] : cd(0.0);
        csv << v.real() << v.imag() << std::norm(v);
        csv.end_row();
    }
}

void write_wigner_csv(const std::filesystem::path& path, const WignerGrid& grid)
{
    CsvWriter csv(path, {"x_n[a]", "k[1/a]", "W[1]"});
    for (std::size_t ix = 0; ix < grid.x.size(); ++ix)
        for (std::size_t j = 0; j < grid.k.size(); ++j)
            csv.row({grid.x[ix], grid.k[j], grid.values(static_cast<Eigen::Index>(ix), static_cast<Eigen::Index>(j))});
}

} // namespace spinlens
