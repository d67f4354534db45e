#include "spinlens/lens.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/tools/minima.hpp>
#include <boost/numeric/odeint.hpp>

#include "spinlens/csv.hpp"
#include "spinlens/error.hpp"
#include "spinlens/parallel.hpp"
#include "spinlens/propagator.hpp"

namespace spinlens::lens {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double nan = std::numeric_limits<double>::quiet_NaN();

double label_distance_sq(const Label& l, const Vec3& focus)
{
    double s = 0.0;
    for (int d = 0; d < 3; ++d)
        s += (l[d] - focus[d]) * (l[d] - focus[d]);
    return s;
}

double even_polynomial(const std::vector<double>& coeffs, double d2)
{
    double acc = 0.0, power = d2;
    for (double c : coeffs) {
        acc += c * power;
        power *= d2;
    }
    return acc;
}

void check_focus(const Vec3& focus, int dimension, const char* what)
{
    for (int d = 0; d < 3; ++d) {
        if (!std::isfinite(focus[d]))
            throw InvalidSpec(std::string(what) + ": focus must be finite");
        if (d >= dimension && focus[d] != 0.0)
            throw InvalidSpec(std::string(what) + ": focus has a component beyond the lattice dimension");
    }
}

void check_coeffs(const std::vector<double>& coeffs, const char* what)
{
    if (coeffs.empty() || coeffs.size() > 4)
        throw InvalidSpec(std::string(what) + ": polynomial order Q must be 2, 4, 6 or 8");
    for (double c : coeffs)
        if (!std::isfinite(c))
            throw InvalidSpec(std::string(what) + ": coefficients must be finite");
    if (!(coeffs[0] > 0.0))
        throw InvalidSpec(std::string(what) + ": the quadratic coefficient must be positive");
}

} // namespace

void validate(const LensDesign& design, int dimension)
{
    std::visit(
        [dimension](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, ThickPolynomial>) {
                check_coeffs(d.coeffs, "thick lens");
                check_focus(d.focus, dimension, "thick lens");
            } else if constexpr (std::is_same_v<T, ThinPulse>) {
                if (!(d.phi0 > 0.0) || !std::isfinite(d.phi0))
                    throw InvalidSpec("thin lens: phi0 must be positive");
                if (d.profile == PhaseProfile::Corrected && !d.higher.empty())
                    throw InvalidSpec("thin lens: higher orders apply to the parabolic profile only");
                if (d.higher.size() > 3)
                    throw InvalidSpec("thin lens: polynomial order Q must be at most 8");
                check_focus(d.focus, dimension, "thin lens");
            } else {
                if (d.regions.empty())
                    throw InvalidSpec("multifocal lens: at least one region is required");
                for (const auto& r : d.regions) {
                    check_coeffs(r.coeffs, "multifocal lens");
                    check_focus(r.focus, dimension, "multifocal lens");
                }
            }
        },
        design);
}

std::string describe(const LensDesign& design)
{
    std::ostringstream os;
    auto coeffs = [&os](const std::vector<double>& c) {
        os << "[";
        for (std::size_t i = 0; i < c.size(); ++i)
            os << (i ? ", " : "") << c[i];
        os << "]";
    };
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, ThickPolynomial>) {
                os << "thick";
                coeffs(d.coeffs);
            } else if constexpr (std::is_same_v<T, ThinPulse>) {
                os << "thin(" << (d.profile == PhaseProfile::Parabolic ? "parabolic" : "corrected")
                   << ", phi0=" << d.phi0 << ")";
            } else {
                os << "multifocal(" << d.regions.size() << " regions)";
            }
        },
        design);
    return os.str();
}

std::size_t region_of(const Multifocal& design, const Vec3& label)
{
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < design.regions.size(); ++r) {
        double d2 = 0.0;
        for (int d = 0; d < 3; ++d)
            d2 += (label[d] - design.regions[r].focus[d]) * (label[d] - design.regions[r].focus[d]);
        // strict comparison with a small slack keeps bisector sites in the lower region
        if (r == 0 || d2 < best_d2 - 1e-9 * std::max(1.0, best_d2)) {
            best_d2 = d2;
            best = r;
        }
    }
    return best;
}

std::vector<double> potential_profile(const LensDesign& design, const SiteTable& table)
{
    validate(design, table.dimension());
    std::vector<double> eps(table.size(), 0.0);
    if (const auto* thick = std::get_if<ThickPolynomial>(&design)) {
        for (std::size_t i = 0; i < table.size(); ++i)
            eps[i] = even_polynomial(thick->coeffs, label_distance_sq(table.label(i), thick->focus));
    } else if (const auto* multi = std::get_if<Multifocal>(&design)) {
        for (std::size_t i = 0; i < table.size(); ++i) {
            const Label& l = table.label(i);
            const auto& region = multi->regions[region_of(*multi, {double(l[0]), double(l[1]), double(l[2])})];
            eps[i] = even_polynomial(region.coeffs, label_distance_sq(l, region.focus));
        }
    }
    return eps;
}

double corrected_phase(double d, double phi0)
{
    d = std::abs(d);
    const double edge = 1.0 / phi0;
    auto inside = [phi0](double x) {
        const double s = phi0 * x;
        return x * std::asin(s) + (std::sqrt(std::max(0.0, 1.0 - s * s)) - 1.0) / phi0;
    };
    if (d <= edge)
        return inside(d);
    return inside(edge) + 0.5 * pi * (d - edge);
}

double printed_corrected_phase(double x, double phi0)
{
    if (std::abs(phi0 * x) > 1.0 || std::abs(x) > std::abs(phi0))
        return nan;
    return -x * std::asin(phi0 * x) - std::sqrt(phi0 * phi0 - x * x);
}

std::vector<double> thin_phase_profile(const ThinPulse& design, const SiteTable& table)
{
    validate(LensDesign{design}, table.dimension());
    std::vector<double> phi(table.size(), 0.0);
    for (std::size_t i = 0; i < table.size(); ++i) {
        const double d2 = label_distance_sq(table.label(i), design.focus);
        if (design.profile == PhaseProfile::Corrected) {
            phi[i] = corrected_phase(std::sqrt(d2), design.phi0);
        } else {
            std::vector<double> c{design.phi0};
            c.insert(c.end(), design.higher.begin(), design.higher.end());
            phi[i] = even_polynomial(c, d2);
        }
    }
    return phi;
}

ContinuumPrediction continuum_thick(double v0, double hopping, double spacing, double sigma0)
{
    if (!(v0 > 0.0 && hopping > 0.0 && spacing > 0.0 && sigma0 > 0.0))
        throw InvalidSpec("continuum_thick: all inputs must be positive");
    ContinuumPrediction p;
    p.omega = 2.0 * std::sqrt(v0 * hopping);
    p.mass = 1.0 / (2.0 * hopping * spacing * spacing);
    p.length = spacing * std::pow(hopping / v0, 0.25);
    p.focal_time = pi / (2.0 * p.omega);
    p.focal_width = p.length * p.length / sigma0;
    return p;
}

double continuum_thick_width(const ContinuumPrediction& p, double sigma0, double t)
{
    const double c = std::cos(p.omega * t), s = std::sin(p.omega * t);
    const double r = std::pow(p.length / sigma0, 4);
    return sigma0 * std::sqrt(c * c + r * s * s);
}

ThinPrediction continuum_thin(double phi0, double sigma0, double spacing, double hopping)
{
    if (!(phi0 > 0.0 && sigma0 > 0.0 && spacing > 0.0 && hopping > 0.0))
        throw InvalidSpec("continuum_thin: all inputs must be positive");
    const double s4 = std::pow(sigma0 / spacing, 4);
    const double q = 4.0 * phi0 * phi0 * s4 + 1.0;
    return {2.0 * s4 * phi0 / q / hopping, sigma0 / std::sqrt(q)};
}

ThinPrediction chirped_gaussian_focus(double phi0, double sigma0, double spacing, double hopping)
{
    if (!(phi0 > 0.0 && sigma0 > 0.0 && spacing > 0.0 && hopping > 0.0))
        throw InvalidSpec("chirped_gaussian_focus: all inputs must be positive");
    const double s4 = std::pow(sigma0 / spacing, 4);
    const double q = 4.0 * phi0 * phi0 * s4 + 1.0;
    return {s4 * phi0 / q / hopping, sigma0 / std::sqrt(q)};
}

Thresholds thresholds(double sigma0, double v0, double phi0, double hopping, double spacing)
{
    if (!(sigma0 > 0.0 && hopping > 0.0 && spacing > 0.0))
        throw InvalidSpec("thresholds: sigma0, J and a must be positive");
    Thresholds t;
    const double ratio = spacing / sigma0;
    t.v_bo = 4.0 * hopping * ratio * ratio;
    t.phi_bo = ratio;
    t.v_opt_scale = hopping * std::pow(ratio, 8.0 / 3.0);
    t.phi_opt_scale = std::pow(ratio, 4.0 / 3.0);
    t.sigma_bo = v0 > 0.0 ? 2.0 * spacing * std::sqrt(hopping / v0) : nan;
    t.k_c_thick = v0 > 0.0 ? std::pow(2304.0 * v0 / (pi * pi * hopping), 0.125) / spacing : nan;
    t.k_c_thin = phi0 > 0.0 ? std::pow(24.0 * phi0, 0.25) / spacing : nan;
    return t;
}

DispersionPoint dispersion_nn(double k, double hopping, double spacing)
{
    return {2.0 * hopping * (1.0 - std::cos(k * spacing)), 2.0 * hopping * spacing * std::sin(k * spacing), 0.0};
}

namespace {

/// Neumaier-compensated sum over n = 1..count of term(n).
template <class F>
double compensated_sum(long count, F term)
{
    double sum = 0.0, comp = 0.0;
    for (long n = 1; n <= count; ++n) {
        const double x = term(n);
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    return sum + comp;
}

constexpr long max_terms = 20'000'000;

/// Terms needed so that sum_{n>N} of an oscillating series with amplitude n^-p
/// and phase step theta falls below `target`; also the plain monotone bound.
long oscillating_terms(double p, double theta, double target, double& bound)
{
    const double s = std::abs(std::sin(0.5 * theta));
    double n_osc = std::numeric_limits<double>::infinity();
    if (s > 0.0)
        n_osc = std::pow(1.0 / (target * s), 1.0 / p);
    double n_mono = std::numeric_limits<double>::infinity();
    if (p > 1.0)
        n_mono = std::pow(1.0 / (target * (p - 1.0)), 1.0 / (p - 1.0));
    const double n = std::min({n_osc, n_mono, double(max_terms)});
    const long count = std::max(1L, static_cast<long>(std::ceil(n)));
    bound = std::min(s > 0.0 ? 1.0 / (std::pow(double(count), p) * s) : std::numeric_limits<double>::infinity(),
                     p > 1.0 ? 1.0 / ((p - 1.0) * std::pow(double(count), p - 1.0))
                             : std::numeric_limits<double>::infinity());
    return count;
}

} // namespace

DispersionPoint dispersion_power_law(double alpha, double k, double j0, double spacing)
{
    if (!(alpha > 1.0))
        throw InvalidSpec("dispersion_power_law: the lattice sum diverges for alpha <= 1");
    const double theta = k * spacing;
    if (std::abs(theta) > pi * (1.0 + 1e-12))
        throw InvalidSpec("dispersion_power_law: |ka| must not exceed pi");
    DispersionPoint out;
    if (alpha == 2.0) {
        // sum cos(n t)/n^2 = pi^2/6 - pi t/2 + t^2/4 for 0 <= t <= 2 pi
        const double t = std::abs(theta);
        out.energy = 2.0 * j0 * (0.5 * pi * t - 0.25 * t * t);
        out.group_velocity = theta == 0.0 ? 0.0 : std::copysign(j0 * spacing * (pi - t), theta);
        return out;
    }
    constexpr double target = 1e-13;
    double bound_e = 0.0, bound_v = 0.0;
    const long ne = oscillating_terms(alpha, theta, target, bound_e);
    const double cos_sum = compensated_sum(ne, [&](long n) { return std::cos(n * theta) / std::pow(double(n), alpha); });
    out.energy = 2.0 * j0 * (std::riemann_zeta(alpha) - cos_sum);
    if (theta != 0.0) {
        const long nv = oscillating_terms(alpha - 1.0, theta, target, bound_v);
        out.group_velocity = 2.0 * j0 * spacing *
                             compensated_sum(nv, [&](long n) { return std::sin(n * theta) / std::pow(double(n), alpha - 1.0); });
    }
    out.error_bound = 2.0 * j0 * std::max(bound_e, bound_v * spacing);
    return out;
}

double power_law_curvature(double alpha, double j0, double spacing)
{
    if (!(alpha > 3.0))
        throw InvalidSpec("power_law_curvature: the band curvature at k = 0 is finite only for alpha > 3");
    return 2.0 * j0 * spacing * spacing * std::riemann_zeta(alpha - 2.0);
}

// ---------------------------------------------------------------------------

namespace {

double width_of(const SpinWaveState& psi, const std::optional<Vec3>& about)
{
    return about ? packet_width_about(psi, *about) : packet_width(psi);
}

} // namespace

FocusTrace focus_scan(const HamiltonianTerms& h, const SpinWaveState& psi0, double t_lo, double t_hi, int samples,
                      double tol, const std::optional<Vec3>& about, bool refine)
{
    if (samples < 1)
        throw InvalidSpec("focus_scan: at least one sample is required");
    if (!(t_lo >= 0.0) || !(t_hi >= t_lo))
        throw InvalidSpec("focus_scan: need 0 <= t_lo <= t_hi");
    if (static_cast<std::size_t>(psi0.amplitudes.size()) != h.dim())
        throw InvalidSpec("focus_scan: state does not match the Hamiltonian");
    const SparseReal m = h.matrix();
    ChebyshevPropagator prop(m, tol);

    FocusTrace trace;
    SpinWaveState state = psi0;
    state.time = 0.0;
    SpinWaveState previous = state;       // state one sample before the current one
    SpinWaveState before_best = state;    // state one sample before the best sample
    std::size_t best = 0;
    for (int s = 0; s < samples; ++s) {
        const double t = samples == 1 ? t_lo : t_lo + (t_hi - t_lo) * s / (samples - 1);
        previous = state;
        prop.step(state.amplitudes, t - state.time);
        state.time = t;
        const double w = width_of(state, about);
        trace.times.push_back(t);
        trace.widths.push_back(w);
        if (s == 0 || w < trace.widths[best]) {
            best = static_cast<std::size_t>(s);
            before_best = s == 0 ? state : previous;
        }
    }
    trace.best_time = trace.times[best];
    trace.best_width = trace.widths[best];

    const SpinWaveState& origin = before_best;
    auto width_at = [&](double t) {
        SpinWaveState probe = origin;
        prop.step(probe.amplitudes, t - origin.time);
        probe.time = t;
        return probe;
    };
    if (refine && samples > 2) {
        const double lo = trace.times[best > 0 ? best - 1 : 0];
        const double hi = trace.times[std::min<std::size_t>(best + 1, trace.times.size() - 1)];
        if (hi > lo) {
            auto [t_min, w_min] = boost::math::tools::brent_find_minima(
                [&](double t) { return width_of(width_at(t), about); }, lo, hi, 40);
            if (w_min < trace.best_width) {
                trace.best_time = t_min;
                trace.best_width = w_min;
            }
        }
    }
    trace.best_state = width_at(trace.best_time);
    return trace;
}

double focal_time_estimate(LensKind kind, PhaseProfile profile, double strength, double sigma0, double hopping)
{
    if (!(strength > 0.0))
        throw InvalidSpec("focal_time_estimate: strength must be positive");
    if (kind == LensKind::Thick)
        return pi / (4.0 * std::sqrt(strength * hopping));
    if (profile == PhaseProfile::Corrected)
        return 1.0 / (2.0 * hopping * strength);
    return chirped_gaussian_focus(strength, sigma0, 1.0, hopping).focal_time;
}

namespace {

struct Workspace {
    const OptimizeSpec& spec;
    HamiltonianTerms base;  // couplings without a lens
};

FocusTrace run_once(const Workspace& ws, const std::vector<double>& coeffs)
{
    const OptimizeSpec& spec = ws.spec;
    const double t_est = focal_time_estimate(spec.kind, spec.profile, coeffs.at(0), spec.sigma0);
    const double t_lo = spec.time_lo * t_est, t_hi = spec.time_hi * t_est;
    if (spec.kind == LensKind::Thick) {
        const ThickPolynomial design{coeffs, spec.focus};
        const auto eps = potential_profile(design, *spec.table);
        const HamiltonianTerms h = ws.base.with_lens_sites(eps, describe(design));
        return focus_scan(h, spec.initial, t_lo, t_hi, spec.time_samples, spec.tol);
    }
    ThinPulse design{coeffs[0], spec.focus, spec.profile, {}};
    design.higher.assign(coeffs.begin() + 1, coeffs.end());
    const auto phi = thin_phase_profile(design, *spec.table);
    const SpinWaveState kicked = phase_imprint(spec.initial, phi);
    return focus_scan(ws.base, kicked, t_lo, t_hi, spec.time_samples, spec.tol);
}

HamiltonianTerms base_terms(const OptimizeSpec& spec)
{
    if (!spec.table)
        throw InvalidSpec("optimize_lens: no lattice");
    if (spec.initial.table != spec.table)
        throw InvalidSpec("optimize_lens: the initial state must live on the optimisation lattice");
    if (spec.order < 2 || spec.order > 8 || spec.order % 2)
        throw InvalidSpec("optimize_lens: Q must be 2, 4, 6 or 8");
    if (spec.kind == LensKind::Thin && spec.profile == PhaseProfile::Corrected && spec.order != 2)
        throw InvalidSpec("optimize_lens: the corrected thin profile has no higher-order coefficients");
    if (!(spec.sigma0 > 0.0))
        throw InvalidSpec("optimize_lens: sigma0 must be positive");
    if (spec.time_samples < 1 || !(spec.time_lo >= 0.0) || !(spec.time_hi >= spec.time_lo))
        throw InvalidSpec("optimize_lens: invalid time window");
    const std::vector<double> zeros(spec.table->size(), 0.0);
    return build_couplings(spec.table, spec.model, zeros);
}

std::vector<double> log_grid(double lo, double hi, int per_decade)
{
    if (!(lo > 0.0) || !(hi >= lo))
        throw InvalidSpec("optimize_lens: strength bounds must satisfy 0 < lo <= hi");
    if (hi == lo)
        return {lo};
    const int n = std::max(2, static_cast<int>(std::lround(std::log10(hi / lo) * per_decade)) + 1);
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        g[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, double(i) / (n - 1));
    return g;
}

} // namespace

FocusTrace focus_with(const OptimizeSpec& spec, const std::vector<double>& coeffs)
{
    const Workspace ws{spec, base_terms(spec)};
    return run_once(ws, coeffs);
}

OptimizeResult optimize_lens(const OptimizeSpec& spec)
{
    const Workspace ws{spec, base_terms(spec)};
    const auto th = thresholds(spec.sigma0, 0.0, 0.0);
    const double scale = spec.kind == LensKind::Thick ? th.v_opt_scale : th.phi_opt_scale;
    const double lo = spec.strength_lo > 0.0 ? spec.strength_lo : 0.1 * scale;
    const double hi = spec.strength_hi > 0.0 ? spec.strength_hi : 10.0 * scale;

    OptimizeResult result;
    const std::size_t n_coeffs = static_cast<std::size_t>(spec.order / 2);
    std::vector<double> coeffs(n_coeffs, 0.0);

    auto evaluate = [&](const std::vector<double>& c) {
        FocusTrace tr = run_once(ws, c);
        result.scan.push_back({c, tr.best_time, tr.best_width});
        return tr;
    };

    // Leading strength: coarse log grid (run concurrently), then Brent refinement in log space.
    const auto grid = log_grid(lo, hi, spec.points_per_decade);
    std::vector<FocusTrace> traces(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        std::vector<double> c(n_coeffs, 0.0);
        c[0] = grid[i];
        traces[i] = run_once(ws, c);
    });
    std::size_t best = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<double> c(n_coeffs, 0.0);
        c[0] = grid[i];
        result.scan.push_back({c, traces[i].best_time, traces[i].best_width});
        if (traces[i].best_width < traces[best].best_width)
            best = i;
    }
    coeffs[0] = grid[best];
    FocusTrace best_trace = std::move(traces[best]);
    if (grid.size() > 1 && (best == 0 || best + 1 == grid.size())) {
        result.on_boundary = true;
        result.notes.push_back("leading strength minimum on the grid boundary at " + format_double(grid[best]));
    }

    auto refine_coordinate = [&](std::size_t q, double a, double b, bool logarithmic) {
        if (!(b > a))
            return;
        std::vector<double> c = coeffs;
        auto objective = [&](double u) {
            c[q] = logarithmic ? std::exp(u) : u;
            return evaluate(c).best_width;
        };
        const double ua = logarithmic ? std::log(a) : a, ub = logarithmic ? std::log(b) : b;
        std::uintmax_t iterations = 40;
        auto [u, w] = boost::math::tools::brent_find_minima(objective, ua, ub, 30, iterations);
        if (w < best_trace.best_width) {
            c[q] = logarithmic ? std::exp(u) : u;
            coeffs = c;
            best_trace = run_once(ws, coeffs);
        }
    };
    if (grid.size() > 2)
        refine_coordinate(0, grid[best > 0 ? best - 1 : 0], grid[std::min(best + 1, grid.size() - 1)], true);

    // Higher orders: signed log grids scaled so the term matches the quadratic one at d = sigma0.
    for (int sweep = 0; sweep < std::max(1, spec.sweeps) && n_coeffs > 1; ++sweep) {
        for (std::size_t q = 1; q < n_coeffs; ++q) {
            const double s = coeffs[0] / std::pow(spec.sigma0, 2.0 * double(q));
            std::vector<double> values{0.0};
            const auto mags = sweep == 0 ? log_grid(1e-3 * s, s, spec.points_per_decade)
                                         : log_grid(1e-2 * std::max(std::abs(coeffs[q]), 1e-3 * s),
                                                    2.0 * std::max(std::abs(coeffs[q]), 1e-3 * s),
                                                    spec.points_per_decade);
            for (double m : mags) {
                values.push_back(m);
                values.push_back(-m);
            }
            std::sort(values.begin(), values.end());
            std::vector<FocusTrace> tr(values.size());
            parallel_for(values.size(), [&](std::size_t i) {
                std::vector<double> c = coeffs;
                c[q] = values[i];
                tr[i] = run_once(ws, c);
            });
            std::size_t arg = 0;
            for (std::size_t i = 0; i < values.size(); ++i) {
                std::vector<double> c = coeffs;
                c[q] = values[i];
                result.scan.push_back({c, tr[i].best_time, tr[i].best_width});
                if (tr[i].best_width < tr[arg].best_width)
                    arg = i;
            }
            if (tr[arg].best_width < best_trace.best_width) {
                coeffs[q] = values[arg];
                best_trace = std::move(tr[arg]);
            }
            const auto it = std::find(values.begin(), values.end(), coeffs[q]);
            if (it != values.end()) {
                const std::size_t i = static_cast<std::size_t>(it - values.begin());
                if (sweep == 0 && (i == 0 || i + 1 == values.size()))
                    result.notes.push_back("order " + std::to_string(2 * (q + 1)) + " minimum on the grid boundary");
                refine_coordinate(q, values[i > 0 ? i - 1 : 0], values[std::min(i + 1, values.size() - 1)], false);
            }
        }
        // Re-tune the leading strength with the higher orders in place.
        refine_coordinate(0, coeffs[0] / 1.5, coeffs[0] * 1.5, true);
    }

    result.coeffs = coeffs;
    result.time = best_trace.best_time;
    result.width = best_trace.best_width;
    result.focused = std::move(best_trace.best_state);
    return result;
}

void write_scan_csv(const std::filesystem::path& path, const OptimizeResult& result, LensKind kind)
{
    std::vector<std::string> header;
    const std::size_t n = result.coeffs.size();
    for (std::size_t q = 0; q < n; ++q) {
        const std::string order = std::to_string(2 * (q + 1));
        header.push_back(kind == LensKind::Thick ? "v" + order + "[J/a^" + order + "]"
                                                 : "phi" + order + "[rad/a^" + order + "]");
    }
    header.insert(header.end(), {"time[1/J]", "sigma_f[a]"});
    CsvWriter csv(path, header);
    for (const auto& row : result.scan) {
        for (std::size_t q = 0; q < n; ++q)
            csv << (q < row.coeffs.size() ? row.coeffs[q] : 0.0);
        csv << row.time << row.width;
        csv.end_row();
    }
}

// ---------------------------------------------------------------------------

SemiclassicalResult semiclassical_model(double v0, double hopping, double spacing, double x0, double t_end,
                                        int samples)
{
    if (!(v0 > 0.0 && hopping > 0.0 && spacing > 0.0 && t_end > 0.0) || samples < 2)
        throw InvalidSpec("semiclassical_model: parameters must be positive");
    using State = std::array<double, 2>;
    const double a = spacing, J = hopping;
    auto rhs = [&](const State& s, State& ds, double) {
        ds[0] = 2.0 * J * a * std::sin(s[1] * a);
        ds[1] = -2.0 * v0 * s[0] / (a * a);
    };
    auto energy = [&](const State& s) {
        return 2.0 * J * (1.0 - std::cos(s[1] * a)) + v0 * (s[0] / a) * (s[0] / a);
    };

    SemiclassicalResult out;
    out.sigma_bo = 2.0 * a * std::sqrt(J / v0);
    out.double_well = std::abs(x0) > out.sigma_bo;
    const double slope = 2.0 * v0 * std::abs(x0) / a;  // V'_n per site
    out.bloch_amplitude = slope > 0.0 ? 2.0 * J / slope : std::numeric_limits<double>::infinity();
    out.bloch_frequency = 0.5 * slope;

    std::vector<double> times(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i)
        times[static_cast<std::size_t>(i)] = t_end * i / (samples - 1);
    State s{x0, 0.0};
    const double e0 = energy(s);
    const double escale = std::max({std::abs(e0), J, 1e-300});
    namespace ode = boost::numeric::odeint;
    auto stepper = ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_dopri5<State>());
    ode::integrate_times(stepper, rhs, s, times.begin(), times.end(), t_end / samples / 4.0,
                         [&](const State& st, double t) {
                             out.trajectory.push_back({t, st[0], st[1]});
                             out.energy_drift = std::max(out.energy_drift, std::abs(energy(st) - e0) / escale);
                         });

    std::vector<double> turns;
    for (std::size_t i = 1; i < out.trajectory.size(); ++i) {
        const auto& p = out.trajectory[i - 1];
        const auto& c = out.trajectory[i];
        if ((p.x > 0) != (c.x > 0) && p.x != 0.0)
            out.crosses_origin = true;
        const double vp = std::sin(p.k * a), vc = std::sin(c.k * a);
        if (i > 1 && ((vp > 0) != (vc > 0)) && vp != 0.0) {
            // linear interpolation of the velocity zero
            turns.push_back(p.t + (c.t - p.t) * vp / (vp - vc));
        }
    }
    out.period = turns.size() >= 3 ? 2.0 * (turns.back() - turns.front()) / double(turns.size() - 1) : nan;
    return out;
}

double effective_bloch_potential(double x, double x0, double v0, double hopping)
{
    return 0.5 * ((4.0 * hopping * v0 - 2.0 * v0 * v0 * x0 * x0) * x * x + v0 * v0 * x * x * x * x);
}

double printed_bloch_potential(double x, double x0, double v0, double hopping)
{
    return 0.5 * ((2.0 * v0 * v0 * x0 * x0 - 4.0 * hopping * v0) * x * x - v0 * v0 * x * x * x * x);
}

} // namespace spinlens::lens
