// Acceptance runs. Each criterion prints one PASS/FAIL line followed by indented details.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "oracles.hpp"
#include "spinlens/disorder.hpp"
#include "spinlens/lattice.hpp"
#include "spinlens/lens.hpp"
#include "spinlens/manybody.hpp"
#include "spinlens/parallel.hpp"
#include "spinlens/propagator.hpp"
#include "spinlens/rydberg.hpp"
#include "spinlens/singlex.hpp"

using namespace spinlens;
namespace sl = spinlens::lens;

namespace {

struct Outcome {
    bool pass = false;
    std::string summary;
    std::vector<std::string> details;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::shared_ptr<const SiteTable> chain(int n) { return std::make_shared<const SiteTable>(build_lattice(1, {n, 1, 1})); }

Vec3 middle(const SiteTable& t) { return t.center_label(); }

/// Least-squares slope and intercept of log(y) against log(x).
std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {slope, (sy - slope * sx) / n};
}

/// Prefactor of a fixed 1/3 power law, geometric mean of sigma_f / sigma0^(1/3).
double kappa_fixed_slope(const std::vector<double>& s0, const std::vector<double>& sf)
{
    double acc = 0;
    for (std::size_t i = 0; i < s0.size(); ++i)
        acc += std::log(sf[i] / std::cbrt(s0[i]));
    return std::exp(acc / double(s0.size()));
}

sl::OptimizeSpec base_spec(std::shared_ptr<const SiteTable> table, double sigma0, int order, sl::LensKind kind,
                           CouplingModel model = NearestNeighbor{})
{
    sl::OptimizeSpec sp;
    sp.table = table;
    sp.model = model;
    sp.kind = kind;
    sp.order = order;
    sp.focus = middle(*table);
    sp.sigma0 = sigma0;
    sp.initial = gaussian_packet(table, sigma0, sp.focus);
    return sp;
}

std::string coeff_list(const std::vector<double>& c)
{
    std::string s;
    for (double x : c)
        s += fmt("%s%.4g", s.empty() ? "" : ",", x);
    return "{" + s + "}";
}

// ---------------------------------------------------------------------------

Outcome criterion1()
{
    constexpr int length = 2048;
    constexpr double sigma0 = 30.0, v0 = 1e-5, tolerance = 0.02;
    auto table = chain(length);
    const Vec3 c = middle(*table);
    const auto eps = sl::potential_profile(sl::ThickPolynomial{{v0}, c}, *table);
    const auto h = build_couplings(table, NearestNeighbor{}, eps);
    auto psi = gaussian_packet(table, sigma0, c);
    const auto pred = sl::continuum_thick(v0, 1.0, 1.0, sigma0);
    const double period = 2.0 * std::numbers::pi / pred.omega;

    std::vector<double> times;
    for (int i = 1; i <= 400; ++i)
        times.push_back(period * i / 400.0);
    double worst = 0, worst_t = 0, min_sim = 1e300;
    evolve_sampled(h, psi, times, 1e-10, [&](const SpinWaveState& s) {
        const double sim = packet_width(s);
        const double ref = sl::continuum_thick_width(pred, sigma0, s.time);
        min_sim = std::min(min_sim, sim);
        const double dev = std::abs(sim / ref - 1.0);
        if (dev > worst) {
            worst = dev;
            worst_t = s.time;
        }
    });
    Outcome o;
    o.pass = worst <= tolerance;
    o.summary = fmt("continuum thick lens over one period, max relative width deviation %.4f (limit %.2f)", worst, tolerance);
    o.details = {fmt("omega=%.6g period=%.2f/J, worst at t=%.1f", pred.omega, period, worst_t),
                 fmt("predicted focal width %.4f, simulated minimum %.4f", pred.focal_width, min_sim)};
    return o;
}

Outcome criterion2()
{
    constexpr int length = 800;
    constexpr double sigma0 = 100.0;
    constexpr double stage1_target = 2.7, stage1_tol = 0.4, stage2_target = 1.2, stage2_tol = 0.3;
    auto table = chain(length);
    auto sp = base_spec(table, sigma0, 6, sl::LensKind::Thick);
    const auto r1 = sl::optimize_lens(sp);

    // Second stage: thin lens acting on the focused packet.
    auto sp2 = sp;
    sp2.kind = sl::LensKind::Thin;
    sp2.order = 2;
    sp2.initial = r1.focused;
    sp2.initial.time = 0.0;
    sp2.sigma0 = r1.width;
    const auto r2 = sl::optimize_lens(sp2);

    const bool ok1 = std::abs(r1.width - stage1_target) <= stage1_tol;
    const bool ok2 = std::abs(r2.width - stage2_target) <= stage2_tol;
    Outcome o;
    o.pass = ok1 && ok2;
    o.summary = fmt("Q=6 thick sigma_f=%.3f (want %.1f+-%.1f), cascade sigma_f=%.3f (want %.1f+-%.1f)", r1.width,
                    stage1_target, stage1_tol, r2.width, stage2_target, stage2_tol);
    o.details = {fmt("stage 1 coeffs %s at t=%.2f/J%s", coeff_list(r1.coeffs).c_str(), r1.time,
                     r1.on_boundary ? " (grid edge)" : ""),
                 fmt("stage 2 phi0=%.4g at t=%.3f/J%s", r2.coeffs.at(0), r2.time, r2.on_boundary ? " (grid edge)" : "")};
    return o;
}

Outcome criterion3()
{
    const std::vector<double> sigmas{10, 20, 40, 80};
    constexpr double exponent = 1.0 / 3.0, exponent_tol = 0.07;
    constexpr double kappa_thick = 0.68, kappa_thin = 0.80, kappa_rel = 0.15;

    auto run = [&](sl::LensKind kind, int order) {
        std::vector<double> widths;
        for (double s0 : sigmas) {
            const int length = std::max(160, int(10 * s0));
            auto sp = base_spec(chain(length), s0, order, kind);
            widths.push_back(sl::optimize_lens(sp).width);
        }
        return widths;
    };
    const auto thick2 = run(sl::LensKind::Thick, 2);
    const auto thin2 = run(sl::LensKind::Thin, 2);
    const auto thick4 = run(sl::LensKind::Thick, 4);
    const auto thick6 = run(sl::LensKind::Thick, 6);

    const double e_thick = loglog_fit(sigmas, thick2).first;
    const double e_thin = loglog_fit(sigmas, thin2).first;
    const double e4 = loglog_fit(sigmas, thick4).first;
    const double e6 = loglog_fit(sigmas, thick6).first;
    const double k_thick = kappa_fixed_slope(sigmas, thick2);
    const double k_thin = kappa_fixed_slope(sigmas, thin2);

    const bool ok_e = std::abs(e_thick - exponent) <= exponent_tol && std::abs(e_thin - exponent) <= exponent_tol;
    const bool ok_k = std::abs(k_thick / kappa_thick - 1) <= kappa_rel && std::abs(k_thin / kappa_thin - 1) <= kappa_rel;
    const bool ok_order = e_thick > e4 && e4 > e6;

    auto row = [&](const char* name, const std::vector<double>& w) {
        std::string s = fmt("%-9s", name);
        for (double x : w)
            s += fmt(" %.4f", x);
        return s;
    };
    Outcome o;
    o.pass = ok_e && ok_k && ok_order;
    o.summary = fmt("exponents thick %.3f thin %.3f (1/3+-%.2f); kappa thick %.3f thin %.3f; Q=2,4,6 exponents %.3f > %.3f > %.3f",
                    e_thick, e_thin, exponent_tol, k_thick, k_thin, e_thick, e4, e6);
    o.details = {"sigma_f at sigma0 = 10 20 40 80", row("thick Q2", thick2), row("thin Q2", thin2), row("thick Q4", thick4),
                 row("thick Q6", thick6),
                 fmt("exponent %s, kappa %s, ordering %s", ok_e ? "ok" : "out", ok_k ? "ok" : "out", ok_order ? "ok" : "out")};
    return o;
}

Outcome criterion4()
{
    constexpr int length = 1024;
    constexpr double sigma0 = 50.0, tolerance = 0.05;
    const double phi0 = 0.5 * sl::thresholds(sigma0, 0, 0).phi_bo;
    auto table = chain(length);
    const Vec3 c = middle(*table);
    const auto free_h = build_couplings(table, NearestNeighbor{}, std::vector<double>(table->size(), 0.0));
    const auto psi0 = phase_imprint(gaussian_packet(table, sigma0, c),
                                    sl::thin_phase_profile(sl::ThinPulse{phi0, c, sl::PhaseProfile::Parabolic, {}}, *table));
    const auto printed = sl::continuum_thin(phi0, sigma0, 1.0, 1.0);
    const auto chirped = sl::chirped_gaussian_focus(phi0, sigma0, 1.0, 1.0);
    const auto trace = sl::focus_scan(free_h, psi0, 0.0, 2.0 * printed.focal_time, 400, 1e-10);

    const double dt = std::abs(trace.best_time / printed.focal_time - 1);
    const double dw = std::abs(trace.best_width / printed.focal_width - 1);
    Outcome o;
    o.pass = dt <= tolerance && dw <= tolerance;
    o.summary = fmt("thin lens phi0=%.4g: simulated t_f=%.3f sigma_f=%.3f vs closed form t_f=%.3f sigma_f=%.3f (5%%)", phi0,
                    trace.best_time, trace.best_width, printed.focal_time, printed.focal_width);
    o.details = {fmt("relative deviations: time %.3f, width %.3f", dt, dw),
                 fmt("exact chirped-Gaussian continuum focus: t=%.3f sigma_f=%.3f", chirped.focal_time, chirped.focal_width)};
    return o;
}

Outcome criterion5()
{
    constexpr int length = 301;
    constexpr double sigma0 = 30.0, kappa = 0.68, factor = 2.0;
    constexpr double leak_limit = 1e-3;  // weight near the origin of an outer eigenvector
    const auto th = sl::thresholds(sigma0, 0, 0);
    const double v0 = 2.0 * th.v_bo;
    const double sigma_bo = sl::thresholds(sigma0, v0, 0).sigma_bo;
    auto table = chain(length);
    const Vec3 c = middle(*table);
    const auto h = build_couplings(table, NearestNeighbor{}, sl::potential_profile(sl::ThickPolynomial{{v0}, c}, *table));
    const auto pred = sl::continuum_thick(v0, 1.0, 1.0, sigma0);
    const auto trace = sl::focus_scan(h, gaussian_packet(table, sigma0, c), 0.0, 3.0 * pred.focal_time, 300, 1e-10);
    const double scaling = kappa * std::cbrt(sigma0);
    const bool ok_width = trace.best_width >= factor * scaling;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle::dense(h.matrix()));
    double worst = 0;
    int outer = 0;
    for (Eigen::Index j = 0; j < es.eigenvectors().cols(); ++j) {
        const auto v = es.eigenvectors().col(j);
        double mean_abs = 0, inner = 0;
        for (Eigen::Index n = 0; n < v.size(); ++n) {
            const double d = std::abs(double(n) - c[0]);
            mean_abs += v[n] * v[n] * d;
            if (d < 0.5 * sigma_bo)
                inner += v[n] * v[n];
        }
        if (mean_abs > sigma_bo) {
            ++outer;
            worst = std::max(worst, inner);
        }
    }
    const bool ok_loc = outer > 0 && worst <= leak_limit;
    Outcome o;
    o.pass = ok_width && ok_loc;
    o.summary = fmt("v0=2 v_BO=%.4g: sigma_f=%.3f vs scaling %.3f (need x%.0f); outer eigenvectors max weight near origin %.2e (limit %.0e)",
                    v0, trace.best_width, scaling, factor, worst, leak_limit);
    o.details = {fmt("sigma_BO=%.2f, %d eigenvectors centred beyond sigma_BO", sigma_bo, outer)};
    return o;
}

Outcome criterion6()
{
    constexpr int length = 512;
    constexpr double sigma0 = 20.0, kappa_rel = 0.10, fail_factor = 3.0;
    auto table = chain(length);
    auto nn = base_spec(table, sigma0, 2, sl::LensKind::Thick);
    auto a6 = base_spec(table, sigma0, 2, sl::LensKind::Thick, PowerLaw{1.0, 6.0, 20});
    auto a2 = base_spec(table, sigma0, 2, sl::LensKind::Thick, PowerLaw{1.0, 2.0, length});
    // The alpha=2 band has no finite curvature, so widen both searches.
    const double scale = sl::thresholds(sigma0, 0, 0).v_opt_scale;
    a2.strength_lo = 1e-2 * scale;
    a2.strength_hi = 1e2 * scale;
    a2.time_lo = 0.05;
    a2.time_hi = 3.0;
    a2.time_samples = 400;

    const auto rnn = sl::optimize_lens(nn);
    const auto r6 = sl::optimize_lens(a6);
    const auto r2 = sl::optimize_lens(a2);
    const double k_nn = rnn.width / std::cbrt(sigma0), k6 = r6.width / std::cbrt(sigma0);
    const double rel = std::abs(k6 / k_nn - 1);
    Outcome o;
    o.pass = rel < kappa_rel && r2.width > fail_factor * r6.width;
    o.summary = fmt("kappa NN %.3f vs alpha=6 %.3f (rel diff %.3f < %.2f); alpha=2 sigma_f %.2f vs alpha=6 %.2f (need >x%.0f)",
                    k_nn, k6, rel, kappa_rel, r2.width, r6.width, fail_factor);
    o.details = {fmt("alpha=2 best strength %.3g at t=%.1f%s", r2.coeffs.at(0), r2.time, r2.on_boundary ? " (grid edge)" : "")};
    return o;
}

Outcome criterion7()
{
    constexpr int side = 50;
    constexpr double sigma0 = 10.0, v0 = 4.5e-3, radius = 3.0;
    constexpr double fidelity_min = 0.7, symmetry_tol = 0.05;
    auto table = std::make_shared<const SiteTable>(build_lattice(2, {side, side, 1}));
    const Vec3 c = middle(*table);
    const double off = std::sqrt(2.0) * sigma0;
    const Vec3 fa{c[0], c[1] - off, 0}, fb{c[0], c[1] + off, 0};
    sl::Multifocal design{{sl::FocalRegion{fa, {v0}}, sl::FocalRegion{fb, {v0}}}};
    const auto h = build_couplings(table, NearestNeighbor{}, sl::potential_profile(design, *table));
    auto psi = gaussian_packet(table, sigma0, c);
    const double quarter = sl::continuum_thick(v0, 1.0, 1.0, sigma0).focal_time;

    std::vector<double> times;
    for (int i = 0; i <= 200; ++i)
        times.push_back(quarter * (0.5 + i / 200.0));
    double best_f = -1, best_t = 0, best_a = 0, best_b = 0;
    evolve_sampled(h, psi, times, 1e-10, [&](const SpinWaveState& s) {
        const double pa = focus_probability(s, fa, radius), pb = focus_probability(s, fb, radius);
        const double f = std::pow(std::sqrt(pa) + std::sqrt(pb), 2) / 2.0;
        if (f > best_f) {
            best_f = f;
            best_t = s.time;
            best_a = pa;
            best_b = pb;
        }
    });
    const double asym = std::abs(best_a - best_b) / (0.5 * (best_a + best_b));
    Outcome o;
    o.pass = best_f >= fidelity_min && asym <= symmetry_tol;
    o.summary = fmt("two-focus fidelity %.3f (>= %.1f), P_A=%.4f P_B=%.4f asymmetry %.4f (<= %.2f)", best_f, fidelity_min,
                    best_a, best_b, asym, symmetry_tol);
    o.details = {fmt("at t=%.2f/J (quarter period %.2f/J), foci +-%.2f from the packet centre", best_t, quarter, off)};
    return o;
}

struct PeakReport {
    std::vector<int> peaks;  // offsets from the centre site
    double central = 0;
    double peak_sum = 0;
};

PeakReport find_peaks(const std::vector<double>& p, int centre)
{
    PeakReport r;
    const double top = *std::max_element(p.begin(), p.end());
    for (int n = 0; n < int(p.size()); ++n) {
        const double left = n > 0 ? p[n - 1] : -1, right = n + 1 < int(p.size()) ? p[n + 1] : -1;
        if (p[n] >= 0.25 * top && p[n] > left && p[n] >= right) {
            r.peaks.push_back(n - centre);
            r.peak_sum += p[n];
        }
    }
    for (int n = centre - 1; n <= centre + 1; ++n)
        r.central += p[n];
    return r;
}

Outcome criterion8()
{
    constexpr double jz = 5000.0, blockade_slack = 0.05, central_limit = 0.10;
    const double r_b = std::pow(jz, 1.0 / 6.0);
    struct Case {
        int nu, sites;
        double sigma0;
    };
    const std::vector<Case> cases{{1, 71, 12.0}, {2, 71, 12.0}, {3, 61, 10.0}};
    std::map<std::pair<int, double>, sl::OptimizeResult> lenses;
    Outcome o;
    bool ok = true;
    std::string summary;
    for (const auto& cs : cases) {
        auto table = chain(cs.sites);
        const int centre = cs.sites / 2;
        const Vec3 c{double(centre), 0, 0};
        auto sp = base_spec(table, cs.sigma0, 2, sl::LensKind::Thick);
        sp.focus = c;
        sp.initial = gaussian_packet(table, cs.sigma0, c);
        const auto key = std::make_pair(cs.sites, cs.sigma0);
        if (!lenses.count(key))
            lenses.emplace(key, sl::optimize_lens(sp));
        const auto& lr = lenses.at(key);
        const auto h = build_couplings(table, NearestNeighbor{}, sl::potential_profile(sl::ThickPolynomial{lr.coeffs, c}, *table));
        auto basis = std::make_shared<const manybody::FockBasis>(h.dim(), cs.nu);
        const auto hm = manybody::build_mb_hamiltonian(h, *basis, {jz, 6.0, 20, false});
        const auto initial = manybody::symmetric_initial_state(sp.initial, basis);
        const auto state = manybody::evolve_mb(hm, initial, lr.time, 1e-10);
        const auto p = manybody::density_profile(state);
        const auto pk = find_peaks(p, centre);

        std::string peaks;
        for (int x : pk.peaks)
            peaks += fmt(" %+d", x);
        bool case_ok = true;
        if (cs.nu == 1) {
            case_ok = pk.peaks.size() == 1 && std::abs(pk.peaks[0]) <= 1;
        } else if (cs.nu == 2) {
            // Pairs closer than the blockade radius: adjacent pairs present initially stay bound,
            // so the check is that focusing does not add any.
            auto close_weight = [&](const manybody::ManyBodyState& st) {
                const auto hist = manybody::pair_distance_histogram(st, h);
                double w = 0;
                for (std::size_t d = 0; d < hist.size() && double(d) < r_b; ++d)
                    w += hist[d];
                return w;
            };
            const double close = close_weight(state), close0 = close_weight(initial);
            const int sep = pk.peaks.size() == 2 ? pk.peaks[1] - pk.peaks[0] : 0;
            case_ok = pk.peaks.size() == 2 && pk.peaks[0] == -pk.peaks[1] && sep >= 0.8 * r_b && sep <= 2.0 * r_b &&
                      pk.central < central_limit * pk.peak_sum && close <= close0 * (1 + blockade_slack);
            o.details.push_back(fmt("nu=2: separation %d (window [%.2f, %.2f]), central %.4f vs %.0f%% of peak sum %.4f, P(d<r_B) %.4f (initial %.4f)",
                                    sep, 0.8 * r_b, 2.0 * r_b, pk.central, 100 * central_limit, pk.peak_sum, close, close0));
        } else {
            case_ok = pk.peaks.size() == 3;
        }
        o.details.push_back(fmt("nu=%d N=%d sigma0=%.0f lens v=%.4g t=%.2f: peaks at%s %s", cs.nu, cs.sites, cs.sigma0,
                                lr.coeffs[0], lr.time, peaks.c_str(), case_ok ? "ok" : "FAIL"));
        summary += fmt("%snu=%d %zu peak(s)", summary.empty() ? "" : ", ", cs.nu, pk.peaks.size());
        ok = ok && case_ok;
    }
    o.pass = ok;
    o.summary = fmt("nonlinear lens J_z=%.0f (r_B=%.2f): %s", jz, r_b, summary.c_str());
    return o;
}

disorder::FocusProtocol rydberg_protocol(std::shared_ptr<const SiteTable> table, double sigma0, int cutoff)
{
    const RydbergDressed model{rydberg::params_for_unit_hopping(0.6, 1.0), cutoff};
    auto sp = base_spec(table, sigma0, 2, sl::LensKind::Thick, model);
    const auto r = sl::optimize_lens(sp);
    disorder::FocusProtocol p;
    p.table = table;
    p.model = model;
    p.lens = sl::ThickPolynomial{r.coeffs, sp.focus};
    p.sigma0 = sigma0;
    p.packet_center = sp.focus;
    p.focus = sp.focus;
    p.focal_time = r.time;
    return p;
}

Outcome criterion9()
{
    constexpr double drop_min = 0.15, keep_min = 0.8;
    // 1D
    auto t1 = chain(70);
    const auto p1 = rydberg_protocol(t1, 14.0, 20);
    const double clean1 = disorder::run_protocol(p1, t1).p_foc;
    const auto s1 = disorder::run_ensemble({p1, disorder::Holes{1}, 1000, 11});
    const double drop = 1.0 - s1.p_foc.mean / clean1;
    // 2D
    auto t2 = std::make_shared<const SiteTable>(build_lattice(2, {70, 70, 1}));
    const auto p2 = rydberg_protocol(t2, 10.0, 3);
    const double clean2 = disorder::run_protocol(p2, t2).p_foc;
    const auto s2 = disorder::run_ensemble({p2, disorder::Holes{10}, 400, 12});
    const double keep = s2.p_foc.mean / clean2;

    Outcome o;
    o.pass = drop >= drop_min && keep >= keep_min;
    o.summary = fmt("1D one hole: relative P_foc drop %.3f (>= %.2f); 2D ten holes: P_foc ratio %.3f (>= %.1f)", drop, drop_min,
                    keep, keep_min);
    o.details = {fmt("1D clean %.4f, holes mean %.4f +- %.4f (1000 runs)", clean1, s1.p_foc.mean, s1.p_foc.sem),
                 fmt("2D clean %.4f, holes mean %.4f +- %.4f (400 runs)", clean2, s2.p_foc.mean, s2.p_foc.sem)};
    return o;
}

Outcome criterion10()
{
    constexpr double product_factor = 2.0;
    // Doubling grid from well below the expected crossings (delta_c ~ 0.1 / t_foc) to
    // about a decade above them; beyond that the width saturates at the lattice size.
    const std::vector<double> deltas{0.0, 0.001, 0.002, 0.004, 0.008, 0.016, 0.032, 0.064};
    std::vector<disorder::FocusProtocol> protocols;
    for (double s0 : {10.0, 20.0})
        protocols.push_back(rydberg_protocol(chain(int(10 * s0)), s0, 20));
    const auto res = disorder::breakdown_scan(protocols, deltas, 200, 21);

    Outcome o;
    bool exact = true, monotone = true;
    for (std::size_t p = 0; p < protocols.size(); ++p) {
        std::string line = fmt("sigma0=%.0f t_foc=%.2f ratios:", protocols[p].sigma0, protocols[p].focal_time);
        const disorder::BreakdownRow* prev = nullptr;
        for (const auto& row : res.rows) {
            if (row.sigma0 != protocols[p].sigma0)
                continue;
            line += fmt(" %.3f", row.ratio_mean);
            if (row.delta == 0.0)
                exact = exact && row.ratio_mean == 1.0;
            if (prev && row.ratio_mean < prev->ratio_mean - (row.ratio_sem + prev->ratio_sem))
                monotone = false;
            prev = &row;
        }
        o.details.push_back(line);
    }
    double spread = NAN;
    bool found = res.crossovers.size() == 2;
    for (const auto& c : res.crossovers) {
        found = found && c.found;
        o.details.push_back(c.found ? fmt("sigma0=%.0f delta_c=%.4g delta_c*t_foc=%.4g", c.sigma0, c.delta_c, c.product)
                                    : fmt("sigma0=%.0f crossing not bracketed (upper bound %.4g)", c.sigma0, c.upper_bound));
    }
    if (found)
        spread = std::max(res.crossovers[0].product, res.crossovers[1].product) /
                 std::min(res.crossovers[0].product, res.crossovers[1].product);
    o.pass = exact && monotone && found && spread <= product_factor;
    o.summary = fmt("ratio at delta=0 %s, monotone %s, delta_c*t_foc spread x%.3f (<= x%.0f)", exact ? "exactly 1" : "not 1",
                    monotone ? "yes" : "no", spread, product_factor);
    return o;
}

Outcome criterion11()
{
    constexpr double amp_tol = 1e-9, cons_tol = 1e-9, wigner_tol = 1e-6;
    std::mt19937_64 rng(5);
    Outcome o;

    // Single excitation, 12 sites, power-law couplings and a random lens.
    auto t12 = chain(12);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> eps(12);
    for (auto& e : eps)
        e = u(rng);
    const auto h1 = build_couplings(t12, PowerLaw{1.0, 3.0, 11}, eps);
    SpinWaveState s{t12, oracle::random_state(12, rng), 0.0};
    const auto e1 = evolve(h1, s, 7.3, 1e-12);
    const double err1 = oracle::amplitude_error(e1.amplitudes, oracle::expm_apply(oracle::dense(h1.matrix()), s.amplitudes, 7.3));
    const double norm1 = std::abs(e1.norm_squared() - 1.0);
    const double en1 = std::abs(energy(h1, e1) - energy(h1, s));

    // Two excitations on 10 sites with interactions.
    auto t10 = chain(10);
    const auto h10 = build_couplings(t10, NearestNeighbor{}, std::vector<double>(10, 0.0));
    auto basis = std::make_shared<const manybody::FockBasis>(10, 2);
    const auto hm = manybody::build_mb_hamiltonian(h10, *basis, {3.0, 6.0, 20, false});
    manybody::ManyBodyState m{basis, oracle::random_state(basis->size(), rng), 0.0};
    const auto em = manybody::evolve_mb(hm, m, 4.1, 1e-12);
    const double err2 = oracle::amplitude_error(em.amplitudes, oracle::expm_apply(oracle::dense(hm), m.amplitudes, 4.1));
    const double norm2 = std::abs(em.amplitudes.squaredNorm() - 1.0);
    Eigen::VectorXcd hv0(m.amplitudes.size()), hv1(m.amplitudes.size());
    apply(hm, m.amplitudes, hv0);
    apply(hm, em.amplitudes, hv1);
    const double en2 = std::abs(m.amplitudes.dot(hv0).real() - em.amplitudes.dot(hv1).real());

    // Wigner marginal over momentum reproduces p_n.
    auto t40 = chain(40);
    const auto packet = gaussian_packet(t40, 4.0, {19.5, 0, 0}, {0.7, 0, 0});
    const auto w = wigner_lattice(packet);
    const auto p = excitation_probability(packet);
    double marg = 0;
    for (Eigen::Index i = 0; i < w.values.rows(); ++i)
        marg = std::max(marg, std::abs(w.values.row(i).sum() * w.dk - p[std::size_t(i)]));

    o.pass = err1 <= amp_tol && err2 <= amp_tol && norm1 <= cons_tol && norm2 <= cons_tol && en1 <= cons_tol &&
             en2 <= cons_tol && marg <= wigner_tol;
    o.summary = fmt("amplitude errors %.1e (single) %.1e (two-body) <= %.0e; conservation %.1e; Wigner marginal %.1e <= %.0e",
                    err1, err2, amp_tol, std::max({norm1, norm2, en1, en2}), marg, wigner_tol);
    return o;
}

Outcome criterion12(const std::string& data_dir)
{
    constexpr double mhz = 2.0 * std::numbers::pi;  // angular frequency per MHz, time in microseconds
    constexpr double j_target = 0.36, j_rel = 0.10, tf_target = 5.0, tf_rel = 0.20, ratio_target = 0.02, ratio_rel = 0.30;
    constexpr double lifetime = 252.0;  // microseconds, 60S
    const auto table = rydberg::read_coefficient_table(data_dir + "/xi_anchors.csv");
    const double xi = rydberg::interpolate_xi(table, 60);

    rydberg::DressingParams dp;
    dp.rabi = 10.0 * mhz;
    dp.detuning = -20.0 * mhz;
    dp.c12 = 1.0;
    dp.xi = xi;
    const double r_star = rydberg::exchange_maximum(xi) / dp.dimensionless_distance(1.0);
    const double hop = 0.5 * std::abs(rydberg::dressed_couplings(dp, r_star).w_sg);
    const double j_mhz = hop / mhz;

    auto sp = base_spec(chain(800), 100.0, 2, sl::LensKind::Thick);
    const auto r = sl::optimize_lens(sp);
    const double tf_us = r.time / hop;
    const double ratio = tf_us / lifetime;

    const bool ok_j = std::abs(j_mhz / j_target - 1) <= j_rel;
    const bool ok_t = std::abs(tf_us / tf_target - 1) <= tf_rel;
    const bool ok_r = std::abs(ratio / ratio_target - 1) <= ratio_rel;
    Outcome o;
    o.pass = ok_j && ok_t && ok_r;
    o.summary = fmt("xi(60)=%.3f: J/2pi=%.3f MHz (want %.2f+-10%%), t_f=%.2f us (want %.0f+-20%%), t_f/tau=%.3f (want %.2f+-30%%)",
                    xi, j_mhz, j_target, tf_us, tf_target, ratio, ratio_target);
    o.details = {fmt("optimised thick Q=2 lens at sigma0=100: J t_f=%.2f, sigma_f=%.3f", r.time, r.width),
                 fmt("xi needed for %.2f MHz under the same convention: %.3f", j_target,
                     [&] {
                         // W~max(xi) = xi / (2 (1 + sqrt(1 - xi^2))) -> solve 1.25 W~max = 0.36 by bisection
                         double lo = 0, hi = 0.999999;
                         const double want = j_target / (std::abs(dp.rabi * dp.rabi / (2 * dp.detuning)) / 2 / mhz);
                         for (int i = 0; i < 200; ++i) {
                             const double mid = 0.5 * (lo + hi);
                             (mid / (2 * (1 + std::sqrt(1 - mid * mid))) < want ? lo : hi) = mid;
                         }
                         return 0.5 * (lo + hi);
                     }())};
    return o;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance runs"};
    int which = 0;
    std::string data_dir = SPINLENS_DATA_DIR;
    app.add_option("--criterion", which, "criterion number (0 runs all)")->check(CLI::Range(0, 12));
    app.add_option("--data", data_dir, "directory with coefficient tables");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::function<Outcome()>> runs{
        criterion1, criterion2, criterion3, criterion4,  criterion5,  criterion6,
        criterion7, criterion8, criterion9, criterion10, criterion11, [&] { return criterion12(data_dir); }};
    int failures = 0;
    for (int k = 1; k <= 12; ++k) {
        if (which != 0 && which != k)
            continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = runs[std::size_t(k - 1)]();
        } catch (const std::exception& e) {
            o.pass = false;
            o.summary = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %d: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", k, o.summary.c_str(), secs);
        for (const auto& d : o.details)
            std::printf("    %s\n", d.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
