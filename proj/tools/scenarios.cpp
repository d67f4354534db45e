#include "scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numbers>

#include "spinlens/csv.hpp"
#include "spinlens/disorder.hpp"
#include "spinlens/lens.hpp"
#include "spinlens/manybody.hpp"
#include "spinlens/propagator.hpp"
#include "spinlens/rydberg.hpp"
#include "spinlens/singlex.hpp"

#ifndef SPINLENS_VERSION
#define SPINLENS_VERSION "unknown"
#endif

namespace spinlens::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string hex64(std::uint64_t v)
{
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Short decimal form for file names and labels.
std::string tag(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string utc_now()
{
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

} // namespace

Manifest::Manifest(fs::path dir, const RunConfig& config, const std::vector<std::string>& warnings, int threads)
    : dir_(std::move(dir))
{
    const std::string canonical = config.raw.dump();
    doc_ = {{"manifest_version", 1},
            {"status", "running"},
            {"code_version", SPINLENS_VERSION},
            {"scenario", config.scenario},
            {"config_hash", "fnv1a64:" + hex64(fnv1a(canonical))},
            {"config", config.raw},
            {"seeds", {{"master_seed", config.master_seed}, {"realization_stream", "splitmix64(master_seed, index) -> mt19937_64"}}},
            {"threads", threads},
            {"started_utc", utc_now()},
            {"warnings", warnings},
            {"derived", json::object()},
            {"files", json::array()}};
}

void Manifest::derived(const std::string& key, json value)
{
    if (value.is_number_float() && !std::isfinite(value.get<double>()))
        value = nullptr;
    doc_["derived"][key] = std::move(value);
}

fs::path Manifest::file(const std::string& name, const std::string& description)
{
    doc_["files"].push_back({{"path", name}, {"description", description}});
    save();
    return dir_ / name;
}

void Manifest::save() const
{
    const fs::path tmp = dir_ / "manifest.json.tmp";
    {
        std::ofstream out(tmp);
        out << doc_.dump(2) << '\n';
        if (!out)
            throw std::runtime_error("cannot write manifest in " + dir_.string());
    }
    fs::rename(tmp, dir_ / "manifest.json");
}

void Manifest::finish(bool ok, const std::string& error, double wall_seconds)
{
    doc_["status"] = ok ? "complete" : "failed";
    doc_["wall_time_s"] = wall_seconds;
    doc_["finished_utc"] = utc_now();
    if (!ok) {
        doc_["error"] = error;
        for (auto& f : doc_["files"])
            f["partial"] = true;
    }
    save();
}

namespace {

namespace sl = spinlens::lens;

struct Setup {
    std::shared_ptr<const SiteTable> table;
    Vec3 centre{};
    double sigma0 = 0.0;
    SpinWaveState packet;
};

Setup setup(const RunConfig& c)
{
    Setup s;
    s.table = make_table(*c.lattice);
    s.centre = packet_center(c, *s.table);
    s.sigma0 = c.packet->sigma0;
    s.packet = gaussian_packet(s.table, s.sigma0, s.centre, c.packet->k0);
    return s;
}

double hopping_scale(const CouplingModel& m, double spacing)
{
    if (const auto* nn = std::get_if<NearestNeighbor>(&m))
        return nn->hopping;
    if (const auto* pl = std::get_if<PowerLaw>(&m))
        return pl->j0;
    const auto& ry = std::get<RydbergDressed>(m);
    return 0.5 * std::abs(rydberg::dressed_couplings(ry.dressing, spacing).w_sg);
}

sl::OptimizeSpec make_spec(const OptimizeConfig& o, std::shared_ptr<const SiteTable> table, const CouplingModel& model,
                           const SpinWaveState& initial, double sigma0, const Vec3& focus, double tol)
{
    sl::OptimizeSpec sp;
    sp.kind = o.kind;
    sp.order = o.order;
    sp.profile = o.profile;
    sp.table = std::move(table);
    sp.model = model;
    sp.initial = initial;
    sp.sigma0 = sigma0;
    sp.focus = focus;
    sp.strength_lo = o.strength_lo;
    sp.strength_hi = o.strength_hi;
    sp.points_per_decade = o.points_per_decade;
    sp.time_samples = o.time_samples;
    sp.time_lo = o.time_lo;
    sp.time_hi = o.time_hi;
    sp.sweeps = o.sweeps;
    sp.tol = tol;
    return sp;
}

sl::LensDesign design_from(const sl::OptimizeSpec& sp, const std::vector<double>& coeffs)
{
    if (sp.kind == sl::LensKind::Thick)
        return sl::ThickPolynomial{coeffs, sp.focus};
    sl::ThinPulse t;
    t.phi0 = coeffs.at(0);
    t.focus = sp.focus;
    t.profile = sp.profile;
    t.higher.assign(coeffs.begin() + 1, coeffs.end());
    return t;
}

/// Hamiltonian for a lens design (thin pulses add no potential) and the state right after the lens acts.
std::pair<HamiltonianTerms, SpinWaveState> apply_design(const sl::LensDesign& design, std::shared_ptr<const SiteTable> table,
                                                        const CouplingModel& model, const SpinWaveState& psi)
{
    auto h = build_couplings(table, model, sl::potential_profile(design, *table));
    if (const auto* thin = std::get_if<sl::ThinPulse>(&design))
        return {std::move(h), phase_imprint(psi, sl::thin_phase_profile(*thin, *table))};
    return {std::move(h), psi};
}

double tol_of(const RunConfig& c) { return c.evolution ? c.evolution->tol : 1e-10; }

std::vector<double> uniform_times(double t_end, int samples)
{
    std::vector<double> t;
    for (int i = 1; i <= samples; ++i)
        t.push_back(t_end * i / samples);
    return t;
}

void record_thresholds(Manifest& m, double sigma0, double v0, double phi0, double hop, double a)
{
    const auto th = sl::thresholds(sigma0, v0, phi0, hop, a);
    m.derived("v_BO", th.v_bo);
    m.derived("phi_BO", th.phi_bo);
    m.derived("v_opt_scale", th.v_opt_scale);
    m.derived("phi_opt_scale", th.phi_opt_scale);
    if (v0 > 0) {
        m.derived("sigma_BO", th.sigma_bo);
        m.derived("k_c_thick", th.k_c_thick);
        const auto p = sl::continuum_thick(v0, hop, a, sigma0);
        m.derived("omega", p.omega);
        m.derived("continuum_focal_time", p.focal_time);
        m.derived("continuum_focal_width", p.focal_width);
    }
    if (phi0 > 0) {
        m.derived("k_c_thin", th.k_c_thin);
        const auto p = sl::continuum_thin(phi0, sigma0, a, hop);
        const auto e = sl::chirped_gaussian_focus(phi0, sigma0, a, hop);
        m.derived("thin_closed_form_focal_time", p.focal_time);
        m.derived("thin_closed_form_focal_width", p.focal_width);
        m.derived("chirped_gaussian_focal_time", e.focal_time);
    }
}

void record_design(Manifest& m, const sl::LensDesign& d, const Setup& s, const RunConfig& c)
{
    const double hop = hopping_scale(c.lattice->model, c.lattice->spacing);
    m.derived("lens", sl::describe(d));
    if (const auto* t = std::get_if<sl::ThickPolynomial>(&d))
        record_thresholds(m, s.sigma0, t->coeffs.empty() ? 0.0 : t->coeffs[0], 0.0, hop, c.lattice->spacing);
    else if (const auto* p = std::get_if<sl::ThinPulse>(&d))
        record_thresholds(m, s.sigma0, 0.0, p->phi0, hop, c.lattice->spacing);
    else
        record_thresholds(m, s.sigma0, 0.0, 0.0, hop, c.lattice->spacing);
}

/// Lens from the config, or optimised when an `optimize` section is present (which then wins).
struct LensOutcome {
    sl::LensDesign design;
    double focal_time = 0.0;  // 0 when not known
};

LensOutcome resolve_lens(const RunConfig& c, const Setup& s, Manifest& m, const std::string& prefix = "")
{
    if (c.optimize) {
        const auto sp = make_spec(*c.optimize, s.table, c.lattice->model, s.packet, s.sigma0, s.centre, tol_of(c));
        const auto r = sl::optimize_lens(sp);
        sl::write_scan_csv(m.file(prefix + "lens_scan.csv", "lens optimisation scan"), r, sp.kind);
        m.derived(prefix + "optimized_coeffs", r.coeffs);
        m.derived(prefix + "optimized_focal_time", r.time);
        m.derived(prefix + "optimized_width", r.width);
        m.derived(prefix + "optimized_on_boundary", r.on_boundary);
        for (const auto& n : r.notes)
            m.derived(prefix + "optimizer_note", n);
        return {design_from(sp, r.coeffs), r.time};
    }
    return {*c.lens, 0.0};
}

void write_width_series(const fs::path& path, const std::vector<double>& t, const std::vector<double>& width,
                        const std::vector<double>& rms, const std::vector<double>& centre, const std::vector<double>& pfoc,
                        const std::vector<double>& norm_err)
{
    CsvWriter csv(path, {"t[1/J]", "width[a]", "rms[a]", "centroid_x[a]", "p_foc[1]", "norm_error[1]"});
    for (std::size_t i = 0; i < t.size(); ++i)
        csv.row({t[i], width[i], rms[i], centre[i], pfoc[i], norm_err[i]});
}

/// Evolves and records the width series; returns the state at the sampled minimum width.
SpinWaveState trace_focus(const HamiltonianTerms& h, SpinWaveState psi, const std::vector<double>& times, double tol,
                          const Vec3& focus, const fs::path& csv_path, Manifest& m, const std::string& prefix)
{
    std::vector<double> width, rms, ctr, pf, ne, tt;
    SpinWaveState best = psi;
    double best_w = packet_width(psi);
    auto observe = [&](const SpinWaveState& s) {
        tt.push_back(s.time);
        width.push_back(packet_width(s));
        rms.push_back(rms_spread(s));
        ctr.push_back(centroid(s)[0]);
        pf.push_back(focus_probability(s, focus, 3.0 * s.table->spacing()));
        ne.push_back(std::abs(s.norm_squared() - 1.0));
        if (width.back() < best_w) {
            best_w = width.back();
            best = s;
        }
    };
    observe(psi);
    std::vector<double> abs_times;
    for (double t : times)
        abs_times.push_back(psi.time + t);
    evolve_sampled(h, psi, abs_times, tol, observe);
    write_width_series(csv_path, tt, width, rms, ctr, pf, ne);
    m.derived(prefix + "sampled_focal_time", best.time);
    m.derived(prefix + "sampled_min_width", best_w);
    m.derived(prefix + "max_norm_error", *std::max_element(ne.begin(), ne.end()));
    return best;
}

void snapshots(const RunConfig& c, const SpinWaveState& psi, const std::string& tag, Manifest& m)
{
    write_snapshot_csv(m.file("snapshot_" + tag + ".csv", "amplitudes and p_n"), psi);
    if (c.evolution && c.evolution->wigner && psi.table->dimension() == 1)
        write_wigner_csv(m.file("wigner_" + tag + ".csv", "lattice Wigner function"), wigner_lattice(psi));
}

// ---------------------------------------------------------------------------

void run_single(const RunConfig& c, Manifest& m)
{
    const Setup s = setup(c);
    const auto lo = resolve_lens(c, s, m);
    record_design(m, lo.design, s, c);
    auto [h, psi] = apply_design(lo.design, s.table, c.lattice->model, s.packet);
    const double t_end = c.evolution ? c.evolution->t_end : 2.0 * lo.focal_time;
    const int samples = c.evolution ? c.evolution->samples : 400;
    snapshots(c, psi, "initial", m);
    const auto best = trace_focus(h, psi, uniform_times(t_end, samples), tol_of(c), s.centre,
                                  m.file("widths.csv", "width time series"), m, "");
    snapshots(c, best, "focus", m);
}

void run_cascade(const RunConfig& c, Manifest& m)
{
    const Setup s = setup(c);
    const double tol = tol_of(c);
    const auto sp1 = make_spec(*c.optimize, s.table, c.lattice->model, s.packet, s.sigma0, s.centre, tol);
    const auto r1 = sl::optimize_lens(sp1);
    sl::write_scan_csv(m.file("stage1_scan.csv", "stage 1 lens scan"), r1, sp1.kind);
    m.derived("stage1_coeffs", r1.coeffs);
    m.derived("stage1_focal_time", r1.time);
    m.derived("stage1_width", r1.width);

    OptimizeConfig o2 = *c.optimize;
    o2.kind = sl::LensKind::Thin;
    o2.order = c.cascade ? c.cascade->order : 2;
    o2.profile = c.cascade ? c.cascade->profile : sl::PhaseProfile::Parabolic;
    o2.strength_lo = o2.strength_hi = 0.0;
    SpinWaveState mid = r1.focused;
    mid.time = 0.0;
    const auto sp2 = make_spec(o2, s.table, c.lattice->model, mid, r1.width, s.centre, tol);
    const auto r2 = sl::optimize_lens(sp2);
    sl::write_scan_csv(m.file("stage2_scan.csv", "stage 2 lens scan"), r2, sp2.kind);
    m.derived("stage2_coeffs", r2.coeffs);
    m.derived("stage2_focal_time", r2.time);
    m.derived("stage2_width", r2.width);

    // Continuous width trace through both stages.
    const int samples = c.evolution ? c.evolution->samples : 400;
    auto [h1, psi1] = apply_design(design_from(sp1, r1.coeffs), s.table, c.lattice->model, s.packet);
    const auto end1 = evolve(h1, psi1, r1.time, tol);
    trace_focus(h1, psi1, uniform_times(r1.time, samples), tol, s.centre, m.file("stage1_widths.csv", "stage 1 width series"),
                m, "stage1_");
    auto [h2, psi2] = apply_design(design_from(sp2, r2.coeffs), s.table, c.lattice->model, end1);
    const auto best = trace_focus(h2, psi2, uniform_times(2.0 * r2.time, samples), tol, s.centre,
                                  m.file("stage2_widths.csv", "stage 2 width series (time continues from stage 1)"), m,
                                  "stage2_");
    snapshots(c, best, "final", m);
}

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
    return {slope, std::exp((sy - slope * sx) / n)};
}

std::string lens_label(sl::LensKind kind, int order, sl::PhaseProfile profile)
{
    std::string s = kind == sl::LensKind::Thick ? "thick" : "thin";
    if (kind == sl::LensKind::Thin && profile == sl::PhaseProfile::Corrected)
        s += "_corrected";
    return s + "_Q" + std::to_string(order);
}

void run_scaling(const RunConfig& c, Manifest& m)
{
    const auto& sc = *c.scaling;
    const OptimizeConfig base = c.optimize.value_or(OptimizeConfig{});
    CsvWriter rows(m.file("scaling.csv", "optimised focal widths per lens and sigma0"),
                   {"lens", "sigma0[a]", "length[sites]", "sigma_f[a]", "t_f[1/J]", "strength[1]"});
    CsvWriter fits(m.file("scaling_fit.csv", "power-law fits sigma_f = prefactor * sigma0^exponent"),
                   {"lens", "exponent[1]", "prefactor[a^(1-exponent)]", "kappa_fixed_third[a^(2/3)]"});
    for (const auto& lc : sc.lenses) {
        std::vector<double> widths;
        for (double s0 : sc.sigma0) {
            const int length = std::max(sc.min_length, int(std::lround(sc.length_per_sigma * s0)));
            LatticeConfig l = *c.lattice;
            l.extents = {length, 1, 1};
            const auto table = make_table(l);
            const Vec3 centre = table->center_label();
            OptimizeConfig o = base;
            o.kind = lc.kind;
            o.order = lc.order;
            o.profile = lc.profile;
            const auto r = sl::optimize_lens(
                make_spec(o, table, l.model, gaussian_packet(table, s0, centre), s0, centre, tol_of(c)));
            widths.push_back(r.width);
            rows << lens_label(lc.kind, lc.order, lc.profile) << s0 << length << r.width << r.time << r.coeffs.at(0);
            rows.end_row();
        }
        const auto [slope, pre] = loglog_fit(sc.sigma0, widths);
        double acc = 0;
        for (std::size_t i = 0; i < widths.size(); ++i)
            acc += std::log(widths[i] / std::cbrt(sc.sigma0[i]));
        fits << lens_label(lc.kind, lc.order, lc.profile) << slope << pre << std::exp(acc / double(widths.size()));
        fits.end_row();
        m.derived("exponent_" + lens_label(lc.kind, lc.order, lc.profile), slope);
    }
}

void run_multifocal(const RunConfig& c, Manifest& m)
{
    const Setup s = setup(c);
    const auto& design = std::get<sl::Multifocal>(*c.lens);
    record_design(m, *c.lens, s, c);
    const auto h = build_couplings(s.table, c.lattice->model, sl::potential_profile(design, *s.table));
    auto psi = s.packet;
    const double radius = 3.0 * s.table->spacing();

    std::vector<std::string> header{"t[1/J]"};
    for (std::size_t r = 0; r < design.regions.size(); ++r)
        header.push_back("p_region" + std::to_string(r) + "[1]");
    header.push_back("fidelity[1]");
    CsvWriter csv(m.file("focal_probabilities.csv", "probability near each focus and superposition fidelity"), header);
    SpinWaveState best = psi;
    double best_f = -1;
    auto observe = [&](const SpinWaveState& st) {
        csv << st.time;
        double amp = 0;
        for (const auto& r : design.regions) {
            const double p = focus_probability(st, r.focus, radius);
            csv << p;
            amp += std::sqrt(p);
        }
        const double f = amp * amp / double(design.regions.size());
        csv << f;
        csv.end_row();
        if (f > best_f) {
            best_f = f;
            best = st;
        }
    };
    observe(psi);
    evolve_sampled(h, psi, uniform_times(c.evolution->t_end, c.evolution->samples), c.evolution->tol, observe);
    m.derived("best_fidelity", best_f);
    m.derived("best_time", best.time);
    snapshots(c, best, "best", m);
}

void run_longrange(const RunConfig& c, Manifest& m)
{
    const Setup s = setup(c);
    const auto& lr = *c.longrange;
    std::vector<std::pair<std::string, CouplingModel>> models;
    if (lr.include_nearest_neighbor)
        models.emplace_back("nearest_neighbor", NearestNeighbor{});
    for (double a : lr.alphas)
        models.emplace_back("alpha_" + tag(a), PowerLaw{1.0, a, lr.cutoff_range});

    {
        std::vector<std::string> header{"k[1/a]"};
        for (const auto& [name, model] : models) {
            header.push_back("energy_" + name + "[J]");
            header.push_back("velocity_" + name + "[J a]");
        }
        CsvWriter csv(m.file("dispersion.csv", "single-excitation band for each coupling"), header);
        for (int i = 0; i <= lr.dispersion_samples; ++i) {
            const double k = std::numbers::pi * i / lr.dispersion_samples;
            csv << k;
            for (const auto& [name, model] : models) {
                const auto p = std::holds_alternative<NearestNeighbor>(model)
                                   ? sl::dispersion_nn(k)
                                   : sl::dispersion_power_law(std::get<PowerLaw>(model).alpha, k);
                csv << p.energy << p.group_velocity;
            }
            csv.end_row();
        }
    }
    const OptimizeConfig o = c.optimize.value_or(OptimizeConfig{});
    CsvWriter csv(m.file("longrange_focus.csv", "optimised thick lens per coupling"),
                  {"coupling", "sigma_f[a]", "t_f[1/J]", "v0[J/a^2]", "kappa[a^(2/3)]"});
    for (const auto& [name, model] : models) {
        const auto r = sl::optimize_lens(make_spec(o, s.table, model, s.packet, s.sigma0, s.centre, tol_of(c)));
        csv << name << r.width << r.time << r.coeffs.at(0) << r.width / std::cbrt(s.sigma0);
        csv.end_row();
        m.derived("width_" + name, r.width);
    }
}

void run_nonlinear(const RunConfig& c, Manifest& m)
{
    const Setup s = setup(c);
    const auto lo = resolve_lens(c, s, m);
    if (!std::holds_alternative<sl::ThickPolynomial>(lo.design))
        throw InvalidSpec("nonlinear scenario uses a thick lens");
    record_design(m, lo.design, s, c);
    const auto& nl = *c.nonlinear;
    m.derived("blockade_radius", std::pow(nl.interaction.jz / hopping_scale(c.lattice->model, 1.0), 1.0 / nl.interaction.power) *
                                     c.lattice->spacing);
    const auto h = build_couplings(s.table, c.lattice->model, sl::potential_profile(lo.design, *s.table));
    auto basis = std::make_shared<const manybody::FockBasis>(h.dim(), nl.excitations);
    m.derived("basis_size", basis->size());
    const auto hm = manybody::build_mb_hamiltonian(h, *basis, nl.interaction);
    auto state = manybody::symmetric_initial_state(s.packet, basis);

    std::vector<double> times;
    if (c.evolution) {
        times = uniform_times(c.evolution->t_end, c.evolution->samples);
    } else {
        for (double f : {0.25, 0.5, 0.75, 0.9, 1.0, 1.1})
            times.push_back(f * lo.focal_time);
    }
    if (lo.focal_time > 0 && std::find(times.begin(), times.end(), lo.focal_time) == times.end()) {
        times.push_back(lo.focal_time);
        std::sort(times.begin(), times.end());
    }
    const double tol = tol_of(c);
    ChebyshevPropagator prop(hm, tol);
    std::vector<double> out_t{0.0};
    std::vector<std::vector<double>> profiles{manybody::density_profile(state)};
    double now = 0.0;
    for (double t : times) {
        prop.step(state.amplitudes, t - now);
        now = t;
        state.time = t;
        out_t.push_back(t);
        profiles.push_back(manybody::density_profile(state));
        if (t == lo.focal_time || (lo.focal_time == 0 && t == times.back())) {
            const auto hist = manybody::pair_distance_histogram(state, h);
            CsvWriter csv(m.file("pair_distances.csv", "pair distance distribution at the focal time"),
                          {"distance[a]", "probability[1]"});
            for (std::size_t d = 0; d < hist.size(); ++d)
                csv.row({double(d) * c.lattice->spacing, hist[d]});
        }
    }
    m.derived("max_norm_error", std::abs(state.amplitudes.squaredNorm() - 1.0));
    manybody::write_density_csv(m.file("density.csv", "site densities over time"), out_t, profiles, h, nl.excitations);
}

disorder::FocusProtocol protocol_for(const RunConfig& c, const Setup& s, Manifest& m, const std::string& prefix = "")
{
    const auto lo = resolve_lens(c, s, m, prefix);
    disorder::FocusProtocol p;
    p.table = s.table;
    p.model = c.lattice->model;
    p.lens = lo.design;
    p.sigma0 = s.sigma0;
    p.packet_center = s.centre;
    p.focus = s.centre;
    p.radius = c.disorder ? c.disorder->radius : 3.0;
    p.tol = tol_of(c);
    p.focal_time = lo.focal_time;
    if (p.focal_time <= 0.0) {
        auto [h, psi] = apply_design(lo.design, s.table, c.lattice->model, s.packet);
        p.focal_time = sl::focus_scan(h, psi, 0.0, c.evolution->t_end, c.evolution->samples, p.tol, s.centre).best_time;
    }
    m.derived(prefix + "focal_time", p.focal_time);
    return p;
}

void run_disorder(const RunConfig& c, Manifest& m, bool holes)
{
    const Setup s = setup(c);
    const auto p = protocol_for(c, s, m);
    const auto clean = disorder::run_protocol(p, s.table);
    m.derived("clean_p_foc", clean.p_foc);
    m.derived("clean_sigma_f", clean.sigma_f);
    disorder::EnsembleJob job{p, disorder::Holes{c.disorder->holes}, c.disorder->realizations, c.master_seed};
    if (!holes)
        job.disorder = disorder::Displacement{c.disorder->delta};
    const auto st = disorder::run_ensemble(job);
    disorder::write_ensemble_csv(m.file("ensemble.csv", "per-realization focusing results"), st);
    m.derived("mean_p_foc", st.p_foc.mean);
    m.derived("sem_p_foc", st.p_foc.sem);
    m.derived("mean_sigma_f", st.sigma_f.mean);
    m.derived("relative_p_foc", st.p_foc.mean / clean.p_foc);

    if (!holes && !c.disorder->broadening_k.empty()) {
        const std::vector<double> zero(s.table->size(), 0.0);
        const auto h0 = build_couplings(*s.table, c.lattice->model, zero);
        CsvWriter csv(m.file("broadening.csv", "plane-wave energy spread per realization"),
                      {"realization[1]", "k[1/a]", "uncertainty[J]", "second_moment[J]"});
        for (std::size_t r = 0; r < c.disorder->realizations; ++r) {
            auto rng = disorder::realization_rng(c.master_seed, r);
            const auto d = disorder::draw_displacements(*s.table, c.disorder->delta, rng);
            const auto hd = build_couplings(displace_sites(*s.table, d), c.lattice->model, zero);
            for (double k : c.disorder->broadening_k) {
                const auto b = disorder::plane_wave_broadening(hd, h0, {k, 0, 0});
                csv << static_cast<long long>(r) << k << b.uncertainty << b.second_moment;
                csv.end_row();
            }
        }
    }
}

void run_breakdown(const RunConfig& c, Manifest& m)
{
    const auto& b = *c.breakdown;
    std::vector<disorder::FocusProtocol> protocols;
    for (double s0 : b.sigma0) {
        RunConfig sub = c;
        sub.lattice->extents = {int(std::lround(b.length_per_sigma * s0)), 1, 1};
        sub.packet = PacketConfig{s0, std::nullopt, {}};
        if (!sub.optimize)
            sub.optimize = OptimizeConfig{};
        const Setup s = setup(sub);
        protocols.push_back(protocol_for(sub, s, m, "sigma0_" + tag(s0) + "_"));
    }
    const auto res = disorder::breakdown_scan(protocols, b.deltas, b.realizations, c.master_seed, b.threshold);
    disorder::write_breakdown_csv(m.file("breakdown.csv", "width ratio versus positional disorder"), res);
    json cross = json::array();
    for (const auto& x : res.crossovers)
        cross.push_back({{"sigma0", x.sigma0},
                         {"focal_time", x.focal_time},
                         {"found", x.found},
                         {"delta_c", x.found ? json(x.delta_c) : json(nullptr)},
                         {"delta_c_times_t_foc", x.found ? json(x.product) : json(nullptr)}});
    m.derived("crossovers", cross);
}

void run_rydberg(const RunConfig& c, Manifest& m)
{
    const auto& r = *c.rydberg;
    for (double xi : r.xi)
        rydberg::write_potential_curve(m.file("potentials_xi_" + tag(xi) + ".csv", "dimensionless soft-core potentials"),
                                       xi, r.r_max, r.samples);
    if (r.table.empty())
        return;
    const auto rows = rydberg::read_coefficient_table(r.table);
    {
        CsvWriter csv(m.file("coefficients.csv", "ingested coefficient table"), {"n[1]", "c11[1]", "c12[1]", "w12[1]", "xi[1]"});
        for (const auto& row : rows)
            csv.row({double(row.n), row.c11, row.c12, row.w12, row.xi()});
    }
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double xi = rydberg::interpolate_xi(rows, r.n);
    rydberg::DressingParams dp;
    dp.rabi = two_pi * r.rabi_mhz;
    dp.detuning = two_pi * r.detuning_mhz;
    dp.c12 = 1.0;
    dp.xi = xi;
    dp.validate();
    const double r_star = rydberg::exchange_maximum(xi) / dp.dimensionless_distance(1.0);
    const double hop = 0.5 * std::abs(rydberg::dressed_couplings(dp, r_star).w_sg);
    m.derived("xi", xi);
    m.derived("validity_ratio", dp.validity_ratio());
    m.derived("exchange_maximum_r_tilde", rydberg::exchange_maximum(xi));
    m.derived("hopping_over_2pi_MHz", hop / two_pi);
    if (r.focal_time > 0) {
        const double tf = r.focal_time / hop;
        m.derived("focal_time_us", tf);
        if (r.lifetime_us > 0)
            m.derived("focal_time_over_lifetime", tf / r.lifetime_us);
    }
}

} // namespace

void run_scenario(const RunConfig& c, Manifest& m)
{
    const auto& s = c.scenario;
    if (s == "thick1d" || s == "thin1d")
        run_single(c, m);
    else if (s == "cascade")
        run_cascade(c, m);
    else if (s == "scaling_fit")
        run_scaling(c, m);
    else if (s == "multifocal2d")
        run_multifocal(c, m);
    else if (s == "longrange_alpha")
        run_longrange(c, m);
    else if (s == "nonlinear")
        run_nonlinear(c, m);
    else if (s == "holes")
        run_disorder(c, m, true);
    else if (s == "displacement")
        run_disorder(c, m, false);
    else if (s == "breakdown")
        run_breakdown(c, m);
    else if (s == "rydberg_tables")
        run_rydberg(c, m);
    else
        throw InvalidSpec("unknown scenario '" + s + "'");
}

} // namespace spinlens::cli
