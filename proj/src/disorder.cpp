#include "spinlens/disorder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "spinlens/csv.hpp"
#include "spinlens/error.hpp"
#include "spinlens/parallel.hpp"
#include "spinlens/propagator.hpp"

namespace spinlens::disorder {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

std::mt19937_64 realization_rng(std::uint64_t master_seed, std::uint64_t index)
{
    return std::mt19937_64(splitmix64(splitmix64(master_seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

std::size_t nearest_site(const SiteTable& table, const Vec3& label)
{
    Label l{};
    for (int d = 0; d < 3; ++d)
        l[d] = static_cast<int>(std::lround(label[d]));
    const long idx = table.index_of(l);
    if (idx < 0)
        throw InvalidSpec("nearest_site: point lies outside the lattice");
    return static_cast<std::size_t>(idx);
}

std::vector<std::size_t> draw_holes(const SiteTable& table, std::size_t count, std::size_t exclude, std::mt19937_64& rng)
{
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < table.size(); ++i)
        if (table.active(i) && i != exclude)
            pool.push_back(i);
    if (count >= table.active_count())
        throw InvalidSpec("draw_holes: hole count must be smaller than the number of active sites");
    if (count > pool.size())
        throw InvalidSpec("draw_holes: not enough sites besides the focus");
    // partial Fisher-Yates
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::vector<Vec3> draw_displacements(const SiteTable& table, double delta, std::mt19937_64& rng)
{
    if (!(delta >= 0.0) || !std::isfinite(delta))
        throw InvalidSpec("draw_displacements: delta must be finite and non-negative");
    std::vector<Vec3> d(table.size(), Vec3{0.0, 0.0, 0.0});
    if (delta == 0.0)
        return d;
    std::normal_distribution<double> normal(0.0, delta);
    for (auto& v : d)
        for (int k = 0; k < table.dimension(); ++k)
            v[k] = normal(rng);
    return d;
}

RealizationRecord run_protocol(const FocusProtocol& p, std::shared_ptr<const SiteTable> table)
{
    const auto eps = lens::potential_profile(p.lens, *table);
    const HamiltonianTerms h = build_couplings(table, p.model, eps);
    SpinWaveState psi = gaussian_packet(table, p.sigma0, p.packet_center);
    if (const auto* thin = std::get_if<lens::ThinPulse>(&p.lens))
        psi = phase_imprint(psi, lens::thin_phase_profile(*thin, *table));
    psi = evolve(h, psi, p.focal_time, p.tol);
    RealizationRecord r;
    r.p_foc = focus_probability(psi, p.focus, p.radius * table->spacing());
    r.sigma_f = packet_width_about(psi, p.focus);
    r.norm_error = std::abs(1.0 - psi.norm_squared());
    return r;
}

Moments moments(const std::vector<double>& v)
{
    Moments m;
    if (v.empty())
        return m;
    const double n = static_cast<double>(v.size());
    m.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v)
        ss += (x - m.mean) * (x - m.mean);
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    m.min = *lo;
    m.max = *hi;
    m.stddev = v.size() > 1 && m.min < m.max ? std::sqrt(ss / (n - 1.0)) : 0.0;
    m.sem = m.stddev / std::sqrt(n);
    // guard the mean against summation round-off on constant data
    m.mean = std::clamp(m.mean, m.min, m.max);
    return m;
}

EnsembleStats run_ensemble(const EnsembleJob& job)
{
    if (job.realizations < 1)
        throw InvalidSpec("run_ensemble: at least one realization is required");
    const FocusProtocol& p = job.protocol;
    if (!p.table)
        throw InvalidSpec("run_ensemble: protocol has no lattice");
    const std::size_t focus_site = nearest_site(*p.table, p.focus);
    if (const auto* h = std::get_if<Holes>(&job.disorder); h && h->count >= p.table->active_count())
        throw InvalidSpec("run_ensemble: hole count must be smaller than the number of active sites");
    if (const auto* d = std::get_if<Displacement>(&job.disorder); d && !(d->delta >= 0.0))
        throw InvalidSpec("run_ensemble: delta must be non-negative");

    EnsembleStats stats;
    stats.records.resize(job.realizations);
    parallel_for(job.realizations, [&](std::size_t r) {
        auto rng = realization_rng(job.master_seed, r);
        SiteTable t = *p.table;
        if (const auto* h = std::get_if<Holes>(&job.disorder)) {
            const auto holes = draw_holes(t, h->count, focus_site, rng);
            t = punch_holes(t, holes);
        } else {
            const auto d = draw_displacements(t, std::get<Displacement>(job.disorder).delta, rng);
            t = displace_sites(t, d);
        }
        RealizationRecord rec = run_protocol(p, std::make_shared<const SiteTable>(std::move(t)));
        rec.realization = r;
        stats.records[r] = rec;
    });
    std::vector<double> pf, sf;
    for (const auto& r : stats.records) {
        pf.push_back(r.p_foc);
        sf.push_back(r.sigma_f);
    }
    stats.p_foc = moments(pf);
    stats.sigma_f = moments(sf);
    return stats;
}

namespace {

/// y = H x with x, y indexed by site (holes of H contribute nothing).
Eigen::VectorXcd apply_sites(const HamiltonianTerms& h, const Eigen::VectorXcd& x)
{
    Eigen::VectorXcd compact(static_cast<Eigen::Index>(h.dim()));
    for (std::size_t c = 0; c < h.dim(); ++c)
        compact[static_cast<Eigen::Index>(c)] = x[static_cast<Eigen::Index>(h.site(c))];
    Eigen::VectorXcd hc;
    apply(h.matrix(), compact, hc);
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(x.size());
    for (std::size_t c = 0; c < h.dim(); ++c)
        y[static_cast<Eigen::Index>(h.site(c))] = hc[static_cast<Eigen::Index>(c)];
    return y;
}

Eigen::VectorXcd plane_wave(const SiteTable& t, const std::vector<bool>& use, const Vec3& k)
{
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(t.size()));
    double count = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (use[i]) {
            const Vec3 x = t.lattice_point(i);
            v[static_cast<Eigen::Index>(i)] = std::polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
            count += 1.0;
        }
    if (count == 0.0)
        throw DegenerateInput("plane_wave_broadening: no common active sites");
    return v / std::sqrt(count);
}

Broadening spread(const Eigen::VectorXcd& v, const Eigen::VectorXcd& dv)
{
    const double second = dv.squaredNorm();
    const double first = std::abs(v.dot(dv));
    return {std::sqrt(std::max(0.0, second - first * first)), std::sqrt(second)};
}

} // namespace

Broadening plane_wave_broadening(const HamiltonianTerms& dis, const HamiltonianTerms& clean, const Vec3& k)
{
    if (dis.table->size() != clean.table->size())
        throw InvalidSpec("plane_wave_broadening: lattices differ in size");
    std::vector<bool> use(clean.table->size());
    for (std::size_t i = 0; i < use.size(); ++i)
        use[i] = dis.table->active(i) && clean.table->active(i);
    const Eigen::VectorXcd v = plane_wave(*clean.table, use, k);
    const Eigen::VectorXcd dv = apply_sites(dis, v) - apply_sites(clean, v);
    return spread(v, dv);
}

SparseReal first_order_perturbation(const HamiltonianTerms& clean, std::span<const Vec3> displacements)
{
    const SiteTable& t = *clean.table;
    if (displacements.size() != t.size())
        throw InvalidSpec("first_order_perturbation: one displacement per site is required");
    int range = 1;
    if (const auto* p = std::get_if<PowerLaw>(&clean.model))
        range = p->cutoff_range;
    else if (const auto* r = std::get_if<RydbergDressed>(&clean.model))
        range = r->cutoff_range;
    else
        throw InvalidSpec("first_order_perturbation: nearest-neighbour hopping does not depend on distance");

    const double a = t.spacing();
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> diag(clean.dim(), 0.0);
    for (std::size_t c = 0; c < clean.dim(); ++c) {
        const std::size_t i = clean.site(c);
        for (std::size_t e = c + 1; e < clean.dim(); ++e) {
            const std::size_t j = clean.site(e);
            double d2 = 0.0;
            for (int q = 0; q < 3; ++q)
                d2 += double(t.label(i)[q] - t.label(j)[q]) * (t.label(i)[q] - t.label(j)[q]);
            if (d2 > double(range) * range)
                continue;
            const Vec3& ri = t.position(i);
            const Vec3& rj = t.position(j);
            const double r = distance(ri, rj);
            double dr = 0.0;
            for (int q = 0; q < 3; ++q)
                dr += (rj[q] - ri[q]) / r * (displacements[j][q] - displacements[i][q]);
            double dj = 0.0, dshift = 0.0;
            if (const auto* p = std::get_if<PowerLaw>(&clean.model)) {
                dj = -p->alpha * p->j0 / std::pow(r / a, p->alpha) / r;
            } else {
                const auto der = rydberg::dressed_couplings_derivative(std::get<RydbergDressed>(clean.model).dressing, r);
                dj = -0.5 * der.w_sg;
                dshift = der.v_sg;
            }
            if (dj != 0.0) {
                trip.emplace_back(static_cast<int>(c), static_cast<int>(e), -dj * dr);
                trip.emplace_back(static_cast<int>(e), static_cast<int>(c), -dj * dr);
            }
            diag[c] += dshift * dr;
            diag[e] += dshift * dr;
        }
    }
    for (std::size_t c = 0; c < clean.dim(); ++c)
        if (diag[c] != 0.0)
            trip.emplace_back(static_cast<int>(c), static_cast<int>(c), diag[c]);
    SparseReal m(static_cast<Eigen::Index>(clean.dim()), static_cast<Eigen::Index>(clean.dim()));
    m.setFromTriplets(trip.begin(), trip.end());
    m.makeCompressed();
    return m;
}

Broadening plane_wave_broadening(const SparseReal& perturbation, const HamiltonianTerms& clean, const Vec3& k)
{
    std::vector<bool> use(clean.table->size());
    for (std::size_t i = 0; i < use.size(); ++i)
        use[i] = clean.table->active(i);
    const Eigen::VectorXcd v_sites = plane_wave(*clean.table, use, k);
    Eigen::VectorXcd v(static_cast<Eigen::Index>(clean.dim()));
    for (std::size_t c = 0; c < clean.dim(); ++c)
        v[static_cast<Eigen::Index>(c)] = v_sites[static_cast<Eigen::Index>(clean.site(c))];
    Eigen::VectorXcd dv;
    apply(perturbation, v, dv);
    return spread(v, dv);
}

BreakdownResult breakdown_scan(const std::vector<FocusProtocol>& protocols, const std::vector<double>& deltas,
                               std::size_t realizations, std::uint64_t master_seed, double threshold)
{
    if (deltas.empty() || !std::is_sorted(deltas.begin(), deltas.end()))
        throw InvalidSpec("breakdown_scan: delta grid must be non-empty and ascending");
    if (deltas.front() < 0.0)
        throw InvalidSpec("breakdown_scan: delta must be non-negative");
    BreakdownResult out;
    for (std::size_t pi = 0; pi < protocols.size(); ++pi) {
        const FocusProtocol& p = protocols[pi];
        const double clean_width = run_protocol(p, p.table).sigma_f;
        std::vector<double> ratios;
        for (std::size_t di = 0; di < deltas.size(); ++di) {
            EnsembleJob job{p, Displacement{deltas[di]}, realizations, master_seed + 0x10000ULL * pi + di};
            const EnsembleStats st = run_ensemble(job);
            std::vector<double> r;
            for (const auto& rec : st.records)
                r.push_back(rec.sigma_f / clean_width);
            const Moments m = moments(r);
            out.rows.push_back({p.sigma0, deltas[di], m.mean, m.sem, st.p_foc.mean});
            ratios.push_back(m.mean);
        }
        Crossover c;
        c.sigma0 = p.sigma0;
        c.focal_time = p.focal_time;
        c.delta_c = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t i = 0; i < ratios.size(); ++i) {
            if (ratios[i] <= threshold)
                continue;
            if (i == 0 || deltas[i - 1] <= 0.0) {
                c.upper_bound = deltas[i];  // crossing not bracketed by the grid
            } else {
                c.found = true;
                const double f = (threshold - ratios[i - 1]) / (ratios[i] - ratios[i - 1]);
                c.delta_c = std::exp(std::log(deltas[i - 1]) + f * (std::log(deltas[i]) - std::log(deltas[i - 1])));
            }
            break;
        }
        c.product = c.delta_c * c.focal_time;
        out.crossovers.push_back(c);
    }
    return out;
}

void write_ensemble_csv(const std::filesystem::path& path, const EnsembleStats& stats)
{
    CsvWriter csv(path, {"realization[1]", "P_foc[1]", "sigma_f[a]", "norm_error[1]"});
    for (const auto& r : stats.records) {
        csv << static_cast<long long>(r.realization) << r.p_foc << r.sigma_f << r.norm_error;
        csv.end_row();
    }
}

void write_breakdown_csv(const std::filesystem::path& path, const BreakdownResult& result)
{
    CsvWriter csv(path, {"sigma0[a]", "delta[a]", "ratio_mean[1]", "ratio_sem[1]", "P_foc_mean[1]"});
    for (const auto& r : result.rows)
        csv.row({r.sigma0, r.delta, r.ratio_mean, r.ratio_sem, r.p_foc_mean});
}

} // namespace spinlens::disorder
