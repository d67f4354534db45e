#include "spinlens/manybody.hpp"

#include <algorithm>
#include <cmath>

#include "spinlens/csv.hpp"
#include "spinlens/error.hpp"
#include "spinlens/propagator.hpp"

namespace spinlens::manybody {

FockBasis::FockBasis(std::size_t sites, int excitations) : sites_(sites), nu_(excitations)
{
    if (excitations > 3)
        throw CapabilityError("many-body sector limited to at most 3 excitations, got " + std::to_string(excitations));
    if (excitations < 1)
        throw InvalidSpec("many-body sector needs at least one excitation");
    if (static_cast<std::size_t>(excitations) > sites)
        throw InvalidSpec("more excitations than sites");

    binom_.assign((sites + 1) * 5, 0);
    for (std::size_t n = 0; n <= sites; ++n) {
        binom_[n * 5] = 1;
        for (std::size_t k = 1; k <= 4; ++k)
            binom_[n * 5 + k] = n == 0 ? 0 : binom_[(n - 1) * 5 + k - 1] + binom_[(n - 1) * 5 + k];
    }
    size_ = binom(sites, static_cast<std::size_t>(excitations));
    tuples_.reserve(size_ * static_cast<std::size_t>(excitations));

    std::vector<int> c(static_cast<std::size_t>(excitations));
    for (int i = 0; i < excitations; ++i)
        c[static_cast<std::size_t>(i)] = i;
    const int n = static_cast<int>(sites);
    while (true) {
        tuples_.insert(tuples_.end(), c.begin(), c.end());
        int i = excitations - 1;
        while (i >= 0 && c[static_cast<std::size_t>(i)] == n - excitations + i)
            --i;
        if (i < 0)
            break;
        ++c[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < excitations; ++j)
            c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
    }
}

std::size_t FockBasis::binom(std::size_t n, std::size_t k) const
{
    if (k > 4 || n > sites_)
        return 0;
    return binom_[n * 5 + k];
}

std::span<const int> FockBasis::occupation(std::size_t index) const
{
    return {tuples_.data() + index * static_cast<std::size_t>(nu_), static_cast<std::size_t>(nu_)};
}

std::size_t FockBasis::index_of(std::span<const int> tuple) const
{
    if (tuple.size() != static_cast<std::size_t>(nu_))
        throw InvalidSpec("FockBasis::index_of: wrong tuple length");
    std::size_t rank = 0;
    long prev = -1;
    for (std::size_t i = 0; i < tuple.size(); ++i) {
        const long c = tuple[i];
        if (c <= prev || c >= static_cast<long>(sites_))
            throw InvalidSpec("FockBasis::index_of: tuple must be strictly increasing and in range");
        const std::size_t r = static_cast<std::size_t>(nu_) - 1 - i;
        // sum_{j=prev+1}^{c-1} C(N-1-j, r) = C(N-prev-1, r+1) - C(N-c, r+1)
        rank += binom(sites_ - static_cast<std::size_t>(prev + 1), r + 1) - binom(sites_ - static_cast<std::size_t>(c), r + 1);
        prev = c;
    }
    return rank;
}

FockBasis enumerate_basis(std::size_t sites, int excitations) { return FockBasis(sites, excitations); }

namespace {

/// Pair couplings J_z / r^p within the label cutoff, as a dense-free list per compact site.
struct PairTable {
    std::vector<std::vector<std::pair<int, double>>> partners;
};

PairTable interaction_pairs(const HamiltonianTerms& terms, const InteractionSpec& in)
{
    const SiteTable& t = *terms.table;
    PairTable pt;
    pt.partners.resize(terms.dim());
    if (in.jz == 0.0)
        return pt;
    const double a = t.spacing();
    const double cut2 = double(in.cutoff_range) * in.cutoff_range;
    for (std::size_t c = 0; c < terms.dim(); ++c) {
        const Label& lc = t.label(terms.site(c));
        for (std::size_t e = c + 1; e < terms.dim(); ++e) {
            const Label& le = t.label(terms.site(e));
            double d2 = 0.0;
            for (int k = 0; k < 3; ++k)
                d2 += double(lc[k] - le[k]) * (lc[k] - le[k]);
            if (d2 > cut2)
                continue;
            const double r = distance(t.position(terms.site(c)), t.position(terms.site(e))) / a;
            const double v = in.jz / std::pow(r, in.power);
            pt.partners[c].emplace_back(static_cast<int>(e), v);
            pt.partners[e].emplace_back(static_cast<int>(c), v);
        }
    }
    return pt;
}

} // namespace

SparseReal build_mb_hamiltonian(const HamiltonianTerms& terms, const FockBasis& basis, const InteractionSpec& in)
{
    if (basis.sites() != terms.dim())
        throw InvalidSpec("build_mb_hamiltonian: basis and Hamiltonian have different site counts");
    if (!(in.jz >= 0.0) || !std::isfinite(in.jz))
        throw InvalidSpec("build_mb_hamiltonian: J_z must be finite and non-negative");
    if (in.cutoff_range < 1)
        throw InvalidSpec("build_mb_hamiltonian: cutoff_range must be >= 1");

    const PairTable pairs = interaction_pairs(terms, in);
    std::vector<double> single_offset(terms.dim(), 0.0);
    double constant = 0.0;
    if (in.literal_sigma_z) {
        for (std::size_t c = 0; c < terms.dim(); ++c)
            for (const auto& [e, v] : pairs.partners[c]) {
                single_offset[c] += v;
                if (static_cast<std::size_t>(e) > c)
                    constant += v;
            }
    }
    constexpr double pair_factor = 4.0;  // cross term of (2n_i - 1)(2n_j - 1)

    const int nu = basis.excitations();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(basis.size() * static_cast<std::size_t>(nu) * 4);
    std::vector<int> occ(static_cast<std::size_t>(nu)), next(static_cast<std::size_t>(nu));
    const auto& hop = terms.hopping;
    for (std::size_t s = 0; s < basis.size(); ++s) {
        const auto o = basis.occupation(s);
        std::copy(o.begin(), o.end(), occ.begin());
        double diag = constant;
        for (int i = 0; i < nu; ++i) {
            const int n = occ[static_cast<std::size_t>(i)];
            diag += terms.diagonal[n] - 2.0 * single_offset[static_cast<std::size_t>(n)];
            for (int j = i + 1; j < nu; ++j) {
                const int m = occ[static_cast<std::size_t>(j)];
                for (const auto& [e, v] : pairs.partners[static_cast<std::size_t>(n)])
                    if (e == m)
                        diag += pair_factor * v;
            }
        }
        trip.emplace_back(static_cast<int>(s), static_cast<int>(s), diag);

        for (int i = 0; i < nu; ++i) {
            const int n = occ[static_cast<std::size_t>(i)];
            for (SparseReal::InnerIterator it(hop, n); it; ++it) {
                const int m = static_cast<int>(it.col());
                if (std::find(occ.begin(), occ.end(), m) != occ.end())
                    continue;  // hard-core: target occupied
                next = occ;
                next[static_cast<std::size_t>(i)] = m;
                std::sort(next.begin(), next.end());
                trip.emplace_back(static_cast<int>(s), static_cast<int>(basis.index_of(next)), -it.value());
            }
        }
    }
    SparseReal h(static_cast<Eigen::Index>(basis.size()), static_cast<Eigen::Index>(basis.size()));
    h.setFromTriplets(trip.begin(), trip.end());
    h.makeCompressed();
    return h;
}

ManyBodyState symmetric_initial_state(const SpinWaveState& psi, std::shared_ptr<const FockBasis> basis)
{
    if (static_cast<std::size_t>(psi.amplitudes.size()) != basis->sites())
        throw InvalidSpec("symmetric_initial_state: basis and state have different site counts");
    const long nonzero = (psi.amplitudes.array().abs() > 0.0).count();
    if (nonzero < basis->excitations())
        throw DegenerateInput("symmetric_initial_state: fewer occupied sites than excitations");
    ManyBodyState out;
    out.basis = basis;
    out.amplitudes.resize(static_cast<Eigen::Index>(basis->size()));
    for (std::size_t s = 0; s < basis->size(); ++s) {
        std::complex<double> a = 1.0;
        for (int n : basis->occupation(s))
            a *= psi.amplitudes[n];
        out.amplitudes[static_cast<Eigen::Index>(s)] = a;
    }
    const double norm = out.amplitudes.norm();
    if (!(norm > 0.0))
        throw DegenerateInput("symmetric_initial_state: hard-core projection vanishes");
    out.amplitudes /= norm;
    out.time = psi.time;
    return out;
}

ManyBodyState evolve_mb(const SparseReal& h, const ManyBodyState& state, double dt, double tol)
{
    if (h.rows() != state.amplitudes.size())
        throw InvalidSpec("evolve_mb: operator and state dimensions differ");
    ManyBodyState out = state;
    ChebyshevPropagator prop(h, tol);
    prop.step(out.amplitudes, dt);
    out.time += dt;
    return out;
}

std::vector<double> density_profile(const ManyBodyState& state)
{
    const FockBasis& b = *state.basis;
    std::vector<double> p(b.sites(), 0.0);
    for (std::size_t s = 0; s < b.size(); ++s) {
        const double w = std::norm(state.amplitudes[static_cast<Eigen::Index>(s)]);
        for (int n : b.occupation(s))
            p[static_cast<std::size_t>(n)] += w;
    }
    return p;
}

std::vector<double> pair_distance_histogram(const ManyBodyState& state, const HamiltonianTerms& terms)
{
    const FockBasis& b = *state.basis;
    const int nu = b.excitations();
    const SiteTable& t = *terms.table;
    std::vector<double> hist;
    if (nu < 2)
        return hist;
    const double pairs = nu * (nu - 1) / 2.0;
    for (std::size_t s = 0; s < b.size(); ++s) {
        const double w = std::norm(state.amplitudes[static_cast<Eigen::Index>(s)]);
        const auto o = b.occupation(s);
        for (int i = 0; i < nu; ++i)
            for (int j = i + 1; j < nu; ++j) {
                const Label& li = t.label(terms.site(static_cast<std::size_t>(o[static_cast<std::size_t>(i)])));
                const Label& lj = t.label(terms.site(static_cast<std::size_t>(o[static_cast<std::size_t>(j)])));
                double d2 = 0.0;
                for (int k = 0; k < 3; ++k)
                    d2 += double(li[k] - lj[k]) * (li[k] - lj[k]);
                const std::size_t d = static_cast<std::size_t>(std::lround(std::sqrt(d2)));
                if (hist.size() <= d)
                    hist.resize(d + 1, 0.0);
                hist[d] += w / pairs;
            }
    }
    return hist;
}

void write_density_csv(const std::filesystem::path& path, const std::vector<double>& times,
                       const std::vector<std::vector<double>>& profiles, const HamiltonianTerms& terms, int excitations)
{
    const SiteTable& t = *terms.table;
    std::vector<std::string> header{"t[1/J]"};
    const char* axes[] = {"x", "y", "z"};
    for (int d = 0; d < t.dimension(); ++d)
        header.push_back(std::string("label_") + axes[d] + "[1]");
    header.insert(header.end(), {"p_n[1]", "nu[1]"});
    CsvWriter csv(path, header);
    for (std::size_t k = 0; k < times.size(); ++k)
        for (std::size_t c = 0; c < profiles[k].size(); ++c) {
            csv << times[k];
            for (int d = 0; d < t.dimension(); ++d)
                csv << t.label(terms.site(c))[d];
            csv << profiles[k][c] << excitations;
            csv.end_row();
        }
}

} // namespace spinlens::manybody
