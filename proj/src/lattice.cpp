#include "spinlens/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spinlens/error.hpp"

namespace spinlens {

double distance(const Vec3& a, const Vec3& b)
{
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

std::size_t SiteTable::active_count() const
{
    return static_cast<std::size_t>(std::count(active_.begin(), active_.end(), std::uint8_t{1}));
}

Vec3 SiteTable::lattice_point(std::size_t i) const
{
    const Label& l = labels_[i];
    return {spacing_ * l[0], spacing_ * l[1], spacing_ * l[2]};
}

long SiteTable::index_of(const Label& label) const
{
    long idx = 0;
    for (int d = 0; d < 3; ++d) {
        if (label[d] < 0 || label[d] >= extents_[d])
            return -1;
        idx = idx * extents_[d] + label[d];
    }
    return idx;
}

Vec3 SiteTable::center_label() const
{
    Vec3 c{};
    for (int d = 0; d < 3; ++d)
        c[d] = 0.5 * (extents_[d] - 1);
    return c;
}

SiteTable build_lattice(int dimension, const Label& extents, double spacing)
{
    if (dimension < 1 || dimension > 3)
        throw InvalidSpec("build_lattice: dimension must be 1, 2 or 3");
    if (!(spacing > 0.0) || !std::isfinite(spacing))
        throw InvalidSpec("build_lattice: spacing must be positive");
    for (int d = 0; d < 3; ++d) {
        if (extents[d] < 1)
            throw InvalidSpec("build_lattice: every extent must be >= 1");
        if (d >= dimension && extents[d] != 1)
            throw InvalidSpec("build_lattice: extents beyond the lattice dimension must be 1");
    }

    SiteTable t;
    t.dimension_ = dimension;
    t.extents_ = extents;
    t.spacing_ = spacing;
    const std::size_t n = static_cast<std::size_t>(extents[0]) * extents[1] * extents[2];
    t.positions_.reserve(n);
    t.labels_.reserve(n);
    for (int i = 0; i < extents[0]; ++i)
        for (int j = 0; j < extents[1]; ++j)
            for (int k = 0; k < extents[2]; ++k) {
                t.labels_.push_back({i, j, k});
                t.positions_.push_back({spacing * i, spacing * j, spacing * k});
            }
    t.active_.assign(n, 1);
    return t;
}

SiteTable punch_holes(const SiteTable& table, std::span<const std::size_t> holes)
{
    SiteTable t = table;
    for (std::size_t h : holes) {
        if (h >= t.size())
            throw InvalidSpec("punch_holes: index " + std::to_string(h) + " out of range");
        if (!t.active_[h])
            throw InvalidSpec("punch_holes: site " + std::to_string(h) + " is already a hole");
        t.active_[h] = 0;
    }
    return t;
}

SiteTable displace_sites(const SiteTable& table, std::span<const Vec3> displacements)
{
    if (displacements.size() != table.size())
        throw InvalidSpec("displace_sites: expected " + std::to_string(table.size()) +
                          " displacement vectors, got " + std::to_string(displacements.size()));
    SiteTable t = table;
    for (std::size_t i = 0; i < t.size(); ++i) {
        for (int d = 0; d < 3; ++d) {
            if (d >= t.dimension_ && displacements[i][d] != 0.0)
                throw InvalidSpec("displace_sites: displacement along an axis beyond the lattice dimension");
            t.positions_[i][d] += displacements[i][d];
        }
    }
    return t;
}

void validate(const CouplingModel& model)
{
    std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, NearestNeighbor>) {
                if (!(m.hopping > 0.0))
                    throw InvalidSpec("NearestNeighbor: J must be positive");
            } else if constexpr (std::is_same_v<T, PowerLaw>) {
                if (!(m.j0 > 0.0))
                    throw InvalidSpec("PowerLaw: J0 must be positive");
                if (!(m.alpha > 0.0))
                    throw InvalidSpec("PowerLaw: alpha must be positive");
                if (m.cutoff_range < 1)
                    throw InvalidSpec("PowerLaw: cutoff_range must be >= 1");
            } else {
                m.dressing.validate();
                if (m.cutoff_range < 1)
                    throw InvalidSpec("RydbergDressed: cutoff_range must be >= 1");
            }
        },
        model);
}

std::string describe(const CouplingModel& model)
{
    std::ostringstream os;
    std::visit(
        [&os](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, NearestNeighbor>)
                os << "NearestNeighbor(J=" << m.hopping << ")";
            else if constexpr (std::is_same_v<T, PowerLaw>)
                os << "PowerLaw(J0=" << m.j0 << ", alpha=" << m.alpha << ", cutoff=" << m.cutoff_range << ")";
            else
                os << "RydbergDressed(Omega=" << m.dressing.rabi << ", Delta=" << m.dressing.detuning
                   << ", c12=" << m.dressing.c12 << ", xi=" << m.dressing.xi << ", cutoff=" << m.cutoff_range
                   << ")";
        },
        model);
    return os.str();
}

namespace {

/// Label offsets with 0 < |offset| <= range, one representative per +/- pair.
std::vector<Label> half_offsets(int dimension, int range, bool manhattan_one)
{
    std::vector<Label> out;
    const int ry = dimension >= 2 ? range : 0;
    const int rz = dimension >= 3 ? range : 0;
    for (int i = -range; i <= range; ++i)
        for (int j = -ry; j <= ry; ++j)
            for (int k = -rz; k <= rz; ++k) {
                const Label o{i, j, k};
                if (o < Label{0, 0, 0} || o == Label{0, 0, 0})
                    continue;  // keep the lexicographically positive half
                if (manhattan_one) {
                    if (std::abs(i) + std::abs(j) + std::abs(k) != 1)
                        continue;
                } else if (i * i + j * j + k * k > range * range) {
                    continue;
                }
                out.push_back(o);
            }
    return out;
}

} // namespace

HamiltonianTerms build_couplings(const SiteTable& table, const CouplingModel& model,
                                 std::span<const double> lens_diagonal)
{
    return build_couplings(std::make_shared<const SiteTable>(table), model, lens_diagonal);
}

HamiltonianTerms build_couplings(std::shared_ptr<const SiteTable> table_ptr, const CouplingModel& model,
                                 std::span<const double> lens_diagonal)
{
    validate(model);
    const SiteTable& table = *table_ptr;
    if (lens_diagonal.size() != table.size())
        throw InvalidSpec("build_couplings: lens diagonal must have one entry per site");

    HamiltonianTerms h;
    h.table = table_ptr;
    h.model = model;
    h.compact_index.assign(table.size(), -1);
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (!table.active(i))
            continue;
        if (!std::isfinite(lens_diagonal[i]))
            throw InvalidSpec("build_couplings: non-finite diagonal at site " + std::to_string(i));
        h.compact_index[i] = static_cast<long>(h.active_sites.size());
        h.active_sites.push_back(i);
    }
    const std::size_t n = h.active_sites.size();
    h.diagonal.resize(static_cast<Eigen::Index>(n));
    h.coupling_shift = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t c = 0; c < n; ++c)
        h.diagonal[static_cast<Eigen::Index>(c)] = lens_diagonal[h.active_sites[c]];

    const bool nn = std::holds_alternative<NearestNeighbor>(model);
    int range = 1;
    if (const auto* p = std::get_if<PowerLaw>(&model))
        range = p->cutoff_range;
    if (const auto* r = std::get_if<RydbergDressed>(&model))
        range = r->cutoff_range;
    const auto offsets = half_offsets(table.dimension(), range, nn);

    std::vector<Eigen::Triplet<double>> triplets;
    const double a = table.spacing();
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t i = h.active_sites[c];
        const Label& li = table.label(i);
        for (const Label& o : offsets) {
            const long j = table.index_of({li[0] + o[0], li[1] + o[1], li[2] + o[2]});
            if (j < 0 || !table.active(static_cast<std::size_t>(j)))
                continue;
            const long cj = h.compact_index[static_cast<std::size_t>(j)];
            const double r = distance(table.position(i), table.position(static_cast<std::size_t>(j)));

            double amp = 0.0;
            if (const auto* m = std::get_if<NearestNeighbor>(&model)) {
                amp = m->hopping;
            } else if (const auto* p = std::get_if<PowerLaw>(&model)) {
                amp = p->j0 / std::pow(r / a, p->alpha);
            } else {
                const auto& d = std::get<RydbergDressed>(model).dressing;
                const auto cpl = rydberg::dressed_couplings(d, r);
                // H = ... + (1/2) W_sg (flip-flop + h.c.)  =>  J_nm = -W_sg / 2.
                amp = -0.5 * cpl.w_sg;
                const double shift = cpl.v_sg - rydberg::asymptotic_v_sg(d);
                h.coupling_shift[static_cast<Eigen::Index>(c)] += shift;
                h.coupling_shift[cj] += shift;
            }
            if (amp != 0.0) {
                triplets.emplace_back(static_cast<int>(c), static_cast<int>(cj), amp);
                triplets.emplace_back(static_cast<int>(cj), static_cast<int>(c), amp);
            }
        }
    }
    h.hopping.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    h.hopping.setFromTriplets(triplets.begin(), triplets.end());
    h.hopping.makeCompressed();
    h.diagonal += h.coupling_shift;
    return h;
}

SparseReal HamiltonianTerms::matrix() const
{
    SparseReal m = -hopping;
    for (Eigen::Index i = 0; i < diagonal.size(); ++i)
        m.coeffRef(i, i) += diagonal[i];
    m.makeCompressed();
    return m;
}

HamiltonianTerms HamiltonianTerms::with_lens(const Eigen::VectorXd& lens_eps, std::string lens_name) const
{
    if (lens_eps.size() != diagonal.size())
        throw InvalidSpec("with_lens: size mismatch");
    HamiltonianTerms h = *this;
    h.diagonal = lens_eps + coupling_shift;
    h.lens = std::move(lens_name);
    return h;
}

HamiltonianTerms HamiltonianTerms::with_lens_sites(std::span<const double> lens_eps, std::string lens_name) const
{
    if (lens_eps.size() != table->size())
        throw InvalidSpec("with_lens_sites: expected one entry per site");
    Eigen::VectorXd compact(static_cast<Eigen::Index>(dim()));
    for (std::size_t c = 0; c < dim(); ++c)
        compact[static_cast<Eigen::Index>(c)] = lens_eps[active_sites[c]];
    return with_lens(compact, std::move(lens_name));
}

} // namespace spinlens
