#include "run_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "spinlens/rydberg.hpp"

namespace spinlens::cli {

using nlohmann::json;

ConfigError::ConfigError(const std::string& what, std::size_t line_, std::size_t column_)
    : InvalidSpec(line_ ? what + " (line " + std::to_string(line_) + ", column " + std::to_string(column_) + ")" : what),
      line(line_), column(column_)
{
}

const std::vector<std::string>& scenario_names()
{
    static const std::vector<std::string> names{"thick1d",    "thin1d",    "cascade",      "scaling_fit",
                                                "multifocal2d", "longrange_alpha", "nonlinear", "holes",
                                                "displacement", "breakdown", "rydberg_tables"};
    return names;
}

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!obj.is_object())
        throw ConfigError("'" + where + "' must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : obj.items())
        if (!ok.count(k))
            throw ConfigError("unknown key '" + k + "' in '" + where + "'");
}

template <class T>
T get(const json& obj, const std::string& where, const char* key)
{
    if (!obj.contains(key))
        throw ConfigError("missing key '" + std::string(key) + "' in '" + where + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("key '" + std::string(key) + "' in '" + where + "' has the wrong type");
    }
}

template <class T>
T get_or(const json& obj, const std::string& where, const char* key, T fallback)
{
    return obj.contains(key) ? get<T>(obj, where, key) : fallback;
}

Vec3 vec3(const json& obj, const std::string& where, const char* key)
{
    const auto v = get<std::vector<double>>(obj, where, key);
    if (v.empty() || v.size() > 3)
        throw ConfigError("'" + std::string(key) + "' in '" + where + "' needs 1 to 3 components");
    Vec3 out{};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
}

double positive(double x, const std::string& what)
{
    if (!(x > 0.0) || !std::isfinite(x))
        throw ConfigError(what + " must be positive");
    return x;
}

lens::PhaseProfile profile_of(const std::string& s, const std::string& where)
{
    if (s == "parabolic")
        return lens::PhaseProfile::Parabolic;
    if (s == "corrected")
        return lens::PhaseProfile::Corrected;
    throw ConfigError("profile in '" + where + "' must be 'parabolic' or 'corrected'");
}

lens::LensKind kind_of(const std::string& s, const std::string& where)
{
    if (s == "thick")
        return lens::LensKind::Thick;
    if (s == "thin")
        return lens::LensKind::Thin;
    throw ConfigError("kind in '" + where + "' must be 'thick' or 'thin'");
}

CouplingModel parse_coupling(const json& c)
{
    const std::string w = "lattice.coupling";
    const auto kind = get<std::string>(c, w, "kind");
    if (kind == "nearest_neighbor") {
        check_keys(c, w, {"kind", "hopping"});
        return NearestNeighbor{get_or(c, w, "hopping", 1.0)};
    }
    if (kind == "power_law") {
        check_keys(c, w, {"kind", "j0", "alpha", "cutoff_range"});
        return PowerLaw{get_or(c, w, "j0", 1.0), get<double>(c, w, "alpha"), get_or(c, w, "cutoff_range", 20)};
    }
    if (kind == "rydberg") {
        check_keys(c, w, {"kind", "rabi", "detuning", "c12", "xi", "cutoff_range"});
        rydberg::DressingParams p;
        p.rabi = get<double>(c, w, "rabi");
        p.detuning = get<double>(c, w, "detuning");
        p.c12 = get_or(c, w, "c12", 1.0);
        p.xi = get<double>(c, w, "xi");
        return RydbergDressed{p, get_or(c, w, "cutoff_range", 20)};
    }
    if (kind == "rydberg_unit") {
        check_keys(c, w, {"kind", "xi", "rabi_over_detuning", "cutoff_range"});
        return RydbergDressed{rydberg::params_for_unit_hopping(get<double>(c, w, "xi"), 1.0, 1.0,
                                                               get_or(c, w, "rabi_over_detuning", 0.5)),
                              get_or(c, w, "cutoff_range", 20)};
    }
    throw ConfigError("unknown coupling kind '" + kind + "'");
}

LatticeConfig parse_lattice(const json& j, bool need_extents)
{
    const std::string w = "lattice";
    check_keys(j, w, {"dimension", "extents", "spacing", "coupling"});
    LatticeConfig l;
    l.dimension = get_or(j, w, "dimension", 1);
    if (l.dimension < 1 || l.dimension > 3)
        throw ConfigError("lattice.dimension must be 1, 2 or 3");
    if (need_extents || j.contains("extents")) {
        const auto e = get<std::vector<int>>(j, w, "extents");
        if (int(e.size()) != l.dimension)
            throw ConfigError("lattice.extents needs one entry per dimension");
        for (int d = 0; d < l.dimension; ++d) {
            if (e[std::size_t(d)] < 1)
                throw ConfigError("lattice.extents must be positive");
            l.extents[std::size_t(d)] = e[std::size_t(d)];
        }
    }
    l.spacing = positive(get_or(j, w, "spacing", 1.0), "lattice.spacing");
    if (j.contains("coupling"))
        l.model = parse_coupling(j.at("coupling"));
    try {
        validate(l.model);
    } catch (const InvalidSpec& e) {
        throw ConfigError(std::string("lattice.coupling: ") + e.what());
    }
    return l;
}

PacketConfig parse_packet(const json& j)
{
    const std::string w = "packet";
    check_keys(j, w, {"sigma0", "center", "k0"});
    PacketConfig p;
    p.sigma0 = positive(get<double>(j, w, "sigma0"), "packet.sigma0");
    if (j.contains("center"))
        p.center = vec3(j, w, "center");
    if (j.contains("k0"))
        p.k0 = vec3(j, w, "k0");
    return p;
}

lens::LensDesign parse_lens(const json& j, const Vec3& default_focus)
{
    const std::string w = "lens";
    const auto kind = get<std::string>(j, w, "kind");
    if (kind == "thick") {
        check_keys(j, w, {"kind", "coeffs", "focus"});
        return lens::ThickPolynomial{get<std::vector<double>>(j, w, "coeffs"),
                                     j.contains("focus") ? vec3(j, w, "focus") : default_focus};
    }
    if (kind == "thin") {
        check_keys(j, w, {"kind", "phi0", "profile", "higher", "focus"});
        lens::ThinPulse t;
        t.phi0 = get<double>(j, w, "phi0");
        t.focus = j.contains("focus") ? vec3(j, w, "focus") : default_focus;
        t.profile = profile_of(get_or<std::string>(j, w, "profile", "parabolic"), w);
        t.higher = get_or<std::vector<double>>(j, w, "higher", {});
        return t;
    }
    if (kind == "multifocal") {
        check_keys(j, w, {"kind", "regions"});
        lens::Multifocal m;
        if (!j.contains("regions") || !j.at("regions").is_array())
            throw ConfigError("lens.regions must be an array");
        for (const auto& r : j.at("regions")) {
            check_keys(r, "lens.regions[]", {"focus", "coeffs"});
            m.regions.push_back({vec3(r, "lens.regions[]", "focus"), get<std::vector<double>>(r, "lens.regions[]", "coeffs")});
        }
        return m;
    }
    throw ConfigError("unknown lens kind '" + kind + "'");
}

OptimizeConfig parse_optimize(const json& j)
{
    const std::string w = "optimize";
    check_keys(j, w, {"kind", "order", "profile", "strength_lo", "strength_hi", "points_per_decade", "time_samples",
                      "time_lo", "time_hi", "sweeps"});
    OptimizeConfig o;
    o.kind = kind_of(get_or<std::string>(j, w, "kind", "thick"), w);
    o.order = get_or(j, w, "order", 2);
    o.profile = profile_of(get_or<std::string>(j, w, "profile", "parabolic"), w);
    o.strength_lo = get_or(j, w, "strength_lo", 0.0);
    o.strength_hi = get_or(j, w, "strength_hi", 0.0);
    o.points_per_decade = get_or(j, w, "points_per_decade", 8);
    o.time_samples = get_or(j, w, "time_samples", 200);
    o.time_lo = get_or(j, w, "time_lo", 0.5);
    o.time_hi = get_or(j, w, "time_hi", 1.5);
    o.sweeps = get_or(j, w, "sweeps", 2);
    if (o.order != 2 && o.order != 4 && o.order != 6 && o.order != 8)
        throw ConfigError("optimize.order must be 2, 4, 6 or 8");
    return o;
}

EvolutionConfig parse_evolution(const json& j)
{
    const std::string w = "evolution";
    check_keys(j, w, {"t_end", "samples", "tol", "wigner"});
    EvolutionConfig e;
    e.t_end = positive(get<double>(j, w, "t_end"), "evolution.t_end");
    e.samples = get_or(j, w, "samples", 200);
    e.tol = get_or(j, w, "tol", 1e-10);
    e.wigner = get_or(j, w, "wigner", false);
    if (e.samples < 1)
        throw ConfigError("evolution.samples must be >= 1");
    return e;
}

std::vector<double> positive_list(const json& j, const std::string& w, const char* key)
{
    auto v = get<std::vector<double>>(j, w, key);
    if (v.empty())
        throw ConfigError("'" + std::string(key) + "' in '" + w + "' must not be empty");
    for (double x : v)
        positive(x, w + "." + key + " entries");
    return v;
}

void require(const RunConfig& c, bool present, const char* section)
{
    if (!present)
        throw ConfigError("scenario '" + c.scenario + "' needs a '" + section + "' section");
}

} // namespace

RunConfig parse_config(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("config is not valid JSON", line, col);
    }
    if (j.is_object() && j.contains("manifest_version")) {
        if (!j.contains("config"))
            throw ConfigError("manifest has no recorded config");
        j = j.at("config");
    }

    check_keys(j, "config", {"scenario", "master_seed", "output", "lattice", "packet", "lens", "optimize", "evolution",
                             "cascade", "scaling", "longrange", "nonlinear", "disorder", "breakdown", "rydberg"});
    RunConfig c;
    c.raw = j;
    c.scenario = get<std::string>(j, "config", "scenario");
    const auto& names = scenario_names();
    if (std::find(names.begin(), names.end(), c.scenario) == names.end())
        throw ConfigError("unknown scenario '" + c.scenario + "'");
    c.master_seed = get_or<std::uint64_t>(j, "config", "master_seed", 0);
    c.output = get_or<std::string>(j, "config", "output", "");

    const bool sized = c.scenario != "scaling_fit" && c.scenario != "breakdown";
    if (j.contains("lattice"))
        c.lattice = parse_lattice(j.at("lattice"), sized);
    if (j.contains("packet"))
        c.packet = parse_packet(j.at("packet"));
    if (j.contains("lens")) {
        require(c, c.lattice.has_value(), "lattice");
        const SiteTable probe = build_lattice(c.lattice->dimension, c.lattice->extents, c.lattice->spacing);
        c.lens = parse_lens(j.at("lens"), probe.center_label());
        try {
            lens::validate(*c.lens, c.lattice->dimension);
        } catch (const InvalidSpec& e) {
            throw ConfigError(std::string("lens: ") + e.what());
        }
    }
    if (j.contains("optimize"))
        c.optimize = parse_optimize(j.at("optimize"));
    if (j.contains("evolution"))
        c.evolution = parse_evolution(j.at("evolution"));
    if (j.contains("cascade")) {
        const auto& s = j.at("cascade");
        check_keys(s, "cascade", {"order", "profile"});
        c.cascade = CascadeConfig{get_or(s, "cascade", "order", 2),
                                  profile_of(get_or<std::string>(s, "cascade", "profile", "parabolic"), "cascade")};
    }
    if (j.contains("scaling")) {
        const auto& s = j.at("scaling");
        const std::string w = "scaling";
        check_keys(s, w, {"sigma0", "lenses", "length_per_sigma", "min_length"});
        ScalingConfig sc;
        sc.sigma0 = positive_list(s, w, "sigma0");
        if (!s.contains("lenses") || !s.at("lenses").is_array() || s.at("lenses").empty())
            throw ConfigError("scaling.lenses must be a non-empty array");
        for (const auto& l : s.at("lenses")) {
            check_keys(l, "scaling.lenses[]", {"kind", "order", "profile"});
            sc.lenses.push_back({kind_of(get<std::string>(l, "scaling.lenses[]", "kind"), "scaling.lenses[]"),
                                 get_or(l, "scaling.lenses[]", "order", 2),
                                 profile_of(get_or<std::string>(l, "scaling.lenses[]", "profile", "parabolic"), "scaling.lenses[]")});
        }
        sc.length_per_sigma = get_or(s, w, "length_per_sigma", 10.0);
        sc.min_length = get_or(s, w, "min_length", 160);
        c.scaling = sc;
    }
    if (j.contains("longrange")) {
        const auto& s = j.at("longrange");
        const std::string w = "longrange";
        check_keys(s, w, {"alphas", "include_nearest_neighbor", "cutoff_range", "dispersion_samples"});
        c.longrange = LongrangeConfig{positive_list(s, w, "alphas"), get_or(s, w, "include_nearest_neighbor", true),
                                      get_or(s, w, "cutoff_range", 20), get_or(s, w, "dispersion_samples", 256)};
    }
    if (j.contains("nonlinear")) {
        const auto& s = j.at("nonlinear");
        const std::string w = "nonlinear";
        check_keys(s, w, {"jz", "excitations", "power", "cutoff_range", "literal_sigma_z"});
        NonlinearConfig n;
        n.interaction.jz = get<double>(s, w, "jz");
        n.interaction.power = get_or(s, w, "power", 6.0);
        n.interaction.cutoff_range = get_or(s, w, "cutoff_range", 20);
        n.interaction.literal_sigma_z = get_or(s, w, "literal_sigma_z", false);
        n.excitations = get_or(s, w, "excitations", 2);
        c.nonlinear = n;
    }
    if (j.contains("disorder")) {
        const auto& s = j.at("disorder");
        const std::string w = "disorder";
        check_keys(s, w, {"holes", "delta", "realizations", "radius", "broadening_k"});
        DisorderConfig d;
        d.holes = get_or<std::size_t>(s, w, "holes", 0);
        d.delta = get_or(s, w, "delta", 0.0);
        d.realizations = get_or<std::size_t>(s, w, "realizations", 1);
        d.radius = get_or(s, w, "radius", 3.0);
        d.broadening_k = get_or<std::vector<double>>(s, w, "broadening_k", {});
        if (d.realizations < 1)
            throw ConfigError("disorder.realizations must be >= 1");
        if (d.delta < 0)
            throw ConfigError("disorder.delta must be >= 0");
        c.disorder = d;
    }
    if (j.contains("breakdown")) {
        const auto& s = j.at("breakdown");
        const std::string w = "breakdown";
        check_keys(s, w, {"sigma0", "deltas", "realizations", "length_per_sigma", "threshold"});
        BreakdownConfig b;
        b.sigma0 = positive_list(s, w, "sigma0");
        b.deltas = get<std::vector<double>>(s, w, "deltas");
        b.realizations = get_or<std::size_t>(s, w, "realizations", 100);
        b.length_per_sigma = get_or(s, w, "length_per_sigma", 10.0);
        b.threshold = get_or(s, w, "threshold", 2.0);
        c.breakdown = b;
    }
    if (j.contains("rydberg")) {
        const auto& s = j.at("rydberg");
        const std::string w = "rydberg";
        check_keys(s, w, {"xi", "r_max", "samples", "table", "n", "rabi_mhz", "detuning_mhz", "lifetime_us", "focal_time"});
        RydbergConfig r;
        r.xi = get_or<std::vector<double>>(s, w, "xi", {0.5, 0.7, 0.9});
        r.r_max = get_or(s, w, "r_max", 3.0);
        r.samples = get_or(s, w, "samples", 301);
        r.table = get_or<std::string>(s, w, "table", "");
        r.n = get_or(s, w, "n", 60.0);
        r.rabi_mhz = get_or(s, w, "rabi_mhz", 10.0);
        r.detuning_mhz = get_or(s, w, "detuning_mhz", -20.0);
        r.lifetime_us = get_or(s, w, "lifetime_us", 0.0);
        r.focal_time = get_or(s, w, "focal_time", 0.0);
        c.rydberg = r;
    }

    // Per-scenario required sections.
    const auto& s = c.scenario;
    if (s != "rydberg_tables")
        require(c, c.lattice.has_value(), "lattice");
    if (s == "thick1d" || s == "thin1d" || s == "cascade" || s == "multifocal2d" || s == "longrange_alpha" ||
        s == "nonlinear" || s == "holes" || s == "displacement")
        require(c, c.packet.has_value(), "packet");
    if (s == "thick1d" || s == "thin1d" || s == "nonlinear" || s == "holes" || s == "displacement") {
        if (!c.lens && !c.optimize)
            throw ConfigError("scenario '" + s + "' needs a 'lens' or an 'optimize' section");
    }
    if (s == "multifocal2d" || (c.lens && !c.optimize && (s == "thick1d" || s == "thin1d" || s == "holes" || s == "displacement")))
        require(c, c.evolution.has_value(), "evolution");
    if (s == "thick1d" && c.lens && !std::holds_alternative<lens::ThickPolynomial>(*c.lens))
        throw ConfigError("thick1d needs a thick lens");
    if (s == "thin1d" && c.lens && !std::holds_alternative<lens::ThinPulse>(*c.lens))
        throw ConfigError("thin1d needs a thin lens");
    if (s == "multifocal2d") {
        require(c, c.lens.has_value(), "lens");
        if (!std::holds_alternative<lens::Multifocal>(*c.lens))
            throw ConfigError("multifocal2d needs a multifocal lens");
    }
    if (s == "cascade")
        require(c, c.optimize.has_value(), "optimize");
    if (s == "scaling_fit")
        require(c, c.scaling.has_value(), "scaling");
    if (s == "longrange_alpha")
        require(c, c.longrange.has_value(), "longrange");
    if (s == "nonlinear")
        require(c, c.nonlinear.has_value(), "nonlinear");
    if (s == "holes" || s == "displacement")
        require(c, c.disorder.has_value(), "disorder");
    if (s == "breakdown")
        require(c, c.breakdown.has_value(), "breakdown");
    if (s == "rydberg_tables")
        require(c, c.rydberg.has_value(), "rydberg");
    if ((s == "thick1d" || s == "thin1d" || s == "cascade" || s == "scaling_fit" || s == "longrange_alpha" ||
         s == "nonlinear" || s == "breakdown") &&
        c.lattice && c.lattice->dimension != 1)
        throw ConfigError("scenario '" + s + "' runs on a 1D lattice");
    if (s == "multifocal2d" && c.lattice->dimension != 2)
        throw ConfigError("multifocal2d runs on a 2D lattice");
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::uint64_t fnv1a(const std::string& bytes)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::shared_ptr<const SiteTable> make_table(const LatticeConfig& l)
{
    return std::make_shared<const SiteTable>(build_lattice(l.dimension, l.extents, l.spacing));
}

Vec3 packet_center(const RunConfig& c, const SiteTable& table)
{
    return c.packet && c.packet->center ? *c.packet->center : table.center_label();
}

std::vector<std::string> lint(const RunConfig& c)
{
    std::vector<std::string> w;
    char buf[256];
    const double a = c.lattice ? c.lattice->spacing : 1.0;
    double hop = 1.0;
    if (c.lattice) {
        if (const auto* nn = std::get_if<NearestNeighbor>(&c.lattice->model))
            hop = nn->hopping;
        else if (const auto* pl = std::get_if<PowerLaw>(&c.lattice->model))
            hop = pl->j0;
        else if (const auto* ry = std::get_if<RydbergDressed>(&c.lattice->model)) {
            const double r = ry->dressing.validity_ratio();
            if (r > 0.5) {
                std::snprintf(buf, sizeof buf, "Omega/|Delta| = %.3g exceeds 0.5; the dressing picture is unreliable", r);
                w.emplace_back(buf);
            }
            hop = 0.5 * std::abs(rydberg::dressed_couplings(ry->dressing, a).w_sg);
        }
    }
    if (c.packet && c.lattice) {
        const double s0 = c.packet->sigma0;
        const auto th = lens::thresholds(s0, 0, 0, hop, a);
        if (c.lens) {
            if (const auto* t = std::get_if<lens::ThickPolynomial>(&*c.lens); t && !t->coeffs.empty() && t->coeffs[0] > th.v_bo) {
                std::snprintf(buf, sizeof buf, "v0 = %.3g exceeds v_BO = %.3g: Bloch oscillations will spoil focusing",
                              t->coeffs[0], th.v_bo);
                w.emplace_back(buf);
            }
            if (const auto* t = std::get_if<lens::ThinPulse>(&*c.lens); t && t->phi0 > th.phi_bo) {
                std::snprintf(buf, sizeof buf, "phi0 = %.3g exceeds phi_BO = %.3g: kicks beyond the band edge", t->phi0,
                              th.phi_bo);
                w.emplace_back(buf);
            }
            if (const auto* m = std::get_if<lens::Multifocal>(&*c.lens))
                for (const auto& r : m->regions)
                    if (!r.coeffs.empty() && r.coeffs[0] > th.v_bo) {
                        std::snprintf(buf, sizeof buf, "region v0 = %.3g exceeds v_BO = %.3g", r.coeffs[0], th.v_bo);
                        w.emplace_back(buf);
                    }
        }
        const SiteTable probe = build_lattice(c.lattice->dimension, c.lattice->extents, a);
        const Vec3 centre = packet_center(c, probe);
        double edge = 1e300;
        for (int d = 0; d < c.lattice->dimension; ++d) {
            const double lo = centre[std::size_t(d)] * a;
            const double hi = (c.lattice->extents[std::size_t(d)] - 1 - centre[std::size_t(d)]) * a;
            edge = std::min({edge, lo, hi});
        }
        if (edge < 5.0 * s0) {
            std::snprintf(buf, sizeof buf, "packet centre lies %.3g from a boundary, closer than 5 sigma0 = %.3g", edge, 5 * s0);
            w.emplace_back(buf);
        }
    }
    return w;
}

} // namespace spinlens::cli
